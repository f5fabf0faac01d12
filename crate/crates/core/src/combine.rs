//! Two-threshold combination of the probabilistic and neural systems.
//!
//! The neural prediction is returned unless the neural confidence is below
//! `t_n` and the probabilistic confidence (its `score2`, natural log) is
//! above `t_p`. Changing the logarithm base of the probabilistic scores
//! rescales them, so `t_p` must be re-tuned along with it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prediction::{Predictions, ScoredPrediction, System};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinerConfig {
    pub t_n: f64,
    pub t_p: f64,
}

impl Default for CombinerConfig {
    fn default() -> Self {
        CombinerConfig { t_n: 0.65, t_p: 0.5 }
    }
}

impl CombinerConfig {
    pub fn new(t_n: f64, t_p: f64) -> Result<Self> {
        if !(t_n >= 0.0 && t_n <= 1.0) || t_p.is_nan() || t_p < 0.0 {
            return Err(Error::validation(format!(
                "thresholds out of range: t_n = {t_n}, t_p = {t_p}"
            )));
        }
        Ok(CombinerConfig { t_n, t_p })
    }
}

fn tagged(p: &ScoredPrediction) -> ScoredPrediction {
    ScoredPrediction {
        system: System::Combined,
        origin: Some(p.origin.unwrap_or(p.system)),
        source: None,
        ..p.clone()
    }
}

/// Applies the threshold rule to one cell.
pub fn combine(p: &ScoredPrediction, n: &ScoredPrediction, cfg: &CombinerConfig) -> Result<ScoredPrediction> {
    if p.language != n.language || p.feature != n.feature {
        return Err(Error::validation(format!(
            "cannot combine {}/{} with {}/{}",
            p.language, p.feature, n.language, n.feature
        )));
    }
    let use_prob = n.score < cfg.t_n && p.score > cfg.t_p && !p.fallback_used;
    Ok(tagged(if use_prob { p } else { n }))
}

/// Combines whatever is available: neural when it failed is replaced by
/// the probabilistic prediction, and `baseline` covers cells neither system
/// could predict.
pub fn combine_available(
    p: Option<&ScoredPrediction>,
    n: Option<&ScoredPrediction>,
    baseline: &ScoredPrediction,
    cfg: &CombinerConfig,
) -> Result<ScoredPrediction> {
    match (p, n) {
        (Some(p), Some(n)) => combine(p, n, cfg),
        (Some(p), None) => Ok(tagged(p)),
        (None, Some(n)) => Ok(tagged(n)),
        (None, None) => Ok(tagged(baseline)),
    }
}

/// Cell-wise combination over the cells of `baseline`, which must cover
/// every masked cell.
pub fn combine_all(
    prob: &Predictions,
    neural: &Predictions,
    baseline: &Predictions,
    cfg: &CombinerConfig,
) -> Result<Predictions> {
    baseline
        .iter()
        .map(|(k, b)| Ok((k.clone(), combine_available(prob.get(k), neural.get(k), b, cfg)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChoiceStats {
    /// Cells where both systems predicted and their values differ.
    pub differing: usize,
    /// Of those, cells where the probabilistic value was returned.
    pub prob_chosen: usize,
}

impl ChoiceStats {
    pub fn prob_fraction(&self) -> f64 {
        if self.differing == 0 {
            0.0
        } else {
            self.prob_chosen as f64 / self.differing as f64
        }
    }
}

/// How often the combination overrode the neural system where the two
/// disagree.
pub fn choice_stats(prob: &Predictions, neural: &Predictions, combined: &Predictions) -> ChoiceStats {
    let mut s = ChoiceStats::default();
    for (k, n) in neural {
        let (Some(p), Some(c)) = (prob.get(k), combined.get(k)) else {
            continue;
        };
        if p.value != n.value {
            s.differing += 1;
            if c.origin == Some(System::Probabilistic) {
                s.prob_chosen += 1;
            }
        }
    }
    s
}
