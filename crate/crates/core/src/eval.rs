//! Accuracy, the most-frequent-value baseline and the two-system
//! disagreement analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::prediction::{Predictions, ScoredPrediction, System};

/// Values compare equal after collapsing whitespace runs and trimming.
pub fn normalize_value(v: &str) -> String {
    v.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True values of the masked cells, keyed by `(wals_code, feature)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldStandard {
    cells: BTreeMap<(String, String), String>,
}

impl GoldStandard {
    /// Pairs a fully known dataset with its masked copy. Every Masked cell
    /// of `masked` must be Known in `full`.
    pub fn from_datasets(full: &Dataset, masked: &Dataset) -> Result<Self> {
        let mut cells = BTreeMap::new();
        for (code, feature) in masked.masked_cells() {
            let value = full
                .record(&code)
                .and_then(|r| r.known_value(&feature))
                .ok_or_else(|| {
                    Error::validation(format!("no gold value for {code} / {feature}"))
                })?;
            cells.insert((code, feature), value.to_string());
        }
        Ok(GoldStandard { cells })
    }

    pub fn from_cells<I>(cells: I) -> Self
    where
        I: IntoIterator<Item = ((String, String), String)>,
    {
        GoldStandard {
            cells: cells.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, language: &str, feature: &str) -> Option<&str> {
        self.cells
            .get(&(language.to_string(), feature.to_string()))
            .map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &str)> {
        self.cells.iter().map(|(k, v)| (k, v.as_str()))
    }

    fn is_correct(&self, key: &(String, String), preds: &Predictions) -> bool {
        match (self.cells.get(key), preds.get(key)) {
            (Some(g), Some(p)) => normalize_value(g) == normalize_value(&p.value),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl GroupScore {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        if ok {
            self.correct += 1;
        }
        self.accuracy = self.correct as f64 / self.total as f64;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: f64,
    pub correct: usize,
    pub n_masked: usize,
    pub n_predictions: usize,
    /// Predictions for cells that were not masked; excluded from totals.
    pub n_ignored: usize,
    pub per_language: BTreeMap<String, GroupScore>,
    pub per_feature: BTreeMap<String, GroupScore>,
}

/// Correct predictions divided by masked cells. A missing prediction counts
/// as wrong.
pub fn accuracy(gold: &GoldStandard, preds: &Predictions) -> EvalReport {
    let mut r = EvalReport {
        n_masked: gold.len(),
        ..Default::default()
    };
    for key in gold.cells.keys() {
        let ok = gold.is_correct(key, preds);
        if preds.contains_key(key) {
            r.n_predictions += 1;
        }
        if ok {
            r.correct += 1;
        }
        r.per_language.entry(key.0.clone()).or_default().add(ok);
        r.per_feature.entry(key.1.clone()).or_default().add(ok);
    }
    r.n_ignored = preds.keys().filter(|k| !gold.cells.contains_key(*k)).count();
    if r.n_ignored > 0 {
        log::warn!("{} predictions target cells that are not masked", r.n_ignored);
    }
    r.overall = if r.n_masked == 0 {
        0.0
    } else {
        r.correct as f64 / r.n_masked as f64
    };
    r
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "accuracy {:.4}  ({} / {} masked cells, {} predicted)",
            self.overall, self.correct, self.n_masked, self.n_predictions
        );
        for (title, groups) in [("language", &self.per_language), ("feature", &self.per_feature)] {
            let width = groups.keys().map(|k| k.chars().count()).max().unwrap_or(0).max(title.len());
            let _ = writeln!(out, "\n{title:<width$}  correct  total  accuracy");
            for (k, g) in groups {
                let _ = writeln!(
                    out,
                    "{k:<width$}  {:>7}  {:>5}  {:>8.4}",
                    g.correct, g.total, g.accuracy
                );
            }
        }
        out
    }
}

/// Most frequent training value of every feature, regardless of language.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Baseline {
    modes: BTreeMap<String, (String, f64)>,
    /// First value ever seen per feature, across all splits given to
    /// [`Baseline::with_fallback_vocab`].
    fallback: BTreeMap<String, String>,
}

impl Baseline {
    pub fn fit(train: &Dataset) -> Self {
        let mut counts: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
        for r in train.records() {
            for (f, v) in r.known() {
                *counts.entry(f).or_default().entry(v).or_default() += 1;
            }
        }
        let modes = counts
            .into_iter()
            .map(|(f, vals)| {
                let total: usize = vals.values().sum();
                // BTreeMap order makes the first maximum the smallest value.
                let (v, c) = vals
                    .iter()
                    .fold(("", 0usize), |best, (v, c)| if *c > best.1 { (v, *c) } else { best });
                (f.to_string(), (v.to_string(), c as f64 / total as f64))
            })
            .collect();
        Baseline {
            modes,
            fallback: BTreeMap::new(),
        }
    }

    /// Registers values from other splits for features missing in training.
    pub fn with_fallback_vocab(mut self, d: &Dataset) -> Self {
        for (f, vals) in d.feature_vocab() {
            if let Some(first) = vals.iter().next() {
                let e = self.fallback.entry(f.clone()).or_insert_with(|| first.clone());
                if first < e {
                    *e = first.clone();
                }
            }
        }
        self
    }

    pub fn mode(&self, feature: &str) -> Option<&str> {
        self.modes.get(feature).map(|(v, _)| v.as_str())
    }

    pub fn predict(&self, language: &str, feature: &str) -> ScoredPrediction {
        match self.modes.get(feature) {
            Some((v, freq)) => ScoredPrediction::new(language, feature, v, *freq, System::Baseline),
            None => {
                let v = self.fallback.get(feature).cloned().unwrap_or_default();
                log::warn!("feature {feature} unseen in training; baseline guesses {v:?}");
                let mut p = ScoredPrediction::new(language, feature, v, 0.0, System::Baseline);
                p.fallback_used = true;
                p
            }
        }
    }

    pub fn predict_all(&self, target: &Dataset) -> Predictions {
        target
            .masked_cells()
            .into_iter()
            .map(|(l, f)| {
                let p = self.predict(&l, &f);
                (p.key(), p)
            })
            .collect()
    }
}

/// Global most-frequent-value predictions for every masked cell of
/// `target`.
pub fn baseline_predict(train: &Dataset, target: &Dataset) -> Predictions {
    Baseline::fit(train)
        .with_fallback_vocab(train)
        .with_fallback_vocab(target)
        .predict_all(target)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QuartileAccuracy {
    pub cells: usize,
    pub min_confidence: f64,
    pub max_confidence: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DisagreementReport {
    pub n_cells: usize,
    pub both_correct: usize,
    pub both_wrong: usize,
    pub prob_only: usize,
    pub neural_only: usize,
    /// Cells where exactly one system is right, over all masked cells.
    pub exactly_one_fraction: f64,
    /// Share of the exactly-one cells won by each system.
    pub prob_share: f64,
    pub neural_share: f64,
    /// Accuracy of each system within its own confidence quartiles over the
    /// exactly-one cells, least confident first.
    pub prob_quartiles: Vec<QuartileAccuracy>,
    pub neural_quartiles: Vec<QuartileAccuracy>,
}

fn quartiles(mut cells: Vec<(f64, bool, &(String, String))>) -> Vec<QuartileAccuracy> {
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.2.cmp(b.2)));
    let n = cells.len();
    (0..4)
        .map(|q| {
            let bin = &cells[q * n / 4..(q + 1) * n / 4];
            if bin.is_empty() {
                return QuartileAccuracy::default();
            }
            QuartileAccuracy {
                cells: bin.len(),
                min_confidence: bin[0].0,
                max_confidence: bin[bin.len() - 1].0,
                accuracy: bin.iter().filter(|c| c.1).count() as f64 / bin.len() as f64,
            }
        })
        .collect()
}

/// Compares two systems cell by cell against the gold values.
pub fn disagreement_report(gold: &GoldStandard, prob: &Predictions, neural: &Predictions) -> DisagreementReport {
    let mut r = DisagreementReport {
        n_cells: gold.len(),
        ..Default::default()
    };
    let mut p_cells = Vec::new();
    let mut n_cells = Vec::new();
    for key in gold.cells.keys() {
        let p_ok = gold.is_correct(key, prob);
        let n_ok = gold.is_correct(key, neural);
        match (p_ok, n_ok) {
            (true, true) => r.both_correct += 1,
            (false, false) => r.both_wrong += 1,
            (true, false) => r.prob_only += 1,
            (false, true) => r.neural_only += 1,
        }
        if p_ok != n_ok {
            p_cells.push((prob.get(key).map_or(0.0, |p| p.score), p_ok, key));
            n_cells.push((neural.get(key).map_or(0.0, |p| p.score), n_ok, key));
        }
    }
    let one = r.prob_only + r.neural_only;
    if r.n_cells > 0 {
        r.exactly_one_fraction = one as f64 / r.n_cells as f64;
    }
    if one > 0 {
        r.prob_share = r.prob_only as f64 / one as f64;
        r.neural_share = r.neural_only as f64 / one as f64;
    }
    r.prob_quartiles = quartiles(p_cells);
    r.neural_quartiles = quartiles(n_cells);
    r
}

impl DisagreementReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "masked cells          {:>6}", self.n_cells);
        let _ = writeln!(out, "both correct          {:>6}", self.both_correct);
        let _ = writeln!(out, "both wrong            {:>6}", self.both_wrong);
        let _ = writeln!(
            out,
            "exactly one correct   {:>6}  ({:.2}% of cells)",
            self.prob_only + self.neural_only,
            100.0 * self.exactly_one_fraction
        );
        let _ = writeln!(
            out,
            "  probabilistic only  {:>6}  ({:.1}%)",
            self.prob_only,
            100.0 * self.prob_share
        );
        let _ = writeln!(
            out,
            "  neural only         {:>6}  ({:.1}%)",
            self.neural_only,
            100.0 * self.neural_share
        );
        for (name, qs) in [("probabilistic", &self.prob_quartiles), ("neural", &self.neural_quartiles)] {
            let _ = writeln!(out, "\n{name} confidence quartiles on exactly-one cells");
            let _ = writeln!(out, "  quartile  cells  confidence range        accuracy");
            for (i, q) in qs.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  Q{}        {:>5}  {:>9.4} – {:<9.4}  {:>8.4}",
                    i + 1,
                    q.cells,
                    q.min_confidence,
                    q.max_confidence,
                    q.accuracy
                );
            }
        }
        out
    }
}

/// Features that were predicted correctly every time they were masked.
pub fn never_failed_features(report: &EvalReport) -> BTreeSet<&str> {
    report
        .per_feature
        .iter()
        .filter(|(_, g)| g.correct == g.total)
        .map(|(f, _)| f.as_str())
        .collect()
}
