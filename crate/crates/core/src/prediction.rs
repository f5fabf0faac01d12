//! Scored predictions and the prediction file format.
//!
//! Prediction files are tab-separated with the header
//! `wals_code feature value confidence system`, one row per predicted cell.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum System {
    Probabilistic,
    Neural,
    KnnHamming,
    KnnEmbed,
    Baseline,
    Combined,
}

impl System {
    pub fn as_str(self) -> &'static str {
        match self {
            System::Probabilistic => "prob",
            System::Neural => "neural",
            System::KnnHamming => "knn-hamming",
            System::KnnEmbed => "knn-embed",
            System::Baseline => "baseline",
            System::Combined => "combined",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "prob" | "probabilistic" => System::Probabilistic,
            "neural" => System::Neural,
            "knn-hamming" => System::KnnHamming,
            "knn-embed" => System::KnnEmbed,
            "baseline" => System::Baseline,
            "combined" => System::Combined,
            other => return Err(Error::validation(format!("unknown system {other:?}"))),
        })
    }
}

/// A predicted value for one masked cell together with the producing
/// system's confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrediction {
    pub language: String,
    pub feature: String,
    pub value: String,
    pub score: f64,
    pub system: System,
    /// For combined output: the subsystem whose prediction was returned.
    pub origin: Option<System>,
    /// The `(feature, value)` source that produced the best probabilistic
    /// score.
    pub source: Option<(String, String)>,
    pub fallback_used: bool,
}

impl ScoredPrediction {
    pub fn new(
        language: impl Into<String>,
        feature: impl Into<String>,
        value: impl Into<String>,
        score: f64,
        system: System,
    ) -> Self {
        ScoredPrediction {
            language: language.into(),
            feature: feature.into(),
            value: value.into(),
            score,
            system,
            origin: None,
            source: None,
            fallback_used: false,
        }
    }

    pub fn key(&self) -> (String, String) {
        (self.language.clone(), self.feature.clone())
    }
}

/// Predictions keyed by `(wals_code, feature)`.
pub type Predictions = BTreeMap<(String, String), ScoredPrediction>;

pub const PREDICTION_HEADER: &str = "wals_code\tfeature\tvalue\tconfidence\tsystem";

pub fn predictions_to_tsv(preds: &Predictions) -> String {
    let mut out = String::from(PREDICTION_HEADER);
    out.push('\n');
    for p in preds.values() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            p.language, p.feature, p.value, p.score, p.system
        );
    }
    out
}

pub fn predictions_from_tsv(text: &str) -> Result<Predictions> {
    let mut preds = Predictions::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (i == 0 && line == PREDICTION_HEADER) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let err = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        if cols.len() != 5 {
            return Err(err(format!("expected 5 columns, found {}", cols.len())));
        }
        let score = cols[3]
            .parse::<f64>()
            .map_err(|_| err(format!("bad confidence {:?}", cols[3])))?;
        let system = cols[4].parse::<System>().map_err(|e| err(e.to_string()))?;
        let p = ScoredPrediction::new(cols[0], cols[1], cols[2], score, system);
        if preds.insert(p.key(), p).is_some() {
            return Err(err(format!("duplicate prediction for {} / {}", cols[0], cols[1])));
        }
    }
    Ok(preds)
}

pub fn write_predictions(preds: &Predictions, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, predictions_to_tsv(preds)).map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Predictions> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    predictions_from_tsv(&text)
}
