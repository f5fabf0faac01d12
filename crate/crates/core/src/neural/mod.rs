//! Embedding-based neural predictor.
//!
//! Each language gets an embedding, as does each feature value ("token").
//! A logistic discriminator is trained to tell whether a token belongs to a
//! language, using one random non-member token per coin flip as the
//! negative example. A missing feature is predicted by scoring every value
//! of that feature for the language and keeping the most probable one.

mod adam;
mod export;
mod grid;
mod model;
mod vocab;

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LanguageRecord};
use crate::error::{Error, Result};
use crate::features::{cluster_records, CoordClustering};
use crate::prediction::{Predictions, ScoredPrediction, System};

pub use adam::AdamState;
pub use export::{export_embeddings, language_embeddings, read_embeddings};
pub use grid::{default_grid, grid_search, GridResult, CLUSTER_GRID, DIM_GRID, DROPOUT_GRID};
pub use model::{bce_from_logit, logistic, EmbeddingModel, Gradient, INIT_RANGE};
pub use vocab::{build_vocab, token_string, Vocabulary};

pub const MODEL_FORMAT: &str = "walspred-neural";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub k_clusters: usize,
    pub dim: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for HyperParams {
    /// The best configuration of the published grid search.
    fn default() -> Self {
        HyperParams {
            k_clusters: 300,
            dim: 512,
            dropout: 0.5,
            epochs: 200,
            learning_rate: 0.001,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean binary cross-entropy per epoch.
    pub epoch_losses: Vec<f64>,
    pub positive_examples: usize,
    pub negative_examples: usize,
}

/// Trains an embedding model over every positive `(language, token)` pair
/// of `vocab`.
///
/// One epoch is one shuffled pass over the positive pairs. For each pair a
/// fair coin decides between the pair itself (label 1) and the same
/// language with a uniformly drawn token that is not true for it (label 0).
/// Parameters are updated per example.
pub fn train_model(vocab: &Vocabulary, hp: &HyperParams) -> Result<(EmbeddingModel, TrainReport)> {
    let mut model = EmbeddingModel::new(
        vocab.language_count(),
        vocab.token_count(),
        hp.dim,
        hp.dropout,
        hp.seed,
    )?;
    let mut adam = AdamState::new(&model, hp.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    rng.set_stream(1);

    let mut pairs = vocab.positive_pairs();
    let n_tokens = vocab.token_count();
    let mut grad = Gradient::zeros(hp.dim);
    let mut report = TrainReport::default();

    for epoch in 0..hp.epochs {
        pairs.shuffle(&mut rng);
        let mut total = 0.0;
        let mut n = 0usize;
        for &(lang, pos) in &pairs {
            let (token, label) = if rng.gen_bool(0.5) {
                report.positive_examples += 1;
                (pos, 1.0)
            } else {
                if vocab.positives(lang).len() >= n_tokens {
                    continue;
                }
                let neg = loop {
                    let t = rng.gen_range(0..n_tokens);
                    if !vocab.is_positive(lang, t) {
                        break t;
                    }
                };
                report.negative_examples += 1;
                (neg, 0.0)
            };
            let mask = (model.dropout > 0.0).then(|| model.dropout_mask(&mut rng));
            let loss = model.loss_and_grad(lang, token, label, mask.as_deref(), &mut grad);
            adam.apply(&mut model, lang, token, &grad);
            total += loss;
            n += 1;
        }
        let mean = if n > 0 { total / n as f64 } else { 0.0 };
        if !mean.is_finite() || !model.output_bias.is_finite() {
            return Err(Error::Divergence {
                epoch,
                message: format!("mean loss {mean}"),
            });
        }
        log::debug!("epoch {epoch}: loss {mean:.5}");
        report.epoch_losses.push(mean);
    }
    if !model.is_finite() {
        return Err(Error::Divergence {
            epoch: hp.epochs,
            message: "non-finite parameters after training".into(),
        });
    }
    Ok((model, report))
}

/// A trained neural predictor with everything needed to apply it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralSystem {
    pub hp: HyperParams,
    pub clustering: CoordClustering,
    pub vocab: Vocabulary,
    pub model: EmbeddingModel,
}

impl NeuralSystem {
    /// Clusters coordinates, builds the vocabulary and trains on `d`, which
    /// should already contain the visible cells of the languages to be
    /// predicted.
    pub fn train(d: &Dataset, hp: &HyperParams) -> Result<(Self, TrainReport)> {
        let clustering = cluster_records(d.records(), hp.k_clusters, hp.seed)?;
        let vocab = build_vocab(d, &clustering)?;
        let (model, report) = train_model(&vocab, hp)?;
        Ok((
            NeuralSystem {
                hp: hp.clone(),
                clustering,
                vocab,
                model,
            },
            report,
        ))
    }

    /// Scores every known value of `feature` for the language and returns
    /// the most probable one; its probability is the confidence.
    pub fn predict_feature(&self, rec: &LanguageRecord, feature: &str) -> Result<ScoredPrediction> {
        let err = |reason: &str| Error::Prediction {
            language: rec.wals_code.clone(),
            feature: feature.to_string(),
            reason: reason.to_string(),
        };
        let lang = self
            .vocab
            .language_id(&rec.wals_code)
            .ok_or_else(|| err("language was not part of training"))?;
        let tokens = self
            .vocab
            .feature_tokens(feature)
            .filter(|t| !t.is_empty())
            .ok_or_else(|| err("feature has no values in training"))?;
        let mut best = (tokens[0], self.model.probability(lang, tokens[0]));
        for &t in &tokens[1..] {
            let p = self.model.probability(lang, t);
            if p > best.1 {
                best = (t, p);
            }
        }
        Ok(ScoredPrediction::new(
            &rec.wals_code,
            feature,
            self.vocab.token_value(best.0),
            best.1,
            System::Neural,
        ))
    }

    /// One prediction per Masked cell that the model can handle; failures
    /// are logged and left for the caller to fill.
    pub fn predict_all(&self, d: &Dataset) -> Predictions {
        let mut out = Predictions::new();
        for rec in d.records() {
            for t in rec.masked() {
                match self.predict_feature(rec, t) {
                    Ok(p) => {
                        out.insert(p.key(), p);
                    }
                    Err(e) => log::warn!("{e}"),
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SerSystem {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            system: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SerSystem = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
            return Err(Error::validation(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        Ok(doc.system)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct SerSystem {
    format: String,
    version: u32,
    system: NeuralSystem,
}
