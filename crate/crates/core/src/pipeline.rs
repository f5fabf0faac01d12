//! End-to-end prediction of the masked cells of a target dataset.
//!
//! Before fitting, the visible cells of the target languages are merged into
//! the training data: they add co-occurrence evidence and give the neural
//! model an embedding for every target language. Every masked cell receives
//! exactly one prediction; cells a system cannot handle get the baseline
//! value with `fallback_used` set.

use crate::combine::{choice_stats, combine_all, ChoiceStats, CombinerConfig};
use crate::data::{merge_visible, Dataset};
use crate::error::{Error, Result};
use crate::eval::Baseline;
use crate::features::GeoZoning;
use crate::knn::{Embeddings, KnnPredictor};
use crate::neural::{language_embeddings, HyperParams, NeuralSystem, TrainReport};
use crate::prediction::{Predictions, System};
use crate::prob::{LogBase, ProbModel, ScoreVariant};

pub const DEFAULT_K_HAMMING: usize = 22;
pub const DEFAULT_K_EMBED: usize = 33;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub zoning: GeoZoning,
    pub variant: ScoreVariant,
    pub log_base: LogBase,
    pub hp: HyperParams,
    pub k_hamming: usize,
    pub k_embed: usize,
    /// Compare genus and family in the Hamming distance as well.
    pub hamming_general: bool,
    pub combiner: CombinerConfig,
    /// Merge the visible target cells into training before fitting.
    pub merge: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            zoning: GeoZoning::default(),
            variant: ScoreVariant::Score2,
            log_base: LogBase::Natural,
            hp: HyperParams::default(),
            k_hamming: DEFAULT_K_HAMMING,
            k_embed: DEFAULT_K_EMBED,
            hamming_general: false,
            combiner: CombinerConfig::default(),
            merge: true,
        }
    }
}

/// Fitting data and baseline for one `(train, target)` pair. Systems are
/// run on demand.
pub struct Pipeline<'a> {
    target: &'a Dataset,
    pool: Dataset,
    baseline: Predictions,
    opts: PipelineOptions,
}

impl<'a> Pipeline<'a> {
    pub fn new(train: &Dataset, target: &'a Dataset, opts: PipelineOptions) -> Result<Self> {
        let pool = if opts.merge {
            merge_visible(train, target)?
        } else {
            train.clone()
        };
        let baseline = Baseline::fit(&pool)
            .with_fallback_vocab(&pool)
            .with_fallback_vocab(target)
            .predict_all(target);
        Ok(Pipeline {
            target,
            pool,
            baseline,
            opts,
        })
    }

    /// The data models are fitted on.
    pub fn pool(&self) -> &Dataset {
        &self.pool
    }

    pub fn options(&self) -> &PipelineOptions {
        &self.opts
    }

    /// Fills cells without a prediction from the baseline.
    fn complete(&self, mut preds: Predictions) -> Predictions {
        for (k, b) in &self.baseline {
            preds.entry(k.clone()).or_insert_with(|| {
                let mut b = b.clone();
                b.fallback_used = true;
                b
            });
        }
        preds
    }

    pub fn baseline(&self) -> Predictions {
        self.baseline.clone()
    }

    pub fn fit_prob(&self) -> Result<ProbModel> {
        Ok(ProbModel::fit(&self.pool, &self.opts.zoning)?.with_log_base(self.opts.log_base))
    }

    pub fn prob_with(&self, model: &ProbModel, variant: ScoreVariant) -> Predictions {
        self.complete(model.predict_all(self.target, variant))
    }

    pub fn prob(&self) -> Result<Predictions> {
        Ok(self.prob_with(&self.fit_prob()?, self.opts.variant))
    }

    pub fn train_neural(&self) -> Result<(NeuralSystem, TrainReport)> {
        if !self.opts.merge {
            return Err(Error::validation(
                "the neural system needs the target languages merged into training",
            ));
        }
        NeuralSystem::train(&self.pool, &self.opts.hp)
    }

    pub fn neural_with(&self, sys: &NeuralSystem) -> Predictions {
        self.complete(sys.predict_all(self.target))
    }

    pub fn knn_hamming(&self, k: usize) -> Predictions {
        let knn = KnnPredictor::hamming(&self.pool, self.opts.hamming_general);
        self.complete(knn.predict_all(self.target, k))
    }

    pub fn knn_embed_with(&self, emb: &Embeddings, k: usize) -> Result<Predictions> {
        let knn = KnnPredictor::cosine(&self.pool, emb)?;
        Ok(self.complete(knn.predict_all(self.target, k)))
    }

    pub fn combined_from(&self, prob: &Predictions, neural: &Predictions) -> Result<(Predictions, ChoiceStats)> {
        let combined = combine_all(prob, neural, &self.baseline, &self.opts.combiner)?;
        let stats = choice_stats(prob, neural, &combined);
        Ok((combined, stats))
    }

    /// Runs one system end to end.
    pub fn run(&self, system: System) -> Result<Predictions> {
        match system {
            System::Baseline => Ok(self.baseline()),
            System::Probabilistic => self.prob(),
            System::Neural => Ok(self.neural_with(&self.train_neural()?.0)),
            System::KnnHamming => Ok(self.knn_hamming(self.opts.k_hamming)),
            System::KnnEmbed => {
                let (sys, _) = self.train_neural()?;
                self.knn_embed_with(&language_embeddings(&sys), self.opts.k_embed)
            }
            System::Combined => {
                let prob = self.prob()?;
                let neural = self.neural_with(&self.train_neural()?.0);
                Ok(self.combined_from(&prob, &neural)?.0)
            }
        }
    }
}

/// Predicts every masked cell of `target` with `system`.
pub fn predict(system: System, train: &Dataset, target: &Dataset, opts: &PipelineOptions) -> Result<Predictions> {
    Pipeline::new(train, target, opts.clone())?.run(system)
}
