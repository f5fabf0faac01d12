//! Prediction of missing typological features of the world's languages.
//!
//! Languages carry a few general properties (genus, family, coordinates,
//! countries) and a sparse set of categorical WALS features. Given training
//! languages and target languages with some features masked, the crate
//! predicts the masked values with
//!
//! * a co-occurrence model scoring single source features ([`prob`]),
//! * a language/feature-value embedding model ([`neural`]),
//! * k-nearest-neighbour voting ([`knn`]),
//! * a threshold combination of the first two ([`combine`]),
//!
//! and scores them against the held-out values ([`eval`]).
//!
//! ```
//! use walspred::{mask_split, synthetic, Pipeline, PipelineOptions, GoldStandard, System, accuracy};
//!
//! let (train, dev) = synthetic::train_dev(&synthetic::SyntheticConfig {
//!     languages: 150,
//!     features: 12,
//!     ..Default::default()
//! }).unwrap();
//! let masked = mask_split(&dev, 0.5, 42).unwrap();
//! let gold = GoldStandard::from_datasets(&dev, &masked).unwrap();
//! let pipeline = Pipeline::new(&train, &masked, PipelineOptions::default()).unwrap();
//! let preds = pipeline.run(System::Probabilistic).unwrap();
//! assert_eq!(preds.len(), masked.masked_cell_count());
//! let report = accuracy(&gold, &preds);
//! assert!(report.overall > 0.0);
//! ```

pub mod cli;
pub mod combine;
pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod knn;
pub mod neural;
pub mod pipeline;
pub mod prediction;
pub mod prob;
pub mod synthetic;

pub use combine::{combine, combine_all, CombinerConfig};
pub use data::{mask_split, merge_visible, parse_dataset, read_split_dir, serialize_dataset, Dataset, FeatureCell, LanguageRecord, Role};
pub use error::{Error, Result};
pub use eval::{accuracy, baseline_predict, disagreement_report, Baseline, DisagreementReport, EvalReport, GoldStandard};
pub use features::{derive_features, kmeans_fit, CoordClustering, GeoZoning, Profile};
pub use knn::{knn_predict, Embeddings, KnnPredictor, Metric};
pub use neural::{HyperParams, NeuralSystem};
pub use pipeline::{predict, Pipeline, PipelineOptions};
pub use prediction::{read_predictions, write_predictions, Predictions, ScoredPrediction, System};
pub use prob::{LogBase, ProbModel, ScoreVariant};
