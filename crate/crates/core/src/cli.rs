//! Command-line front end. Each subcommand parses files, calls the library
//! and writes files; `run` returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::combine::CombinerConfig;
use crate::data::{mask_split, parse_dataset, serialize_dataset, Role};
use crate::error::{Error, Result};
use crate::eval::{accuracy, disagreement_report, GoldStandard};
use crate::features::GeoZoning;
use crate::neural::{default_grid, export_embeddings, grid_search, language_embeddings, HyperParams, NeuralSystem};
use crate::pipeline::{Pipeline, PipelineOptions, DEFAULT_K_EMBED, DEFAULT_K_HAMMING};
use crate::prediction::{read_predictions, write_predictions, Predictions, System};
use crate::prob::{LogBase, ProbModel, ScoreVariant};

#[derive(Parser, Debug)]
#[command(name = "walspred", version, about = "Predict missing WALS features")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Latitude/longitude zone boundaries file.
    #[arg(long, global = true, value_name = "FILE")]
    zones: Option<PathBuf>,
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hide a random subset of the known features.
    Mask {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        rate: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the co-occurrence model and save it as JSON.
    FitProb {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = BaseArg::Ln)]
        log_base: BaseArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the embedding model and save it as JSON.
    TrainNeural {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        hp: HpArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-epoch training loss, one value per line.
        #[arg(long, value_name = "FILE")]
        losses: Option<PathBuf>,
    },
    /// Train the neural model for every grid point and rank them on dev.
    GridSearch {
        #[arg(long)]
        train: PathBuf,
        /// Fully known dev languages.
        #[arg(long)]
        dev_gold: PathBuf,
        /// Masked copy of the dev languages.
        #[arg(long)]
        dev_masked: PathBuf,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.001)]
        lr: f64,
        /// Restrict the cluster counts searched.
        #[arg(long, value_delimiter = ',')]
        clusters: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        dropouts: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict every masked cell of the target languages.
    Predict {
        #[arg(long, value_enum)]
        system: SystemArg,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        hp: HpArgs,
        #[arg(long, value_enum, default_value_t = VariantArg::Score2)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value_t = BaseArg::Ln)]
        log_base: BaseArg,
        /// Neighbours to vote (default 22 for Hamming, 33 for embeddings).
        #[arg(long)]
        k: Option<usize>,
        /// Count genus and family in the Hamming distance.
        #[arg(long)]
        hamming_general: bool,
        #[arg(long, default_value_t = 0.65)]
        tn: f64,
        #[arg(long, default_value_t = 0.5)]
        tp: f64,
        /// Use a saved neural model instead of training one.
        #[arg(long, value_name = "FILE")]
        neural_model: Option<PathBuf>,
        /// Use a saved co-occurrence model instead of fitting one.
        #[arg(long, value_name = "FILE")]
        prob_model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a prediction file.
    Evaluate {
        /// Fully known languages.
        #[arg(long)]
        gold: PathBuf,
        /// The masked file the predictions were made for. Without it only
        /// the predicted cells are scored.
        #[arg(long)]
        masked: Option<PathBuf>,
        #[arg(long)]
        pred: PathBuf,
        /// Also write the report as JSON.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
    /// Compare the probabilistic and neural predictions cell by cell.
    AnalyzeDisagreement {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        masked: PathBuf,
        #[arg(long)]
        prob: PathBuf,
        #[arg(long)]
        neural: PathBuf,
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
    /// Write the language embeddings of a saved neural model as CSV.
    ExportEmbeddings {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long)]
    train: PathBuf,
    /// Masked target languages whose visible cells join the training data.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Do not merge the visible target cells into training.
    #[arg(long)]
    no_merge: bool,
}

#[derive(Args, Debug)]
struct HpArgs {
    #[arg(long, default_value_t = 300)]
    clusters: usize,
    #[arg(long, default_value_t = 512)]
    dim: usize,
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
}

impl HpArgs {
    fn params(&self, seed: u64) -> HyperParams {
        HyperParams {
            k_clusters: self.clusters,
            dim: self.dim,
            dropout: self.dropout,
            epochs: self.epochs,
            learning_rate: self.lr,
            seed,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SystemArg {
    Baseline,
    Prob,
    Neural,
    KnnHamming,
    KnnEmbed,
    Combined,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Baseline => System::Baseline,
            SystemArg::Prob => System::Probabilistic,
            SystemArg::Neural => System::Neural,
            SystemArg::KnnHamming => System::KnnHamming,
            SystemArg::KnnEmbed => System::KnnEmbed,
            SystemArg::Combined => System::Combined,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Cond,
    Score1,
    Score2,
}

impl From<VariantArg> for ScoreVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Cond => ScoreVariant::CondOnly,
            VariantArg::Score1 => ScoreVariant::Score1,
            VariantArg::Score2 => ScoreVariant::Score2,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BaseArg {
    Ln,
    Log2,
}

impl From<BaseArg> for LogBase {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Ln => LogBase::Natural,
            BaseArg::Log2 => LogBase::Two,
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand. Returns 0 on
/// success, 2 on bad usage and 1 on any other error.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ = env_logger::Builder::new().filter_level(cli.log_level).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn zoning(cli: &Cli) -> Result<GeoZoning> {
    match &cli.zones {
        Some(p) => GeoZoning::from_config_file(p),
        None => Ok(GeoZoning::default()),
    }
}

/// The dataset models are fitted on: training, plus the visible target
/// cells unless merging is disabled.
fn fitting_pool(data: &DataArgs) -> Result<crate::data::Dataset> {
    let train = parse_dataset(&data.train, Role::Train)?;
    match (&data.target, data.no_merge) {
        (Some(t), false) => crate::data::merge_visible(&train, &parse_dataset(t, Role::Test)?),
        _ => Ok(train),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Mask { input, rate, out } => {
            let d = parse_dataset(input, Role::Dev)?;
            let masked = mask_split(&d, *rate, cli.seed)?;
            log::info!("masked {} of {} cells", masked.masked_cell_count(), d.known_cell_count());
            serialize_dataset(&masked, out)
        }
        Command::FitProb { data, log_base, out } => {
            let pool = fitting_pool(data)?;
            ProbModel::fit(&pool, &zoning(cli)?)?
                .with_log_base((*log_base).into())
                .save(out)
        }
        Command::TrainNeural { data, hp, out, losses } => {
            let pool = fitting_pool(data)?;
            let (sys, report) = NeuralSystem::train(&pool, &hp.params(cli.seed))?;
            sys.save(out)?;
            if let Some(path) = losses {
                let text: String = report.epoch_losses.iter().map(|l| format!("{l}\n")).collect();
                write_text(path, &text)?;
            }
            Ok(())
        }
        Command::GridSearch {
            train,
            dev_gold,
            dev_masked,
            epochs,
            lr,
            clusters,
            dims,
            dropouts,
            jobs,
            out,
        } => {
            let train = parse_dataset(train, Role::Train)?;
            let full = parse_dataset(dev_gold, Role::Dev)?;
            let masked = parse_dataset(dev_masked, Role::Dev)?;
            let gold = GoldStandard::from_datasets(&full, &masked)?;
            let base = HyperParams {
                epochs: *epochs,
                learning_rate: *lr,
                seed: cli.seed,
                ..HyperParams::default()
            };
            let grid: Vec<HyperParams> = default_grid(&base)
                .into_iter()
                .filter(|p| clusters.is_empty() || clusters.contains(&p.k_clusters))
                .filter(|p| dims.is_empty() || dims.contains(&p.dim))
                .filter(|p| dropouts.is_empty() || dropouts.contains(&p.dropout))
                .collect();
            let result = grid_search(&train, &masked, &gold, &grid, *jobs)?;
            println!(
                "best: clusters {} dim {} dropout {} (dev accuracy {:.4})",
                result.best.k_clusters, result.best.dim, result.best.dropout, result.best_accuracy
            );
            write_text(out, &serde_json::to_string_pretty(&result)?)
        }
        Command::Predict {
            system,
            data,
            hp,
            variant,
            log_base,
            k,
            hamming_general,
            tn,
            tp,
            neural_model,
            prob_model,
            out,
        } => {
            let train = parse_dataset(&data.train, Role::Train)?;
            let target_path = data
                .target
                .as_ref()
                .ok_or_else(|| Error::validation("predict needs --target"))?;
            let target = parse_dataset(target_path, Role::Test)?;
            let system: System = (*system).into();
            let opts = PipelineOptions {
                zoning: zoning(cli)?,
                variant: (*variant).into(),
                log_base: (*log_base).into(),
                hp: hp.params(cli.seed),
                k_hamming: k.unwrap_or(DEFAULT_K_HAMMING),
                k_embed: k.unwrap_or(DEFAULT_K_EMBED),
                hamming_general: *hamming_general,
                combiner: CombinerConfig::new(*tn, *tp)?,
                merge: !data.no_merge,
            };
            let pipeline = Pipeline::new(&train, &target, opts)?;
            let preds = predict_with(&pipeline, system, prob_model.as_deref(), neural_model.as_deref())?;
            write_predictions(&preds, out)
        }
        Command::Evaluate { gold, masked, pred, json } => {
            let full = parse_dataset(gold, Role::Dev)?;
            let preds = read_predictions(pred)?;
            let gold = match masked {
                Some(m) => GoldStandard::from_datasets(&full, &parse_dataset(m, Role::Dev)?)?,
                None => predicted_gold(&full, &preds)?,
            };
            let report = accuracy(&gold, &preds);
            print!("{}", report.to_text());
            if let Some(path) = json {
                write_text(path, &report.to_json()?)?;
            }
            Ok(())
        }
        Command::AnalyzeDisagreement {
            gold,
            masked,
            prob,
            neural,
            json,
        } => {
            let full = parse_dataset(gold, Role::Dev)?;
            let gold = GoldStandard::from_datasets(&full, &parse_dataset(masked, Role::Dev)?)?;
            let report = disagreement_report(&gold, &read_predictions(prob)?, &read_predictions(neural)?);
            print!("{}", report.to_text());
            if let Some(path) = json {
                write_text(path, &report.to_json()?)?;
            }
            Ok(())
        }
        Command::ExportEmbeddings { model, out } => export_embeddings(&NeuralSystem::load(model)?, out),
    }
}

fn predict_with(
    pipeline: &Pipeline,
    system: System,
    prob_model: Option<&Path>,
    neural_model: Option<&Path>,
) -> Result<Predictions> {
    let prob = || -> Result<Predictions> {
        match prob_model {
            Some(p) => Ok(pipeline.prob_with(&ProbModel::load(p)?, pipeline.options().variant)),
            None => pipeline.prob(),
        }
    };
    let neural_sys = || -> Result<NeuralSystem> {
        match neural_model {
            Some(p) => NeuralSystem::load(p),
            None => Ok(pipeline.train_neural()?.0),
        }
    };
    match system {
        System::Probabilistic => prob(),
        System::Neural => Ok(pipeline.neural_with(&neural_sys()?)),
        System::KnnEmbed => {
            let emb = language_embeddings(&neural_sys()?);
            pipeline.knn_embed_with(&emb, pipeline.options().k_embed)
        }
        System::Combined => {
            let p = prob()?;
            let n = pipeline.neural_with(&neural_sys()?);
            Ok(pipeline.combined_from(&p, &n)?.0)
        }
        other => pipeline.run(other),
    }
}

/// Gold values for exactly the predicted cells.
fn predicted_gold(full: &crate::data::Dataset, preds: &Predictions) -> Result<GoldStandard> {
    let mut cells = Vec::with_capacity(preds.len());
    for (code, feature) in preds.keys() {
        let value = full
            .record(code)
            .and_then(|r| r.known_value(feature))
            .ok_or_else(|| Error::validation(format!("no gold value for {code} / {feature}")))?;
        cells.push(((code.clone(), feature.clone()), value.to_string()));
    }
    Ok(GoldStandard::from_cells(cells))
}
