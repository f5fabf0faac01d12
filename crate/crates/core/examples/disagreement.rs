//! Where do the probabilistic and neural systems differ, and how does
//! accuracy grow with confidence?
//!
//!     cargo run --release --example disagreement [DATA_DIR]

use std::env;

use walspred::{
    disagreement_report, mask_split, read_split_dir, synthetic, GoldStandard, HyperParams, Pipeline, PipelineOptions,
};

fn main() -> walspred::Result<()> {
    let (train, dev) = match env::args().nth(1) {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let masked = mask_split(&dev, 0.5, 42)?;
    let gold = GoldStandard::from_datasets(&dev, &masked)?;
    let opts = PipelineOptions {
        hp: HyperParams {
            k_clusters: 50,
            dim: 64,
            epochs: 60,
            ..HyperParams::default()
        },
        ..PipelineOptions::default()
    };
    let pipeline = Pipeline::new(&train, &masked, opts)?;
    let prob = pipeline.prob()?;
    let neural = pipeline.neural_with(&pipeline.train_neural()?.0);
    print!("{}", disagreement_report(&gold, &prob, &neural).to_text());
    Ok(())
}
