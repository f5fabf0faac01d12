//! Combines probabilistic and neural predictions with the two-threshold
//! rule and compares the three systems.
//!
//!     cargo run --release --example combined [DATA_DIR]

use std::env;

use walspred::{
    accuracy, mask_split, read_split_dir, synthetic, CombinerConfig, GoldStandard, HyperParams, Pipeline,
    PipelineOptions,
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
    let (combined, stats) = pipeline.combined_from(&prob, &neural)?;

    println!("prob     {:.4}", accuracy(&gold, &prob).overall);
    println!("neural   {:.4}", accuracy(&gold, &neural).overall);
    println!("combined {:.4}", accuracy(&gold, &combined).overall);
    println!(
        "systems disagree on {} cells; the probabilistic value was kept for {:.1}% of them",
        stats.differing,
        100.0 * stats.prob_fraction()
    );

    println!("\nt_n   t_p   accuracy");
    for t_n in [0.5, 0.65, 0.8] {
        for t_p in [0.25, 0.5, 1.0] {
            let cfg = CombinerConfig::new(t_n, t_p)?;
            let c = walspred::combine_all(&prob, &neural, &pipeline.baseline(), &cfg)?;
            println!("{t_n:<5} {t_p:<5} {:.4}", accuracy(&gold, &c).overall);
        }
    }
    Ok(())
}
