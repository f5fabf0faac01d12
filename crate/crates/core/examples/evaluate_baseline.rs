//! Scores the most-frequent-value baseline and prints the full report.
//!
//!     cargo run --example evaluate_baseline [DATA_DIR]

use std::env;

use walspred::eval::never_failed_features;
use walspred::{accuracy, mask_split, merge_visible, read_split_dir, synthetic, Baseline, GoldStandard};

fn main() -> walspred::Result<()> {
    let (train, dev) = match env::args().nth(1) {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let masked = mask_split(&dev, 0.5, 42)?;
    let gold = GoldStandard::from_datasets(&dev, &masked)?;
    let baseline = Baseline::fit(&merge_visible(&train, &masked)?).with_fallback_vocab(&masked);
    let report = accuracy(&gold, &baseline.predict_all(&masked));
    print!("{}", report.to_text());
    println!("\nalways right on: {:?}", never_failed_features(&report));
    Ok(())
}
