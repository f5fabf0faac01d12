//! Masks half of the dev features and merges the visible rest into training.
//!
//!     cargo run --example mask_and_merge [DATA_DIR]
//!
//! DATA_DIR holds the shared-task `train.csv` and `dev.csv`; without it a
//! synthetic corpus is used.

use std::env;

use walspred::{mask_split, merge_visible, read_split_dir, synthetic, FeatureCell};

fn main() -> walspred::Result<()> {
    let (train, dev) = match env::args().nth(1) {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let masked = mask_split(&dev, 0.5, 42)?;
    println!(
        "dev: {} languages, {} known cells, {} of them masked",
        dev.len(),
        dev.known_cell_count(),
        masked.masked_cell_count()
    );

    let first = &masked.records()[0];
    println!("\n{} ({}, {})", first.wals_code, first.genus, first.family);
    for (feature, cell) in first.cells() {
        match cell {
            FeatureCell::Known(v) => println!("  {feature} = {v}"),
            FeatureCell::Masked => println!("  {feature} = ?"),
            FeatureCell::Absent => {}
        }
    }

    let merged = merge_visible(&train, &masked)?;
    println!(
        "\ntrain {} languages / {} cells -> merged {} languages / {} cells",
        train.len(),
        train.known_cell_count(),
        merged.len(),
        merged.known_cell_count()
    );
    Ok(())
}
