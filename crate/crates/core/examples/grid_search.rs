//! Searches a reduced clusters × dimension × dropout grid in parallel.
//!
//!     cargo run --release --example grid_search [DATA_DIR] [JOBS]

use std::env;

use walspred::neural::{default_grid, grid_search};
use walspred::{mask_split, read_split_dir, synthetic, GoldStandard, HyperParams};

fn main() -> walspred::Result<()> {
    let args: Vec<String> = env::args().collect();
    let (train, dev) = match args.get(1).filter(|a| *a != "-") {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let jobs = args.get(2).and_then(|j| j.parse().ok()).unwrap_or(4);
    let masked = mask_split(&dev, 0.5, 42)?;
    let gold = GoldStandard::from_datasets(&dev, &masked)?;

    let base = HyperParams {
        epochs: 30,
        ..HyperParams::default()
    };
    let grid: Vec<HyperParams> = default_grid(&base)
        .into_iter()
        .filter(|hp| [1, 10, 50].contains(&hp.k_clusters) && hp.dim == 128)
        .collect();
    let result = grid_search(&train, &masked, &gold, &grid, jobs)?;
    println!("clusters  dim  dropout  accuracy");
    for (hp, acc) in &result.table {
        println!("{:>8}  {:>3}  {:>7}  {acc:.4}", hp.k_clusters, hp.dim, hp.dropout);
    }
    println!(
        "best: {} clusters, dropout {} ({:.4})",
        result.best.k_clusters, result.best.dropout, result.best_accuracy
    );
    Ok(())
}
