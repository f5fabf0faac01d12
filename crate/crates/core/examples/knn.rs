//! Nearest-neighbour voting over Hamming distance and over learned
//! language embeddings.
//!
//!     cargo run --release --example knn [DATA_DIR]

use std::env;

use walspred::neural::language_embeddings;
use walspred::{
    accuracy, mask_split, merge_visible, read_split_dir, synthetic, GoldStandard, HyperParams, KnnPredictor,
    NeuralSystem,
};

fn main() -> walspred::Result<()> {
    let (train, dev) = match env::args().nth(1) {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let masked = mask_split(&dev, 0.5, 42)?;
    let gold = GoldStandard::from_datasets(&dev, &masked)?;
    let pool = merge_visible(&train, &masked)?;

    let hamming = KnnPredictor::hamming(&pool, false);
    let query = &masked.records()[0];
    let nl = hamming.neighbors(query, 5)?;
    println!("nearest to {}:", query.wals_code);
    for (code, d) in &nl.neighbors {
        println!("  {code}  {d}");
    }
    for k in [1, 5, 22] {
        let acc = accuracy(&gold, &hamming.predict_all(&masked, k)).overall;
        println!("hamming k = {k:>2}: dev accuracy {acc:.4}");
    }

    let hp = HyperParams {
        k_clusters: 50,
        dim: 64,
        epochs: 60,
        ..HyperParams::default()
    };
    let (sys, _) = NeuralSystem::train(&pool, &hp)?;
    let emb = language_embeddings(&sys);
    let cosine = KnnPredictor::cosine(&pool, &emb)?;
    for k in [5, 33] {
        let acc = accuracy(&gold, &cosine.predict_all(&masked, k)).overall;
        println!("embedding k = {k:>2}: dev accuracy {acc:.4}");
    }
    Ok(())
}
