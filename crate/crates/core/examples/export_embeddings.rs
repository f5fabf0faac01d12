//! Trains a small embedding model, writes the language vectors as CSV and
//! shows the closest languages by cosine similarity.
//!
//!     cargo run --release --example export_embeddings [DATA_DIR]

use std::env;

use walspred::knn::cosine_distance;
use walspred::neural::{export_embeddings, read_embeddings};
use walspred::{read_split_dir, synthetic, HyperParams, NeuralSystem};

fn main() -> walspred::Result<()> {
    let (train, _) = match env::args().nth(1) {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let hp = HyperParams {
        k_clusters: 50,
        dim: 32,
        epochs: 40,
        ..HyperParams::default()
    };
    let (sys, _) = NeuralSystem::train(&train, &hp)?;
    let path = env::temp_dir().join("walspred-embeddings.csv");
    export_embeddings(&sys, &path)?;
    let emb = read_embeddings(&path)?;
    println!("{} vectors written to {}", emb.len(), path.display());

    let (code, v) = emb.vectors.iter().next().expect("no languages");
    let mut near: Vec<(f64, &String)> = emb
        .vectors
        .iter()
        .filter(|(c, _)| *c != code)
        .map(|(c, w)| (1.0 - cosine_distance(v, w), c))
        .collect();
    near.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("closest to {code} ({}):", emb.families[code]);
    for (sim, c) in near.iter().take(5) {
        println!("  {c}  {sim:.3}  {}", emb.families[*c]);
    }
    Ok(())
}
