//! Trains the embedding model on training plus visible dev cells and
//! predicts the masked dev cells.
//!
//!     cargo run --release --example neural [DATA_DIR]
//!
//! Uses a small configuration so it finishes quickly; the defaults of
//! `HyperParams` are the tuned ones (300 clusters, 512 dimensions).

use std::env;

use walspred::{
    accuracy, mask_split, merge_visible, read_split_dir, synthetic, GoldStandard, HyperParams, NeuralSystem,
};

fn main() -> walspred::Result<()> {
    env_logger::init();
    let (train, dev) = match env::args().nth(1) {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let masked = mask_split(&dev, 0.5, 42)?;
    let gold = GoldStandard::from_datasets(&dev, &masked)?;

    let hp = HyperParams {
        k_clusters: 50,
        dim: 64,
        dropout: 0.3,
        epochs: 60,
        ..HyperParams::default()
    };
    let (sys, report) = NeuralSystem::train(&merge_visible(&train, &masked)?, &hp)?;
    for (epoch, loss) in report.epoch_losses.iter().enumerate().step_by(10) {
        println!("epoch {epoch:>3}  loss {loss:.4}");
    }
    let preds = sys.predict_all(&masked);
    println!("dev accuracy {:.4}", accuracy(&gold, &preds).overall);

    let path = env::temp_dir().join("walspred-neural.json");
    sys.save(&path)?;
    let reloaded = NeuralSystem::load(&path)?;
    assert_eq!(reloaded.predict_all(&masked), preds);
    println!("saved to {}", path.display());
    Ok(())
}
