//! Fits the co-occurrence model, lists the most informative feature pairs
//! and explains a few predictions.
//!
//!     cargo run --release --example probabilistic [DATA_DIR]

use std::env;

use walspred::{
    accuracy, mask_split, merge_visible, read_split_dir, synthetic, GeoZoning, GoldStandard, ProbModel, ScoreVariant,
};

fn main() -> walspred::Result<()> {
    let (train, dev) = match env::args().nth(1) {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let masked = mask_split(&dev, 0.5, 42)?;
    let gold = GoldStandard::from_datasets(&dev, &masked)?;
    let model = ProbModel::fit(&merge_visible(&train, &masked)?, &GeoZoning::default())?;

    let mut pairs: Vec<(f64, &str, &str)> = model
        .table
        .pairs()
        .into_iter()
        .filter(|(s, t)| s < t)
        .map(|(s, t)| (model.mi.get(&model.table, s, t).unwrap_or(0.0), s, t))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("most informative pairs (nats):");
    for (mi, s, t) in pairs.iter().take(5) {
        println!("  {mi:.3}  {s}  <->  {t}");
    }

    for variant in [ScoreVariant::CondOnly, ScoreVariant::Score1, ScoreVariant::Score2] {
        let preds = model.predict_all(&masked, variant);
        println!("{variant:?}: dev accuracy {:.4}", accuracy(&gold, &preds).overall);
    }

    println!();
    let rec = &masked.records()[0];
    for feature in rec.masked().take(4) {
        let p = model.predict_feature(rec, feature, ScoreVariant::Score2)?;
        let (sf, sv) = p.source.clone().unwrap_or_default();
        println!(
            "{} {feature} -> {} (score {:.3}, from {sf} = {sv}; gold {})",
            rec.wals_code,
            p.value,
            p.score,
            gold.get(&rec.wals_code, feature).unwrap_or("?")
        );
    }
    Ok(())
}
