//! Derived source features: lat/lon zones, country codes and coordinate
//! clusters.
//!
//!     cargo run --example geo_features [DATA_DIR]

use std::env;

use walspred::features::cluster_records;
use walspred::{derive_features, read_split_dir, synthetic, GeoZoning, Profile};

fn main() -> walspred::Result<()> {
    let (train, _) = match env::args().nth(1) {
        Some(dir) => read_split_dir(dir)?,
        None => synthetic::train_dev(&Default::default())?,
    };
    let zoning = GeoZoning::default();
    print!("zone boundaries:\n{zoning}");

    let clustering = cluster_records(train.records(), 30, 42)?;
    println!(
        "\nk-means with k = 30: inertia {:.1} -> {:.1} in {} iterations",
        clustering.inertia_history[0],
        clustering.inertia(),
        clustering.inertia_history.len() - 1
    );

    for rec in train.records().iter().take(3) {
        println!("\n{} at ({:.2}, {:.2})", rec.wals_code, rec.latitude, rec.longitude);
        for (f, v) in derive_features(rec, &zoning, None, Profile::Probabilistic)? {
            println!("  prob   {f}: {v}");
        }
        for (f, v) in derive_features(rec, &zoning, Some(&clustering), Profile::Neural)? {
            println!("  neural {f}: {v}");
        }
    }
    Ok(())
}
