//! Generator of WALS-shaped datasets with planted structure.
//!
//! Languages belong to families and genera placed on the globe. Each
//! language draws a few hidden binary traits from its genus; every feature
//! prefers one value per combination of its driving traits. Some features
//! are nearly constant, some follow geography, and coverage is sparse and
//! uneven across both features and languages. The data is meant for
//! examples and tests that need realistic-looking input; it makes no claim
//! to resemble real typological distributions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, LanguageRecord, Role};
use crate::error::{Error, Result};
use crate::features::UNTRUSTED_COUNTRY;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub languages: usize,
    pub features: usize,
    pub families: usize,
    pub traits: usize,
    /// Probability that a feature takes its preferred value.
    pub fidelity: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            languages: 400,
            features: 40,
            families: 24,
            traits: 4,
            fidelity: 0.8,
            seed: 2020,
        }
    }
}

enum FeatureKind {
    /// Preferred value indexed by the driving traits.
    Traits { drivers: Vec<usize>, preferred: Vec<usize> },
    /// One value dominates everywhere.
    Skewed { dominant: usize },
    /// Preferred value by longitude sector.
    Areal { preferred: Vec<usize> },
}

struct FeatureSpec {
    name: String,
    values: usize,
    coverage: f64,
    kind: FeatureKind,
}

pub fn feature_name(j: usize) -> String {
    format!("{}A Synthetic Feature {}", j + 1, j + 1)
}

pub fn value_name(i: usize) -> String {
    const LABELS: [&str; 6] = ["Alpha", "Beta", "Gamma", "Delta", "Epsilon", "Zeta"];
    format!("{} {}", i + 1, LABELS[i % LABELS.len()])
}

fn country_code(rng: &mut ChaCha8Rng) -> String {
    loop {
        let code: String = (0..2).map(|_| rng.gen_range(b'A'..=b'Z') as char).collect();
        if code != UNTRUSTED_COUNTRY {
            return code;
        }
    }
}

/// Generates a fully known dataset (no Masked cells).
pub fn generate(cfg: &SyntheticConfig) -> Result<Dataset> {
    if cfg.languages == 0 || cfg.features < 2 || cfg.families == 0 || cfg.traits == 0 {
        return Err(Error::validation("synthetic config needs languages, ≥2 features, families and traits"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sectors = 6;

    let specs: Vec<FeatureSpec> = (0..cfg.features)
        .map(|j| {
            let values = rng.gen_range(2..=5);
            let u: f64 = rng.gen();
            let coverage = 0.08 + 0.8 * u * u;
            let roll: f64 = rng.gen();
            let kind = if roll < 0.1 {
                FeatureKind::Skewed {
                    dominant: rng.gen_range(0..values),
                }
            } else if roll < 0.25 {
                FeatureKind::Areal {
                    preferred: (0..sectors).map(|_| rng.gen_range(0..values)).collect(),
                }
            } else {
                let n_drivers = if rng.gen_bool(0.5) { 1 } else { 2.min(cfg.traits) };
                let mut all: Vec<usize> = (0..cfg.traits).collect();
                all.shuffle(&mut rng);
                let drivers = all[..n_drivers].to_vec();
                let preferred = (0..1usize << n_drivers)
                    .map(|_| rng.gen_range(0..values))
                    .collect();
                FeatureKind::Traits { drivers, preferred }
            };
            FeatureSpec {
                name: feature_name(j),
                values,
                coverage,
                kind,
            }
        })
        .collect();

    struct Genus {
        family: usize,
        name: String,
        center: (f64, f64),
        trait_probs: Vec<f64>,
        countries: Vec<String>,
    }
    let mut genera = Vec::new();
    for f in 0..cfg.families {
        let center: (f64, f64) = (rng.gen_range(-45.0..65.0), rng.gen_range(-170.0..178.0));
        let family_probs: Vec<f64> = (0..cfg.traits)
            .map(|_| if rng.gen_bool(0.5) { 0.85 } else { 0.15 })
            .collect();
        let family_countries: Vec<String> = (0..3).map(|_| country_code(&mut rng)).collect();
        for g in 0..rng.gen_range(1..=4) {
            let trait_probs = family_probs
                .iter()
                .map(|&p| if rng.gen_bool(0.2) { 1.0 - p } else { p })
                .collect();
            genera.push(Genus {
                family: f,
                name: format!("Genus {f}-{g}"),
                center: (
                    (center.0 + rng.gen_range(-8.0..8.0)).clamp(-85.0, 85.0),
                    (center.1 + rng.gen_range(-10.0..10.0)).clamp(-179.0, 179.0),
                ),
                trait_probs,
                countries: family_countries.clone(),
            });
        }
    }

    let mut records = Vec::with_capacity(cfg.languages);
    for i in 0..cfg.languages {
        let g = &genera[rng.gen_range(0..genera.len())];
        let lat = (g.center.0 + rng.gen_range(-4.0..4.0)).clamp(-89.0, 89.0);
        let lon = (g.center.1 + rng.gen_range(-5.0..5.0)).clamp(-179.9, 179.9);
        let lat = (lat * 100.0).round() / 100.0;
        let lon = (lon * 100.0).round() / 100.0;
        let traits: Vec<bool> = g.trait_probs.iter().map(|&p| rng.gen_bool(p)).collect();
        let mut countries = vec![g.countries[rng.gen_range(0..g.countries.len())].clone()];
        if rng.gen_bool(0.3) {
            countries.push(g.countries[rng.gen_range(0..g.countries.len())].clone());
        }
        if rng.gen_bool(0.08) {
            countries.push(UNTRUSTED_COUNTRY.to_string());
        }
        let mut rec = LanguageRecord::new(
            format!("s{i:04}"),
            format!("Synthlang {i}"),
            lat,
            lon,
            g.name.clone(),
            format!("Family {}", g.family),
        )
        .with_countries(countries);

        let richness: f64 = rng.gen_range(0.3..1.6);
        let sector = (((lon + 180.0) / 360.0 * sectors as f64) as usize).min(sectors - 1);
        let mut known = 0;
        for (j, spec) in specs.iter().enumerate() {
            // Draw the value unconditionally so coverage does not shift the
            // random stream of other features.
            let preferred = match &spec.kind {
                FeatureKind::Traits { drivers, preferred } => {
                    let idx = drivers
                        .iter()
                        .enumerate()
                        .fold(0, |acc, (b, &t)| acc | ((traits[t] as usize) << b));
                    preferred[idx]
                }
                FeatureKind::Skewed { dominant } => *dominant,
                FeatureKind::Areal { preferred } => preferred[sector],
            };
            let fidelity = match spec.kind {
                FeatureKind::Skewed { .. } => 0.97,
                _ => cfg.fidelity,
            };
            let value = if rng.gen_bool(fidelity) {
                preferred
            } else {
                rng.gen_range(0..spec.values)
            };
            let covered = rng.gen::<f64>() < spec.coverage * richness;
            let forced = known < 2 && j + 2 >= specs.len();
            if covered || forced {
                rec.set(spec.name.clone(), crate::data::FeatureCell::Known(value_name(value)));
                known += 1;
            }
        }
        records.push(rec);
    }
    Dataset::new(Role::Train, records)
}

/// Splits a generated dataset into training and development parts; every
/// `stride`-th language goes to development.
pub fn split(d: &Dataset, stride: usize) -> Result<(Dataset, Dataset)> {
    if stride < 2 {
        return Err(Error::validation("stride must be at least 2"));
    }
    let (dev, train): (Vec<_>, Vec<_>) = d
        .records()
        .iter()
        .cloned()
        .enumerate()
        .partition(|(i, _)| i % stride == stride - 1);
    Ok((
        Dataset::new(Role::Train, train.into_iter().map(|(_, r)| r).collect())?,
        Dataset::new(Role::Dev, dev.into_iter().map(|(_, r)| r).collect())?,
    ))
}

/// Default generated train/dev pair with roughly one language in seven in
/// the development part.
pub fn train_dev(cfg: &SyntheticConfig) -> Result<(Dataset, Dataset)> {
    split(&generate(cfg)?, 7)
}
