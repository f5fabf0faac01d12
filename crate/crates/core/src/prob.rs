//! The probabilistic correlation model.
//!
//! For an unknown target feature `t` of a language, every known source
//! observation `s = x` of that language proposes values `y` of `t`. Each
//! proposal is scored from co-occurrence statistics over languages where both
//! `s` and `t` are known:
//!
//! * `CondOnly`: `P(t=y | s=x)`
//! * `Score1`:   `P(t=y | s=x) · log c(s=x, t=y)`
//! * `Score2`:   `Score1 · I(s, t)`, with `I` the mutual information of `s`
//!   and `t`.
//!
//! The single best-scored proposal wins; no voting across sources.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LanguageRecord};
use crate::error::{Error, Result};
use crate::features::{derive_features, GeoZoning, Profile};
use crate::prediction::{Predictions, ScoredPrediction, System};

pub const MODEL_FORMAT: &str = "walspred-prob";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }

    /// Converts a quantity measured in nats into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreVariant {
    CondOnly,
    Score1,
    Score2,
}

/// Interned feature names and their value ranges. Value ids follow
/// lexicographic order.
#[derive(Debug, Clone, Default)]
struct FeatureIndex {
    names: Vec<String>,
    by_name: HashMap<String, u32>,
    values: Vec<Vec<String>>,
    value_ids: Vec<HashMap<String, u32>>,
    /// Known-value frequencies per feature, over languages.
    counts: Vec<Vec<u32>>,
}

impl FeatureIndex {
    fn from_parts(features: Vec<(String, Vec<String>, Vec<u32>)>) -> Self {
        let mut idx = FeatureIndex::default();
        for (i, (name, values, counts)) in features.into_iter().enumerate() {
            idx.by_name.insert(name.clone(), i as u32);
            idx.names.push(name);
            idx.value_ids.push(
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (v.clone(), j as u32))
                    .collect(),
            );
            idx.values.push(values);
            idx.counts.push(counts);
        }
        idx
    }

    fn feature(&self, name: &str) -> Result<u32> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    fn value(&self, f: u32, v: &str) -> Option<u32> {
        self.value_ids[f as usize].get(v).copied()
    }
}

/// Co-occurrence counts of a single ordered feature pair `(s, t)`.
#[derive(Debug, Clone, Default, PartialEq)]
struct PairStats {
    total: u32,
    /// `(x, y) → c(s=x, t=y)`
    joint: BTreeMap<(u32, u32), u32>,
    /// `x → c(s=x)` restricted to observations where `t` is known.
    source: BTreeMap<u32, u32>,
    target: BTreeMap<u32, u32>,
}

impl PairStats {
    fn finish(&mut self) {
        self.source.clear();
        self.target.clear();
        self.total = 0;
        for (&(x, y), &c) in &self.joint {
            *self.source.entry(x).or_default() += c;
            *self.target.entry(y).or_default() += c;
            self.total += c;
        }
    }

    fn mutual_information(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let n = self.total as f64;
        let mut mi = 0.0;
        for (&(x, y), &c) in &self.joint {
            // p(x,y) / (p(x) p(y)) = c·N / (c_x·c_y), exact in integers so
            // independent cells contribute exactly zero.
            let num = c as u128 * self.total as u128;
            let den = self.source[&x] as u128 * self.target[&y] as u128;
            mi += c as f64 / n * (num as f64 / den as f64).ln();
        }
        mi.max(0.0)
    }
}

/// Joint and marginal counts for every ordered pair of features that are
/// both known in at least one language.
///
/// The country feature may carry several values per language; each code is
/// an independent observation, so pair totals count observation pairs.
#[derive(Debug, Clone)]
pub struct CooccurrenceTable {
    index: FeatureIndex,
    pairs: HashMap<(u32, u32), PairStats>,
}

/// Mutual information in nats for each co-occurring feature pair.
#[derive(Debug, Clone, Default)]
pub struct MiTable {
    mi: HashMap<(u32, u32), f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutualInfo {
    pub nats: f64,
    /// False when the two features never co-occur; `nats` is then 0.
    pub supported: bool,
}

/// Builds co-occurrence counts from the Known cells of `d` plus the derived
/// general-property features.
pub fn fit_counts(d: &Dataset, zoning: &GeoZoning) -> Result<CooccurrenceTable> {
    let observations: Vec<Vec<(String, String)>> = d
        .records()
        .iter()
        .map(|r| derive_features(r, zoning, None, Profile::Probabilistic))
        .collect::<Result<_>>()?;

    let mut ranges: BTreeMap<&str, BTreeMap<&str, u32>> = BTreeMap::new();
    for obs in &observations {
        for (f, v) in obs {
            *ranges.entry(f).or_default().entry(v).or_default() += 1;
        }
    }
    let index = FeatureIndex::from_parts(
        ranges
            .into_iter()
            .map(|(f, vals)| {
                let (values, counts) = vals.into_iter().map(|(v, c)| (v.to_string(), c)).unzip();
                (f.to_string(), values, counts)
            })
            .collect(),
    );

    let mut pairs: HashMap<(u32, u32), PairStats> = HashMap::new();
    for obs in &observations {
        let ids: Vec<(u32, u32)> = obs
            .iter()
            .map(|(f, v)| {
                let fid = index.by_name[f.as_str()];
                (fid, index.value(fid, v).expect("value interned above"))
            })
            .collect();
        for &(s, x) in &ids {
            for &(t, y) in &ids {
                if s != t {
                    *pairs.entry((s, t)).or_default().joint.entry((x, y)).or_default() += 1;
                }
            }
        }
    }
    for p in pairs.values_mut() {
        p.finish();
    }
    Ok(CooccurrenceTable { index, pairs })
}

impl CooccurrenceTable {
    pub fn feature_names(&self) -> &[String] {
        &self.index.names
    }

    pub fn value_range(&self, feature: &str) -> Result<&[String]> {
        let f = self.index.feature(feature)?;
        Ok(&self.index.values[f as usize])
    }

    pub fn is_empty(&self) -> bool {
        self.index.names.is_empty()
    }

    /// Most frequent Known value of `feature` (ties → lexicographically
    /// smallest).
    pub fn global_mode(&self, feature: &str) -> Result<&str> {
        let f = self.index.feature(feature)? as usize;
        let counts = &self.index.counts[f];
        let best = (0..counts.len())
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
        Ok(&self.index.values[f][best])
    }

    fn ids(&self, s: &str, x: &str, t: &str, y: &str) -> Result<(u32, Option<u32>, u32, Option<u32>)> {
        let sf = self.index.feature(s)?;
        let tf = self.index.feature(t)?;
        Ok((sf, self.index.value(sf, x), tf, self.index.value(tf, y)))
    }

    pub fn joint(&self, s: &str, x: &str, t: &str, y: &str) -> Result<u32> {
        let (sf, xv, tf, yv) = self.ids(s, x, t, y)?;
        Ok(match (xv, yv, self.pairs.get(&(sf, tf))) {
            (Some(x), Some(y), Some(p)) => p.joint.get(&(x, y)).copied().unwrap_or(0),
            _ => 0,
        })
    }

    /// Number of observations of `s = x` in languages where `t` is known.
    pub fn source_marginal(&self, s: &str, x: &str, t: &str) -> Result<u32> {
        let sf = self.index.feature(s)?;
        let tf = self.index.feature(t)?;
        Ok(match (self.index.value(sf, x), self.pairs.get(&(sf, tf))) {
            (Some(x), Some(p)) => p.source.get(&x).copied().unwrap_or(0),
            _ => 0,
        })
    }

    pub fn pair_total(&self, s: &str, t: &str) -> Result<u32> {
        let sf = self.index.feature(s)?;
        let tf = self.index.feature(t)?;
        Ok(self.pairs.get(&(sf, tf)).map_or(0, |p| p.total))
    }

    /// `P(t=y | s=x)`; 0 when `s = x` never co-occurs with a known `t`.
    pub fn cond_prob(&self, s: &str, x: &str, t: &str, y: &str) -> Result<f64> {
        let marginal = self.source_marginal(s, x, t)?;
        if marginal == 0 {
            return Ok(0.0);
        }
        Ok(self.joint(s, x, t, y)? as f64 / marginal as f64)
    }

    pub fn mutual_information(&self, s: &str, t: &str) -> Result<MutualInfo> {
        let sf = self.index.feature(s)?;
        let tf = self.index.feature(t)?;
        Ok(match self.pairs.get(&(sf, tf)) {
            Some(p) if p.total > 0 => MutualInfo {
                nats: p.mutual_information(),
                supported: true,
            },
            _ => MutualInfo {
                nats: 0.0,
                supported: false,
            },
        })
    }

    /// Every ordered pair `(s, t)` with at least one co-occurrence.
    pub fn pairs(&self) -> Vec<(&str, &str)> {
        let mut keys: Vec<&(u32, u32)> = self.pairs.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|&(s, t)| (self.index.names[s as usize].as_str(), self.index.names[t as usize].as_str()))
            .collect()
    }

    /// `(x, y, c)` for every joint entry of the pair `(s, t)`.
    pub fn joint_entries(&self, s: &str, t: &str) -> Result<Vec<(&str, &str, u32)>> {
        let sf = self.index.feature(s)?;
        let tf = self.index.feature(t)?;
        Ok(self
            .pairs
            .get(&(sf, tf))
            .map(|p| {
                p.joint
                    .iter()
                    .map(|(&(x, y), &c)| {
                        (
                            self.index.values[sf as usize][x as usize].as_str(),
                            self.index.values[tf as usize][y as usize].as_str(),
                            c,
                        )
                    })
                    .collect()
            })
            .unwrap_or_default())
    }
}

impl MiTable {
    pub fn from_counts(tab: &CooccurrenceTable) -> Self {
        MiTable {
            mi: tab
                .pairs
                .iter()
                .map(|(&k, p)| (k, p.mutual_information()))
                .collect(),
        }
    }

    pub fn get(&self, tab: &CooccurrenceTable, s: &str, t: &str) -> Result<f64> {
        let sf = tab.index.feature(s)?;
        let tf = tab.index.feature(t)?;
        Ok(self.mi.get(&(sf, tf)).copied().unwrap_or(0.0))
    }
}

/// `score1 = P(t=y | s=x) · log c(s=x, t=y)`, zero whenever `c ≤ 1`.
pub fn score1_from(p: f64, count: u32, base: LogBase) -> f64 {
    if count <= 1 {
        0.0
    } else {
        p * base.log(count as f64)
    }
}

/// A fitted probabilistic model: counts, mutual information and the zoning
/// used to derive geographic source features.
#[derive(Debug, Clone)]
pub struct ProbModel {
    pub table: CooccurrenceTable,
    pub mi: MiTable,
    pub zoning: GeoZoning,
    pub log_base: LogBase,
}

impl ProbModel {
    pub fn fit(d: &Dataset, zoning: &GeoZoning) -> Result<Self> {
        let table = fit_counts(d, zoning)?;
        let mi = MiTable::from_counts(&table);
        Ok(ProbModel {
            table,
            mi,
            zoning: zoning.clone(),
            log_base: LogBase::Natural,
        })
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    pub fn score1(&self, s: &str, x: &str, t: &str, y: &str) -> Result<f64> {
        let p = self.table.cond_prob(s, x, t, y)?;
        let c = self.table.joint(s, x, t, y)?;
        Ok(score1_from(p, c, self.log_base))
    }

    pub fn score2(&self, s: &str, x: &str, t: &str, y: &str) -> Result<f64> {
        let mi = self.mi.get(&self.table, s, t)?;
        Ok(self.score1(s, x, t, y)? * self.log_base.from_nats(mi))
    }

    /// Predicts `target` for `rec` from its single best-scored source
    /// observation. Falls back to the global mode when no source yields a
    /// positive score.
    pub fn predict_feature(
        &self,
        rec: &LanguageRecord,
        target: &str,
        variant: ScoreVariant,
    ) -> Result<ScoredPrediction> {
        let tab = &self.table;
        let tf = tab.index.feature(target).map_err(|_| Error::Prediction {
            language: rec.wals_code.clone(),
            feature: target.to_string(),
            reason: "feature has no known values in the fitted data".into(),
        })?;
        let sources = derive_features(rec, &self.zoning, None, Profile::Probabilistic)?;

        // (score, joint count, value id, source index)
        let mut best: Option<(f64, u32, u32, usize)> = None;
        for (si, (s, x)) in sources.iter().enumerate() {
            let Ok(sf) = tab.index.feature(s) else { continue };
            if sf == tf {
                continue;
            }
            let Some(xv) = tab.index.value(sf, x) else { continue };
            let Some(pair) = tab.pairs.get(&(sf, tf)) else { continue };
            let Some(&marginal) = pair.source.get(&xv) else { continue };
            let mi = self.log_base.from_nats(self.mi.mi.get(&(sf, tf)).copied().unwrap_or(0.0));
            for (&(_, yv), &c) in pair.joint.range((xv, 0)..=(xv, u32::MAX)) {
                let p = c as f64 / marginal as f64;
                let score = match variant {
                    ScoreVariant::CondOnly => p,
                    ScoreVariant::Score1 => score1_from(p, c, self.log_base),
                    ScoreVariant::Score2 => score1_from(p, c, self.log_base) * mi,
                };
                let better = match best {
                    None => true,
                    Some((bs, bc, by, _)) => {
                        score > bs || (score == bs && (c > bc || (c == bc && yv < by)))
                    }
                };
                if better {
                    best = Some((score, c, yv, si));
                }
            }
        }

        let values = &tab.index.values[tf as usize];
        match best {
            Some((score, _, yv, si)) if score > 0.0 => {
                let mut p = ScoredPrediction::new(
                    &rec.wals_code,
                    target,
                    &values[yv as usize],
                    score,
                    System::Probabilistic,
                );
                p.source = Some(sources[si].clone());
                Ok(p)
            }
            _ => {
                let mut p = ScoredPrediction::new(
                    &rec.wals_code,
                    target,
                    tab.global_mode(target)?,
                    0.0,
                    System::Probabilistic,
                );
                p.fallback_used = true;
                Ok(p)
            }
        }
    }

    /// One prediction per Masked cell of `d`. Targets with no known values
    /// in the fitted data are skipped and logged; callers fill them in.
    pub fn predict_all(&self, d: &Dataset, variant: ScoreVariant) -> Predictions {
        let mut out = Predictions::new();
        for rec in d.records() {
            for t in rec.masked() {
                match self.predict_feature(rec, t, variant) {
                    Ok(p) => {
                        out.insert(p.key(), p);
                    }
                    Err(e) => log::warn!("{e}"),
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let idx = &self.table.index;
        let features = idx
            .names
            .iter()
            .enumerate()
            .map(|(i, name)| SerFeature {
                name: name.clone(),
                values: idx.values[i].clone(),
                counts: idx.counts[i].clone(),
            })
            .collect();
        let mut keys: Vec<(u32, u32)> = self.table.pairs.keys().copied().collect();
        keys.sort_unstable();
        let pairs = keys
            .iter()
            .map(|&(s, t)| SerPair {
                source: s,
                target: t,
                joint: self.table.pairs[&(s, t)]
                    .joint
                    .iter()
                    .map(|(&(x, y), &c)| [x, y, c])
                    .collect(),
                mutual_information: self.mi.mi.get(&(s, t)).copied().unwrap_or(0.0),
            })
            .collect();
        let doc = SerModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            log_base: self.log_base,
            zoning: self.zoning.clone(),
            features,
            pairs,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SerModel = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
            return Err(Error::validation(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        let index = FeatureIndex::from_parts(
            doc.features
                .into_iter()
                .map(|f| (f.name, f.values, f.counts))
                .collect(),
        );
        let mut pairs = HashMap::new();
        let mut mi = HashMap::new();
        for p in doc.pairs {
            let mut stats = PairStats {
                joint: p.joint.iter().map(|&[x, y, c]| ((x, y), c)).collect(),
                ..Default::default()
            };
            stats.finish();
            pairs.insert((p.source, p.target), stats);
            mi.insert((p.source, p.target), p.mutual_information);
        }
        Ok(ProbModel {
            table: CooccurrenceTable { index, pairs },
            mi: MiTable { mi },
            zoning: doc.zoning,
            log_base: doc.log_base,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct SerFeature {
    name: String,
    values: Vec<String>,
    counts: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct SerPair {
    source: u32,
    target: u32,
    joint: Vec<[u32; 3]>,
    mutual_information: f64,
}

#[derive(Serialize, Deserialize)]
struct SerModel {
    format: String,
    version: u32,
    log_base: LogBase,
    zoning: GeoZoning,
    features: Vec<SerFeature>,
    pairs: Vec<SerPair>,
}
