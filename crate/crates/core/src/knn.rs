//! k-nearest-neighbour predictors over languages.
//!
//! Two distances are supported: Hamming distance over linguistic features,
//! where any unknown value counts as a mismatch, and cosine distance between
//! learned language embeddings. The target value is the majority vote of
//! the neighbours that know it.

use std::collections::{BTreeMap, HashMap};

use crate::data::{Dataset, LanguageRecord};
use crate::error::{Error, Result};
use crate::prediction::{Predictions, ScoredPrediction, System};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Hamming,
    CosineEmbedding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query: String,
    pub k: usize,
    /// `(wals_code, distance)` in ascending distance, ties by code.
    pub neighbors: Vec<(String, f64)>,
}

/// Language embedding vectors keyed by WALS code.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Embeddings {
    pub vectors: BTreeMap<String, Vec<f64>>,
    pub families: BTreeMap<String, String>,
}

impl Embeddings {
    pub fn get(&self, code: &str) -> Option<&[f64]> {
        self.vectors.get(code).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Number of features in `feature_set` whose values are not both known and
/// equal. A feature unknown in both records is a mismatch too.
pub fn hamming_distance(a: &LanguageRecord, b: &LanguageRecord, feature_set: &[String]) -> usize {
    feature_set
        .iter()
        .filter(|f| match (a.known_value(f), b.known_value(f)) {
            (Some(x), Some(y)) => x != y,
            _ => true,
        })
        .count()
}

/// `1 − cos(a, b)`, in `[0, 2]`. A zero vector is at distance 1 from
/// everything.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 2.0)
}

/// Reusable kNN predictor over a pool of candidate neighbour languages.
pub struct KnnPredictor<'a> {
    pool: &'a Dataset,
    metric: Metric,
    embeddings: Option<&'a Embeddings>,
    feature_set: Vec<String>,
    /// Pool records encoded over `feature_set` for Hamming distance.
    encoded: Vec<Vec<Option<u32>>>,
    value_ids: Vec<HashMap<String, u32>>,
    modes: BTreeMap<String, String>,
    index: HashMap<&'a str, usize>,
}

impl<'a> KnnPredictor<'a> {
    /// Hamming predictor over all linguistic features of the pool. With
    /// `include_general`, genus and family are compared as two more
    /// features.
    pub fn hamming(pool: &'a Dataset, include_general: bool) -> Self {
        let mut feature_set: Vec<String> = pool.feature_names().into_iter().collect();
        if include_general {
            feature_set.push(crate::features::GENUS.into());
            feature_set.push(crate::features::FAMILY.into());
        }
        Self::build(pool, Metric::Hamming, None, feature_set)
    }

    /// Hamming predictor over an explicit feature list.
    pub fn hamming_with_features(pool: &'a Dataset, feature_set: Vec<String>) -> Self {
        Self::build(pool, Metric::Hamming, None, feature_set)
    }

    pub fn cosine(pool: &'a Dataset, embeddings: &'a Embeddings) -> Result<Self> {
        if let Some(r) = pool.records().iter().find(|r| embeddings.get(&r.wals_code).is_none()) {
            return Err(Error::validation(format!("no embedding for language {}", r.wals_code)));
        }
        Ok(Self::build(pool, Metric::CosineEmbedding, Some(embeddings), Vec::new()))
    }

    fn build(
        pool: &'a Dataset,
        metric: Metric,
        embeddings: Option<&'a Embeddings>,
        feature_set: Vec<String>,
    ) -> Self {
        let mut value_ids: Vec<HashMap<String, u32>> = vec![HashMap::new(); feature_set.len()];
        let encoded = if metric == Metric::Hamming {
            pool.records()
                .iter()
                .map(|r| encode_pool(r, &feature_set, &mut value_ids))
                .collect()
        } else {
            Vec::new()
        };
        let modes = pool
            .feature_vocab()
            .keys()
            .map(|f| {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                for r in pool.records() {
                    if let Some(v) = r.known_value(f) {
                        *counts.entry(v).or_default() += 1;
                    }
                }
                (f.clone(), majority(counts.iter().map(|(v, c)| (*v, *c))).to_string())
            })
            .collect();
        let index = pool
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| (r.wals_code.as_str(), i))
            .collect();
        KnnPredictor {
            pool,
            index,
            metric,
            embeddings,
            feature_set,
            encoded,
            value_ids,
            modes,
        }
    }

    pub fn feature_set(&self) -> &[String] {
        &self.feature_set
    }

    fn distance_to(&self, query: &LanguageRecord, encoded_query: &[Option<u32>], idx: usize) -> Result<f64> {
        match self.metric {
            Metric::Hamming => Ok(encoded_query
                .iter()
                .zip(&self.encoded[idx])
                .filter(|(a, b)| !matches!((a, b), (Some(x), Some(y)) if x == y))
                .count() as f64),
            Metric::CosineEmbedding => {
                let emb = self.embeddings.expect("cosine predictor has embeddings");
                let q = emb
                    .get(&query.wals_code)
                    .ok_or_else(|| Error::UnknownLanguage(query.wals_code.clone()))?;
                let other = emb
                    .get(&self.pool.records()[idx].wals_code)
                    .expect("pool coverage checked at construction");
                Ok(cosine_distance(q, other))
            }
        }
    }

    /// The `k` pool languages closest to `query`, excluding the query.
    pub fn neighbors(&self, query: &LanguageRecord, k: usize) -> Result<NeighborList> {
        let encoded_query = if self.metric == Metric::Hamming {
            encode_query(query, &self.feature_set, &self.value_ids)
        } else {
            Vec::new()
        };
        let mut all = Vec::with_capacity(self.pool.len());
        for (i, r) in self.pool.records().iter().enumerate() {
            if r.wals_code == query.wals_code {
                continue;
            }
            all.push((self.distance_to(query, &encoded_query, i)?, r.wals_code.as_str()));
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        all.truncate(k);
        Ok(NeighborList {
            query: query.wals_code.clone(),
            k,
            neighbors: all.into_iter().map(|(d, c)| (c.to_string(), d)).collect(),
        })
    }

    /// Majority vote of the neighbours that know `target`; ties go to the
    /// value of the nearest tied voter. Without any voter the pool's most
    /// frequent value is returned with `fallback_used`.
    pub fn predict(&self, query: &LanguageRecord, target: &str, k: usize) -> Result<ScoredPrediction> {
        if k == 0 {
            return Err(Error::validation("k must be at least 1"));
        }
        let nl = self.neighbors(query, k)?;
        self.vote(query, target, &nl)
    }

    fn vote(&self, query: &LanguageRecord, target: &str, nl: &NeighborList) -> Result<ScoredPrediction> {
        let mode = self.modes.get(target).ok_or_else(|| Error::Prediction {
            language: query.wals_code.clone(),
            feature: target.to_string(),
            reason: "feature has no known values among neighbour candidates".into(),
        })?;
        let system = match self.metric {
            Metric::Hamming => System::KnnHamming,
            Metric::CosineEmbedding => System::KnnEmbed,
        };
        let records = self.pool.records();
        let voters: Vec<&str> = nl
            .neighbors
            .iter()
            .filter_map(|(c, _)| records[self.index[c.as_str()]].known_value(target))
            .collect();
        if voters.is_empty() {
            let mut p = ScoredPrediction::new(&query.wals_code, target, mode, 0.0, system);
            p.fallback_used = true;
            return Ok(p);
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for v in &voters {
            *counts.entry(v).or_default() += 1;
        }
        let top = *counts.values().max().unwrap();
        let winner = voters.iter().find(|v| counts[**v] == top).unwrap();
        Ok(ScoredPrediction::new(
            &query.wals_code,
            target,
            *winner,
            top as f64 / voters.len() as f64,
            system,
        ))
    }

    /// One prediction per Masked cell of `d`; the neighbour list is computed
    /// once per language.
    pub fn predict_all(&self, d: &Dataset, k: usize) -> Predictions {
        let mut out = Predictions::new();
        if k == 0 {
            log::warn!("k must be at least 1");
            return out;
        }
        for rec in d.records() {
            if rec.masked_count() == 0 {
                continue;
            }
            let nl = match self.neighbors(rec, k) {
                Ok(nl) => nl,
                Err(e) => {
                    log::warn!("{e}");
                    continue;
                }
            };
            for t in rec.masked() {
                match self.vote(rec, t, &nl) {
                    Ok(p) => {
                        out.insert(p.key(), p);
                    }
                    Err(e) => log::warn!("{e}"),
                }
            }
        }
        out
    }
}

/// Most frequent value; ties → lexicographically smallest.
fn majority<'v>(counts: impl Iterator<Item = (&'v str, usize)>) -> &'v str {
    counts
        .fold(None, |best: Option<(&str, usize)>, (v, c)| match best {
            Some((bv, bc)) if bc > c || (bc == c && bv <= v) => Some((bv, bc)),
            _ => Some((v, c)),
        })
        .map_or("", |(v, _)| v)
}

fn general_or_known<'r>(rec: &'r LanguageRecord, feature: &str) -> Option<&'r str> {
    match feature {
        crate::features::GENUS => Some(rec.genus.as_str()),
        crate::features::FAMILY => Some(rec.family.as_str()),
        _ => rec.known_value(feature),
    }
}

fn encode_pool(
    rec: &LanguageRecord,
    feature_set: &[String],
    ids: &mut [HashMap<String, u32>],
) -> Vec<Option<u32>> {
    feature_set
        .iter()
        .zip(ids.iter_mut())
        .map(|(f, map)| {
            let v = general_or_known(rec, f)?;
            let next = map.len() as u32;
            Some(*map.entry(v.to_string()).or_insert(next))
        })
        .collect()
}

/// Values unseen in the pool get an id that matches nothing.
fn encode_query(rec: &LanguageRecord, feature_set: &[String], ids: &[HashMap<String, u32>]) -> Vec<Option<u32>> {
    feature_set
        .iter()
        .zip(ids)
        .map(|(f, map)| general_or_known(rec, f).map(|v| map.get(v).copied().unwrap_or(u32::MAX)))
        .collect()
}

/// Convenience wrapper building a one-off predictor.
pub fn knn_predict(
    d: &Dataset,
    rec: &LanguageRecord,
    target: &str,
    k: usize,
    metric: Metric,
    embeddings: Option<&Embeddings>,
) -> Result<ScoredPrediction> {
    let predictor = match metric {
        Metric::Hamming => KnnPredictor::hamming(d, false),
        Metric::CosineEmbedding => KnnPredictor::cosine(
            d,
            embeddings.ok_or_else(|| Error::validation("cosine kNN needs embeddings"))?,
        )?,
    };
    predictor.predict(rec, target, k)
}
