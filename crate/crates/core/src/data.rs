//! Language records, datasets, and the tab-separated file format they are
//! stored in.
//!
//! A data file has one header row followed by one row per language:
//!
//! ```text
//! wals_code  name  latitude  longitude  genus  family  countrycodes  features
//! ```
//!
//! Columns are tab-separated. Country codes are space-separated inside their
//! column. The features column holds `|`-separated `name=value` entries, where
//! the literal value `?` marks a masked cell that has to be predicted.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const HEADER: [&str; 8] = [
    "wals_code",
    "name",
    "latitude",
    "longitude",
    "genus",
    "family",
    "countrycodes",
    "features",
];

/// Value literal marking a masked cell in data files.
pub const MASK_SENTINEL: &str = "?";

/// Number of general properties every language carries.
pub const GENERAL_PROPERTY_COUNT: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FeatureCell {
    Known(String),
    Masked,
    Absent,
}

impl FeatureCell {
    pub fn known(&self) -> Option<&str> {
        match self {
            FeatureCell::Known(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_masked(&self) -> bool {
        matches!(self, FeatureCell::Masked)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Train,
    Dev,
    Test,
    Merged,
}

/// One language: the seven general properties plus its sparse linguistic
/// properties. Absent cells are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageRecord {
    pub wals_code: String,
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub genus: String,
    pub family: String,
    pub country_codes: Vec<String>,
    features: BTreeMap<String, FeatureCell>,
}

impl LanguageRecord {
    pub fn new(
        wals_code: impl Into<String>,
        name: impl Into<String>,
        latitude: f64,
        longitude: f64,
        genus: impl Into<String>,
        family: impl Into<String>,
    ) -> Self {
        LanguageRecord {
            wals_code: wals_code.into(),
            name: name.into(),
            latitude,
            longitude,
            genus: genus.into(),
            family: family.into(),
            country_codes: Vec::new(),
            features: BTreeMap::new(),
        }
    }

    pub fn with_countries<I, S>(mut self, codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for code in codes {
            let code = code.into();
            if !self.country_codes.contains(&code) {
                self.country_codes.push(code);
            }
        }
        self
    }

    pub fn with_feature(mut self, name: impl Into<String>, cell: FeatureCell) -> Self {
        self.set(name, cell);
        self
    }

    pub fn with_known(self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.with_feature(name, FeatureCell::Known(value.into()))
    }

    pub fn with_masked(self, name: impl Into<String>) -> Self {
        self.with_feature(name, FeatureCell::Masked)
    }

    /// Sets a linguistic cell. Setting `Absent` removes it.
    pub fn set(&mut self, name: impl Into<String>, cell: FeatureCell) {
        let name = name.into();
        match cell {
            FeatureCell::Absent => {
                self.features.remove(&name);
            }
            FeatureCell::Known(v) if v.is_empty() => {
                self.features.remove(&name);
            }
            cell => {
                self.features.insert(name, cell);
            }
        }
    }

    pub fn cell(&self, feature: &str) -> FeatureCell {
        self.features
            .get(feature)
            .cloned()
            .unwrap_or(FeatureCell::Absent)
    }

    pub fn known_value(&self, feature: &str) -> Option<&str> {
        self.features.get(feature).and_then(FeatureCell::known)
    }

    /// Linguistic cells in feature-name order (Known and Masked only).
    pub fn cells(&self) -> impl Iterator<Item = (&str, &FeatureCell)> {
        self.features.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn known(&self) -> impl Iterator<Item = (&str, &str)> {
        self.features
            .iter()
            .filter_map(|(k, v)| v.known().map(|v| (k.as_str(), v)))
    }

    pub fn masked(&self) -> impl Iterator<Item = &str> {
        self.features
            .iter()
            .filter(|(_, v)| v.is_masked())
            .map(|(k, _)| k.as_str())
    }

    pub fn known_count(&self) -> usize {
        self.known().count()
    }

    pub fn masked_count(&self) -> usize {
        self.masked().count()
    }

    fn validate(&self) -> Result<()> {
        if self.wals_code.is_empty() {
            return Err(Error::validation("empty wals_code"));
        }
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::validation(format!(
                "{}: latitude {} out of range",
                self.wals_code, self.latitude
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::validation(format!(
                "{}: longitude {} out of range",
                self.wals_code, self.longitude
            )));
        }
        Ok(())
    }
}

/// A named collection of language records.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    role: Role,
    records: Vec<LanguageRecord>,
    feature_vocab: BTreeMap<String, BTreeSet<String>>,
}

impl Dataset {
    pub fn new(role: Role, records: Vec<LanguageRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for rec in &records {
            rec.validate()?;
            if !seen.insert(rec.wals_code.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate wals_code {}",
                    rec.wals_code
                )));
            }
        }
        let mut feature_vocab: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for rec in &records {
            for (f, v) in rec.known() {
                feature_vocab
                    .entry(f.to_string())
                    .or_default()
                    .insert(v.to_string());
            }
        }
        Ok(Dataset {
            role,
            records,
            feature_vocab,
        })
    }

    pub fn empty(role: Role) -> Self {
        Dataset {
            role,
            records: Vec::new(),
            feature_vocab: BTreeMap::new(),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn records(&self) -> &[LanguageRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<LanguageRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, wals_code: &str) -> Option<&LanguageRecord> {
        self.records.iter().find(|r| r.wals_code == wals_code)
    }

    /// Observed Known values per feature.
    pub fn feature_vocab(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.feature_vocab
    }

    /// Every linguistic feature name that occurs in any cell, Known or Masked.
    pub fn feature_names(&self) -> BTreeSet<String> {
        self.records
            .iter()
            .flat_map(|r| r.cells().map(|(f, _)| f.to_string()))
            .collect()
    }

    pub fn known_cell_count(&self) -> usize {
        self.records.iter().map(LanguageRecord::known_count).sum()
    }

    pub fn masked_cell_count(&self) -> usize {
        self.records.iter().map(LanguageRecord::masked_count).sum()
    }

    /// `(wals_code, feature)` for every Masked cell, in record order.
    pub fn masked_cells(&self) -> Vec<(String, String)> {
        self.records
            .iter()
            .flat_map(|r| {
                r.masked()
                    .map(move |f| (r.wals_code.clone(), f.to_string()))
            })
            .collect()
    }

    /// Parses the tab-separated format described in the module docs.
    pub fn from_tsv(text: &str, role: Role) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) => {
                let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
                if cols != HEADER {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("unexpected header {header:?}"),
                    });
                }
            }
            None => return Dataset::new(role, Vec::new()),
        }
        let mut records = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            records.push(parse_row(line, idx + 1)?);
        }
        Dataset::new(role, records)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = HEADER.join("\t");
        out.push('\n');
        for rec in &self.records {
            let feats: Vec<String> = rec
                .cells()
                .map(|(f, c)| match c {
                    FeatureCell::Known(v) => format!("{f}={v}"),
                    _ => format!("{f}={MASK_SENTINEL}"),
                })
                .collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                rec.wals_code,
                rec.name,
                rec.latitude,
                rec.longitude,
                rec.genus,
                rec.family,
                rec.country_codes.join(" "),
                feats.join("|")
            );
        }
        out
    }
}

fn parse_row(line: &str, line_no: usize) -> Result<LanguageRecord> {
    let parse_err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != HEADER.len() {
        return Err(parse_err(format!(
            "expected {} columns, found {}",
            HEADER.len(),
            cols.len()
        )));
    }
    let coord = |s: &str, what: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| parse_err(format!("bad {what} {s:?}")))
    };
    let mut rec = LanguageRecord::new(
        cols[0].trim(),
        cols[1],
        coord(cols[2], "latitude")?,
        coord(cols[3], "longitude")?,
        cols[4],
        cols[5],
    )
    .with_countries(cols[6].split_whitespace());

    for entry in cols[7].split('|') {
        if entry.trim().is_empty() {
            continue;
        }
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| parse_err(format!("feature entry without '=': {entry:?}")))?;
        if name.is_empty() || value.is_empty() {
            return Err(parse_err(format!("empty feature name or value: {entry:?}")));
        }
        if rec.features.contains_key(name) {
            return Err(parse_err(format!("feature {name:?} listed twice")));
        }
        let cell = if value == MASK_SENTINEL {
            FeatureCell::Masked
        } else {
            FeatureCell::Known(value.to_string())
        };
        rec.set(name, cell);
    }
    Ok(rec)
}

pub fn parse_dataset(path: impl AsRef<Path>, role: Role) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_tsv(&text, role)
}

pub fn serialize_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, d.to_tsv()).map_err(|e| Error::io(path, e))
}

/// Reads `train.csv` and `dev.csv` (tab-separated, despite the name) from
/// a shared-task data directory.
pub fn read_split_dir(dir: impl AsRef<Path>) -> Result<(Dataset, Dataset)> {
    let dir = dir.as_ref();
    Ok((
        parse_dataset(dir.join("train.csv"), Role::Train)?,
        parse_dataset(dir.join("dev.csv"), Role::Dev)?,
    ))
}

/// Hides a random subset of the Known linguistic cells.
///
/// Each Known linguistic cell is masked independently with probability
/// `rate`. Afterwards every language with at least two Known cells is
/// adjusted so that one cell stays Known and one is Masked, provided the
/// expected number of cells on that side is at least one half. General
/// properties are never touched.
pub fn mask_split(d: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::validation(format!("mask rate {rate} not in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(d.len());
    for rec in d.records() {
        if rec.masked_count() > 0 {
            return Err(Error::validation(format!(
                "{} already has masked cells",
                rec.wals_code
            )));
        }
        let known: Vec<String> = rec.known().map(|(f, _)| f.to_string()).collect();
        let mut out = rec.clone();
        if known.is_empty() {
            log::warn!("{} has no known linguistic cells; left unmasked", rec.wals_code);
            records.push(out);
            continue;
        }
        let mut hidden: Vec<bool> = known.iter().map(|_| rng.gen::<f64>() < rate).collect();
        let n = known.len() as f64;
        if known.len() >= 2 {
            let n_hidden = hidden.iter().filter(|h| **h).count();
            if n_hidden == 0 && rate * n >= 0.5 {
                let idx = *(0..known.len()).collect::<Vec<_>>().choose(&mut rng).unwrap();
                hidden[idx] = true;
            } else if n_hidden == known.len() && (1.0 - rate) * n >= 0.5 {
                let idx = *(0..known.len()).collect::<Vec<_>>().choose(&mut rng).unwrap();
                hidden[idx] = false;
            }
        }
        for (f, h) in known.iter().zip(hidden) {
            if h {
                out.set(f.clone(), FeatureCell::Masked);
            }
        }
        records.push(out);
    }
    Dataset::new(d.role(), records)
}

/// Appends `other` (typically a partially masked dev or test split) to the
/// training records. Masked cells stay Masked.
pub fn merge_visible(train: &Dataset, other: &Dataset) -> Result<Dataset> {
    let codes: HashSet<&str> = train.records().iter().map(|r| r.wals_code.as_str()).collect();
    if let Some(clash) = other
        .records()
        .iter()
        .find(|r| codes.contains(r.wals_code.as_str()))
    {
        return Err(Error::validation(format!(
            "wals_code {} present in both datasets",
            clash.wals_code
        )));
    }
    let records = train
        .records()
        .iter()
        .chain(other.records())
        .cloned()
        .collect();
    Dataset::new(Role::Merged, records)
}
