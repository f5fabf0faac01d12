use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::features::{derive_features, CoordClustering, GeoZoning, Profile};

/// Token string for a feature value, e.g.
/// `81A Order of Subject, Object and Verb: 1 SOV`.
pub fn token_string(feature: &str, value: &str) -> String {
    format!("{feature}: {value}")
}

/// Dense ids for languages and feature-value tokens.
///
/// Token ids are ordered by `(feature, value)`, so the tokens of one feature
/// are contiguous and sorted by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SerVocab", into = "SerVocab")]
pub struct Vocabulary {
    lang_codes: Vec<String>,
    lang_families: Vec<String>,
    languages: HashMap<String, usize>,
    token_parts: Vec<(String, String)>,
    tokens: HashMap<String, usize>,
    per_feature: BTreeMap<String, Vec<usize>>,
    /// Sorted token ids true for each language.
    positives: Vec<Vec<usize>>,
}

impl Vocabulary {
    fn assemble(
        langs: Vec<(String, String)>,
        token_parts: Vec<(String, String)>,
        positives: Vec<Vec<usize>>,
    ) -> Self {
        let (lang_codes, lang_families): (Vec<_>, Vec<_>) = langs.into_iter().unzip();
        let languages = lang_codes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let mut per_feature: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut tokens = HashMap::new();
        for (i, (f, v)) in token_parts.iter().enumerate() {
            per_feature.entry(f.clone()).or_default().push(i);
            tokens.insert(token_string(f, v), i);
        }
        Vocabulary {
            lang_codes,
            lang_families,
            languages,
            token_parts,
            tokens,
            per_feature,
            positives,
        }
    }

    pub fn language_count(&self) -> usize {
        self.lang_codes.len()
    }

    pub fn token_count(&self) -> usize {
        self.token_parts.len()
    }

    pub fn language_id(&self, wals_code: &str) -> Option<usize> {
        self.languages.get(wals_code).copied()
    }

    pub fn language_code(&self, id: usize) -> &str {
        &self.lang_codes[id]
    }

    pub fn language_family(&self, id: usize) -> &str {
        &self.lang_families[id]
    }

    pub fn token_id(&self, token: &str) -> Option<usize> {
        self.tokens.get(token).copied()
    }

    pub fn token(&self, id: usize) -> String {
        let (f, v) = &self.token_parts[id];
        token_string(f, v)
    }

    pub fn token_feature(&self, id: usize) -> &str {
        &self.token_parts[id].0
    }

    pub fn token_value(&self, id: usize) -> &str {
        &self.token_parts[id].1
    }

    pub fn feature_tokens(&self, feature: &str) -> Option<&[usize]> {
        self.per_feature.get(feature).map(Vec::as_slice)
    }

    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.per_feature.keys().map(String::as_str)
    }

    pub fn positives(&self, lang: usize) -> &[usize] {
        &self.positives[lang]
    }

    pub fn is_positive(&self, lang: usize, token: usize) -> bool {
        self.positives[lang].binary_search(&token).is_ok()
    }

    /// Every `(language, token)` pair observed in the data.
    pub fn positive_pairs(&self) -> Vec<(usize, usize)> {
        self.positives
            .iter()
            .enumerate()
            .flat_map(|(l, toks)| toks.iter().map(move |&t| (l, t)))
            .collect()
    }
}

/// One language id per record and one token per distinct Known feature
/// value under the neural feature profile. Masked cells, country codes and
/// raw coordinates never become tokens.
pub fn build_vocab(d: &Dataset, clustering: &CoordClustering) -> Result<Vocabulary> {
    if d.is_empty() {
        return Err(Error::validation("cannot build a vocabulary from an empty dataset"));
    }
    let zoning = GeoZoning::default();
    let per_lang: Vec<Vec<(String, String)>> = d
        .records()
        .iter()
        .map(|r| derive_features(r, &zoning, Some(clustering), Profile::Neural))
        .collect::<Result<_>>()?;
    let parts: BTreeSet<&(String, String)> = per_lang.iter().flatten().collect();
    let token_parts: Vec<(String, String)> = parts.into_iter().cloned().collect();
    let ids: HashMap<&(String, String), usize> =
        token_parts.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let positives = per_lang
        .iter()
        .map(|obs| {
            let mut t: Vec<usize> = obs.iter().map(|p| ids[p]).collect();
            t.sort_unstable();
            t.dedup();
            t
        })
        .collect();
    let langs = d
        .records()
        .iter()
        .map(|r| (r.wals_code.clone(), r.family.clone()))
        .collect();
    Ok(Vocabulary::assemble(langs, token_parts, positives))
}

#[derive(Serialize, Deserialize)]
struct SerVocab {
    languages: Vec<(String, String)>,
    tokens: Vec<(String, String)>,
    positives: Vec<Vec<usize>>,
}

impl From<SerVocab> for Vocabulary {
    fn from(s: SerVocab) -> Self {
        Vocabulary::assemble(s.languages, s.tokens, s.positives)
    }
}

impl From<Vocabulary> for SerVocab {
    fn from(v: Vocabulary) -> Self {
        SerVocab {
            languages: v.lang_codes.into_iter().zip(v.lang_families).collect(),
            tokens: v.token_parts,
            positives: v.positives,
        }
    }
}
