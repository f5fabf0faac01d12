//! Engineered source features derived from the general properties.
//!
//! The probabilistic model replaces raw coordinates with hand-drawn
//! latitude/longitude zones; the neural model clusters coordinates with
//! k-means and uses the cluster id instead.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::LanguageRecord;
use crate::error::{Error, Result};

pub const GENUS: &str = "genus";
pub const FAMILY: &str = "family";
pub const NAME: &str = "name";
pub const COUNTRY: &str = "country";
pub const LAT_ZONE: &str = "lat_zone";
pub const LON_ZONE: &str = "lon_zone";
pub const LATLON_ZONE: &str = "latlon";
pub const CLUSTER: &str = "cluster";

/// Country code treated as unknown: it is attached to too many languages
/// from unrelated regions.
pub const UNTRUSTED_COUNTRY: &str = "US";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Probabilistic,
    Neural,
}

/// Manual partition of the globe into latitude and longitude zones.
///
/// Latitude zones are `[-90, c0), [c0, c1), …, [c_last, 90]`. Longitude cut
/// points split the circle into as many half-open arcs; the arc starting at
/// the last cut point wraps across the antimeridian to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoZoning {
    lat_boundaries: Vec<f64>,
    lon_boundaries: Vec<f64>,
}

impl Default for GeoZoning {
    fn default() -> Self {
        GeoZoning {
            lat_boundaries: vec![-10.0, 10.0, 35.0, 60.0],
            lon_boundaries: vec![
                -140.0, -100.0, -60.0, -30.0, 0.0, 35.0, 70.0, 95.0, 120.0, 140.0, 160.0,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeoZones {
    pub lat_zone: String,
    pub lon_zone: String,
    pub latlon_zone: String,
}

impl GeoZoning {
    pub fn new(lat_boundaries: Vec<f64>, lon_boundaries: Vec<f64>) -> Result<Self> {
        let increasing = |b: &[f64]| b.windows(2).all(|w| w[0] < w[1]);
        if lat_boundaries.is_empty()
            || !increasing(&lat_boundaries)
            || lat_boundaries.iter().any(|&x| x <= -90.0 || x >= 90.0)
        {
            return Err(Error::validation(
                "latitude cut points must be strictly increasing inside (-90, 90)",
            ));
        }
        if lon_boundaries.len() < 2
            || !increasing(&lon_boundaries)
            || lon_boundaries.iter().any(|&x| !(-180.0..180.0).contains(&x))
        {
            return Err(Error::validation(
                "longitude cut points must be at least two, strictly increasing inside [-180, 180)",
            ));
        }
        Ok(GeoZoning {
            lat_boundaries,
            lon_boundaries,
        })
    }

    /// Reads a zoning from a plain-text file with two lines:
    ///
    /// ```text
    /// lat: -10 10 35 60
    /// lon: -140 -100 -60 -30 0 35 70 95 120 140 160
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut lat = None;
        let mut lon = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(':').ok_or(Error::Parse {
                line: i + 1,
                message: format!("expected `lat:` or `lon:`, got {raw:?}"),
            })?;
            let values = rest
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("bad cut point {s:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match key.trim() {
                "lat" => lat = Some(values),
                "lon" => lon = Some(values),
                other => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        match (lat, lon) {
            (Some(lat), Some(lon)) => GeoZoning::new(lat, lon),
            _ => Err(Error::validation("zone config needs both `lat:` and `lon:`")),
        }
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_config_str(&text)
    }

    pub fn lat_zone_count(&self) -> usize {
        self.lat_boundaries.len() + 1
    }

    pub fn lon_zone_count(&self) -> usize {
        self.lon_boundaries.len()
    }

    pub fn lat_zone_index(&self, lat: f64) -> usize {
        self.lat_boundaries.iter().take_while(|&&b| lat >= b).count()
    }

    /// Index of the longitude arc; the wrapping arc has the last index.
    pub fn lon_zone_index(&self, lon: f64) -> usize {
        let b = &self.lon_boundaries;
        let lon = if lon >= 180.0 { lon - 360.0 } else { lon };
        if lon < b[0] || lon >= b[b.len() - 1] {
            return b.len() - 1;
        }
        b.iter().take_while(|&&x| lon >= x).count() - 1
    }

    pub fn lat_zone_label(&self, idx: usize) -> String {
        let lo = if idx == 0 { -90.0 } else { self.lat_boundaries[idx - 1] };
        let hi = self.lat_boundaries.get(idx).copied().unwrap_or(90.0);
        format!("{lo}–{hi}")
    }

    pub fn lon_zone_label(&self, idx: usize) -> String {
        let b = &self.lon_boundaries;
        let lo = b[idx];
        let hi = b[(idx + 1) % b.len()];
        format!("{lo}–{hi}")
    }

    pub fn assign(&self, lat: f64, lon: f64) -> GeoZones {
        let lat_zone = self.lat_zone_label(self.lat_zone_index(lat));
        let lon_zone = self.lon_zone_label(self.lon_zone_index(lon));
        let latlon_zone = format!("{lat_zone};{lon_zone}");
        GeoZones {
            lat_zone,
            lon_zone,
            latlon_zone,
        }
    }
}

pub fn assign_geo_zones(lat: f64, lon: f64, zoning: &GeoZoning) -> GeoZones {
    zoning.assign(lat, lon)
}

/// One `("country", code)` observation per trusted country code.
pub fn expand_country_codes(rec: &LanguageRecord) -> Vec<(String, String)> {
    rec.country_codes
        .iter()
        .filter(|c| c.as_str() != UNTRUSTED_COUNTRY)
        .map(|c| (COUNTRY.to_string(), c.clone()))
        .collect()
}

/// Fitted k-means clustering of language coordinates, in raw degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordClustering {
    pub k: usize,
    pub seed: u64,
    pub centroids: Vec<[f64; 2]>,
    pub assignment: BTreeMap<String, usize>,
    /// Inertia after seeding and after every Lloyd iteration.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    d0 * d0 + d1 * d1
}

fn nearest(centroids: &[[f64; 2]], p: [f64; 2]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, &c) in centroids.iter().enumerate() {
        let d = sq_dist(c, p);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

const KMEANS_MAX_ITER: usize = 300;

impl CoordClustering {
    pub fn assign(&self, lat: f64, lon: f64) -> usize {
        nearest(&self.centroids, [lat, lon]).0
    }

    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }

    /// Cluster id for a language: its fitted assignment if it took part in
    /// fitting, otherwise its nearest centroid.
    pub fn cluster_of(&self, rec: &LanguageRecord) -> usize {
        self.assignment
            .get(&rec.wals_code)
            .copied()
            .unwrap_or_else(|| self.assign(rec.latitude, rec.longitude))
    }
}

/// Lloyd's algorithm with k-means++ seeding under squared Euclidean distance
/// on `(lat, lon)`.
pub fn kmeans_fit(points: &[(String, f64, f64)], k: usize, seed: u64) -> Result<CoordClustering> {
    if points.is_empty() {
        return Err(Error::validation("k-means needs at least one point"));
    }
    if k == 0 {
        return Err(Error::validation("k-means needs k >= 1"));
    }
    let xs: Vec<[f64; 2]> = points.iter().map(|(_, a, b)| [*a, *b]).collect();
    let mut distinct: Vec<[f64; 2]> = xs.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if k > distinct.len() {
        return Err(Error::validation(format!(
            "k = {k} exceeds the {} distinct coordinate points",
            distinct.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = Vec::with_capacity(k);
    centroids.push(xs[rng.gen_range(0..xs.len())]);
    let mut d2: Vec<f64> = xs.iter().map(|&p| sq_dist(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let mut target = rng.gen::<f64>() * total;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w > 0.0 {
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
        }
        // k <= distinct points, so some point is still uncovered.
        let c = xs[pick.expect("k-means++ ran out of uncovered points")];
        centroids.push(c);
        for (w, &p) in d2.iter_mut().zip(&xs) {
            *w = w.min(sq_dist(p, c));
        }
    }

    let mut assignment: Vec<usize> = xs.iter().map(|&p| nearest(&centroids, p).0).collect();
    let inertia_of = |cents: &[[f64; 2]], asg: &[usize]| -> f64 {
        xs.iter().zip(asg).map(|(&p, &j)| sq_dist(p, cents[j])).sum()
    };
    let mut history = vec![inertia_of(&centroids, &assignment)];

    for _ in 0..KMEANS_MAX_ITER {
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (&p, &j) in xs.iter().zip(&assignment) {
            sums[j][0] += p[0];
            sums[j][1] += p[1];
            counts[j] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
            }
        }
        // Empty clusters take over the point farthest from its centroid.
        for j in 0..k {
            if counts[j] == 0 {
                let (far, _) = xs
                    .iter()
                    .zip(&assignment)
                    .enumerate()
                    .map(|(i, (&p, &a))| (i, sq_dist(p, centroids[a])))
                    .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
                centroids[j] = xs[far];
                counts[assignment[far]] -= 1;
                assignment[far] = j;
                counts[j] = 1;
            }
        }
        let next: Vec<usize> = xs.iter().map(|&p| nearest(&centroids, p).0).collect();
        let changed = next != assignment;
        assignment = next;
        history.push(inertia_of(&centroids, &assignment));
        if !changed {
            break;
        }
    }

    Ok(CoordClustering {
        k,
        seed,
        centroids,
        assignment: points
            .iter()
            .zip(assignment)
            .map(|((code, _, _), j)| (code.clone(), j))
            .collect(),
        inertia_history: history,
    })
}

pub fn kmeans_assign(c: &CoordClustering, lat: f64, lon: f64) -> usize {
    c.assign(lat, lon)
}

/// Fits a clustering on every record's coordinates.
pub fn cluster_records<'a, I>(records: I, k: usize, seed: u64) -> Result<CoordClustering>
where
    I: IntoIterator<Item = &'a LanguageRecord>,
{
    let points: Vec<(String, f64, f64)> = records
        .into_iter()
        .map(|r| (r.wals_code.clone(), r.latitude, r.longitude))
        .collect();
    kmeans_fit(&points, k, seed)
}

/// The `(feature, value)` observations a model may condition on for one
/// language. Masked and Absent cells never appear.
pub fn derive_features(
    rec: &LanguageRecord,
    zoning: &GeoZoning,
    clustering: Option<&CoordClustering>,
    profile: Profile,
) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = rec
        .known()
        .map(|(f, v)| (f.to_string(), v.to_string()))
        .collect();
    match profile {
        Profile::Probabilistic => {
            out.push((GENUS.into(), rec.genus.clone()));
            out.push((FAMILY.into(), rec.family.clone()));
            out.extend(expand_country_codes(rec));
            let z = zoning.assign(rec.latitude, rec.longitude);
            out.push((LAT_ZONE.into(), z.lat_zone));
            out.push((LON_ZONE.into(), z.lon_zone));
            out.push((LATLON_ZONE.into(), z.latlon_zone));
        }
        Profile::Neural => {
            let c = clustering.ok_or_else(|| {
                Error::validation("neural feature profile needs a coordinate clustering")
            })?;
            out.push((NAME.into(), rec.name.clone()));
            out.push((GENUS.into(), rec.genus.clone()));
            out.push((FAMILY.into(), rec.family.clone()));
            out.push((CLUSTER.into(), c.cluster_of(rec).to_string()));
        }
    }
    Ok(out)
}

impl fmt::Display for GeoZoning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |b: &[f64]| b.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        writeln!(f, "lat: {}", join(&self.lat_boundaries))?;
        writeln!(f, "lon: {}", join(&self.lon_boundaries))
    }
}
