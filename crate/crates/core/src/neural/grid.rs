use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{merge_visible, Dataset};
use crate::error::{Error, Result};
use crate::eval::{accuracy, GoldStandard};

use super::{HyperParams, NeuralSystem};

pub const CLUSTER_GRID: [usize; 8] = [1, 10, 50, 100, 150, 300, 500, 1000];
pub const DIM_GRID: [usize; 3] = [128, 512, 1024];
pub const DROPOUT_GRID: [f64; 3] = [0.0, 0.3, 0.5];

/// The full clusters × embedding size × dropout grid; other settings are
/// copied from `base`.
pub fn default_grid(base: &HyperParams) -> Vec<HyperParams> {
    let mut grid = Vec::with_capacity(CLUSTER_GRID.len() * DIM_GRID.len() * DROPOUT_GRID.len());
    for &k_clusters in &CLUSTER_GRID {
        for &dim in &DIM_GRID {
            for &dropout in &DROPOUT_GRID {
                grid.push(HyperParams {
                    k_clusters,
                    dim,
                    dropout,
                    ..base.clone()
                });
            }
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: HyperParams,
    pub best_accuracy: f64,
    /// Dev accuracy per configuration, in grid order. Configurations that
    /// could not be trained (e.g. more clusters than coordinates) are
    /// omitted.
    pub table: Vec<(HyperParams, f64)>,
}

/// Trains one model per configuration on `train` merged with the visible
/// part of `dev_masked` and scores each on the masked dev cells. Runs up to
/// `jobs` configurations at once; results do not depend on `jobs`.
pub fn grid_search(
    train: &Dataset,
    dev_masked: &Dataset,
    gold: &GoldStandard,
    grid: &[HyperParams],
    jobs: usize,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::validation("empty hyper-parameter grid"));
    }
    let merged = merge_visible(train, dev_masked)?;
    let run = |hp: &HyperParams| -> Option<(HyperParams, f64)> {
        match NeuralSystem::train(&merged, hp) {
            Ok((sys, _)) => {
                let preds = sys.predict_all(dev_masked);
                let acc = accuracy(gold, &preds).overall;
                log::info!("{hp:?}: dev accuracy {acc:.4}");
                Some((hp.clone(), acc))
            }
            Err(e) => {
                log::warn!("skipping {hp:?}: {e}");
                None
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::validation(e.to_string()))?;
    let results: Vec<Option<(HyperParams, f64)>> = pool.install(|| grid.par_iter().map(run).collect());
    let table: Vec<(HyperParams, f64)> = results.into_iter().flatten().collect();
    let (best, best_accuracy) = table
        .iter()
        .fold(None::<&(HyperParams, f64)>, |acc, cur| match acc {
            Some(a) if a.1 >= cur.1 => Some(a),
            _ => Some(cur),
        })
        .cloned()
        .ok_or_else(|| Error::validation("no grid configuration could be trained"))?;
    Ok(GridResult {
        best,
        best_accuracy,
        table,
    })
}
