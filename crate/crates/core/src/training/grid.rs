use std::collections::HashSet;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::checkpoint::digest_hex;
use super::cv::model_for;
use super::plan::{GridPoint, HyperGrid, TrainPlan};
use super::trainer::Trainer;
use crate::autodiff::AdamConfig;
use crate::corpus::FoldSplit;
use crate::error::{Error, Result};
use crate::layers::ModelConfig;
use crate::pipeline::Dataset;

#[derive(Clone, Debug, PartialEq)]
pub struct GridEntry {
    pub point: GridPoint,
    /// Hex SHA-256 of the model config and optimizer settings.
    pub digest: String,
    pub dev_f: f64,
    pub best_epoch: usize,
}

#[derive(Clone, Debug)]
pub struct GridOutcome {
    pub best: GridPoint,
    pub config: ModelConfig,
    pub adam: AdamConfig,
    /// One entry per distinct point, in declaration order.
    pub leaderboard: Vec<GridEntry>,
}

#[derive(Serialize)]
struct RunKey<'a> {
    config: &'a ModelConfig,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

pub fn run_digest(config: &ModelConfig, adam: &AdamConfig) -> String {
    let key = RunKey {
        config,
        lr: adam.lr,
        beta1: adam.beta1,
        beta2: adam.beta2,
        epsilon: adam.epsilon,
    };
    let bytes = serde_json::to_vec(&key).expect("run key serializes");
    digest_hex(&Sha256::digest(bytes).into())
}

/// Trains one model per distinct grid point on `split.train` and scores it
/// by dev macro-F. Points whose digest was already evaluated are skipped.
/// The best point is the highest dev F, the earliest declared on ties.
pub fn grid_search(
    data: &Dataset,
    base: &ModelConfig,
    grid: &HyperGrid,
    split: &FoldSplit,
    plan: &TrainPlan,
) -> Result<GridOutcome> {
    if split.dev.is_empty() {
        return Err(Error::invalid("grid search needs a non-empty dev split"));
    }
    let train = data.select(&split.train);
    let dev = data.select(&split.dev);
    let mut seen = HashSet::new();
    let mut leaderboard = Vec::new();
    for point in grid.points()? {
        let (config, adam) = point.apply(base, &plan.adam);
        let digest = run_digest(&config, &adam);
        if !seen.insert(digest.clone()) {
            log::info!("grid point {point:?} already evaluated");
            continue;
        }
        let run_plan = TrainPlan { adam, ..plan.clone() };
        let mut trainer = Trainer::new(model_for(data, &config, plan.seed)?, run_plan)?;
        let fit = trainer.fit(&train, &dev, &data.label_set)?;
        let dev_f = fit.best_dev_f.expect("dev is non-empty");
        log::info!("grid point {point:?}: dev F {dev_f:.2}");
        leaderboard.push(GridEntry {
            point,
            digest,
            dev_f,
            best_epoch: fit.best_epoch,
        });
    }
    let best = leaderboard
        .iter()
        .fold(None::<&GridEntry>, |acc, e| match acc {
            Some(b) if b.dev_f >= e.dev_f => Some(b),
            _ => Some(e),
        })
        .expect("grid has at least one point");
    let (config, adam) = best.point.apply(base, &plan.adam);
    Ok(GridOutcome {
        best: best.point,
        config,
        adam,
        leaderboard,
    })
}
