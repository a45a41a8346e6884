use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::autodiff::AdamConfig;
use crate::error::{Error, Result};
use crate::layers::{ModelConfig, ParamStore};

/// Optimization schedule shared by plain training, cross-validation, grid
/// search and fine-tuning.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainPlan {
    /// Upper bound on epochs.
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Stop after this many epochs without a dev macro-F improvement.
    /// `None` trains for all epochs.
    pub patience: Option<usize>,
    pub adam: AdamConfig,
    /// Parameters whose name starts with one of these are not updated.
    pub frozen: Vec<String>,
    pub grid: Option<HyperGrid>,
}

impl Default for TrainPlan {
    fn default() -> Self {
        TrainPlan {
            epochs: 100,
            batch_size: 8,
            seed: 0,
            patience: Some(5),
            adam: AdamConfig::default(),
            frozen: Vec::new(),
            grid: None,
        }
    }
}

impl TrainPlan {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch_size must be at least 1"));
        }
        if !(self.adam.lr.is_finite() && self.adam.lr >= 0.0) {
            return Err(Error::invalid(format!("learning rate {} is not a finite non-negative number", self.adam.lr)));
        }
        if self.patience == Some(0) {
            return Err(Error::invalid("patience must be at least 1"));
        }
        Ok(())
    }
}

/// Names in `store` matched by `prefixes`. A prefix that matches nothing is
/// an error.
pub fn frozen_names(store: &ParamStore, prefixes: &[String]) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for prefix in prefixes {
        let matched: Vec<&str> = store.names().filter(|n| n.starts_with(prefix.as_str())).collect();
        if matched.is_empty() {
            return Err(Error::UnmatchedPrefix(prefix.clone()));
        }
        out.extend(matched.into_iter().map(str::to_string));
    }
    Ok(out)
}

/// Cartesian grid over learning rate, hidden width and GCN depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub lr: Vec<f64>,
    pub hidden: Vec<usize>,
    pub gcn_layers: Vec<usize>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            lr: vec![1e-3, 3e-4],
            hidden: vec![64, 128],
            gcn_layers: vec![1, 2],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lr: f64,
    pub hidden: usize,
    pub gcn_layers: usize,
}

impl GridPoint {
    pub fn apply(&self, config: &ModelConfig, adam: &AdamConfig) -> (ModelConfig, AdamConfig) {
        let mut c = config.clone();
        c.hidden = self.hidden;
        c.gcn_layers = self.gcn_layers;
        (c, AdamConfig { lr: self.lr, ..*adam })
    }
}

impl HyperGrid {
    /// Points in declaration order, learning rate varying slowest.
    pub fn points(&self) -> Result<Vec<GridPoint>> {
        if self.lr.is_empty() || self.hidden.is_empty() || self.gcn_layers.is_empty() {
            return Err(Error::invalid("every grid axis needs at least one value"));
        }
        if let Some(bad) = self.lr.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::invalid(format!("grid learning rate {bad} is not a positive finite number")));
        }
        let mut out = Vec::new();
        for &lr in &self.lr {
            for &hidden in &self.hidden {
                for &gcn_layers in &self.gcn_layers {
                    out.push(GridPoint { lr, hidden, gcn_layers });
                }
            }
        }
        Ok(out)
    }
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub(crate) fn mix_seed(seed: u64, salt: &[u64]) -> u64 {
    salt.iter().fold(seed, |acc, &s| {
        let mut z = acc ^ s.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    })
}
