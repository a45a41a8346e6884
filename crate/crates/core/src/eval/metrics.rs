use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;
use crate::error::{Error, Result};

/// Per-class true positive, false positive and false negative counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub labels: Vec<String>,
    /// Class left out of macro averaging.
    pub negative: Option<usize>,
    pub tp: Vec<u64>,
    pub fp: Vec<u64>,
    pub fn_: Vec<u64>,
    pub instances: usize,
}

impl ConfusionCounts {
    /// Classes that enter the macro average.
    pub fn evaluated(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(move |&c| Some(c) != self.negative)
    }
}

pub fn confusion_counts(predictions: &[usize], gold: &[usize], labels: &LabelSet) -> Result<ConfusionCounts> {
    if predictions.len() != gold.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    let c = labels.len();
    if let Some(&bad) = predictions.iter().chain(gold).find(|&&l| l >= c) {
        return Err(Error::invalid(format!("label {bad} outside the {c} labels of {}", labels.name)));
    }
    let mut counts = ConfusionCounts {
        labels: labels.labels.clone(),
        negative: labels.negative,
        tp: vec![0; c],
        fp: vec![0; c],
        fn_: vec![0; c],
        instances: gold.len(),
    };
    for (&p, &g) in predictions.iter().zip(gold) {
        if p == g {
            counts.tp[p] += 1;
        } else {
            counts.fp[p] += 1;
            counts.fn_[g] += 1;
        }
    }
    Ok(counts)
}

/// Precision, recall and F in percent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub p: f64,
    pub r: f64,
    pub f: f64,
}

impl Prf {
    /// Harmonic mean of `p` and `r`, or 0 when either is 0.
    pub fn from_pr(p: f64, r: f64) -> Prf {
        let f = if p > 0.0 && r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        Prf { p, r, f }
    }

    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Prf {
        let ratio = |a: u64, b: u64| if a + b == 0 { 0.0 } else { 100.0 * a as f64 / (a + b) as f64 };
        Prf::from_pr(ratio(tp, fp), ratio(tp, fn_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: String,
    pub prf: Prf,
    /// 95% interval of the class F.
    pub ci: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Evaluated classes only.
    pub classes: Vec<ClassReport>,
    pub macro_prf: Prf,
    /// 95% interval of the macro F.
    pub ci: Option<Interval>,
    pub instances: usize,
}

/// Per-class P/R/F with zero-division guarded to 0. Macro P and R are
/// unweighted means over evaluated classes; macro F is their harmonic mean.
pub fn macro_prf(counts: &ConfusionCounts) -> EvalReport {
    let classes: Vec<ClassReport> = counts
        .evaluated()
        .map(|c| ClassReport {
            label: counts.labels[c].clone(),
            prf: Prf::from_counts(counts.tp[c], counts.fp[c], counts.fn_[c]),
            ci: None,
        })
        .collect();
    let n = classes.len().max(1) as f64;
    let p = classes.iter().map(|c| c.prf.p).sum::<f64>() / n;
    let r = classes.iter().map(|c| c.prf.r).sum::<f64>() / n;
    EvalReport {
        classes,
        macro_prf: Prf::from_pr(p, r),
        ci: None,
        instances: counts.instances,
    }
}

/// Macro F of one prediction/gold sample.
pub fn macro_f(predictions: &[usize], gold: &[usize], labels: &LabelSet) -> Result<f64> {
    Ok(macro_prf(&confusion_counts(predictions, gold, labels)?).macro_prf.f)
}
