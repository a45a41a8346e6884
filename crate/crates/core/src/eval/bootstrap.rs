use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metrics::{confusion_counts, macro_prf, EvalReport, Interval, Prf};
use crate::corpus::LabelSet;
use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 1000;

/// Percentile bootstrap: `metric` is recomputed on `resamples` seeded
/// resamples (with replacement) of `outcomes`; returns the 2.5th and 97.5th
/// percentiles.
pub fn bootstrap_ci<T, F>(outcomes: &[T], metric: F, resamples: usize, seed: u64) -> Result<Interval>
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    if outcomes.is_empty() || resamples == 0 {
        return Err(Error::invalid("bootstrap needs outcomes and at least one resample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = outcomes.len();
    let mut sample = Vec::with_capacity(n);
    let mut values: Vec<f64> = (0..resamples)
        .map(|_| {
            sample.clear();
            sample.extend((0..n).map(|_| outcomes[rng.gen_range(0..n)].clone()));
            metric(&sample)
        })
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(Interval {
        low: percentile(&values, 2.5),
        high: percentile(&values, 97.5),
    })
}

/// Nearest-rank percentile of sorted `values`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Confusion counts, macro P/R/F and, when `resamples > 0`, bootstrap
/// intervals for the macro F and every class F.
pub fn evaluate(predictions: &[usize], gold: &[usize], labels: &LabelSet, resamples: usize, seed: u64) -> Result<EvalReport> {
    let mut report = macro_prf(&confusion_counts(predictions, gold, labels)?);
    if resamples == 0 || gold.is_empty() {
        return Ok(report);
    }
    let pairs: Vec<(usize, usize)> = predictions.iter().copied().zip(gold.iter().copied()).collect();
    let score = |s: &[(usize, usize)]| {
        let (p, g): (Vec<usize>, Vec<usize>) = s.iter().copied().unzip();
        macro_prf(&confusion_counts(&p, &g, labels).expect("labels checked above"))
    };
    report.ci = Some(bootstrap_ci(&pairs, |s| score(s).macro_prf.f, resamples, seed)?);
    for (k, class) in report.classes.iter_mut().enumerate() {
        class.ci = Some(bootstrap_ci(&pairs, |s| score(s).classes[k].prf.f, resamples, seed)?);
    }
    Ok(report)
}

/// Accuracy in percent, a convenience metric for bootstrap callers.
pub fn accuracy(pairs: &[(usize, usize)]) -> f64 {
    100.0 * pairs.iter().filter(|(p, g)| p == g).count() as f64 / pairs.len().max(1) as f64
}

/// Reference P/R/F of always predicting `class`.
pub fn constant_baseline(gold: &[usize], class: usize, labels: &LabelSet) -> Result<Prf> {
    Ok(macro_prf(&confusion_counts(&vec![class; gold.len()], gold, labels)?).macro_prf)
}
