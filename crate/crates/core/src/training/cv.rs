use std::collections::BTreeSet;

use rayon::prelude::*;

use super::plan::{mix_seed, TrainPlan};
use super::trainer::{check_labels, evaluate_split, FitOutcome, Trainer};
use crate::corpus::{make_folds, FoldSplit};
use crate::error::{Error, Result};
use crate::eval::{evaluate, mean_std, EvalReport, Prf, DEFAULT_RESAMPLES};
use crate::layers::ModelConfig;
use crate::pipeline::{init_model, Dataset, ModelState};

#[derive(Clone, Debug)]
pub struct FoldResult {
    pub fold: usize,
    pub split: FoldSplit,
    /// Test-fold report.
    pub report: EvalReport,
    pub predictions: Vec<usize>,
    pub fit: FitOutcome,
    /// Test instances carrying a non-negative label.
    pub positives: usize,
}

/// Per-fold results, the mean and sample standard deviation of the fold
/// macro P/R/F, and a pooled report over all test predictions with
/// bootstrap intervals.
#[derive(Clone, Debug)]
pub struct CvSummary {
    pub folds: Vec<FoldResult>,
    pub mean: Prf,
    pub std: Prf,
    pub pooled: EvalReport,
}

/// Errors if `split` shares an index between any two of its parts.
pub fn assert_no_leakage(split: &FoldSplit) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &i in split.train.iter().chain(&split.dev).chain(&split.test) {
        if !seen.insert(i) {
            return Err(Error::invalid(format!("instance {i} appears in more than one split of a fold")));
        }
    }
    Ok(())
}

/// Fresh model for `data` under `config`, seeded from `seed`.
pub fn model_for(data: &Dataset, config: &ModelConfig, seed: u64) -> Result<ModelState> {
    let words = config.use_pretrained.then(|| data.words.clone());
    let model = init_model(config, data.vocab.clone(), words, seed)?;
    check_labels(&model, &data.label_set)?;
    Ok(model)
}

/// Trains on `split.train`, early-stops on `split.dev` and evaluates on
/// `split.test`.
pub fn train_and_test(
    data: &Dataset,
    config: &ModelConfig,
    split: &FoldSplit,
    plan: &TrainPlan,
    resamples: usize,
) -> Result<(ModelState, FitOutcome, EvalReport, Vec<usize>)> {
    assert_no_leakage(split)?;
    let mut trainer = Trainer::new(model_for(data, config, plan.seed)?, plan.clone())?;
    let fit = trainer.fit(&data.select(&split.train), &data.select(&split.dev), &data.label_set)?;
    let test = data.select(&split.test);
    let (_, _, pred) = evaluate_split(&trainer.model, &test, &data.label_set)?;
    let gold: Vec<usize> = test.iter().map(|e| e.label).collect();
    let report = evaluate(&pred, &gold, &data.label_set, resamples, plan.seed)?;
    Ok((trainer.model, fit, report, pred))
}

/// `k`-fold cross-validation. Each fold trains its own model with a seed
/// derived from the plan seed and the fold index; folds run in parallel and
/// merge in fold order.
pub fn run_cross_validation(data: &Dataset, config: &ModelConfig, k: usize, plan: &TrainPlan) -> Result<CvSummary> {
    plan.validate()?;
    let folds = make_folds(data.examples.len(), k, plan.seed)?;
    let negative = data.label_set.negative;
    let results = (0..k)
        .into_par_iter()
        .map(|fold| {
            let split = folds.split(fold);
            let positives = split
                .test
                .iter()
                .filter(|&&i| Some(data.examples[i].label) != negative)
                .count();
            if positives == 0 {
                log::warn!("fold {fold} has no positive test instances");
            }
            let fold_plan = TrainPlan {
                seed: mix_seed(plan.seed, &[fold as u64]),
                ..plan.clone()
            };
            let (_, fit, report, predictions) = train_and_test(data, config, &split, &fold_plan, 0)?;
            log::info!("fold {fold}: F {:.2} after {} epochs", report.macro_prf.f, fit.epochs_run);
            Ok(FoldResult {
                fold,
                split,
                report,
                predictions,
                fit,
                positives,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stat = |f: fn(&Prf) -> f64| mean_std(&results.iter().map(|r| f(&r.report.macro_prf)).collect::<Vec<_>>());
    let (p, r, f) = (stat(|x| x.p), stat(|x| x.r), stat(|x| x.f));
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for res in &results {
        pred.extend_from_slice(&res.predictions);
        gold.extend(res.split.test.iter().map(|&i| data.examples[i].label));
    }
    let pooled = evaluate(&pred, &gold, &data.label_set, DEFAULT_RESAMPLES, plan.seed)?;
    Ok(CvSummary {
        folds: results,
        mean: Prf { p: p.0, r: r.0, f: f.0 },
        std: Prf { p: p.1, r: r.1, f: f.1 },
        pooled,
    })
}

/// Single held-out split: one tenth for test, a tenth of the rest for dev.
pub fn holdout_split(n: usize, seed: u64) -> Result<FoldSplit> {
    Ok(make_folds(n, 10, seed)?.split(0))
}
