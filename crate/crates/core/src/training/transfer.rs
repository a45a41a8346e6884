use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::{Checkpoint, RngState};
use super::cv::{holdout_split, model_for};
use super::plan::{mix_seed, TrainPlan};
use super::trainer::{evaluate_split, FitOutcome, Trainer};
use crate::autodiff::Tensor;
use crate::corpus::{FoldSplit, LabelSet};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport};
use crate::layers::{glorot, ModelConfig};
use crate::pipeline::{Dataset, ModelState, CLS_B, CLS_W};

/// Makes the classifier head match `target`. When the label names already
/// match in order nothing changes; otherwise a new head is drawn and the
/// columns of labels present in both sets are copied over by name. Returns
/// whether the head was rebuilt.
pub fn remap_head(model: &mut ModelState, source: &[String], target: &LabelSet, seed: u64) -> Result<bool> {
    if source == target.labels.as_slice() {
        return Ok(false);
    }
    let width = model.config.classifier_width();
    let c = target.len();
    let old_w = model.params.get(CLS_W)?.clone();
    let old_b = model.params.get(CLS_B)?.clone();
    let mut w = glorot(width, c, &mut ChaCha8Rng::seed_from_u64(seed));
    let mut b = Tensor::zeros(vec![c]);
    let old_c = old_w.cols();
    for (j, name) in target.labels.iter().enumerate() {
        if let Some(s) = source.iter().position(|l| l == name) {
            for r in 0..width {
                w.values_mut()[r * c + j] = old_w.values()[r * old_c + s];
            }
            b.values_mut()[j] = old_b.values()[s];
        }
    }
    model.params.remove(CLS_W);
    model.params.remove(CLS_B);
    model.params.insert(CLS_W, w)?;
    model.params.insert(CLS_B, b)?;
    model.config.label_count = c;
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct TransferOutcome {
    pub model: ModelState,
    pub fit: FitOutcome,
    /// Target test-split report.
    pub report: EvalReport,
    pub head_reinitialized: bool,
}

/// Loads the source model, freezes parameters matching `plan.frozen`,
/// fine-tunes on the target split and evaluates on its test part. The
/// target dataset must be encoded with the source vocabulary.
pub fn transfer_finetune(source: &Checkpoint, target: &Dataset, split: &FoldSplit, plan: &TrainPlan) -> Result<TransferOutcome> {
    let mut model = source.model.clone();
    if !Arc::ptr_eq(&model.vocab, &target.vocab) && *model.vocab != *target.vocab {
        return Err(Error::invalid("the target dataset must be encoded with the source model's vocabulary"));
    }
    let head_reinitialized = remap_head(&mut model, &source.labels, &target.label_set, mix_seed(plan.seed, &[1]))?;
    let mut trainer = Trainer::new(model, plan.clone())?;
    let fit = trainer.fit(&target.select(&split.train), &target.select(&split.dev), &target.label_set)?;
    let test = target.select(&split.test);
    let (_, _, pred) = evaluate_split(&trainer.model, &test, &target.label_set)?;
    let gold: Vec<usize> = test.iter().map(|e| e.label).collect();
    let report = evaluate(&pred, &gold, &target.label_set, 0, plan.seed)?;
    Ok(TransferOutcome {
        model: trainer.model,
        fit,
        report,
        head_reinitialized,
    })
}

/// Trains a source model on `data`'s holdout train/dev split and packs it
/// as a checkpoint.
pub fn train_source(data: &Dataset, config: &ModelConfig, plan: &TrainPlan) -> Result<(Checkpoint, FitOutcome)> {
    let split = holdout_split(data.examples.len(), plan.seed)?;
    let plan = TrainPlan {
        frozen: Vec::new(),
        ..plan.clone()
    };
    let mut trainer = Trainer::new(model_for(data, config, plan.seed)?, plan)?;
    let fit = trainer.fit(&data.select(&split.train), &data.select(&split.dev), &data.label_set)?;
    let ckpt = Checkpoint {
        rng: RngState {
            seed: trainer.plan.seed,
            epoch: trainer.epoch as u64,
        },
        labels: data.label_set.labels.clone(),
        optimizer: Some(trainer.optimizer),
        model: trainer.model,
    };
    Ok((ckpt, fit))
}

#[derive(Clone, Debug)]
pub struct TransferDirection {
    /// `SOURCE-TARGET`.
    pub name: String,
    pub outcome: TransferOutcome,
}

/// Both directions between two corpora sharing a vocabulary: train on one,
/// fine-tune and test on the other.
pub fn transfer_protocol(
    a: (&str, &Dataset),
    b: (&str, &Dataset),
    config: &ModelConfig,
    plan: &TrainPlan,
) -> Result<Vec<TransferDirection>> {
    let mut out = Vec::with_capacity(2);
    for ((src_name, src), (tgt_name, tgt)) in [(a, b), (b, a)] {
        let mut src_config = config.clone();
        src_config.label_count = src.label_set.len();
        let (ckpt, _) = train_source(src, &src_config, plan)?;
        let split = holdout_split(tgt.examples.len(), plan.seed)?;
        let outcome = transfer_finetune(&ckpt, tgt, &split, plan)?;
        log::info!("{src_name}-{tgt_name}: F {:.2}", outcome.report.macro_prf.f);
        out.push(TransferDirection {
            name: format!("{src_name}-{tgt_name}"),
            outcome,
        });
    }
    Ok(out)
}
