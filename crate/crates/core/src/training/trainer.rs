use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::plan::{frozen_names, mix_seed, TrainPlan};
use crate::autodiff::{AdamState, DropoutMode};
use crate::corpus::LabelSet;
use crate::error::{io_err, Error, Result};
use crate::eval::{confusion_counts, macro_prf, Prf};
use crate::layers::ParamStore;
use crate::pipeline::{argmax, batch_gradients, forward, predict, Example, ModelState};

/// One metrics-log line: `epoch\tsplit\tloss\tP\tR\tF`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub split: String,
    pub loss: f64,
    pub prf: Prf,
}

impl fmt::Display for EpochRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{:.6}\t{:.4}\t{:.4}\t{:.4}",
            self.epoch, self.split, self.loss, self.prf.p, self.prf.r, self.prf.f
        )
    }
}

pub fn write_metrics_log(path: &Path, records: &[EpochRecord]) -> Result<()> {
    let text: String = records.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(path, text).map_err(io_err(path))
}

/// Shuffled mini-batches of one epoch, then forward, backward and an Adam
/// step per batch on every parameter not in `frozen`. Shuffling and dropout
/// are seeded by `(plan.seed, epoch)`. Returns the mean batch loss and the
/// train-mode predictions in example order.
pub fn train_epoch(
    model: &mut ModelState,
    optimizer: &mut AdamState,
    examples: &[Example],
    plan: &TrainPlan,
    frozen: &BTreeSet<String>,
    epoch: usize,
) -> Result<(f64, Vec<usize>)> {
    if examples.is_empty() {
        return Err(Error::invalid("no training examples"));
    }
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_seed(plan.seed, &[epoch as u64])));
    let mut predictions = vec![0; examples.len()];
    let mut total = 0.0;
    let mut batches = 0;
    for (b, chunk) in order.chunks(plan.batch_size).enumerate() {
        let batch: Vec<&Example> = chunk.iter().map(|&i| &examples[i]).collect();
        let g = batch_gradients(model, &batch, DropoutMode::Train, mix_seed(plan.seed, &[epoch as u64, b as u64]))?;
        if !g.loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: b });
        }
        model.params.zero_grads();
        g.apply_to(&mut model.params)?;
        optimizer.step(model.params.iter_mut().filter(|(n, _)| !frozen.contains(*n)))?;
        for (&i, &p) in chunk.iter().zip(&g.predictions) {
            predictions[i] = p;
        }
        total += g.loss;
        batches += 1;
    }
    model.params.zero_grads();
    Ok((total / batches as f64, predictions))
}

/// Eval-mode loss and macro P/R/F over `examples`.
pub fn evaluate_split(model: &ModelState, examples: &[Example], labels: &LabelSet) -> Result<(f64, Prf, Vec<usize>)> {
    let logits = forward(model, examples)?;
    let mut loss = 0.0;
    let mut pred = Vec::with_capacity(examples.len());
    for (r, ex) in examples.iter().enumerate() {
        let row = logits.row(r);
        loss += crate::autodiff::log_sum_exp(row) - row[ex.label];
        pred.push(argmax(row));
    }
    let gold: Vec<usize> = examples.iter().map(|e| e.label).collect();
    let prf = macro_prf(&confusion_counts(&pred, &gold, labels)?).macro_prf;
    Ok((loss / examples.len() as f64, prf, pred))
}

/// Fraction of `examples` whose eval-mode argmax equals the gold label.
pub fn training_accuracy(model: &ModelState, examples: &[Example]) -> Result<f64> {
    let pred = predict(model, examples)?;
    let hits = pred.iter().zip(examples).filter(|(p, e)| **p == e.label).count();
    Ok(hits as f64 / examples.len() as f64)
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    /// Epoch whose weights were kept (1-based).
    pub best_epoch: usize,
    pub best_dev_f: Option<f64>,
    pub epochs_run: usize,
    pub history: Vec<EpochRecord>,
}

/// A model with its optimizer state, the frozen set resolved from the plan,
/// and the number of completed epochs.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub model: ModelState,
    pub optimizer: AdamState,
    pub plan: TrainPlan,
    pub epoch: usize,
    frozen: BTreeSet<String>,
}

impl Trainer {
    pub fn new(model: ModelState, plan: TrainPlan) -> Result<Self> {
        let optimizer = AdamState::new(plan.adam);
        Trainer::resume(model, optimizer, plan, 0)
    }

    /// Continues from saved optimizer state after `epoch` completed epochs.
    pub fn resume(model: ModelState, mut optimizer: AdamState, plan: TrainPlan, epoch: usize) -> Result<Self> {
        plan.validate()?;
        let frozen = frozen_names(&model.params, &plan.frozen)?;
        optimizer.config = plan.adam;
        Ok(Trainer {
            model,
            optimizer,
            plan,
            epoch,
            frozen,
        })
    }

    pub fn frozen(&self) -> &BTreeSet<String> {
        &self.frozen
    }

    /// Runs the next epoch; the record's P/R/F come from the train-mode
    /// predictions made while training.
    pub fn run_epoch(&mut self, train: &[Example], labels: &LabelSet) -> Result<EpochRecord> {
        let (loss, pred) = train_epoch(&mut self.model, &mut self.optimizer, train, &self.plan, &self.frozen, self.epoch)?;
        self.epoch += 1;
        let gold: Vec<usize> = train.iter().map(|e| e.label).collect();
        Ok(EpochRecord {
            epoch: self.epoch,
            split: "train".into(),
            loss,
            prf: macro_prf(&confusion_counts(&pred, &gold, labels)?).macro_prf,
        })
    }

    /// Trains up to `plan.epochs` further epochs. With a non-empty `dev`
    /// and a patience, stops once dev macro-F has not improved for that many
    /// epochs and restores the best weights (earliest on ties).
    pub fn fit(&mut self, train: &[Example], dev: &[Example], labels: &LabelSet) -> Result<FitOutcome> {
        check_labels(&self.model, labels)?;
        let mut history = Vec::new();
        let mut best: Option<(f64, usize, ParamStore)> = None;
        let start = self.epoch;
        while self.epoch < start + self.plan.epochs {
            history.push(self.run_epoch(train, labels)?);
            if dev.is_empty() {
                continue;
            }
            let (loss, prf, _) = evaluate_split(&self.model, dev, labels)?;
            history.push(EpochRecord {
                epoch: self.epoch,
                split: "dev".into(),
                loss,
                prf,
            });
            if best.as_ref().is_none_or(|(f, _, _)| prf.f > *f) {
                best = Some((prf.f, self.epoch, self.model.params.clone()));
            }
            let (best_f, best_epoch, _) = best.as_ref().expect("set above");
            if self.plan.patience.is_some_and(|p| self.epoch - best_epoch >= p) {
                log::info!("early stop at epoch {}; best dev F {best_f:.2} at epoch {best_epoch}", self.epoch);
                break;
            }
        }
        let epochs_run = self.epoch - start;
        match best {
            Some((f, epoch, params)) => {
                self.model.params = params;
                Ok(FitOutcome {
                    best_epoch: epoch,
                    best_dev_f: Some(f),
                    epochs_run,
                    history,
                })
            }
            None => Ok(FitOutcome {
                best_epoch: self.epoch,
                best_dev_f: None,
                epochs_run,
                history,
            }),
        }
    }
}

pub(crate) fn check_labels(model: &ModelState, labels: &LabelSet) -> Result<()> {
    if model.config.label_count != labels.len() {
        return Err(Error::invalid(format!(
            "model has {} outputs but label set {} has {} labels",
            model.config.label_count,
            labels.name,
            labels.len()
        )));
    }
    Ok(())
}
