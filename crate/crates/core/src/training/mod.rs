//! Mini-batch training with Adam, early stopping, k-fold cross-validation,
//! grid search, binary checkpoints and fine-tuning across corpora.

mod checkpoint;
mod cv;
mod grid;
mod plan;
mod trainer;
mod transfer;

pub use checkpoint::{
    config_digest, decode_checkpoint, digest_hex, encode_checkpoint, load_checkpoint, save_checkpoint, Checkpoint,
    RngState, FORMAT_VERSION, MAGIC,
};
pub use cv::{assert_no_leakage, holdout_split, model_for, run_cross_validation, train_and_test, CvSummary, FoldResult};
pub use grid::{grid_search, run_digest, GridEntry, GridOutcome};
pub use plan::{frozen_names, GridPoint, HyperGrid, TrainPlan};
pub use trainer::{evaluate_split, train_epoch, training_accuracy, write_metrics_log, EpochRecord, FitOutcome, Trainer};
pub use transfer::{remap_head, train_source, transfer_finetune, transfer_protocol, TransferDirection, TransferOutcome};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::AdamConfig;
    use crate::layers::ModelConfig;
    use crate::pipeline::fixtures::{fixture, small_config};
    use crate::corpus::{synth_corpus, EntityKind, Source, SynthSpec, Task};
    use crate::pipeline::{build_dataset, Dataset, DatasetOptions};

    fn quick(epochs: usize) -> TrainPlan {
        TrainPlan {
            epochs,
            batch_size: 4,
            seed: 11,
            adam: AdamConfig {
                lr: 0.01,
                ..AdamConfig::default()
            },
            ..TrainPlan::default()
        }
    }

    fn trainer(data: &Dataset, config: &ModelConfig, plan: TrainPlan) -> Trainer {
        Trainer::new(model_for(data, config, 3).unwrap(), plan).unwrap()
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let data = fixture(6);
        let mut plan = quick(2);
        plan.adam.lr = 0.0;
        let mut t = trainer(&data, &small_config(), plan);
        let before = t.model.params.clone();
        t.fit(&data.examples, &[], &data.label_set).unwrap();
        assert_eq!(t.model.params, before);
    }

    #[test]
    fn one_instance_is_memorized_under_defaults() {
        let (corpus, _) = synth_corpus(&SynthSpec::separable(2, Source::Tcga), 3).unwrap();
        let task = Task::Pathology(EntityKind::Size);
        let data = build_dataset(corpus.documents, task, None, None, &DatasetOptions::default()).unwrap();
        let one = &data.examples[..1];
        let plan = TrainPlan {
            epochs: 50,
            ..TrainPlan::default()
        };
        let config = ModelConfig {
            label_count: data.label_set.len(),
            ..ModelConfig::default()
        };
        let mut t = trainer(&data, &config, plan);
        t.fit(one, &[], &data.label_set).unwrap();
        assert_eq!(training_accuracy(&t.model, one).unwrap(), 1.0);
    }

    #[test]
    fn losses_repeat_bitwise_and_resume_continues() {
        let data = fixture(8);
        let run = |epochs| {
            let mut t = trainer(&data, &small_config(), quick(epochs));
            let fit = t.fit(&data.examples, &[], &data.label_set).unwrap();
            (fit.history.iter().map(|r| r.loss.to_bits()).collect::<Vec<_>>(), t)
        };
        let (a, full) = run(4);
        let (b, _) = run(4);
        assert_eq!(a, b);
        let (_, half) = run(2);
        let ckpt = Checkpoint {
            model: half.model.clone(),
            labels: data.label_set.labels.clone(),
            optimizer: Some(half.optimizer.clone()),
            rng: RngState {
                seed: half.plan.seed,
                epoch: half.epoch as u64,
            },
        };
        let back = decode_checkpoint(&encode_checkpoint(&ckpt), Some(&ckpt.model.config)).unwrap();
        let mut resumed = Trainer::resume(back.model, back.optimizer.unwrap(), quick(2), back.rng.epoch as usize).unwrap();
        let fit = resumed.fit(&data.examples, &[], &data.label_set).unwrap();
        let tail: Vec<u64> = fit.history.iter().map(|r| r.loss.to_bits()).collect();
        assert_eq!(tail, a[2..]);
        assert_eq!(resumed.model.params, full.model.params);
    }

    #[test]
    fn frozen_parameters_stay_bitwise() {
        let data = fixture(6);
        let plan = TrainPlan {
            frozen: vec!["lstm".into(), "gcn.l0".into()],
            ..quick(3)
        };
        let mut t = trainer(&data, &small_config(), plan);
        let before = t.model.params.clone();
        t.fit(&data.examples, &[], &data.label_set).unwrap();
        for (name, p) in t.model.params.iter() {
            let same = p.values() == before.get(name).unwrap().values();
            assert_eq!(same, t.frozen().contains(name), "{name}");
        }
        let bad = TrainPlan {
            frozen: vec!["decoder".into()],
            ..quick(1)
        };
        assert!(matches!(
            Trainer::new(model_for(&data, &small_config(), 0).unwrap(), bad),
            Err(crate::Error::UnmatchedPrefix(_))
        ));
    }

    #[test]
    fn metrics_log_lines() {
        let data = fixture(12);
        let mut t = trainer(&data, &small_config(), quick(2));
        let fit = t.fit(&data.examples[..8], &data.examples[8..], &data.label_set).unwrap();
        assert_eq!(fit.history.len(), 4);
        let line = fit.history[1].to_string();
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(&fields[..2], &["1", "dev"]);
    }

    #[test]
    fn grid_memoizes_and_orders() {
        let data = fixture(20);
        let split = holdout_split(data.examples.len(), 0).unwrap();
        let base = small_config();
        let one = HyperGrid {
            lr: vec![0.01],
            hidden: vec![3],
            gcn_layers: vec![1],
        };
        let out = grid_search(&data, &base, &one, &split, &quick(1)).unwrap();
        assert_eq!(out.leaderboard.len(), 1);
        assert_eq!(out.config.hidden, 3);
        let dup = HyperGrid {
            lr: vec![0.01, 0.01],
            ..one.clone()
        };
        assert_eq!(grid_search(&data, &base, &dup, &split, &quick(1)).unwrap().leaderboard.len(), 1);
        let two = HyperGrid {
            lr: vec![0.01, 0.02],
            hidden: vec![3, 6],
            gcn_layers: vec![1],
        };
        let out = grid_search(&data, &base, &two, &split, &quick(1)).unwrap();
        assert_eq!(out.leaderboard.len(), 4);
        let best = out.leaderboard.iter().map(|e| e.dev_f).fold(f64::MIN, f64::max);
        let first = out.leaderboard.iter().find(|e| e.dev_f == best).unwrap();
        assert_eq!(out.best, first.point);
    }

    #[test]
    fn cross_validation_partitions_and_degenerate_labels() {
        let mut data = fixture(20);
        data.examples.iter_mut().for_each(|e| e.label = 1);
        let summary = run_cross_validation(&data, &small_config(), 10, &quick(1)).unwrap();
        assert_eq!(summary.folds.len(), 10);
        let mut seen = vec![0; data.examples.len()];
        for f in &summary.folds {
            f.split.test.iter().for_each(|&i| seen[i] += 1);
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert_eq!(summary.pooled.classes.len(), 1);
        assert!(summary.pooled.classes[0].prf.r == 100.0 || summary.pooled.classes[0].prf.r == 0.0);
    }
}
