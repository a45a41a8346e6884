use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bioie::corpus::{generate_candidates, synth_corpus, write_records, Vocabulary};
use bioie::eval::{evaluate, metric_lines, report_table, EvalReport};
use bioie::pipeline::{argmax, make_variant, predict, predict_proba, AblationVariant, Dataset};
use bioie::textgraph::GraphKind;
use bioie::training::{
    grid_search, holdout_split, load_checkpoint, model_for, run_cross_validation, save_checkpoint, train_and_test,
    transfer_protocol, write_metrics_log, Checkpoint, RngState, Trainer,
};
use bioie::{Error, Result};

use crate::config::RunConfig;
use crate::data::{dataset, load_documents, normalize, source_dataset, synth_spec, word_vectors};

/// Output directory of one run; holds the resolved config from the start.
struct RunDir(PathBuf);

impl RunDir {
    fn create(cfg: &RunConfig) -> Result<Self> {
        let dir = RunDir(cfg.out.clone());
        std::fs::create_dir_all(&dir.0).map_err(|e| Error::Io {
            path: dir.0.clone(),
            source: e,
        })?;
        dir.write("config.resolved", &cfg.to_text())?;
        Ok(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|e| Error::Io { path, source: e })
    }
}

/// Prints the table and writes it with the machine-readable lines.
fn emit(run: &RunDir, rows: &[(String, EvalReport)], extra: &str) -> Result<()> {
    let mut table = report_table(rows);
    table.push_str(extra);
    print!("{table}");
    run.write("metrics.txt", &table)?;
    let mut lines = String::new();
    for (name, report) in rows {
        let _ = writeln!(lines, "# {name}");
        lines.push_str(&metric_lines(report));
    }
    run.write("metrics.tsv", &lines)
}

fn gold(examples: &[bioie::pipeline::Example]) -> Vec<usize> {
    examples.iter().map(|e| e.label).collect()
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let (corpus, report) = synth_corpus(&synth_spec(&cfg.source), cfg.seed)?;
    write_records(&run.path("corpus.jsonl"), &corpus.documents)?;
    let mut out = format!("documents\t{}\n", report.documents);
    for (kind, n) in &report.positives {
        let _ = writeln!(out, "positive\t{}\t{n}", kind.as_str());
    }
    for (kind, n) in &report.negatives {
        let _ = writeln!(out, "negative\t{}\t{n}", kind.as_str());
    }
    print!("{out}");
    run.write("synth.tsv", &out)
}

pub fn ingest(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let (docs, task) = load_documents(&cfg.source, cfg.seed)?;
    let docs = normalize(docs, cfg);
    let labels = task.label_set();
    let mut per_label = vec![0usize; labels.len()];
    let mut instances = 0;
    for d in &docs {
        for inst in generate_candidates(d, task) {
            per_label[inst.label] += 1;
            instances += 1;
        }
    }
    let tokens: usize = docs.iter().map(|d| d.real_len()).sum();
    let mut out = String::new();
    let _ = writeln!(out, "documents\t{}", docs.len());
    let _ = writeln!(out, "tokens\t{tokens}");
    let _ = writeln!(out, "mentions\t{}", docs.iter().map(|d| d.mentions.len()).sum::<usize>());
    let _ = writeln!(out, "relations\t{}", docs.iter().map(|d| d.relations.len()).sum::<usize>());
    let _ = writeln!(out, "instances\t{instances}");
    for (name, n) in labels.labels.iter().zip(&per_label) {
        let _ = writeln!(out, "label\t{name}\t{n}");
    }
    print!("{out}");
    run.write("ingest.tsv", &out)
}

pub fn build_graphs(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let data = source_dataset(cfg)?;
    data.graphs.write_dump(&data.vocab, &run.path("graphs.tsv"))?;
    let mut out = String::new();
    for kind in GraphKind::ALL {
        let _ = writeln!(out, "{}\t{}", kind.as_str(), data.graphs.stats(kind).len());
    }
    print!("{out}");
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let data = source_dataset(cfg)?;
    let split = holdout_split(data.examples.len(), cfg.seed)?;
    let mut config = cfg.model_config(data.label_set.len());
    let mut plan = cfg.plan();
    if cfg.grid {
        let g = grid_search(&data, &config, &cfg.hyper_grid(), &split, &plan)?;
        let mut board = String::from("lr\thidden\tgcn_layers\tdev_f\tbest_epoch\tdigest\n");
        for e in &g.leaderboard {
            let p = e.point;
            let _ = writeln!(board, "{}\t{}\t{}\t{:.4}\t{}\t{}", p.lr, p.hidden, p.gcn_layers, e.dev_f, e.best_epoch, e.digest);
        }
        run.write("grid.tsv", &board)?;
        config = g.config;
        plan.adam = g.adam;
    }
    let mut trainer = Trainer::new(model_for(&data, &config, cfg.seed)?, plan)?;
    let fit = trainer.fit(&data.select(&split.train), &data.select(&split.dev), &data.label_set)?;
    write_metrics_log(&run.path("metrics.log"), &fit.history)?;
    let test = data.select(&split.test);
    let report = evaluate(&predict(&trainer.model, &test)?, &gold(&test), &data.label_set, cfg.resamples, cfg.seed)?;
    let ckpt = Checkpoint {
        rng: RngState {
            seed: trainer.plan.seed,
            epoch: trainer.epoch as u64,
        },
        labels: data.label_set.labels.clone(),
        optimizer: Some(trainer.optimizer),
        model: trainer.model,
    };
    save_checkpoint(&run.path("model.ckpt"), &ckpt)?;
    let extra = format!("best epoch {} of {}\n", fit.best_epoch, fit.epochs_run);
    emit(&run, &[("test".to_string(), report)], &extra)
}

pub fn cv(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let data = source_dataset(cfg)?;
    let config = cfg.model_config(data.label_set.len());
    let summary = run_cross_validation(&data, &config, cfg.folds, &cfg.plan())?;
    let mut rows = Vec::new();
    for f in &summary.folds {
        write_metrics_log(&run.path(&format!("metrics_fold{}.log", f.fold)), &f.fit.history)?;
        rows.push((format!("fold {}", f.fold), f.report.clone()));
    }
    rows.push(("pooled".to_string(), summary.pooled.clone()));
    let (m, s) = (summary.mean, summary.std);
    let extra = format!(
        "mean over folds P {:.1} R {:.1} F {:.1}, sample std P {:.1} R {:.1} F {:.1}\n",
        m.p, m.r, m.f, s.p, s.r, s.f
    );
    emit(&run, &rows, &extra)
}

pub fn ablate(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let data = source_dataset(cfg)?;
    let base = cfg.model_config(data.label_set.len());
    let split = holdout_split(data.examples.len(), cfg.seed)?;
    let plan = cfg.plan();
    let mut rows = Vec::new();
    let mut counts = String::from("variant\tparameters\tP\tR\tF\n");
    for v in AblationVariant::ALL {
        let (model, _, report, _) = train_and_test(&data, &make_variant(&base, v), &split, &plan, cfg.resamples)?;
        let m = report.macro_prf;
        let _ = writeln!(counts, "{}\t{}\t{:.4}\t{:.4}\t{:.4}", v.name(), model.params.count(), m.p, m.r, m.f);
        rows.push((v.label().to_string(), report));
    }
    run.write("ablation.tsv", &counts)?;
    emit(&run, &rows, "")
}

pub fn transfer(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let (a_docs, a_task) = load_documents(&cfg.source, cfg.seed)?;
    let (b_docs, b_task) = load_documents(&cfg.target, cfg.seed)?;
    let (a_docs, b_docs) = (normalize(a_docs, cfg), normalize(b_docs, cfg));
    let all: Vec<_> = a_docs.iter().chain(&b_docs).cloned().collect();
    let vocab = Arc::new(Vocabulary::build(&all, cfg.min_count));
    let words = word_vectors(cfg, &vocab, cfg.model.d_w)?;
    let a = dataset(cfg, a_docs, a_task, Some(vocab.clone()), Some(words.clone()))?;
    let b = dataset(cfg, b_docs, b_task, Some(vocab), Some(words))?;
    let (a_name, b_name) = (cfg.source.name(), cfg.target.name());
    let config = cfg.model_config(a.label_set.len());
    let directions = transfer_protocol((&a_name, &a), (&b_name, &b), &config, &cfg.plan())?;
    let mut rows = Vec::new();
    // Directions come back as source-to-target, then target-to-source.
    for (d, target) in directions.into_iter().zip([&b, &a]) {
        let ckpt = Checkpoint {
            rng: RngState {
                seed: cfg.seed,
                epoch: d.outcome.fit.epochs_run as u64,
            },
            labels: target.label_set.labels.clone(),
            optimizer: None,
            model: d.outcome.model,
        };
        save_checkpoint(&run.path(&format!("{}.ckpt", d.name)), &ckpt)?;
        rows.push((d.name, d.outcome.report));
    }
    emit(&run, &rows, "")
}

fn required_checkpoint(cfg: &RunConfig) -> Result<&Path> {
    cfg.checkpoint
        .as_deref()
        .ok_or_else(|| Error::Invalid("no checkpoint given (use --checkpoint or the `checkpoint` key)".into()))
}

/// The checkpoint and the configured corpus encoded with its vocabulary.
fn checkpoint_dataset(cfg: &RunConfig) -> Result<(Checkpoint, Dataset)> {
    let ckpt = load_checkpoint(required_checkpoint(cfg)?, None)?;
    let (docs, task) = load_documents(&cfg.source, cfg.seed)?;
    let words = match &ckpt.model.words {
        Some(w) => (**w).clone(),
        None => word_vectors(cfg, &ckpt.model.vocab, ckpt.model.config.d_w)?,
    };
    let data = dataset(cfg, docs, task, Some(ckpt.model.vocab.clone()), Some(words))?;
    Ok((ckpt, data))
}

pub fn eval(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let (ckpt, data) = checkpoint_dataset(cfg)?;
    if ckpt.labels != data.label_set.labels {
        return Err(Error::Invalid(format!(
            "checkpoint labels [{}] differ from the corpus labels [{}]",
            ckpt.labels.join(", "),
            data.label_set.labels.join(", ")
        )));
    }
    let pred = predict(&ckpt.model, &data.examples)?;
    let report = evaluate(&pred, &data.labels(), &data.label_set, cfg.resamples, cfg.seed)?;
    emit(&run, &[("eval".to_string(), report)], "")
}

pub fn predict_cmd(cfg: &RunConfig) -> Result<()> {
    let run = RunDir::create(cfg)?;
    let (ckpt, data) = checkpoint_dataset(cfg)?;
    let probs = predict_proba(&ckpt.model, &data.examples)?;
    let mut rows: Vec<(&str, String)> = data
        .examples
        .iter()
        .zip(&probs)
        .map(|(ex, p)| {
            let k = argmax(p);
            let label = ckpt.labels.get(k).map_or("?", String::as_str);
            (ex.doc_id.as_str(), format!("{}\t{}\t{}\t{label}\t{:.6}\n", ex.doc_id, ex.head_id, ex.tail_id, p[k]))
        })
        .collect();
    // Stable: candidates keep their canonical pair order within a document.
    rows.sort_by(|a, b| a.0.cmp(b.0));
    let out: String = rows.into_iter().map(|(_, l)| l).collect();
    print!("{out}");
    run.write("predictions.tsv", &out)
}
