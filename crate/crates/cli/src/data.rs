//! Turns a [`DataSpec`] into documents and model-ready datasets.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use bioie::corpus::{
    attach_dependencies, load_pretrained_vectors, normalize_length, parse_chemprot, parse_pathology_records,
    parse_pubtator, read_conll, synth_corpus, Document, EmbeddingTable, LengthLimits, Source, SynthSpec, Task,
    Vocabulary,
};
use bioie::pipeline::{build_dataset, Dataset};
use bioie::{Error, Result};

use crate::config::{CorpusKind, DataSpec, RunConfig, SynthShape};

pub fn synth_spec(spec: &DataSpec) -> SynthSpec {
    match spec.synth {
        SynthShape::SeparableTcga => SynthSpec::separable(spec.synth_reports, Source::Tcga),
        SynthShape::SeparableTfah => SynthSpec::separable(spec.synth_reports, Source::Tfah),
        SynthShape::Tcga => SynthSpec::tcga(),
        SynthShape::Tfah => SynthSpec::tfah(),
    }
}

fn required<'a>(spec: &'a DataSpec, what: &str) -> Result<&'a Path> {
    spec.data
        .as_deref()
        .ok_or_else(|| Error::Invalid(format!("corpus `{}` needs `data` pointing at {what}", spec.corpus)))
}

/// Finds the one file in `dir` whose name ends with any of `suffixes`.
fn find_file(dir: &Path, suffixes: &[&str]) -> Result<PathBuf> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut hits: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| suffixes.iter().any(|s| n.ends_with(s)))
        })
        .collect();
    hits.sort();
    match hits.len() {
        1 => Ok(hits.remove(0)),
        0 => Err(Error::Invalid(format!("{}: no file ending in {}", dir.display(), suffixes.join(" or ")))),
        _ => Err(Error::Invalid(format!("{}: several files ending in {}", dir.display(), suffixes.join(" or ")))),
    }
}

/// Parsed documents of `spec` with dependencies attached, and the task.
pub fn load_documents(spec: &DataSpec, seed: u64) -> Result<(Vec<Document>, Task)> {
    let (docs, task) = match spec.corpus {
        CorpusKind::Cdr => (parse_pubtator(required(spec, "a PubTator file")?)?.documents, Task::Cdr),
        CorpusKind::ChemProt => {
            let dir = required(spec, "the ChemProt directory")?;
            let abstracts = find_file(dir, &["abstracts.tsv"])?;
            let entities = find_file(dir, &["entities.tsv"])?;
            let relations = find_file(dir, &["gold_standard.tsv", "relations.tsv"])?;
            (parse_chemprot(&abstracts, &entities, &relations)?.documents, Task::ChemProt)
        }
        CorpusKind::Pathology => (
            parse_pathology_records(required(spec, "a record file")?)?.documents,
            Task::Pathology(spec.subtask),
        ),
        CorpusKind::Synthetic => (synth_corpus(&synth_spec(spec), seed)?.0.documents, Task::Pathology(spec.subtask)),
    };
    let Some(dir) = &spec.parses else {
        return Ok((docs, task));
    };
    let docs = docs
        .into_iter()
        .map(|d| {
            let path = dir.join(format!("{}.conllu", d.id));
            if path.exists() {
                let rows = read_conll(&path)?;
                attach_dependencies(d, Some(&rows))
            } else {
                log::warn!("no parse for document {}; using the linear chain", d.id);
                attach_dependencies(d, None)
            }
        })
        .collect::<Result<_>>()?;
    Ok((docs, task))
}

pub fn normalize(docs: Vec<Document>, cfg: &RunConfig) -> Vec<Document> {
    let limits = LengthLimits {
        min: cfg.min_len,
        max: cfg.max_len,
    };
    docs.into_iter().map(|d| normalize_length(d, limits)).collect()
}

/// Vectors for `vocab`: the configured file, else seeded random rows.
pub fn word_vectors(cfg: &RunConfig, vocab: &Vocabulary, d_w: usize) -> Result<EmbeddingTable> {
    match &cfg.vectors {
        Some(path) => load_pretrained_vectors(path, vocab, d_w, cfg.seed),
        None => Ok(EmbeddingTable::random(vocab, d_w, cfg.seed)),
    }
}

/// Dataset over normalized `docs`. A fresh vocabulary is built when none is
/// given; vectors default to [`word_vectors`].
pub fn dataset(
    cfg: &RunConfig,
    docs: Vec<Document>,
    task: Task,
    vocab: Option<Arc<Vocabulary>>,
    words: Option<EmbeddingTable>,
) -> Result<Dataset> {
    let docs = normalize(docs, cfg);
    let vocab = vocab.unwrap_or_else(|| Arc::new(Vocabulary::build(&docs, cfg.min_count)));
    let words = match words {
        Some(w) => w,
        None => word_vectors(cfg, &vocab, cfg.model.d_w)?,
    };
    let data = build_dataset(docs, task, Some(words), Some(vocab), &cfg.dataset_options())?;
    log::info!(
        "{} documents, {} instances, vocabulary {}",
        data.documents.len(),
        data.examples.len(),
        data.vocab.len()
    );
    Ok(data)
}

pub fn source_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let (docs, task) = load_documents(&cfg.source, cfg.seed)?;
    dataset(cfg, docs, task, None, None)
}
