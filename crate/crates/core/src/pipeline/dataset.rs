use std::sync::Arc;

use super::example::{prepare_examples, Example};
use crate::corpus::{
    generate_candidates, normalize_length, subsample_negatives, Document, EmbeddingTable, LabelSet, LengthLimits,
    RelationInstance, Task, Vocabulary,
};
use crate::error::{Error, Result};
use crate::textgraph::{CorpusGraphs, SemanticFeatures, DEFAULT_THETA, DEFAULT_WINDOW};

#[derive(Clone, Debug)]
pub struct DatasetOptions {
    pub limits: LengthLimits,
    pub min_count: usize,
    pub theta: f64,
    pub window: usize,
    /// Word-vector width used when no vectors are supplied.
    pub d_w: usize,
    /// Keep each negative with this probability; `None` keeps all.
    pub negative_ratio: Option<f64>,
    pub seed: u64,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            limits: LengthLimits::default(),
            min_count: 1,
            theta: DEFAULT_THETA,
            window: DEFAULT_WINDOW,
            d_w: 100,
            negative_ratio: None,
            seed: 0,
        }
    }
}

/// Length-normalized documents with their candidates, vocabulary, word
/// vectors, corpus graphs and model-ready examples.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub task: Task,
    pub label_set: Arc<LabelSet>,
    pub documents: Vec<Document>,
    pub instances: Vec<RelationInstance>,
    pub vocab: Arc<Vocabulary>,
    pub words: Arc<EmbeddingTable>,
    pub graphs: CorpusGraphs,
    pub examples: Vec<Example>,
}

/// Normalizes lengths, regenerates candidates for `task` on the normalized
/// documents, and builds graphs from `vectors` (or seeded random vectors).
pub fn build_dataset(
    documents: Vec<Document>,
    task: Task,
    vectors: Option<EmbeddingTable>,
    vocab: Option<Arc<Vocabulary>>,
    opts: &DatasetOptions,
) -> Result<Dataset> {
    let documents: Vec<Document> = documents.into_iter().map(|d| normalize_length(d, opts.limits)).collect();
    let mut instances: Vec<RelationInstance> = documents.iter().flat_map(|d| generate_candidates(d, task)).collect();
    if let Some(ratio) = opts.negative_ratio {
        instances = subsample_negatives(instances, ratio, opts.seed);
    }
    if instances.is_empty() {
        return Err(Error::invalid("the corpus yields no candidate pairs"));
    }
    let vocab = vocab.unwrap_or_else(|| Arc::new(Vocabulary::build(&documents, opts.min_count)));
    let words = match vectors {
        Some(v) if v.rows() == vocab.len() => v,
        Some(v) => return Err(Error::dim("word vectors", v.table.shape(), &[vocab.len(), v.dim()])),
        None => EmbeddingTable::random(&vocab, opts.d_w, opts.seed),
    };
    let graphs = CorpusGraphs::build(&documents, &vocab, SemanticFeatures::Static(&words), opts.theta, opts.window)?;
    let examples = prepare_examples(&documents, &instances, &vocab, Some(&graphs))?;
    Ok(Dataset {
        task,
        label_set: task.label_set(),
        documents,
        instances,
        vocab,
        words: Arc::new(words),
        graphs,
        examples,
    })
}

impl Dataset {
    /// Examples at the given positions.
    pub fn select(&self, idx: &[usize]) -> Vec<Example> {
        idx.iter().map(|&i| self.examples[i].clone()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.label).collect()
    }
}
