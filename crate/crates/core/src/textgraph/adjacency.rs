use super::stats::WordPairStats;
use super::CorpusGraphs;
use crate::autodiff::Tensor;
use crate::corpus::{Document, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphKind {
    Semantic,
    Syntactic,
    Sequence,
}

impl GraphKind {
    pub const ALL: [GraphKind; 3] = [GraphKind::Semantic, GraphKind::Syntactic, GraphKind::Sequence];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Semantic => "semantic",
            GraphKind::Syntactic => "syntactic",
            GraphKind::Sequence => "sequence",
        }
    }

    /// Short name used in parameter keys.
    pub fn key(self) -> &'static str {
        match self {
            GraphKind::Semantic => "sem",
            GraphKind::Syntactic => "syn",
            GraphKind::Sequence => "seq",
        }
    }
}

/// Token-level adjacency of one document under each graph, with unit
/// self-loops. Row-major `n×n` matrices indexed like [`GraphKind::ALL`].
#[derive(Clone, Debug, PartialEq)]
pub struct DocumentAdjacency {
    pub n: usize,
    pub matrices: [Vec<f64>; 3],
    pub degrees: [Vec<f64>; 3],
}

impl DocumentAdjacency {
    pub fn matrix(&self, kind: GraphKind) -> &[f64] {
        &self.matrices[kind as usize]
    }

    pub fn degrees(&self, kind: GraphKind) -> &[f64] {
        &self.degrees[kind as usize]
    }

    pub fn get(&self, kind: GraphKind, i: usize, j: usize) -> f64 {
        self.matrices[kind as usize][i * self.n + j]
    }

    /// `D⁻¹A` as a tensor, ready for propagation.
    pub fn normalized(&self, kind: GraphKind) -> Tensor {
        let k = kind as usize;
        let mut v = self.matrices[k].clone();
        for (row, d) in v.chunks_mut(self.n).zip(&self.degrees[k]) {
            row.iter_mut().for_each(|x| *x /= d);
        }
        Tensor::new(vec![self.n, self.n], v).expect("adjacency of a non-empty document")
    }
}

fn project_one(ids: &[usize], stats: &WordPairStats) -> (Vec<f64>, Vec<f64>) {
    let n = ids.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0;
        for j in i + 1..n {
            let w = stats.weight(ids[i], ids[j]);
            a[i * n + j] = w;
            a[j * n + i] = w;
        }
    }
    let d = a.chunks(n.max(1)).map(|r| r.iter().sum()).collect();
    (a, d)
}

/// Projects the corpus graphs onto the real tokens of `doc`. Padding
/// positions are not materialized: the model only runs on real tokens.
pub fn project_adjacency(doc: &Document, vocab: &Vocabulary, graphs: &CorpusGraphs) -> DocumentAdjacency {
    let ids: Vec<usize> = doc.tokens.iter().map(|t| vocab.id(&t.surface)).collect();
    let (sa, sd) = project_one(&ids, &graphs.semantic);
    let (ya, yd) = project_one(&ids, &graphs.syntactic);
    let (qa, qd) = project_one(&ids, &graphs.sequence);
    DocumentAdjacency {
        n: ids.len(),
        matrices: [sa, ya, qa],
        degrees: [sd, yd, qd],
    }
}
