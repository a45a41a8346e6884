//! Corpus-level word graphs and their projection onto documents.
//!
//! Three graphs share one vocabulary: a semantic graph (cosine similarity of
//! word vectors above a threshold), a syntactic graph (undirected dependency
//! edges) and a sequence graph (positive PMI over sliding windows). Each
//! document sees them as token-level adjacency matrices with self-loops.

mod adjacency;
mod build;
mod stats;

use std::fmt::Write as _;
use std::path::Path;

pub use adjacency::{project_adjacency, DocumentAdjacency, GraphKind};
pub use build::{
    build_semantic_graph, build_sequence_graph, build_syntactic_graph, pmi_from_counts, window_counts,
    SemanticFeatures,
};
pub use stats::{pair_key, PairCounts, PairKey, PairStat, WordPairStats};

use crate::corpus::{Document, Vocabulary};
use crate::error::{io_err, Result};

pub const DEFAULT_THETA: f64 = 0.9;
pub const DEFAULT_WINDOW: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusGraphs {
    pub semantic: WordPairStats,
    pub syntactic: WordPairStats,
    pub sequence: WordPairStats,
    pub theta: f64,
    pub window: usize,
}

impl CorpusGraphs {
    pub fn build(
        docs: &[Document],
        vocab: &Vocabulary,
        features: SemanticFeatures<'_>,
        theta: f64,
        window: usize,
    ) -> Result<CorpusGraphs> {
        let semantic = build_semantic_graph(docs, vocab, features, theta)?;
        let syntactic = build_syntactic_graph(docs, vocab);
        let sequence = build_sequence_graph(docs, vocab, window)?;
        log::info!(
            "graphs: {} semantic, {} syntactic, {} sequence edges",
            semantic.len(),
            syntactic.len(),
            sequence.len()
        );
        Ok(CorpusGraphs {
            semantic,
            syntactic,
            sequence,
            theta,
            window,
        })
    }

    pub fn stats(&self, kind: GraphKind) -> &WordPairStats {
        match kind {
            GraphKind::Semantic => &self.semantic,
            GraphKind::Syntactic => &self.syntactic,
            GraphKind::Sequence => &self.sequence,
        }
    }

    /// Edge list `kind\tword_a\tword_b\tweight`, one line per edge, sorted.
    pub fn dump(&self, vocab: &Vocabulary) -> String {
        let mut lines = Vec::new();
        for kind in GraphKind::ALL {
            for (&(a, b), s) in &self.stats(kind).pairs {
                let (wa, wb) = (vocab.token(a), vocab.token(b));
                let (wa, wb) = if wa <= wb { (wa, wb) } else { (wb, wa) };
                lines.push(format!("{}\t{}\t{}\t{}", kind.as_str(), wa, wb, s.weight));
            }
        }
        lines.sort();
        let mut out = String::new();
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    pub fn write_dump(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        std::fs::write(path, self.dump(vocab)).map_err(io_err(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;
    use crate::corpus::{EmbeddingTable, Source};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn doc_from_ids(ids: &[usize]) -> Document {
        let text: Vec<String> = ids.iter().map(|i| format!("w{i}")).collect();
        Document::from_text("d", Source::Synthetic, text.join(" "))
    }

    /// Enumerates every window and recomputes PMI from scratch.
    fn brute_force_pmi(seqs: &[Vec<usize>], w: usize) -> Vec<((usize, usize), f64)> {
        let mut windows: Vec<BTreeSet<usize>> = Vec::new();
        for s in seqs.iter().filter(|s| !s.is_empty()) {
            if s.len() <= w {
                windows.push(s.iter().copied().collect());
            } else {
                for i in 0..=s.len() - w {
                    windows.push(s[i..i + w].iter().copied().collect());
                }
            }
        }
        let n = windows.len() as f64;
        let words: BTreeSet<usize> = seqs.iter().flatten().copied().collect();
        let mut out = Vec::new();
        for &a in &words {
            for &b in words.range(a + 1..) {
                let nab = windows.iter().filter(|x| x.contains(&a) && x.contains(&b)).count() as f64;
                if nab == 0.0 {
                    continue;
                }
                let na = windows.iter().filter(|x| x.contains(&a)).count() as f64;
                let nb = windows.iter().filter(|x| x.contains(&b)).count() as f64;
                out.push(((a, b), ((nab / n) / ((na / n) * (nb / n))).ln().max(0.0)));
            }
        }
        out
    }

    proptest! {
        #[test]
        fn sequence_graph_matches_window_enumeration(
            seqs in prop::collection::vec(prop::collection::vec(0usize..8, 0..40), 1..5),
            w in 2usize..6,
        ) {
            let docs: Vec<Document> = seqs.iter().map(|s| doc_from_ids(s)).collect();
            let vocab = Vocabulary::build(&docs, 1);
            let ids: Vec<Vec<usize>> = seqs
                .iter()
                .map(|s| s.iter().map(|i| vocab.id(&format!("w{i}"))).collect())
                .collect();
            let g = build_sequence_graph(&docs, &vocab, w).unwrap();
            let expect = brute_force_pmi(&ids, w);
            prop_assert_eq!(g.len(), expect.len());
            for ((a, b), weight) in expect {
                prop_assert_eq!(g.weight(a, b), weight);
                prop_assert!(weight >= 0.0);
            }
        }

        #[test]
        fn raising_theta_never_adds_edges(
            seq in prop::collection::vec(0usize..10, 1..30),
            vals in prop::collection::vec(-1.0f64..1.0, 30),
            lo in 0.05f64..0.9,
            delta in 0.0f64..0.09,
        ) {
            let docs = vec![doc_from_ids(&seq)];
            let vocab = Vocabulary::build(&docs, 1);
            let dim = 3;
            let mut t = Tensor::zeros(vec![vocab.len(), dim]);
            for (i, v) in t.values_mut().iter_mut().enumerate() {
                *v = vals[i % vals.len()] + 0.01 * (i / dim) as f64;
            }
            let table = EmbeddingTable { table: t, found: vocab.len(), coverage: 1.0 };
            let a = build_semantic_graph(&docs, &vocab, SemanticFeatures::Static(&table), lo).unwrap();
            let b = build_semantic_graph(&docs, &vocab, SemanticFeatures::Static(&table), lo + delta).unwrap();
            for k in b.pairs.keys() {
                prop_assert!(a.pairs.contains_key(k));
            }
        }

        #[test]
        fn projections_are_symmetric_with_unit_diagonal(
            seq in prop::collection::vec(0usize..6, 1..25),
        ) {
            let docs = vec![doc_from_ids(&seq)];
            let vocab = Vocabulary::build(&docs, 1);
            let table = EmbeddingTable::random(&vocab, 4, 3);
            let g = CorpusGraphs::build(&docs, &vocab, SemanticFeatures::Static(&table), 0.5, 3).unwrap();
            let adj = project_adjacency(&docs[0], &vocab, &g);
            for k in GraphKind::ALL {
                for i in 0..adj.n {
                    prop_assert!(adj.get(k, i, i) > 0.0);
                    prop_assert!(adj.degrees(k)[i] >= 1.0);
                    for j in 0..adj.n {
                        prop_assert_eq!(adj.get(k, i, j), adj.get(k, j, i));
                    }
                }
            }
        }
    }

    #[test]
    fn dump_is_sorted_and_tab_separated() {
        let docs = vec![Document::from_text("d", Source::Synthetic, "b a c b a")];
        let vocab = Vocabulary::build(&docs, 1);
        let table = EmbeddingTable::random(&vocab, 4, 0);
        let g = CorpusGraphs::build(&docs, &vocab, SemanticFeatures::Static(&table), 0.9, 2).unwrap();
        let dump = g.dump(&vocab);
        let lines: Vec<&str> = dump.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
        assert!(lines.iter().all(|l| l.split('\t').count() == 4));
        assert!(lines.iter().any(|l| l.starts_with("sequence\ta\tb\t")));
    }
}
