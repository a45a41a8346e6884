use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::stats::{PairCounts, PairKey, PairStat, WordPairStats};
use crate::corpus::{Document, EmbeddingTable, Vocabulary, PAD_ID};
use crate::error::{Error, Result};

/// Where per-token vectors for the semantic graph come from.
#[derive(Clone, Copy, Debug)]
pub enum SemanticFeatures<'a> {
    /// One static vector per vocabulary id.
    Static(&'a EmbeddingTable),
    /// Per-document, per-token vectors (e.g. Bi-LSTM states); repeated
    /// occurrences of a word within a document are averaged.
    PerDocument(&'a [Vec<Vec<f64>>]),
}

fn word_ids(doc: &Document, vocab: &Vocabulary) -> Vec<usize> {
    doc.tokens.iter().map(|t| vocab.id(&t.surface)).collect()
}

fn unique_words(ids: &[usize]) -> BTreeSet<usize> {
    ids.iter().copied().filter(|&i| i != PAD_ID).collect()
}

/// Number of documents containing both words of each counted pair.
fn cooccurrence_docs(docs: &[BTreeSet<usize>], pairs: impl Iterator<Item = PairKey>) -> BTreeMap<PairKey, u64> {
    let mut index: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (d, words) in docs.iter().enumerate() {
        for &w in words {
            index.entry(w).or_default().push(d);
        }
    }
    pairs
        .map(|(a, b)| {
            let (xa, xb) = (&index[&a], &index[&b]);
            let (mut i, mut j, mut n) = (0, 0, 0u64);
            while i < xa.len() && j < xb.len() {
                match xa[i].cmp(&xb[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        n += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            ((a, b), n)
        })
        .collect()
}

fn normalize_by_cooccurrence(counts: PairCounts, docs: &[BTreeSet<usize>]) -> WordPairStats {
    let co = cooccurrence_docs(docs, counts.pairs.keys().copied());
    let pairs = counts
        .pairs
        .into_iter()
        .map(|(k, count)| {
            let weight = count as f64 / co[&k] as f64;
            (k, PairStat { count, weight })
        })
        .collect();
    WordPairStats {
        pairs,
        total: docs.len() as u64,
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Every in-document word pair whose cosine similarity reaches `theta` adds
/// one to its count; weight = count / documents containing both words.
pub fn build_semantic_graph(
    docs: &[Document],
    vocab: &Vocabulary,
    features: SemanticFeatures<'_>,
    theta: f64,
) -> Result<WordPairStats> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid(format!("semantic threshold {theta} outside (0, 1)")));
    }
    if let SemanticFeatures::PerDocument(f) = features {
        if f.len() != docs.len() {
            return Err(Error::invalid("per-document features do not match the document count"));
        }
    }
    let ids: Vec<Vec<usize>> = docs.iter().map(|d| word_ids(d, vocab)).collect();
    let sets: Vec<BTreeSet<usize>> = ids.iter().map(|i| unique_words(i)).collect();
    let counts = ids
        .par_iter()
        .enumerate()
        .map(|(d, seq)| {
            let mut vecs: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
            for (pos, &w) in seq.iter().enumerate() {
                if w == PAD_ID {
                    continue;
                }
                let v: &[f64] = match features {
                    SemanticFeatures::Static(t) => t.row(w),
                    SemanticFeatures::PerDocument(f) => &f[d][pos],
                };
                let e = vecs.entry(w).or_insert_with(|| (vec![0.0; v.len()], 0));
                e.0.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                e.1 += 1;
            }
            let words: Vec<(usize, Vec<f64>)> = vecs
                .into_iter()
                .filter_map(|(w, (sum, n))| {
                    let mean: Vec<f64> = sum.iter().map(|x| x / n as f64).collect();
                    if mean.iter().all(|x| *x == 0.0) {
                        log::debug!("word id {w} has a zero vector; no semantic edges");
                        None
                    } else {
                        Some((w, mean))
                    }
                })
                .collect();
            let mut c = PairCounts::default();
            for i in 0..words.len() {
                for j in i + 1..words.len() {
                    if cosine(&words[i].1, &words[j].1) >= theta {
                        c.add_pair(words[i].0, words[j].0, 1);
                    }
                }
            }
            c
        })
        .reduce(PairCounts::default, PairCounts::merge);
    Ok(normalize_by_cooccurrence(counts, &sets))
}

/// Each dependency edge adds one to its word-type pair; weight = count /
/// documents containing both words.
pub fn build_syntactic_graph(docs: &[Document], vocab: &Vocabulary) -> WordPairStats {
    let ids: Vec<Vec<usize>> = docs.iter().map(|d| word_ids(d, vocab)).collect();
    let sets: Vec<BTreeSet<usize>> = ids.iter().map(|i| unique_words(i)).collect();
    let mut counts = PairCounts::default();
    for (doc, seq) in docs.iter().zip(&ids) {
        for e in &doc.dep_edges {
            if e.child < seq.len() && e.head < seq.len() {
                counts.add_pair(seq[e.child], seq[e.head], 1);
            }
        }
    }
    normalize_by_cooccurrence(counts, &sets)
}

/// Window counts for one token sequence: each window contributes once per
/// distinct word and once per distinct word pair. A sequence shorter than
/// the window is a single window.
pub fn window_counts(seq: &[usize], window: usize) -> PairCounts {
    let mut c = PairCounts::default();
    if seq.is_empty() {
        return c;
    }
    let n_windows = if seq.len() <= window { 1 } else { seq.len() - window + 1 };
    for s in 0..n_windows {
        let words: BTreeSet<usize> = seq[s..(s + window).min(seq.len())].iter().copied().collect();
        let words: Vec<usize> = words.into_iter().collect();
        for (i, &a) in words.iter().enumerate() {
            c.add_single(a, 1);
            for &b in &words[i + 1..] {
                c.add_pair(a, b, 1);
            }
        }
    }
    c.total = n_windows as u64;
    c
}

/// Positive point-wise mutual information over sliding windows of width
/// `window`; negative PMI is clipped to zero.
pub fn build_sequence_graph(docs: &[Document], vocab: &Vocabulary, window: usize) -> Result<WordPairStats> {
    if window < 2 {
        return Err(Error::invalid(format!("window {window} must be at least 2")));
    }
    let counts = docs
        .par_iter()
        .map(|d| window_counts(&word_ids(d, vocab), window))
        .reduce(PairCounts::default, PairCounts::merge);
    Ok(pmi_from_counts(&counts))
}

pub fn pmi_from_counts(counts: &PairCounts) -> WordPairStats {
    if counts.total == 0 {
        return WordPairStats::default();
    }
    let n = counts.total as f64;
    let pairs = counts
        .pairs
        .iter()
        .map(|(&(a, b), &nab)| {
            let p_ab = nab as f64 / n;
            let p_a = counts.singles[&a] as f64 / n;
            let p_b = counts.singles[&b] as f64 / n;
            let pmi = (p_ab / (p_a * p_b)).ln();
            ((a, b), PairStat { count: nab, weight: pmi.max(0.0) })
        })
        .collect();
    WordPairStats {
        pairs,
        total: counts.total,
    }
}
