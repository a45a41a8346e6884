use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::{Vocabulary, PAD_ID};
use crate::autodiff::Tensor;
use crate::error::{read_to_string, Error, Result};

/// Word vectors indexed by vocabulary id.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub table: Tensor,
    /// Non-reserved vocabulary entries found in the vector file.
    pub found: usize,
    /// Fraction of non-reserved entries found in the vector file.
    pub coverage: f64,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    pub fn rows(&self) -> usize {
        self.table.rows()
    }

    pub fn row(&self, id: usize) -> &[f64] {
        self.table.row(id)
    }

    /// Uniform `[-0.25, 0.25]` rows; the PAD row is zero.
    pub fn random(vocab: &Vocabulary, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![0.0; vocab.len() * dim];
        for (id, row) in values.chunks_mut(dim).enumerate() {
            if id != PAD_ID {
                row.iter_mut().for_each(|v| *v = rng.gen_range(-0.25..=0.25));
            }
        }
        EmbeddingTable {
            table: Tensor::new(vec![vocab.len(), dim], values).expect("non-empty"),
            found: 0,
            coverage: 0.0,
        }
    }
}

/// Loads a word2vec-style text file (`count dim` header, then `token v1 .. vdim`).
/// Rows missing from the file are drawn as in [`EmbeddingTable::random`].
pub fn load_pretrained_vectors(path: &Path, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    load_vectors_str(&read_to_string(path)?, path, vocab, dim, seed)
}

pub fn load_vectors_str(input: &str, path: &Path, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let mut table = EmbeddingTable::random(vocab, dim, seed);
    let mut lines = input.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    if let Some((n, header)) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let file_dim = match parts.as_slice() {
            [_, d] => d
                .parse::<usize>()
                .map_err(|_| Error::parse(path, n + 1, "header must be `count dim`"))?,
            _ => return Err(Error::parse(path, n + 1, "header must be `count dim`")),
        };
        if file_dim != dim {
            return Err(Error::parse(
                path,
                n + 1,
                format!("vector dimension {file_dim} differs from configured {dim}"),
            ));
        }
    }
    let mut seen = vec![false; vocab.len()];
    for (n, line) in lines {
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line");
        let values: Vec<f64> = parts
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(path, n + 1, e.to_string()))?;
        if values.len() != dim {
            return Err(Error::parse(
                path,
                n + 1,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, n + 1, "non-finite vector value"));
        }
        if let Some(id) = vocab.get(token) {
            if id > 1 && !seen[id] {
                seen[id] = true;
                table.table.values_mut()[id * dim..(id + 1) * dim].copy_from_slice(&values);
            }
        }
    }
    let found = seen.iter().filter(|&&s| s).count();
    let denom = vocab.len().saturating_sub(2);
    table.found = found;
    table.coverage = if denom == 0 { 0.0 } else { found as f64 / denom as f64 };
    Ok(table)
}
