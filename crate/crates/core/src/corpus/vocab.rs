use std::collections::HashMap;

use super::document::Document;
use crate::error::{Error, Result};

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
    counts: Vec<usize>,
}

impl Vocabulary {
    /// Tokens with frequency `>= min_count` receive ids after PAD and UNK, in
    /// descending frequency then lexicographic order.
    pub fn build(docs: &[Document], min_count: usize) -> Self {
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for d in docs {
            for t in &d.tokens {
                *freq.entry(t.surface.as_str()).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> = freq.into_iter().filter(|&(_, c)| c >= min_count.max(1)).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut v = Vocabulary::from_tokens(kept.iter().map(|(t, _)| t.to_string()));
        for (i, (_, c)) in kept.iter().enumerate() {
            v.counts[i + 2] = *c;
        }
        v
    }

    /// Builds from an ordered token list (reserved entries are prepended).
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut v = Vocabulary {
            tokens: vec![PAD.to_string(), UNK.to_string()],
            ids: HashMap::from([(PAD.to_string(), PAD_ID), (UNK.to_string(), UNK_ID)]),
            counts: vec![0, 0],
        };
        for t in tokens {
            if !v.ids.contains_key(&t) {
                v.ids.insert(t.clone(), v.tokens.len());
                v.tokens.push(t);
                v.counts.push(0);
            }
        }
        v
    }

    /// Inverse of [`tokens`](Self::tokens) and [`count`](Self::count).
    pub fn from_parts(tokens: Vec<String>, counts: Vec<usize>) -> Result<Self> {
        if tokens.len() != counts.len() || tokens.len() < 2 || tokens[PAD_ID] != PAD || tokens[UNK_ID] != UNK {
            return Err(Error::invalid("vocabulary parts must start with the reserved tokens and align with counts"));
        }
        let ids: HashMap<String, usize> = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if ids.len() != tokens.len() {
            return Err(Error::invalid("vocabulary parts contain a duplicate token"));
        }
        Ok(Vocabulary { tokens, ids, counts })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> usize {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn count(&self, id: usize) -> usize {
        self.counts[id]
    }

    /// Tokens in id order, including the reserved entries.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Id sequence of `doc`, PAD positions included.
    pub fn encode(&self, doc: &Document) -> Vec<usize> {
        (0..doc.len())
            .map(|i| if i < doc.real_len() { self.id(doc.surface(i)) } else { PAD_ID })
            .collect()
    }
}
