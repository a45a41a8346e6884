use std::collections::BTreeMap;

/// Unordered word-id pair, stored as `(min, max)`.
pub type PairKey = (usize, usize);

pub fn pair_key(a: usize, b: usize) -> PairKey {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairStat {
    pub count: u64,
    pub weight: f64,
}

/// Corpus-level weighted word pairs. Self-pairs are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordPairStats {
    pub pairs: BTreeMap<PairKey, PairStat>,
    /// Normalizer used for the weights (documents or windows).
    pub total: u64,
}

impl WordPairStats {
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        self.pairs.get(&pair_key(a, b)).map_or(0.0, |s| s.weight)
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&PairStat> {
        self.pairs.get(&pair_key(a, b))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Associative accumulator of per-pair counts. Merging is addition, so shards
/// can be folded in any grouping with identical results.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub pairs: BTreeMap<PairKey, u64>,
    pub singles: BTreeMap<usize, u64>,
    pub total: u64,
}

impl PairCounts {
    pub fn add_pair(&mut self, a: usize, b: usize, n: u64) {
        if a != b {
            *self.pairs.entry(pair_key(a, b)).or_default() += n;
        }
    }

    pub fn add_single(&mut self, a: usize, n: u64) {
        *self.singles.entry(a).or_default() += n;
    }

    pub fn merge(mut self, other: PairCounts) -> PairCounts {
        for (k, v) in other.pairs {
            *self.pairs.entry(k).or_default() += v;
        }
        for (k, v) in other.singles {
            *self.singles.entry(k).or_default() += v;
        }
        self.total += other.total;
        self
    }
}
