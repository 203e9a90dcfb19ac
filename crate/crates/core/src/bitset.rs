//! Compact fixed-capacity bitsets over dense integer ids.
//!
//! Relation argument domains and the sequence-search adjacency tables are
//! intersection-heavy, so sets are stored as packed `u64` words with an
//! early-exit overlap test.

/// A fixed-capacity set of `usize` ids in `0..capacity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    capacity: usize,
}

impl Bitset {
    pub fn new(capacity: usize) -> Self {
        Bitset {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Inserts `id`. Panics if `id` is out of capacity.
    pub fn insert(&mut self, id: usize) {
        assert!(id < self.capacity, "bitset id {id} out of capacity {}", self.capacity);
        self.words[id / 64] |= 1u64 << (id % 64);
    }

    pub fn contains(&self, id: usize) -> bool {
        id < self.capacity && self.words[id / 64] & (1u64 << (id % 64)) != 0
    }

    /// Number of ids in the set.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// True when the two sets share at least one id.
    pub fn intersects(&self, other: &Bitset) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    /// Iterates ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }
}
