//! Subset-indexed randomness: a uniform `ξ_s` and a uniform total order
//! `≺_s` for every finite `s ⊂ ℕ`, computed lazily from a seed.
//!
//! Every value is a pure function of `(seed, s)`, so structures built from
//! these inputs restrict consistently: the part of a sample on `[1,m]` never
//! depends on how many points were sampled.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAG_XI: u64 = 0x7869;
const TAG_ORD: u64 = 0x6f7264;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit hash of a word sequence.
pub fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243f_6a88_85a3_08d3, |h, &w| mix(h ^ mix(w)))
}

/// Hash of a string label, for deriving named sub-seeds.
pub fn hash_str(s: &str) -> u64 {
    let words: Vec<u64> = s.bytes().map(u64::from).collect();
    hash_words(&words)
}

/// Independent seed number `i` derived from `seed`.
pub fn derive_seed(seed: u64, i: u64) -> u64 {
    hash_words(&[seed, 0x5eed, i])
}

/// `53` random bits as a float in `[0,1)`.
#[inline]
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The random inputs a sampler may consult.
pub trait RandomSource: Sync {
    /// Largest subset size that may be queried.
    fn max_arity(&self) -> usize;

    /// `ξ_s`, uniform on `[0,1)`.
    fn xi(&self, s: &[usize]) -> Result<f64>;

    /// The elements of `s` listed from `≺_s`-least to greatest.
    fn ordering(&self, s: &[usize]) -> Result<Vec<usize>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HierarchicalRandomSource {
    pub seed: u64,
    pub max_arity: usize,
}

fn as_set(s: &[usize]) -> Vec<usize> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

impl HierarchicalRandomSource {
    pub fn new(seed: u64, max_arity: usize) -> Self {
        HierarchicalRandomSource { seed, max_arity }
    }

    /// A source with an unrelated seed derived from this one and `label`.
    pub fn fork(&self, label: &str) -> Self {
        HierarchicalRandomSource {
            seed: hash_words(&[self.seed, hash_str(label)]),
            max_arity: self.max_arity,
        }
    }

    fn stream(&self, tag: u64, set: &[usize]) -> Result<ChaCha8Rng> {
        if set.len() > self.max_arity {
            return Err(Error::ArityExceeded {
                size: set.len(),
                max_arity: self.max_arity,
            });
        }
        let mut words = Vec::with_capacity(set.len() + 3);
        words.extend([self.seed, tag, set.len() as u64]);
        words.extend(set.iter().map(|&x| x as u64));
        Ok(ChaCha8Rng::seed_from_u64(hash_words(&words)))
    }
}

impl RandomSource for HierarchicalRandomSource {
    fn max_arity(&self) -> usize {
        self.max_arity
    }

    fn xi(&self, s: &[usize]) -> Result<f64> {
        let mut rng = self.stream(TAG_XI, &as_set(s))?;
        Ok(unit_from_bits(rng.next_u64()))
    }

    fn ordering(&self, s: &[usize]) -> Result<Vec<usize>> {
        let mut set = as_set(s);
        let mut rng = self.stream(TAG_ORD, &set)?;
        set.shuffle(&mut rng);
        Ok(set)
    }
}

/// Lexicographic rank of a permutation of distinct values among all
/// orderings of the same values.
pub fn permutation_rank(order: &[usize]) -> usize {
    let n = order.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = order[i + 1..].iter().filter(|&&y| y < order[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

/// The partial order `≺_x` on positions `1..=|x|` of a tuple induced by a
/// total order of its entries: `i ≺ j` iff `x_i` comes before `x_j`.
/// Positions holding equal entries are incomparable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedOrdering {
    pub sequence: Vec<usize>,
    ranks: Vec<usize>,
}

impl InducedOrdering {
    /// `order` lists `rng x` from least to greatest.
    pub fn new(sequence: &[usize], order: &[usize]) -> Result<Self> {
        let ranks = sequence
            .iter()
            .map(|x| {
                order.iter().position(|y| y == x).ok_or_else(|| {
                    Error::InvalidArgument(format!("{x} missing from the ordering {order:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(InducedOrdering {
            sequence: sequence.to_vec(),
            ranks,
        })
    }

    /// Whether position `i` precedes position `j` (1-based).
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.ranks[i - 1] < self.ranks[j - 1]
    }

    /// All related pairs `(i, j)` with `i ≺ j`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let k = self.ranks.len();
        (1..=k)
            .flat_map(|i| (1..=k).map(move |j| (i, j)))
            .filter(|&(i, j)| self.precedes(i, j))
            .collect()
    }
}

pub fn induced_ordering(src: &dyn RandomSource, sequence: &[usize]) -> Result<InducedOrdering> {
    InducedOrdering::new(sequence, &src.ordering(sequence)?)
}
