use std::cmp::Ordering;

/// Dense membership bits for the tuples of one relation, indexed in
/// lexicographic tuple order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct TupleSet {
    words: Vec<u64>,
    len: usize,
}

impl TupleSet {
    pub(crate) fn new(len: usize) -> Self {
        TupleSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }
    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    pub(crate) fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Compares as bit strings read from index 0 upward, with 0 < 1.
    pub(crate) fn cmp_bits(&self, other: &Self) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            let diff = a ^ b;
            if diff != 0 {
                let low = diff & diff.wrapping_neg();
                return if a & low == 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
        }
        self.len.cmp(&other.len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_and_ones() {
        let mut s = TupleSet::new(130);
        s.set(0, true);
        s.set(64, true);
        s.set(129, true);
        assert!(s.get(64));
        assert!(!s.get(65));
        assert_eq!(s.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(s.count(), 3);
        s.set(64, false);
        assert_eq!(s.count(), 2);
    }

    #[test]
    fn bit_order_puts_early_ones_last() {
        let mut a = TupleSet::new(8);
        let mut b = TupleSet::new(8);
        a.set(5, true);
        b.set(1, true);
        // a = 00000100, b = 01000000 read left to right
        assert_eq!(a.cmp_bits(&b), Ordering::Less);
        assert_eq!(b.cmp_bits(&a), Ordering::Greater);
        assert_eq!(a.cmp_bits(&a), Ordering::Equal);
    }
}
