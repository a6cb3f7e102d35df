//! Order-preserving data parallelism with a sequential fallback.
//!
//! With the `parallel` feature disabled every [`Execution`] runs sequentially.

use std::str::FromStr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `f(0), f(1), ..., f(len-1)` in index order.
    pub fn map_indices<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        self.map_indices(items.len(), |i| f(&items[i]))
    }

    /// Like [`Execution::map_indices`] but stops at the first error in index
    /// order.
    pub fn try_map_indices<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map_indices(len, f).into_iter().collect()
    }

    /// Smallest index whose item satisfies `pred`, with its value.
    pub fn find_first<T, F>(self, len: usize, f: F) -> Option<(usize, T)>
    where
        T: Send,
        F: Fn(usize) -> Option<T> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..len)
                .into_par_iter()
                .filter_map(|i| f(i).map(|v| (i, v)))
                .find_first(|_| true);
        }
        (0..len).find_map(|i| f(i).map(|v| (i, v)))
    }
}

impl FromStr for Execution {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "sequential" | "seq" => Ok(Execution::Sequential),
            "parallel" | "par" => Ok(Execution::Parallel),
            _ => Err(crate::Error::UnknownName(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let f = |i: usize| i * i % 7;
        assert_eq!(
            Execution::Sequential.map_indices(1000, f),
            Execution::Parallel.map_indices(1000, f)
        );
        let g = |i: usize| (i % 97 == 96).then_some(i);
        assert_eq!(Execution::Parallel.find_first(1000, g), Some((96, 96)));
        assert_eq!(Execution::Sequential.find_first(1000, g), Some((96, 96)));
    }
}
