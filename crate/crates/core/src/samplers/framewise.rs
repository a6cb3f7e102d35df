//! The frame-wise sampler: builds a structure subset by subset, choosing at
//! each subset `s` an amalgam of the structures already built on the proper
//! subsets of `s`.
//!
//! The choice at `s` reads only `ξ_s`, `≺_s` and the structure on the proper
//! subsets: first an isomorphism class of amalgams (equal-width bands of
//! `ξ_s`, or bands proportional to custom weights), then a concrete amalgam
//! inside the class, the one at index `rank(≺_s) mod (class size)` in
//! encoding order.

use super::Sampler;
use crate::class::{FiniteClass, MAX_FREE_TUPLES};
use crate::error::{Error, Result};
use crate::iso::canonical_form;
use crate::random::{permutation_rank, RandomSource};
use crate::structure::{decode_tuple, power, subsets_of_size, tuple_index, Signature, Structure};
use std::collections::BTreeMap;
use std::sync::Arc;

pub struct FramewiseSampler {
    class: Arc<dyn FiniteClass>,
    weights: Option<BTreeMap<Structure, f64>>,
}

impl FramewiseSampler {
    pub fn new(class: Arc<dyn FiniteClass>) -> Self {
        FramewiseSampler {
            class,
            weights: None,
        }
    }

    /// Weights per isomorphism class, keyed by canonical form; classes not
    /// listed weigh 1.
    pub fn with_weights(mut self, weights: BTreeMap<Structure, f64>) -> Result<Self> {
        if let Some((k, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weight {w} for {k} is not positive"
            )));
        }
        let canonical = weights
            .into_iter()
            .map(|(k, w)| (canonical_form(&k), w))
            .collect();
        self.weights = Some(canonical);
        Ok(self)
    }

    pub fn class(&self) -> &Arc<dyn FiniteClass> {
        &self.class
    }

    /// Largest subset size that can add tuples or rule out membership.
    fn depth(&self, n: usize) -> usize {
        let arity = self.class.signature().max_arity();
        match self.class.width() {
            Some(w) => arity.max(w).min(n),
            None => n,
        }
    }
}

/// Tuples over `[0,d)` mentioning every point.
fn spanning_tuples(sig: &Signature, d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut t = Vec::new();
    for (rel, r) in sig.relations().iter().enumerate() {
        if r.arity < d {
            continue;
        }
        t.resize(r.arity, 0);
        for idx in 0..power(d, r.arity) {
            decode_tuple(idx, d, &mut t);
            let mut seen = vec![false; d];
            t.iter().for_each(|&x| seen[x] = true);
            if seen.iter().all(|&b| b) {
                out.push((rel, idx));
            }
        }
    }
    out
}

/// The choice at one subset. `base` is the structure on the subset
/// (relabeled onto `[1,d]`) with every tuple mentioning all `d` points
/// unset; `subset` is used for error reports only.
pub fn decide_subset<X, O>(
    class: &dyn FiniteClass,
    weights: Option<&BTreeMap<Structure, f64>>,
    base: &Structure,
    subset: &[usize],
    xi: X,
    ordering: O,
) -> Result<Structure>
where
    X: FnOnce() -> Result<f64>,
    O: FnOnce() -> Result<Vec<usize>>,
{
    let d = base.universe();
    let free = spanning_tuples(base.signature(), d);
    if free.len() > MAX_FREE_TUPLES {
        return Err(Error::SearchTooLarge { free: free.len() });
    }
    let mut amalgams = Vec::new();
    for mask in 0u64..(1u64 << free.len()) {
        let mut cand = base.clone();
        for (b, &(rel, idx)) in free.iter().enumerate() {
            cand.bits_mut(rel).set(idx, mask >> b & 1 == 1);
        }
        if class.contains(&cand) {
            amalgams.push(cand);
        }
    }
    if amalgams.is_empty() {
        let family = (1..=d)
            .map(|i| {
                let rest: Vec<usize> = (1..=d).filter(|&x| x != i).collect();
                base.restrict(&rest).expect("subset of the base")
            })
            .collect();
        return Err(Error::AmalgamationFailure {
            subset: subset.to_vec(),
            family,
        });
    }
    if amalgams.len() == 1 {
        return Ok(amalgams.pop().expect("one amalgam"));
    }
    let mut classes: BTreeMap<Structure, Vec<Structure>> = BTreeMap::new();
    for a in amalgams {
        classes.entry(canonical_form(&a)).or_default().push(a);
    }
    let mut classes: Vec<(Structure, Vec<Structure>)> = classes.into_iter().collect();
    for (_, members) in classes.iter_mut() {
        members.sort_by(Structure::cmp_encoding);
    }
    classes.sort_by(|a, b| a.1[0].cmp_encoding(&b.1[0]));

    let chosen = if classes.len() == 1 {
        0
    } else {
        let u = xi()?;
        match weights {
            None => ((u * classes.len() as f64) as usize).min(classes.len() - 1),
            Some(w) => {
                let ws: Vec<f64> = classes
                    .iter()
                    .map(|(c, _)| w.get(c).copied().unwrap_or(1.0))
                    .collect();
                let total: f64 = ws.iter().sum();
                let mut acc = 0.0;
                let mut pick = ws.len() - 1;
                for (i, wi) in ws.iter().enumerate() {
                    acc += wi / total;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                pick
            }
        }
    };
    let members = &classes[chosen].1;
    if members.len() == 1 {
        return Ok(members[0].clone());
    }
    let rank = permutation_rank(&ordering()?);
    Ok(members[rank % members.len()].clone())
}

impl Sampler for FramewiseSampler {
    fn name(&self) -> String {
        format!("framewise:{}", self.class.name())
    }

    fn signature(&self) -> &Signature {
        self.class.signature()
    }

    fn randomness_arity(&self) -> usize {
        self.class.signature().max_arity()
    }

    fn sample(&self, n: usize, src: &dyn RandomSource) -> Result<Structure> {
        let sig = self.class.signature().clone();
        let mut out = Structure::empty(sig.clone(), n);
        if !self.class.contains(&Structure::empty(sig.clone(), 0)) {
            return Err(Error::AmalgamationFailure {
                subset: Vec::new(),
                family: Vec::new(),
            });
        }
        let mut t = Vec::new();
        let mut image = Vec::new();
        for size in 1..=self.depth(n) {
            for s in subsets_of_size(n, size) {
                let base = out.restrict(&s)?;
                let choice = decide_subset(
                    self.class.as_ref(),
                    self.weights.as_ref(),
                    &base,
                    &s,
                    || src.xi(&s),
                    || src.ordering(&s),
                )?;
                for (rel, idx) in spanning_tuples(&sig, size) {
                    if choice.bits(rel).get(idx) {
                        t.resize(sig.relations()[rel].arity, 0);
                        image.resize(t.len(), 0);
                        decode_tuple(idx, size, &mut t);
                        for (dst, &x) in image.iter_mut().zip(&t) {
                            *dst = s[x] - 1;
                        }
                        out.bits_mut(rel).set(tuple_index(&image, n), true);
                    }
                }
            }
        }
        Ok(out)
    }
}
