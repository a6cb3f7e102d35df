//! Random structures on `[1,n]` driven by a [`RandomSource`].
//!
//! Every sampler decides each tuple (or each subset) from randomness keyed
//! by the tuple's entries, so samples are projective:
//! `sample(n)|_[m] == sample(m)` under the same source.

mod age;
mod framewise;
pub mod reference;

pub use age::{
    age_indexed_from_sampler, sample_sequential, AgeIndexedLaw, AgeLawConfig, DEFAULT_FLOOR,
};
pub use framewise::{decide_subset, FramewiseSampler};

use crate::embeddings::RestrictionOracle;
use crate::error::{Error, Result};
use crate::random::{HierarchicalRandomSource, RandomSource};
use crate::rules::{DecisionFunction, Scope, TupleRule, TupleView};
use crate::structure::{decode_tuple, power, Signature, Structure};
use std::sync::Arc;

pub trait Sampler: Send + Sync {
    fn name(&self) -> String;

    /// Signature of the sampled structures.
    fn signature(&self) -> &Signature;

    /// Largest subset whose randomness is consulted.
    fn randomness_arity(&self) -> usize;

    fn sample(&self, n: usize, src: &dyn RandomSource) -> Result<Structure>;

    /// Sample with the canonical source for `seed`.
    fn sample_seed(&self, n: usize, seed: u64) -> Result<Structure> {
        self.sample(
            n,
            &HierarchicalRandomSource::new(seed, self.randomness_arity()),
        )
    }
}

/// Decides every tuple of every output relation independently with a rule.
pub struct RuleSampler {
    name: String,
    signature: Signature,
    rules: Vec<Box<dyn TupleRule>>,
    reference: Option<Arc<dyn RestrictionOracle>>,
    scope: Scope,
}

impl RuleSampler {
    pub fn from_rules(
        name: impl Into<String>,
        rules: Vec<Box<dyn TupleRule>>,
        reference: Option<Arc<dyn RestrictionOracle>>,
        scope: Scope,
    ) -> Result<Self> {
        if (scope == Scope::Blind) != reference.is_none() {
            return Err(Error::InvalidArgument(
                "a reference structure is needed exactly when the scope is not blind".into(),
            ));
        }
        let signature = Signature::new(rules.iter().map(|r| r.relation().clone()).collect())?;
        Ok(RuleSampler {
            name: name.into(),
            signature,
            rules,
            reference,
            scope,
        })
    }

    /// `x ∈ R_i` iff `f_i((ξ_s)_{s ⊆ rng x}, (≺_y)_{y ⊆ x})`.
    pub fn exchangeable(f: &DecisionFunction) -> Result<Self> {
        RuleSampler::from_rules(
            "exchangeable",
            f.compile(&Signature::empty())?,
            None,
            Scope::Blind,
        )
    }

    /// As [`RuleSampler::exchangeable`], with `M|_{rng x}` as extra input.
    pub fn relative(f: &DecisionFunction, reference: Arc<dyn RestrictionOracle>) -> Result<Self> {
        let rules = f.compile(reference.signature())?;
        RuleSampler::from_rules("m-exchangeable", rules, Some(reference), Scope::Local)
    }

    /// As [`RuleSampler::exchangeable`], with `M|_[max x]` as extra input.
    pub fn max_segment(
        f: &DecisionFunction,
        reference: Arc<dyn RestrictionOracle>,
    ) -> Result<Self> {
        let rules = f.compile(reference.signature())?;
        RuleSampler::from_rules("max-segment", rules, Some(reference), Scope::Segment)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl Sampler for RuleSampler {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn randomness_arity(&self) -> usize {
        self.signature.max_arity()
    }

    fn sample(&self, n: usize, src: &dyn RandomSource) -> Result<Structure> {
        let window = match &self.reference {
            Some(r) => Some(r.prefix(n)?),
            None => None,
        };
        let mut out = Structure::empty(self.signature.clone(), n);
        let mut t = Vec::new();
        for (rel, rule) in self.rules.iter().enumerate() {
            let k = rule.relation().arity;
            t.resize(k, 0);
            for idx in 0..power(n, k) {
                decode_tuple(idx, n, &mut t);
                t.iter_mut().for_each(|x| *x += 1);
                let view = TupleView::new(&t, window.as_ref(), self.scope, src);
                if rule.decide(&view)? {
                    out.bits_mut(rel).set(idx, true);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::{BuiltinClass, FiniteClass};
    use crate::embeddings::TupleReference;
    use crate::rules::builtin_rules;

    #[test]
    fn tournament_rule_gives_tournaments() {
        let s = RuleSampler::exchangeable(&builtin_rules("tournament").unwrap()).unwrap();
        for seed in 0..50 {
            assert!(BuiltinClass::tournaments().contains(&s.sample_seed(5, seed).unwrap()));
        }
    }

    #[test]
    fn constant_rule_is_complete() {
        let s = RuleSampler::exchangeable(&builtin_rules("complete").unwrap()).unwrap();
        assert_eq!(s.sample_seed(3, 9).unwrap().tuple_count(), 9);
    }

    #[test]
    fn blind_rules_ignore_the_reference() {
        let f = builtin_rules("random-graph").unwrap();
        let plain = RuleSampler::exchangeable(&f).unwrap();
        let sig = Signature::from_pairs(&[("P", 1)]).unwrap();
        let reference: Arc<dyn RestrictionOracle> =
            Arc::new(TupleReference::new(sig, |_, t: &[usize]| t[0] % 2 == 0));
        let local = RuleSampler::relative(&f, reference.clone()).unwrap();
        let seg = RuleSampler::max_segment(&f, reference).unwrap();
        for seed in 0..20 {
            let a = plain.sample_seed(5, seed).unwrap();
            assert_eq!(a, local.sample_seed(5, seed).unwrap());
            assert_eq!(a, seg.sample_seed(5, seed).unwrap());
        }
    }

    #[test]
    fn projective() {
        let s = RuleSampler::exchangeable(&builtin_rules("tournament").unwrap()).unwrap();
        for seed in 0..20 {
            let big = s.sample_seed(6, seed).unwrap();
            for m in 0..=6 {
                assert_eq!(big.prefix(m), s.sample_seed(m, seed).unwrap());
            }
        }
    }
}
