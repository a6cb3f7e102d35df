//! Concrete infinite reference structures on `ℕ = {1,2,…}` and the named
//! example samplers built over them.

use super::{FramewiseSampler, RuleSampler, Sampler};
use crate::class::BuiltinClass;
use crate::embeddings::{RestrictionOracle, TupleReference};
use crate::error::{Error, Result};
use crate::random::{hash_str, HierarchicalRandomSource};
use crate::rules::{builtin_rules, Scope, TupleRule, TupleView};
use crate::structure::{Relation, Signature, Structure};
use std::sync::{Arc, Mutex};

fn sig(pairs: &[(&str, usize)]) -> Signature {
    Signature::from_pairs(pairs).expect("valid signature")
}

/// `P` = the even numbers.
pub fn evens() -> Arc<dyn RestrictionOracle> {
    Arc::new(TupleReference::new(sig(&[("P", 1)]), |_, t: &[usize]| {
        t[0] % 2 == 0
    }))
}

/// The pure set: no relations.
pub fn trivial() -> Arc<dyn RestrictionOracle> {
    Arc::new(TupleReference::new(Signature::empty(), |_, _: &[usize]| {
        false
    }))
}

/// Ternary `R` with each `R(i) = {(j,k) | R(i,j,k)}` an equivalence relation
/// with classes `{i}`, the evens other than `i`, the odds other than `i`.
pub fn weak_rep_reference() -> Arc<dyn RestrictionOracle> {
    Arc::new(TupleReference::new(sig(&[("R", 3)]), |_, t: &[usize]| {
        let (i, j, k) = (t[0], t[1], t[2]);
        (j == i && k == i) || (j != i && k != i && j % 2 == k % 2)
    }))
}

/// Directed edge `(i,j)` iff `j` is odd and `j ≠ i`.
pub fn tdc_reference() -> Arc<dyn RestrictionOracle> {
    Arc::new(TupleReference::new(sig(&[("R", 2)]), |_, t: &[usize]| {
        t[1] % 2 == 1 && t[1] != t[0]
    }))
}

const REFERENCE_SEED_LABEL: &str = "reference-random-graph";

/// A fixed sample of the frame-wise random graph, extended lazily.
pub struct RandomGraphReference {
    sampler: FramewiseSampler,
    source: HierarchicalRandomSource,
    cache: Mutex<Option<Structure>>,
}

impl RandomGraphReference {
    pub fn new(seed: u64) -> Self {
        RandomGraphReference {
            sampler: FramewiseSampler::new(Arc::new(BuiltinClass::graphs())),
            source: HierarchicalRandomSource::new(seed, 2),
            cache: Mutex::new(None),
        }
    }

    /// The graph used by the named examples.
    pub fn standard() -> Self {
        RandomGraphReference::new(hash_str(REFERENCE_SEED_LABEL))
    }
}

impl RestrictionOracle for RandomGraphReference {
    fn signature(&self) -> &Signature {
        self.sampler.signature()
    }

    fn prefix(&self, n: usize) -> Result<Structure> {
        let mut cache = self.cache.lock().expect("cache lock");
        if let Some(c) = cache.as_ref() {
            if c.universe() >= n {
                return Ok(c.prefix(n));
            }
        }
        let s = self.sampler.sample(n, &self.source)?;
        *cache = Some(s.clone());
        Ok(s)
    }
}

/// Triples of distinct points spanning an odd number of edges of a graph.
pub struct ParityReference {
    graph: Arc<dyn RestrictionOracle>,
    signature: Signature,
}

impl ParityReference {
    pub fn new(graph: Arc<dyn RestrictionOracle>) -> Self {
        ParityReference {
            graph,
            signature: sig(&[("R", 3)]),
        }
    }
}

impl RestrictionOracle for ParityReference {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn prefix(&self, n: usize) -> Result<Structure> {
        let g = self.graph.prefix(n)?;
        let mut out = Structure::empty(self.signature.clone(), n);
        for x in 1..=n {
            for y in 1..=n {
                for z in 1..=n {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    let edges = [(x, y), (y, z), (x, z)]
                        .iter()
                        .filter(|(a, b)| g.holds(0, &[*a, *b]))
                        .count();
                    if edges % 2 == 1 {
                        out.insert(0, &[x, y, z])?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `S(i,j)` iff `j ≠ i` and `j` lies in the class of `R(i)` picked by
/// `ξ_{i}`: below 1/2 the class of the least point other than `i`,
/// otherwise the other infinite class. Reads `M|_[max(i,j)]`.
struct WeakRepRule {
    relation: Relation,
}

impl TupleRule for WeakRepRule {
    fn relation(&self) -> &Relation {
        &self.relation
    }

    fn decide(&self, view: &TupleView<'_>) -> Result<bool> {
        let (i, j) = (view.tuple()[0], view.tuple()[1]);
        if i == j {
            return Ok(false);
        }
        let anchor = if i == 1 { 2 } else { 1 };
        let m = view.segment()?;
        let same = m.holds(0, &[i, j, anchor]);
        Ok(same == (view.xi(&[1])? < 0.5))
    }
}

/// With probability 1/3 (via `ξ_∅`) the evens; otherwise each odd number
/// independently with probability 1/2.
struct TdcRule {
    relation: Relation,
}

impl TupleRule for TdcRule {
    fn relation(&self) -> &Relation {
        &self.relation
    }

    fn decide(&self, view: &TupleView<'_>) -> Result<bool> {
        let x = view.tuple()[0];
        if view.xi(&[])? < 1.0 / 3.0 {
            Ok(x % 2 == 0)
        } else {
            Ok(x % 2 == 1 && view.xi(&[1])? < 0.5)
        }
    }
}

/// On distinct pairs: the graph edge flipped exactly when the two points'
/// coins agree.
struct ParityOverlayRule {
    relation: Relation,
}

impl TupleRule for ParityOverlayRule {
    fn relation(&self) -> &Relation {
        &self.relation
    }

    fn decide(&self, view: &TupleView<'_>) -> Result<bool> {
        let t = view.tuple();
        if t[0] == t[1] {
            return Ok(false);
        }
        let edge = view.local_context()?.holds(0, &[1, 2]);
        let agree = (view.xi(&[1])? < 0.5) == (view.xi(&[2])? < 0.5);
        Ok(edge != agree)
    }
}

/// A digraph rule with a loop at vertex 1 and nowhere else; fair coins on
/// other pairs. Not exchangeable.
struct LoopAtOneRule {
    relation: Relation,
}

impl TupleRule for LoopAtOneRule {
    fn relation(&self) -> &Relation {
        &self.relation
    }

    fn decide(&self, view: &TupleView<'_>) -> Result<bool> {
        let t = view.tuple();
        if t[0] == t[1] {
            return Ok(t[0] == 1);
        }
        Ok(view.xi(&[1, 2])? < 0.5 && view.precedes(&[1, 2], 1, 2)?)
    }
}

/// Unary coin with bias 0.7 on even labels and 0.3 on odd ones, ignoring
/// the reference structure. Not exchangeable.
struct LabelParityRule {
    relation: Relation,
}

impl TupleRule for LabelParityRule {
    fn relation(&self) -> &Relation {
        &self.relation
    }

    fn decide(&self, view: &TupleView<'_>) -> Result<bool> {
        let bias = if view.tuple()[0] % 2 == 0 { 0.7 } else { 0.3 };
        Ok(view.xi(&[1])? < bias)
    }
}

/// A reference structure and a random structure over it.
pub struct Example {
    pub name: &'static str,
    pub reference: Arc<dyn RestrictionOracle>,
    pub sampler: Arc<dyn Sampler>,
}

pub const EXAMPLES: &[&str] = &[
    "weak-rep",
    "tdc-evens",
    "parity-overlay",
    "strong-rep",
    "strong-rep-mixed",
    "loop-at-one",
    "label-parity",
];

pub const REFERENCES: &[&str] = &[
    "evens",
    "trivial",
    "weak-rep",
    "tdc-evens",
    "random-graph",
    "parity",
];

/// A named reference structure.
pub fn reference_by_name(name: &str) -> Result<Arc<dyn RestrictionOracle>> {
    Ok(match name {
        "evens" => evens(),
        "trivial" => trivial(),
        "weak-rep" => weak_rep_reference(),
        "tdc-evens" => tdc_reference(),
        "random-graph" => Arc::new(RandomGraphReference::standard()),
        "parity" => Arc::new(ParityReference::new(Arc::new(
            RandomGraphReference::standard(),
        ))),
        _ => return Err(Error::UnknownName(name.to_string())),
    })
}

/// A named example. The `parity-overlay` sampler reads the underlying random
/// graph while its reference is the parity hypergraph over that graph.
pub fn example(name: &str) -> Result<Example> {
    let (name, reference, sampler): (&'static str, Arc<dyn RestrictionOracle>, Arc<dyn Sampler>) =
        match name {
            "weak-rep" => {
                let m = weak_rep_reference();
                let rule = WeakRepRule {
                    relation: Relation::new("S", 2),
                };
                let s = RuleSampler::from_rules(
                    "weak-rep",
                    vec![Box::new(rule)],
                    Some(m.clone()),
                    Scope::Segment,
                )?;
                ("weak-rep", m, Arc::new(s))
            }
            "tdc-evens" => {
                let m = tdc_reference();
                let rule = TdcRule {
                    relation: Relation::new("X", 1),
                };
                let s = RuleSampler::from_rules(
                    "tdc-evens",
                    vec![Box::new(rule)],
                    Some(m.clone()),
                    Scope::Local,
                )?;
                ("tdc-evens", m, Arc::new(s))
            }
            "parity-overlay" => {
                let graph: Arc<dyn RestrictionOracle> = Arc::new(RandomGraphReference::standard());
                let m: Arc<dyn RestrictionOracle> = Arc::new(ParityReference::new(graph.clone()));
                let rule = ParityOverlayRule {
                    relation: Relation::new("S", 2),
                };
                let s = RuleSampler::from_rules(
                    "parity-overlay",
                    vec![Box::new(rule)],
                    Some(graph),
                    Scope::Local,
                )?;
                ("parity-overlay", m, Arc::new(s))
            }
            "strong-rep" | "strong-rep-mixed" => {
                let m = evens();
                let table = if name == "strong-rep" {
                    "two-coin"
                } else {
                    "two-coin-mixed"
                };
                let s = RuleSampler::relative(&builtin_rules(table)?, m.clone())?;
                let label = if name == "strong-rep" {
                    "strong-rep"
                } else {
                    "strong-rep-mixed"
                };
                (label, m, Arc::new(s.with_name(label)))
            }
            "loop-at-one" => {
                let rule = LoopAtOneRule {
                    relation: Relation::new("R", 2),
                };
                let s = RuleSampler::from_rules(
                    "loop-at-one",
                    vec![Box::new(rule)],
                    None,
                    Scope::Blind,
                )?;
                ("loop-at-one", trivial(), Arc::new(s))
            }
            "label-parity" => {
                let m = trivial();
                let rule = LabelParityRule {
                    relation: Relation::new("X", 1),
                };
                let s = RuleSampler::from_rules(
                    "label-parity",
                    vec![Box::new(rule)],
                    Some(m.clone()),
                    Scope::Local,
                )?;
                ("label-parity", m, Arc::new(s))
            }
            _ => return Err(Error::UnknownName(name.to_string())),
        };
    Ok(Example {
        name,
        reference,
        sampler,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_rep_reference_classes() {
        let m = weak_rep_reference().prefix(5).unwrap();
        // R(1): {1}, evens, odds other than 1
        assert!(m.holds(0, &[1, 1, 1]));
        assert!(m.holds(0, &[1, 2, 4]));
        assert!(m.holds(0, &[1, 3, 5]));
        assert!(!m.holds(0, &[1, 2, 3]));
        assert!(!m.holds(0, &[1, 1, 3]));
    }

    #[test]
    fn weak_rep_picks_exactly_one_class() {
        let ex = example("weak-rep").unwrap();
        let m = ex.reference.prefix(6).unwrap();
        for seed in 0..100 {
            let x = ex.sampler.sample_seed(6, seed).unwrap();
            for i in 1..=6 {
                for j in 1..=6 {
                    for k in 1..=6 {
                        if j != i && k != i && !m.holds(0, &[i, j, k]) {
                            assert!(x.holds(0, &[i, j]) != x.holds(0, &[i, k]));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn parity_overlay_claim() {
        let ex = example("parity-overlay").unwrap();
        let m = ex.reference.prefix(6).unwrap();
        for seed in 0..50 {
            let x = ex.sampler.sample_seed(6, seed).unwrap();
            for (a, b, c) in [(1, 2, 3), (2, 4, 6), (1, 5, 6)] {
                let count = [(a, b), (b, c), (a, c)]
                    .iter()
                    .filter(|(p, q)| x.holds(0, &[*p, *q]))
                    .count();
                assert_eq!(count % 2 == 0, m.holds(0, &[a, b, c]));
            }
        }
    }

    #[test]
    fn random_graph_reference_is_consistent() {
        let g = RandomGraphReference::standard();
        let big = g.prefix(8).unwrap();
        assert_eq!(g.prefix(5).unwrap(), big.prefix(5));
        assert_eq!(
            RandomGraphReference::standard().prefix(5).unwrap(),
            big.prefix(5)
        );
    }

    #[test]
    fn every_example_builds_and_samples() {
        for name in EXAMPLES {
            let ex = example(name).unwrap();
            assert!(ex.sampler.sample_seed(4, 1).is_ok(), "{name}");
        }
        for name in REFERENCES {
            assert_eq!(
                reference_by_name(name)
                    .unwrap()
                    .prefix(3)
                    .unwrap()
                    .universe(),
                3
            );
        }
    }
}
