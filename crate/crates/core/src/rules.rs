//! Decision functions: finite rules deciding whether a tuple belongs to an
//! output relation from the random inputs attached to the tuple and,
//! optionally, from a reference structure.
//!
//! Rules are either code ([`TupleRule`]) or JSON tables
//! ([`DecisionFunction`]); the file format is documented in `docs/rules.md`.

use crate::error::{Error, Result};
use crate::random::{InducedOrdering, RandomSource};
use crate::structure::{Injection, Relation, Signature, Structure};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How much of the reference structure a rule may read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// No reference structure.
    Blind,
    /// Only the substructure on the tuple's entries.
    Local,
    /// The initial segment up to the tuple's largest entry.
    Segment,
}

/// Everything a rule may consult about one tuple.
pub struct TupleView<'a> {
    tuple: &'a [usize],
    window: Option<&'a Structure>,
    scope: Scope,
    src: &'a dyn RandomSource,
}

/// First-occurrence labels: `(5,5,2)` gives `[1,1,2]`.
pub fn equality_pattern(tuple: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    tuple
        .iter()
        .map(|x| match seen.iter().position(|y| y == x) {
            Some(p) => p + 1,
            None => {
                seen.push(*x);
                seen.len()
            }
        })
        .collect()
}

impl<'a> TupleView<'a> {
    /// `window` must cover every entry of the tuple when `scope` is not
    /// [`Scope::Blind`].
    pub fn new(
        tuple: &'a [usize],
        window: Option<&'a Structure>,
        scope: Scope,
        src: &'a dyn RandomSource,
    ) -> Self {
        TupleView {
            tuple,
            window,
            scope,
            src,
        }
    }

    pub fn tuple(&self) -> &[usize] {
        self.tuple
    }

    fn entries(&self, positions: &[usize]) -> Result<Vec<usize>> {
        positions
            .iter()
            .map(|&p| {
                self.tuple.get(p.wrapping_sub(1)).copied().ok_or_else(|| {
                    Error::InvalidRule(format!(
                        "position {p} outside a tuple of length {}",
                        self.tuple.len()
                    ))
                })
            })
            .collect()
    }

    /// `ξ` of the set of entries at the given 1-based positions; `[]` gives
    /// `ξ_∅`.
    pub fn xi(&self, positions: &[usize]) -> Result<f64> {
        self.src.xi(&self.entries(positions)?)
    }

    /// Whether the entry at `before` precedes the entry at `after` in
    /// `≺_y`, `y` the subsequence at positions `within`.
    pub fn precedes(&self, within: &[usize], before: usize, after: usize) -> Result<bool> {
        if !within.contains(&before) || !within.contains(&after) {
            return Err(Error::InvalidRule(format!(
                "positions {before} and {after} must lie in {within:?}"
            )));
        }
        let y = self.entries(within)?;
        let order = InducedOrdering::new(&y, &self.src.ordering(&y)?)?;
        let at = |p: usize| within.iter().position(|&q| q == p).expect("checked") + 1;
        Ok(order.precedes(at(before), at(after)))
    }

    pub fn pattern(&self) -> Vec<usize> {
        equality_pattern(self.tuple)
    }

    /// The reference structure on the tuple's entries, relabeled so entry
    /// number `j` in order of first occurrence becomes `j`. Without a
    /// reference this is the structure over the empty signature.
    pub fn local_context(&self) -> Result<Structure> {
        let mut distinct = Vec::new();
        for &x in self.tuple {
            if !distinct.contains(&x) {
                distinct.push(x);
            }
        }
        if self.scope == Scope::Blind {
            return Ok(Structure::empty(Signature::empty(), distinct.len()));
        }
        let window = self.window.expect("window present outside blind scope");
        let phi = Injection::from_images(distinct)?;
        Ok(window.relabel(&phi)?.structure)
    }

    /// The reference structure on `[1, max x]`.
    pub fn segment(&self) -> Result<Structure> {
        if self.scope != Scope::Segment {
            return Err(Error::InvalidRule(
                "initial segments are only visible to segment-scoped rules".into(),
            ));
        }
        let window = self.window.expect("window present in segment scope");
        let top = self.tuple.iter().copied().max().unwrap_or(0);
        Ok(window.prefix(top))
    }
}

/// One output relation's membership rule.
pub trait TupleRule: Send + Sync {
    fn relation(&self) -> &Relation;

    fn decide(&self, view: &TupleView<'_>) -> Result<bool>;
}

/// Half-open band `[from, to)` for `ξ` of the entries at `subset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiBand {
    pub subset: Vec<usize>,
    pub from: f64,
    pub to: f64,
}

/// `x_before ≺ x_after` in the order of the subsequence at `within`
/// (default: the whole tuple).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderTest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within: Option<Vec<usize>>,
    pub before: usize,
    pub after: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clause {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<BTreeMap<String, Vec<Vec<usize>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xi: Vec<XiBand>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub order: Vec<OrderTest>,
    pub output: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub relation: Relation,
    #[serde(default)]
    pub default: bool,
    #[serde(default)]
    pub clauses: Vec<Clause>,
}

/// A JSON decision table per output relation; the first matching clause
/// decides, otherwise `default`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionFunction {
    pub rules: Vec<RuleSpec>,
}

struct CompiledClause {
    pattern: Option<Vec<usize>>,
    context: Option<Structure>,
    xi: Vec<XiBand>,
    order: Vec<(Vec<usize>, usize, usize)>,
    output: bool,
}

struct TableRule {
    relation: Relation,
    default: bool,
    clauses: Vec<CompiledClause>,
}

impl TupleRule for TableRule {
    fn relation(&self) -> &Relation {
        &self.relation
    }

    fn decide(&self, view: &TupleView<'_>) -> Result<bool> {
        let pattern = view.pattern();
        let context = if self.clauses.iter().any(|c| c.context.is_some()) {
            Some(view.local_context()?)
        } else {
            None
        };
        'clauses: for c in &self.clauses {
            if c.pattern.as_ref().is_some_and(|p| *p != pattern) {
                continue;
            }
            if let Some(want) = &c.context {
                if context.as_ref() != Some(want) {
                    continue;
                }
            }
            for band in &c.xi {
                let v = view.xi(&band.subset)?;
                if !(band.from <= v && v < band.to) {
                    continue 'clauses;
                }
            }
            for (within, before, after) in &c.order {
                if !view.precedes(within, *before, *after)? {
                    continue 'clauses;
                }
            }
            return Ok(c.output);
        }
        Ok(self.default)
    }
}

fn check_positions(positions: &[usize], arity: usize, what: &str) -> Result<()> {
    match positions.iter().find(|&&p| p == 0 || p > arity) {
        Some(p) => Err(Error::InvalidRule(format!(
            "{what}: position {p} outside 1..={arity}"
        ))),
        None => Ok(()),
    }
}

impl DecisionFunction {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// The output signature, in rule order.
    pub fn signature(&self) -> Result<Signature> {
        Signature::new(self.rules.iter().map(|r| r.relation.clone()).collect())
    }

    /// Largest tuple arity, which bounds the subsets whose randomness is read.
    pub fn max_arity(&self) -> usize {
        self.rules
            .iter()
            .map(|r| r.relation.arity)
            .max()
            .unwrap_or(0)
    }

    /// Validates the table against the reference signature (empty for
    /// context-free sampling) and builds executable rules.
    pub fn compile(&self, reference: &Signature) -> Result<Vec<Box<dyn TupleRule>>> {
        self.signature()?;
        let mut out: Vec<Box<dyn TupleRule>> = Vec::new();
        for spec in &self.rules {
            let k = spec.relation.arity;
            let name = &spec.relation.name;
            let mut clauses = Vec::new();
            for (ci, c) in spec.clauses.iter().enumerate() {
                let what = format!("{name} clause {}", ci + 1);
                if let Some(p) = &c.pattern {
                    if p.len() != k || equality_pattern(p) != *p {
                        return Err(Error::InvalidRule(format!(
                            "{what}: pattern {p:?} is not a first-occurrence labeling of length {k}"
                        )));
                    }
                }
                let context = match &c.context {
                    None => None,
                    Some(map) => {
                        let Some(p) = &c.pattern else {
                            return Err(Error::InvalidRule(format!(
                                "{what}: context needs a pattern"
                            )));
                        };
                        let d = p.iter().copied().max().unwrap_or(0);
                        for rel in map.keys() {
                            if reference.index_of(rel).is_none() {
                                return Err(Error::UnknownRelation(rel.clone()));
                            }
                        }
                        let tuples = map
                            .iter()
                            .flat_map(|(r, ts)| ts.iter().map(move |t| (r.as_str(), t.clone())));
                        Some(Structure::from_tuples(reference.clone(), d, tuples)?)
                    }
                };
                for band in &c.xi {
                    check_positions(&band.subset, k, &what)?;
                    if !(0.0..=1.0).contains(&band.from)
                        || !(0.0..=1.0).contains(&band.to)
                        || band.from > band.to
                    {
                        return Err(Error::InvalidRule(format!(
                            "{what}: band [{}, {}) is not inside [0,1]",
                            band.from, band.to
                        )));
                    }
                }
                let mut order = Vec::new();
                for o in &c.order {
                    let within = o.within.clone().unwrap_or_else(|| (1..=k).collect());
                    check_positions(&within, k, &what)?;
                    if !within.contains(&o.before) || !within.contains(&o.after) {
                        return Err(Error::InvalidRule(format!(
                            "{what}: order positions must lie in {within:?}"
                        )));
                    }
                    order.push((within, o.before, o.after));
                }
                clauses.push(CompiledClause {
                    pattern: c.pattern.clone(),
                    context,
                    xi: c.xi.clone(),
                    order,
                    output: c.output,
                });
            }
            out.push(Box::new(TableRule {
                relation: spec.relation.clone(),
                default: spec.default,
                clauses,
            }));
        }
        Ok(out)
    }
}

/// Rule tables shipped with the crate.
pub const BUILTIN_RULES: &[(&str, &str)] = &[
    ("random-graph", include_str!("../rules/random-graph.json")),
    ("tournament", include_str!("../rules/tournament.json")),
    ("complete", include_str!("../rules/complete.json")),
    ("two-coin", include_str!("../rules/two-coin.json")),
    (
        "two-coin-mixed",
        include_str!("../rules/two-coin-mixed.json"),
    ),
    ("coin", include_str!("../rules/coin.json")),
];

/// A builtin table by name.
pub fn builtin_rules(name: &str) -> Result<DecisionFunction> {
    let (_, text) = BUILTIN_RULES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownName(name.to_string()))?;
    DecisionFunction::from_json(text)
}
