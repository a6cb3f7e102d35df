//! Classes of finite structures (ages): a membership predicate plus an
//! enumerator of the labeled members on `[1,n]`.
//!
//! Every class here is assumed closed under isomorphism and substructures.

use crate::error::{Error, Result};
use crate::structure::{power, subsets_of_size, Relation, Signature, Structure};
use crate::theory::Theory;
use std::cmp::Ordering;
use std::fmt;

/// Largest number of free tuples enumerated by brute force in one step.
pub(crate) const MAX_FREE_TUPLES: usize = 24;

pub trait FiniteClass: Send + Sync {
    fn name(&self) -> String;

    fn signature(&self) -> &Signature;

    fn contains(&self, s: &Structure) -> bool;

    /// A size `w` such that a structure belongs to the class whenever all of
    /// its restrictions to at most `w` points do. `None` when unknown.
    fn width(&self) -> Option<usize> {
        None
    }

    /// All members on `[1,n]`, sorted by encoding.
    fn enumerate(&self, n: usize) -> Result<Vec<Structure>> {
        enumerate_by_extension(self, n)
    }

    /// A universal theory axiomatizing the class, used to complete partial
    /// structures by constraint propagation instead of brute force.
    fn theory(&self) -> Option<&Theory> {
        None
    }
}

/// Indices of the tuples over `[0,m)` whose largest entry is `m-1`, per
/// relation.
pub(crate) fn new_tuples(sig: &Signature, m: usize) -> Vec<Vec<usize>> {
    sig.relations()
        .iter()
        .map(|r| {
            let k = r.arity;
            let mut t = vec![0; k];
            (0..power(m, k))
                .filter(|&idx| {
                    crate::structure::decode_tuple(idx, m, &mut t);
                    t.contains(&(m - 1))
                })
                .collect()
        })
        .collect()
}

pub(crate) fn sort_by_encoding(v: &mut [Structure]) {
    v.sort_by(Structure::cmp_encoding);
}

/// Enumerates members by adding one point at a time and filtering with
/// `contains`; relies on closure under substructures.
pub fn enumerate_by_extension<C: FiniteClass + ?Sized>(
    class: &C,
    n: usize,
) -> Result<Vec<Structure>> {
    let sig = class.signature().clone();
    let mut level = vec![Structure::empty(sig.clone(), 0)];
    if !class.contains(&level[0]) {
        level.clear();
    }
    for m in 1..=n {
        let fresh = new_tuples(&sig, m);
        let free: usize = fresh.iter().map(Vec::len).sum();
        if free > MAX_FREE_TUPLES {
            return Err(Error::SearchTooLarge { free });
        }
        let mut next = Vec::new();
        for base in &level {
            let grown = base.pull_back_into(m);
            for mask in 0u64..(1u64 << free) {
                let mut cand = grown.clone();
                let mut bit = 0;
                for (rel, idxs) in fresh.iter().enumerate() {
                    for &idx in idxs {
                        if mask >> bit & 1 == 1 {
                            cand.bits_mut(rel).set(idx, true);
                        }
                        bit += 1;
                    }
                }
                if class.contains(&cand) {
                    next.push(cand);
                }
            }
        }
        level = next;
    }
    sort_by_encoding(&mut level);
    Ok(level)
}

impl Structure {
    /// Embeds `self` (on `[1,n]`) as the prefix of an otherwise empty
    /// structure on `[1,m]`, `m ≥ n`.
    pub(crate) fn pull_back_into(&self, m: usize) -> Structure {
        let n = self.universe();
        debug_assert!(m >= n);
        let mut out = Structure::empty(self.signature_arc().clone(), m);
        let mut t = Vec::new();
        for (rel, r) in self.signature().relations().iter().enumerate() {
            t.resize(r.arity, 0);
            for idx in self.bits(rel).ones() {
                crate::structure::decode_tuple(idx, n, &mut t);
                let j = crate::structure::tuple_index(&t, m);
                out.bits_mut(rel).set(j, true);
            }
        }
        out
    }
}

/// The builtin classes of the catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// Symmetric loop-free binary relations.
    Graphs,
    /// Loop-free binary relations.
    Digraphs,
    /// Exactly one direction between any two distinct points, no loops.
    Tournaments,
    Equivalence,
    /// Symmetric `k`-ary relations holding only on tuples of distinct points.
    Hypergraphs(usize),
    /// 3-hypergraphs in which every 4 distinct points span an even number of
    /// hyperedges.
    ParityHypergraphs,
    /// Every structure over the signature.
    Free(Signature),
}

#[derive(Clone, Debug)]
pub struct BuiltinClass {
    kind: Builtin,
    signature: Signature,
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Graphs => write!(f, "graphs"),
            Builtin::Digraphs => write!(f, "digraphs"),
            Builtin::Tournaments => write!(f, "tournaments"),
            Builtin::Equivalence => write!(f, "equivalence"),
            Builtin::Hypergraphs(k) => write!(f, "hypergraphs{k}"),
            Builtin::ParityHypergraphs => write!(f, "parity3"),
            Builtin::Free(sig) => {
                let parts: Vec<String> = sig.relations().iter().map(|r| r.to_string()).collect();
                write!(f, "free:{}", parts.join(","))
            }
        }
    }
}

impl BuiltinClass {
    pub fn new(kind: Builtin) -> Result<Self> {
        let signature = match &kind {
            Builtin::Graphs | Builtin::Digraphs | Builtin::Tournaments | Builtin::Equivalence => {
                Signature::from_pairs(&[("R", 2)])?
            }
            Builtin::Hypergraphs(k) => {
                if *k == 0 {
                    return Err(Error::InvalidArgument(
                        "hypergraph arity must be positive".into(),
                    ));
                }
                Signature::new(vec![Relation::new("R", *k)])?
            }
            Builtin::ParityHypergraphs => Signature::from_pairs(&[("R", 3)])?,
            Builtin::Free(sig) => sig.clone(),
        };
        Ok(BuiltinClass { kind, signature })
    }

    pub fn graphs() -> Self {
        BuiltinClass::new(Builtin::Graphs).expect("valid")
    }

    pub fn digraphs() -> Self {
        BuiltinClass::new(Builtin::Digraphs).expect("valid")
    }

    pub fn tournaments() -> Self {
        BuiltinClass::new(Builtin::Tournaments).expect("valid")
    }

    pub fn equivalence() -> Self {
        BuiltinClass::new(Builtin::Equivalence).expect("valid")
    }

    pub fn hypergraphs(k: usize) -> Result<Self> {
        BuiltinClass::new(Builtin::Hypergraphs(k))
    }

    pub fn parity_hypergraphs() -> Self {
        BuiltinClass::new(Builtin::ParityHypergraphs).expect("valid")
    }

    pub fn free(signature: Signature) -> Self {
        BuiltinClass::new(Builtin::Free(signature)).expect("valid")
    }

    pub fn kind(&self) -> &Builtin {
        &self.kind
    }

    /// Parses `graphs`, `digraphs`, `tournaments`, `equivalence`,
    /// `hypergraphs<k>` (or `hypergraphs:<k>`), `parity3`, and
    /// `free:<Name>/<arity>,...`.
    pub fn from_name(name: &str) -> Result<Self> {
        let kind = match name {
            "graphs" => Builtin::Graphs,
            "digraphs" => Builtin::Digraphs,
            "tournaments" => Builtin::Tournaments,
            "equivalence" => Builtin::Equivalence,
            "parity3" => Builtin::ParityHypergraphs,
            _ => {
                if let Some(k) = name
                    .strip_prefix("hypergraphs:")
                    .or_else(|| name.strip_prefix("hypergraphs"))
                {
                    let k = k
                        .parse()
                        .map_err(|_| Error::UnknownName(name.to_string()))?;
                    Builtin::Hypergraphs(k)
                } else if let Some(rest) = name.strip_prefix("free:") {
                    Builtin::Free(parse_signature_list(rest)?)
                } else {
                    return Err(Error::UnknownName(name.to_string()));
                }
            }
        };
        BuiltinClass::new(kind)
    }
}

/// Parses `P/1,R/2` into a signature. The empty string is the empty signature.
pub fn parse_signature_list(text: &str) -> Result<Signature> {
    let mut rels = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, arity) = part
            .split_once('/')
            .ok_or_else(|| Error::InvalidArgument(format!("expected Name/arity, got `{part}`")))?;
        let arity = arity
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad arity in `{part}`")))?;
        rels.push(Relation::new(name, arity));
    }
    Signature::new(rels)
}

fn is_loop_free(s: &Structure) -> bool {
    (1..=s.universe()).all(|i| !s.holds(0, &[i, i]))
}

fn is_symmetric2(s: &Structure) -> bool {
    let n = s.universe();
    (1..=n).all(|i| (i + 1..=n).all(|j| s.holds(0, &[i, j]) == s.holds(0, &[j, i])))
}

fn is_hypergraph(s: &Structure, k: usize) -> bool {
    let n = s.universe();
    let mut t = vec![0; k];
    s.bits(0).ones().all(|idx| {
        crate::structure::decode_tuple(idx, n, &mut t);
        let mut sorted = t.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        // closed under adjacent transpositions, hence under all permutations
        (0..k.saturating_sub(1)).all(|p| {
            let mut u = t.clone();
            u.swap(p, p + 1);
            s.bits(0).get(crate::structure::tuple_index(&u, n))
        })
    })
}

fn parity_ok(s: &Structure) -> bool {
    subsets_of_size(s.universe(), 4).iter().all(|q| {
        let edges = subsets_of_size(4, 3)
            .iter()
            .filter(|t| s.holds(0, &[q[t[0] - 1], q[t[1] - 1], q[t[2] - 1]]))
            .count();
        edges % 2 == 0
    })
}

/// All subsets of `items` as structures: bit `i` of the mask decides item `i`.
fn from_choices<F>(sig: &Signature, n: usize, items: usize, mut build: F) -> Result<Vec<Structure>>
where
    F: FnMut(&mut Structure, usize, bool),
{
    if items > MAX_FREE_TUPLES {
        return Err(Error::SearchTooLarge { free: items });
    }
    let mut out = Vec::with_capacity(1 << items);
    for mask in 0u64..(1u64 << items) {
        let mut s = Structure::empty(sig.clone(), n);
        for i in 0..items {
            build(&mut s, i, mask >> i & 1 == 1);
        }
        out.push(s);
    }
    Ok(out)
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect()
}

fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    // restricted growth strings
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let max = cur.iter().copied().max().map_or(0, |m| m + 1);
        for b in 0..=max {
            cur.push(b);
            go(n, cur, out);
            cur.pop();
        }
    }
    go(n, &mut cur, &mut out);
    out
}

impl FiniteClass for BuiltinClass {
    fn name(&self) -> String {
        self.kind.to_string()
    }

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn contains(&self, s: &Structure) -> bool {
        if s.signature() != &self.signature {
            return false;
        }
        let n = s.universe();
        match &self.kind {
            Builtin::Graphs => is_loop_free(s) && is_symmetric2(s),
            Builtin::Digraphs => is_loop_free(s),
            Builtin::Tournaments => {
                is_loop_free(s)
                    && pairs(n)
                        .into_iter()
                        .all(|(i, j)| s.holds(0, &[i, j]) != s.holds(0, &[j, i]))
            }
            Builtin::Equivalence => {
                (1..=n).all(|i| s.holds(0, &[i, i]))
                    && is_symmetric2(s)
                    && (1..=n).all(|i| {
                        (1..=n).all(|j| {
                            !s.holds(0, &[i, j])
                                || (1..=n).all(|k| !s.holds(0, &[j, k]) || s.holds(0, &[i, k]))
                        })
                    })
            }
            Builtin::Hypergraphs(k) => is_hypergraph(s, *k),
            Builtin::ParityHypergraphs => is_hypergraph(s, 3) && parity_ok(s),
            Builtin::Free(_) => true,
        }
    }

    fn width(&self) -> Option<usize> {
        Some(match &self.kind {
            Builtin::Graphs | Builtin::Tournaments => 2,
            Builtin::Digraphs => 1,
            Builtin::Equivalence => 3,
            Builtin::Hypergraphs(k) => *k,
            Builtin::ParityHypergraphs => 4,
            Builtin::Free(_) => 0,
        })
    }

    fn enumerate(&self, n: usize) -> Result<Vec<Structure>> {
        let sig = &self.signature;
        let mut out = match &self.kind {
            Builtin::Graphs => {
                let ps = pairs(n);
                from_choices(sig, n, ps.len(), |s, i, on| {
                    if on {
                        let (a, b) = ps[i];
                        s.insert(0, &[a, b]).expect("in range");
                        s.insert(0, &[b, a]).expect("in range");
                    }
                })?
            }
            Builtin::Digraphs => {
                let ps: Vec<(usize, usize)> = (1..=n)
                    .flat_map(|i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .collect();
                from_choices(sig, n, ps.len(), |s, i, on| {
                    if on {
                        s.insert(0, &[ps[i].0, ps[i].1]).expect("in range");
                    }
                })?
            }
            Builtin::Tournaments => {
                let ps = pairs(n);
                from_choices(sig, n, ps.len(), |s, i, on| {
                    let (a, b) = ps[i];
                    let t = if on { [b, a] } else { [a, b] };
                    s.insert(0, &t).expect("in range");
                })?
            }
            Builtin::Equivalence => set_partitions(n)
                .into_iter()
                .map(|blocks| {
                    let mut s = Structure::empty(sig.clone(), n);
                    for i in 0..n {
                        for j in 0..n {
                            if blocks[i] == blocks[j] {
                                s.insert(0, &[i + 1, j + 1]).expect("in range");
                            }
                        }
                    }
                    s
                })
                .collect(),
            Builtin::Hypergraphs(_) | Builtin::ParityHypergraphs => {
                let k = sig.max_arity();
                let sets = subsets_of_size(n, k);
                let perms = crate::structure::permutations(k);
                let all = from_choices(sig, n, sets.len(), |s, i, on| {
                    if on {
                        for p in &perms {
                            let t: Vec<usize> = p.iter().map(|&x| sets[i][x]).collect();
                            s.insert(0, &t).expect("in range");
                        }
                    }
                })?;
                if self.kind == Builtin::ParityHypergraphs {
                    all.into_iter().filter(parity_ok).collect()
                } else {
                    all
                }
            }
            Builtin::Free(_) => {
                let total: usize = sig.relations().iter().map(|r| power(n, r.arity)).sum();
                from_choices(sig, n, total, |s, i, on| {
                    if on {
                        let mut rest = i;
                        for rel in 0..sig.len() {
                            let size = power(n, sig.relations()[rel].arity);
                            if rest < size {
                                s.bits_mut(rel).set(rest, true);
                                return;
                            }
                            rest -= size;
                        }
                    }
                })?
            }
        };
        out.sort_by(|a, b| a.cmp_encoding(b));
        out.dedup_by(|a, b| a.cmp_encoding(b) == Ordering::Equal);
        Ok(out)
    }
}

type Predicate = dyn Fn(&Structure) -> bool + Send + Sync;

/// A class given only by a membership predicate; enumeration is by
/// one-point extension.
pub struct PredicateClass {
    name: String,
    signature: Signature,
    predicate: Box<Predicate>,
    width: Option<usize>,
}

impl PredicateClass {
    pub fn new<F>(name: impl Into<String>, signature: Signature, predicate: F) -> Self
    where
        F: Fn(&Structure) -> bool + Send + Sync + 'static,
    {
        PredicateClass {
            name: name.into(),
            signature,
            predicate: Box::new(predicate),
            width: None,
        }
    }

    pub fn with_width(mut self, width: usize) -> Self {
        self.width = Some(width);
        self
    }
}

impl FiniteClass for PredicateClass {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn contains(&self, s: &Structure) -> bool {
        s.signature() == &self.signature && (self.predicate)(s)
    }

    fn width(&self) -> Option<usize> {
        self.width
    }
}
