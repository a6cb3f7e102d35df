//! Embedding search: `H(S,T)`, automorphism groups and the greedy natural
//! embedding of an age member into a lazily-given reference structure.

use crate::error::{Error, Result};
use crate::structure::{decode_tuple, power, tuple_index, Injection, Signature, Structure};

/// A reference structure on the positive integers, consumed through its
/// initial segments `M|_[n]`. Repeated queries must agree.
pub trait RestrictionOracle: Send + Sync {
    fn signature(&self) -> &Signature;

    /// `M|_[n]`.
    fn prefix(&self, n: usize) -> Result<Structure>;
}

/// A finite structure used as a reference; prefixes beyond its universe are
/// an error.
#[derive(Clone, Debug)]
pub struct FiniteReference(pub Structure);

impl RestrictionOracle for FiniteReference {
    fn signature(&self) -> &Signature {
        self.0.signature()
    }

    fn prefix(&self, n: usize) -> Result<Structure> {
        if n > self.0.universe() {
            return Err(Error::ReferenceTooSmall {
                requested: n,
                available: self.0.universe(),
            });
        }
        Ok(self.0.prefix(n))
    }
}

/// A reference defined tuple-by-tuple by a membership function on 1-indexed
/// tuples.
pub struct TupleReference<F> {
    signature: Signature,
    membership: F,
}

impl<F> TupleReference<F>
where
    F: Fn(usize, &[usize]) -> bool + Send + Sync,
{
    pub fn new(signature: Signature, membership: F) -> Self {
        TupleReference {
            signature,
            membership,
        }
    }
}

impl<F> RestrictionOracle for TupleReference<F>
where
    F: Fn(usize, &[usize]) -> bool + Send + Sync,
{
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn prefix(&self, n: usize) -> Result<Structure> {
        let mut s = Structure::empty(self.signature.clone(), n);
        let mut t = Vec::new();
        for (rel, r) in self.signature.relations().iter().enumerate() {
            t.resize(r.arity, 0);
            for idx in 0..power(n, r.arity) {
                decode_tuple(idx, n, &mut t);
                t.iter_mut().for_each(|x| *x += 1);
                if (self.membership)(rel, &t) {
                    s.bits_mut(rel).set(idx, true);
                }
            }
        }
        Ok(s)
    }
}

/// The set `H(S,T)` of embeddings of `source` into `target`.
#[derive(Clone, Debug)]
pub struct EmbeddingSet {
    pub source: Structure,
    pub target: Structure,
    pub maps: Vec<Injection>,
}

impl EmbeddingSet {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

/// Tuples of `[0,i]^k` that mention `i`, per relation, with their index in
/// the source structure.
struct Levels {
    per_level: Vec<Vec<Vec<(usize, Vec<usize>)>>>,
}

impl Levels {
    fn new(source: &Structure) -> Self {
        let n = source.universe();
        let per_level = (0..n)
            .map(|i| {
                source
                    .signature()
                    .relations()
                    .iter()
                    .map(|r| {
                        let k = r.arity;
                        let mut t = vec![0; k];
                        let mut out = Vec::new();
                        for idx in 0..power(i + 1, k) {
                            decode_tuple(idx, i + 1, &mut t);
                            if t.contains(&i) {
                                out.push((tuple_index(&t, n), t.clone()));
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        Levels { per_level }
    }
}

fn consistent(
    source: &Structure,
    target: &Structure,
    levels: &Levels,
    i: usize,
    map: &[usize],
    scratch: &mut Vec<usize>,
) -> bool {
    let tn = target.universe();
    for (rel, tuples) in levels.per_level[i].iter().enumerate() {
        let sb = source.bits(rel);
        let tb = target.bits(rel);
        for (sidx, t) in tuples {
            scratch.clear();
            scratch.extend(t.iter().map(|&x| map[x]));
            if sb.get(*sidx) != tb.get(tuple_index(scratch, tn)) {
                return false;
            }
        }
    }
    true
}

/// Depth-first search over injections `[0,|S|) → [0,|T|)` in increasing
/// candidate order. `visit` returns `false` to stop early.
pub(crate) fn search_embeddings<F>(
    source: &Structure,
    target: &Structure,
    candidates: Option<&[Vec<usize>]>,
    mut visit: F,
) where
    F: FnMut(&[usize]) -> bool,
{
    let n = source.universe();
    let m = target.universe();
    if n > m {
        return;
    }
    let levels = Levels::new(source);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; m];
    let mut scratch = Vec::new();
    let all: Vec<usize> = (0..m).collect();

    fn go<F: FnMut(&[usize]) -> bool>(
        i: usize,
        source: &Structure,
        target: &Structure,
        levels: &Levels,
        candidates: Option<&[Vec<usize>]>,
        all: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        scratch: &mut Vec<usize>,
        visit: &mut F,
    ) -> bool {
        if i == map.len() {
            return visit(map);
        }
        let cands = candidates.map_or(all, |c| &c[i]);
        for &c in cands {
            if used[c] {
                continue;
            }
            map[i] = c;
            if !consistent(source, target, levels, i, map, scratch) {
                continue;
            }
            used[c] = true;
            let keep_going = go(
                i + 1,
                source,
                target,
                levels,
                candidates,
                all,
                map,
                used,
                scratch,
                visit,
            );
            used[c] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }

    go(
        0,
        source,
        target,
        &levels,
        candidates,
        &all,
        &mut map,
        &mut used,
        &mut scratch,
        &mut visit,
    );
}

fn to_injection(map: &[usize]) -> Injection {
    Injection::from_images(map.iter().map(|&x| x + 1).collect()).expect("search yields injections")
}

/// Every injection `φ: |S| → |T|` with `T^φ = S`, in lexicographic order of
/// image sequences.
pub fn enumerate_embeddings(source: &Structure, target: &Structure) -> Result<EmbeddingSet> {
    if source.signature() != target.signature() {
        return Err(Error::SignatureMismatch(format!(
            "{} vs {}",
            source.signature(),
            target.signature()
        )));
    }
    let mut maps = Vec::new();
    search_embeddings(source, target, None, |m| {
        maps.push(to_injection(m));
        true
    });
    Ok(EmbeddingSet {
        source: source.clone(),
        target: target.clone(),
        maps,
    })
}

/// Whether at least one embedding exists.
pub fn embeds(source: &Structure, target: &Structure) -> bool {
    let mut found = false;
    search_embeddings(source, target, None, |_| {
        found = true;
        false
    });
    found
}

/// The automorphism group of `s`, as `H(S,S)`.
pub fn automorphisms(s: &Structure) -> EmbeddingSet {
    enumerate_embeddings(s, s).expect("same signature")
}

/// The greedy embedding `ρ_{S,M}`: element `i` goes to the least `m ≤ bound`
/// that keeps `ρ↾[i]` an embedding of `S|_[i]`. No backtracking, so a stuck
/// prefix reports [`Error::BoundExhausted`] rather than non-membership.
pub fn natural_embedding(
    source: &Structure,
    reference: &dyn RestrictionOracle,
    bound: usize,
) -> Result<Injection> {
    if source.signature() != reference.signature() {
        return Err(Error::SignatureMismatch(format!(
            "{} vs {}",
            source.signature(),
            reference.signature()
        )));
    }
    let n = source.universe();
    if n == 0 {
        return Injection::from_images(Vec::new());
    }
    let window = reference.prefix(bound)?;
    let levels = Levels::new(source);
    let mut map = Vec::with_capacity(n);
    let mut used = vec![false; bound];
    let mut scratch = Vec::new();
    for i in 0..n {
        map.push(usize::MAX);
        let pick = (0..bound).find(|&c| {
            if used[c] {
                return false;
            }
            map[i] = c;
            // consistent() only reads map[..=i]
            consistent(source, &window, &levels, i, &map, &mut scratch)
        });
        match pick {
            Some(c) => {
                map[i] = c;
                used[c] = true;
            }
            None => return Err(Error::BoundExhausted { bound }),
        }
    }
    Ok(to_injection(&map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{permutations, Signature};

    fn sig2() -> Signature {
        Signature::from_pairs(&[("R", 2)]).unwrap()
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut s = Structure::empty(sig2(), n);
        for &(a, b) in edges {
            s.insert(0, &[a, b]).unwrap();
            s.insert(0, &[b, a]).unwrap();
        }
        s
    }

    fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut s = Structure::empty(sig2(), n);
        for &(a, b) in edges {
            s.insert(0, &[a, b]).unwrap();
        }
        s
    }

    #[test]
    fn edge_into_triangle_has_six_embeddings() {
        let edge = graph(2, &[(1, 2)]);
        let k3 = graph(3, &[(1, 2), (2, 3), (1, 3)]);
        assert_eq!(enumerate_embeddings(&edge, &k3).unwrap().len(), 6);
        assert_eq!(
            enumerate_embeddings(&edge, &graph(3, &[])).unwrap().len(),
            0
        );
    }

    #[test]
    fn self_embeddings_contain_identity() {
        let p = graph(3, &[(1, 2), (2, 3)]);
        let set = enumerate_embeddings(&p, &p).unwrap();
        assert!(set.maps.contains(&Injection::identity(3)));
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(automorphisms(&graph(3, &[(1, 2), (2, 3), (1, 3)])).len(), 6);
        assert_eq!(
            automorphisms(&digraph(3, &[(1, 2), (2, 3), (3, 1)])).len(),
            3
        );
        assert_eq!(
            automorphisms(&Structure::empty(Signature::empty(), 2)).len(),
            2
        );
    }

    #[test]
    fn automorphisms_form_a_group() {
        let c4 = graph(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let auts = automorphisms(&c4);
        assert_eq!(auts.len(), 8);
        for a in &auts.maps {
            assert!(auts.maps.contains(&a.inverse()));
            for b in &auts.maps {
                assert!(auts.maps.contains(&a.compose(b).unwrap()));
            }
        }
        assert_eq!(permutations(4).len() % auts.len(), 0);
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let a = Structure::empty(Signature::empty(), 1);
        assert!(matches!(
            enumerate_embeddings(&a, &graph(1, &[])),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn natural_embedding_examples() {
        let path = FiniteReference(graph(3, &[(1, 2), (2, 3)]));
        let edge = graph(2, &[(1, 2)]);
        let rho = natural_embedding(&edge, &path, 3).unwrap();
        assert_eq!(rho.images(), &[1, 2]);
        let non_edge = graph(2, &[]);
        let rho = natural_embedding(&non_edge, &path, 3).unwrap();
        assert_eq!(rho.images(), &[1, 3]);

        let point = Structure::empty(Signature::empty(), 1);
        let anything = FiniteReference(Structure::empty(Signature::empty(), 5));
        assert_eq!(
            natural_embedding(&point, &anything, 5).unwrap().images(),
            &[1]
        );
    }

    #[test]
    fn natural_embedding_reports_exhausted_bound() {
        let path = FiniteReference(graph(3, &[(1, 2), (2, 3)]));
        let k3 = graph(3, &[(1, 2), (2, 3), (1, 3)]);
        assert!(matches!(
            natural_embedding(&k3, &path, 3),
            Err(Error::BoundExhausted { bound: 3 })
        ));
    }

    #[test]
    fn tuple_reference_builds_prefixes() {
        let evens_odd_edges =
            TupleReference::new(sig2(), |_, t: &[usize]| t[1] % 2 == 1 && t[0] != t[1]);
        let m = evens_odd_edges.prefix(3).unwrap();
        assert!(m.holds(0, &[2, 1]));
        assert!(m.holds(0, &[1, 3]));
        assert!(!m.holds(0, &[1, 2]));
        assert!(!m.holds(0, &[1, 1]));
    }
}
