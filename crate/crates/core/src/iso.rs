//! Isomorphism testing and canonical forms for small structures.

use crate::embeddings::search_embeddings;
use crate::error::{Error, Result};
use crate::structure::{decode_tuple, permutations, Injection, Structure};
use std::cmp::Ordering;

/// Per-vertex invariant: for each relation and position, how many tuples put
/// the vertex there, and how many tuples are constant on it.
fn vertex_invariants(s: &Structure) -> Vec<Vec<usize>> {
    let n = s.universe();
    let width: usize = s.signature().relations().iter().map(|r| r.arity + 1).sum();
    let mut inv = vec![vec![0; width]; n];
    let mut offset = 0;
    for (rel, r) in s.signature().relations().iter().enumerate() {
        let mut t = vec![0; r.arity];
        for idx in s.bits(rel).ones() {
            decode_tuple(idx, n, &mut t);
            for (p, &x) in t.iter().enumerate() {
                inv[x][offset + p] += 1;
            }
            if t.iter().all(|&x| x == t[0]) {
                inv[t[0]][offset + r.arity] += 1;
            }
        }
        offset += r.arity + 1;
    }
    inv
}

/// A bijective witness `φ` with `B^φ = A` when `A ≅ B`.
pub fn is_isomorphic(a: &Structure, b: &Structure) -> Result<Option<Injection>> {
    if a.signature() != b.signature() {
        return Err(Error::SignatureMismatch(format!(
            "{} vs {}",
            a.signature(),
            b.signature()
        )));
    }
    if a.universe() != b.universe() {
        return Ok(None);
    }
    for rel in 0..a.relation_count() {
        if a.bits(rel).count() != b.bits(rel).count() {
            return Ok(None);
        }
    }
    let ia = vertex_invariants(a);
    let ib = vertex_invariants(b);
    let mut sa = ia.clone();
    let mut sb = ib.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return Ok(None);
    }
    let candidates: Vec<Vec<usize>> = ia
        .iter()
        .map(|va| (0..b.universe()).filter(|&j| &ib[j] == va).collect())
        .collect();
    let mut witness = None;
    search_embeddings(a, b, Some(&candidates), |m| {
        witness = Some(
            Injection::from_images(m.iter().map(|&x| x + 1).collect())
                .expect("search yields bijections"),
        );
        false
    });
    Ok(witness)
}

/// The relabeling of `a` on `[1,n]` with minimal bit-serialization among all
/// `n!` relabelings, together with the map used: position `j` of the
/// canonical form is element `labels[j]` of `a`.
///
/// Cost is factorial in the universe size; intended for `n ≤ 8`.
pub fn canonical_labeling(a: &Structure) -> (Structure, Vec<usize>) {
    let n = a.universe();
    let mut best: Option<(Structure, Vec<usize>)> = None;
    for p in permutations(n) {
        let cand = a.pull_back(&p);
        let better = match &best {
            None => true,
            Some((b, _)) => cand.cmp_encoding(b) == Ordering::Less,
        };
        if better {
            best = Some((cand, p));
        }
    }
    let (s, p) = best.expect("at least one permutation");
    (s, p.into_iter().map(|x| x + 1).collect())
}

/// Canonical representative of the isomorphism class of `a`.
pub fn canonical_form(a: &Structure) -> Structure {
    canonical_labeling(a).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let sig = Signature::from_pairs(&[("R", 2)]).unwrap();
        let mut s = Structure::empty(sig, n);
        for &(a, b) in edges {
            s.insert(0, &[a, b]).unwrap();
            s.insert(0, &[b, a]).unwrap();
        }
        s
    }

    #[test]
    fn triangle_is_isomorphic_to_itself() {
        let k3 = graph(3, &[(1, 2), (2, 3), (1, 3)]);
        let w = is_isomorphic(&k3, &k3).unwrap().unwrap();
        assert_eq!(k3.relabel(&w).unwrap().structure, k3);
    }

    #[test]
    fn relabeled_path_has_witness() {
        let p = graph(3, &[(1, 2), (2, 3)]);
        let q = graph(3, &[(1, 2), (1, 3)]);
        let w = is_isomorphic(&p, &q).unwrap().unwrap();
        assert_eq!(q.relabel(&w).unwrap().structure, p);
    }

    #[test]
    fn triangle_is_not_a_path() {
        let k3 = graph(3, &[(1, 2), (2, 3), (1, 3)]);
        let p = graph(3, &[(1, 2), (2, 3)]);
        assert!(is_isomorphic(&k3, &p).unwrap().is_none());
    }

    #[test]
    fn canonical_forms() {
        let empty = graph(3, &[]);
        assert_eq!(canonical_form(&empty), empty);
        let k3 = graph(3, &[(1, 2), (2, 3), (1, 3)]);
        assert_eq!(canonical_form(&k3), k3);
        let e12 = graph(3, &[(1, 2)]);
        let e23 = graph(3, &[(2, 3)]);
        assert_eq!(canonical_form(&e12), canonical_form(&e23));
        // minimal encoding puts the single edge as late as possible
        assert_eq!(canonical_form(&e12), e23);
    }

    #[test]
    fn canonical_labeling_reproduces_form() {
        let p = graph(4, &[(1, 2), (2, 3), (3, 4)]);
        let (form, labels) = canonical_labeling(&p);
        let phi = Injection::from_images(labels).unwrap();
        assert_eq!(p.relabel(&phi).unwrap().structure, form);
    }
}
