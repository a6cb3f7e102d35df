//! Signatures, finite structures on `[1,n]`, injections and relabeling.
//!
//! A structure always lives on the universe `[1,n]`. Arbitrary finite base
//! sets are handled by carrying an [`Injection`] next to the structure: the
//! relabeling `M^φ` of `M` along `φ` is re-indexed onto `[1,|dom φ|]` in
//! increasing domain order, and [`Relabeled::labels`] reports which original
//! element each new index stands for.

use crate::bitset::TupleSet;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    // field order fixes the serialized key order
    pub arity: usize,
    pub name: String,
}

impl Relation {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Relation {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// An ordered list of relation symbols with arities. May be empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Signature {
    relations: Vec<Relation>,
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Signature {
    pub fn new(relations: Vec<Relation>) -> Result<Self> {
        for (i, r) in relations.iter().enumerate() {
            if !is_identifier(&r.name) {
                return Err(Error::InvalidSignature(format!(
                    "`{}` is not an identifier",
                    r.name
                )));
            }
            if r.arity == 0 {
                return Err(Error::InvalidSignature(format!(
                    "relation `{}` has arity 0",
                    r.name
                )));
            }
            if relations[..i].iter().any(|q| q.name == r.name) {
                return Err(Error::InvalidSignature(format!(
                    "relation `{}` declared twice",
                    r.name
                )));
            }
        }
        Ok(Signature { relations })
    }

    /// Convenience constructor from `(name, arity)` pairs.
    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Signature::new(pairs.iter().map(|&(n, a)| Relation::new(n, a)).collect())
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(0)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.relations.iter().map(|r| r.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// An injective map from a finite set of positive integers into the positive
/// integers. The domain is kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Injection {
    domain: Vec<usize>,
    images: Vec<usize>,
}

impl Injection {
    /// Builds an injection from `(x, φ(x))` pairs in any order.
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        let domain: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let images: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        Injection::from_parts(domain, images)
    }

    fn from_parts(domain: Vec<usize>, images: Vec<usize>) -> Result<Self> {
        if domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotInjective(format!("domain {domain:?} repeats")));
        }
        if domain.first() == Some(&0) || images.contains(&0) {
            return Err(Error::NotInjective("elements are 1-indexed".into()));
        }
        let mut sorted = images.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::NotInjective(format!("images {images:?} repeat")));
        }
        Ok(Injection { domain, images })
    }

    /// The injection `i ↦ images[i-1]` on the domain `[1, images.len()]`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let domain = (1..=images.len()).collect();
        Injection::from_parts(domain, images)
    }

    pub fn identity(n: usize) -> Self {
        Injection {
            domain: (1..=n).collect(),
            images: (1..=n).collect(),
        }
    }

    /// Inclusion of a subset of the positive integers into itself.
    pub fn inclusion(subset: &[usize]) -> Result<Self> {
        let mut s = subset.to_vec();
        s.sort_unstable();
        Injection::from_parts(s.clone(), s)
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    /// Images listed in domain order.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        self.domain.binary_search(&x).ok().map(|i| self.images[i])
    }

    /// `self ∘ inner`: `x ↦ self(inner(x))`. Requires the image of `inner`
    /// to lie in the domain of `self`.
    pub fn compose(&self, inner: &Injection) -> Result<Injection> {
        let images = inner
            .images
            .iter()
            .map(|&y| {
                self.apply(y).ok_or_else(|| {
                    Error::InvalidArgument(format!("{y} is outside the outer domain"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Injection::from_parts(inner.domain.clone(), images)
    }

    pub fn inverse(&self) -> Injection {
        let pairs = self
            .domain
            .iter()
            .zip(&self.images)
            .map(|(&x, &y)| (y, x))
            .collect();
        Injection::new(pairs).expect("inverse of an injection is an injection")
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.domain.iter().copied().zip(self.images.iter().copied())
    }
}

impl fmt::Display for Injection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs().map(|(x, y)| format!("{x}→{y}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Result of relabeling: the structure on `[1,m]` and, for each new index,
/// the original domain element it stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabeled {
    pub structure: Structure,
    pub labels: Vec<usize>,
}

/// A finite relational structure with universe `[1,n]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Structure {
    signature: Arc<Signature>,
    n: usize,
    rels: Vec<TupleSet>,
}

pub(crate) fn power(n: usize, k: usize) -> usize {
    n.checked_pow(k as u32)
        .expect("tuple space overflows usize")
}

/// Lexicographic index of a 0-based tuple over `[0,n)`.
#[inline]
pub(crate) fn tuple_index(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * n + x)
}

#[inline]
pub(crate) fn decode_tuple(mut index: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
}

impl Structure {
    /// The structure on `[1,n]` with every relation empty.
    pub fn empty(signature: impl Into<Arc<Signature>>, n: usize) -> Self {
        let signature = signature.into();
        let rels = signature
            .relations
            .iter()
            .map(|r| TupleSet::new(power(n, r.arity)))
            .collect();
        Structure { signature, n, rels }
    }

    /// Builds a structure from named 1-indexed tuples.
    pub fn from_tuples<'a, I>(
        signature: impl Into<Arc<Signature>>,
        n: usize,
        tuples: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Vec<usize>)>,
    {
        let mut s = Structure::empty(signature, n);
        for (name, t) in tuples {
            let r = s
                .signature
                .index_of(name)
                .ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
            s.insert(r, &t)?;
        }
        Ok(s)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn signature_arc(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    fn check_tuple(&self, rel: usize, tuple: &[usize]) -> Result<()> {
        let r = &self.signature.relations[rel];
        if tuple.len() != r.arity {
            return Err(Error::ArityMismatch {
                name: r.name.clone(),
                expected: r.arity,
                found: tuple.len(),
            });
        }
        if tuple.iter().any(|&x| x == 0 || x > self.n) {
            return Err(Error::TupleOutOfRange {
                tuple: tuple.to_vec(),
                universe: self.n,
            });
        }
        Ok(())
    }

    fn index1(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &x| acc * self.n + (x - 1))
    }

    /// Whether the 1-indexed `tuple` belongs to relation number `rel`.
    pub fn holds(&self, rel: usize, tuple: &[usize]) -> bool {
        debug_assert_eq!(tuple.len(), self.signature.relations[rel].arity);
        self.rels[rel].get(self.index1(tuple))
    }

    pub fn holds_named(&self, name: &str, tuple: &[usize]) -> Result<bool> {
        let rel = self
            .signature
            .index_of(name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
        self.check_tuple(rel, tuple)?;
        Ok(self.holds(rel, tuple))
    }

    pub fn set(&mut self, rel: usize, tuple: &[usize], value: bool) -> Result<()> {
        self.check_tuple(rel, tuple)?;
        let i = self.index1(tuple);
        self.rels[rel].set(i, value);
        Ok(())
    }

    pub fn insert(&mut self, rel: usize, tuple: &[usize]) -> Result<()> {
        self.set(rel, tuple, true)
    }

    /// Tuples of relation `rel`, 1-indexed, in lexicographic order.
    pub fn tuples(&self, rel: usize) -> Vec<Vec<usize>> {
        let k = self.signature.relations[rel].arity;
        self.rels[rel]
            .ones()
            .map(|i| {
                let mut t = vec![0; k];
                decode_tuple(i, self.n, &mut t);
                t.iter_mut().for_each(|x| *x += 1);
                t
            })
            .collect()
    }

    /// Total number of tuples over all relations.
    pub fn tuple_count(&self) -> usize {
        self.rels.iter().map(TupleSet::count).sum()
    }

    pub(crate) fn bits(&self, rel: usize) -> &TupleSet {
        &self.rels[rel]
    }

    pub(crate) fn bits_mut(&mut self, rel: usize) -> &mut TupleSet {
        &mut self.rels[rel]
    }

    pub(crate) fn relation_count(&self) -> usize {
        self.rels.len()
    }

    /// Pulls the structure back along `map`, where `map[j]` is the 0-based
    /// element standing for new 0-based element `j`. No checks.
    pub(crate) fn pull_back(&self, map: &[usize]) -> Structure {
        let m = map.len();
        let mut out = Structure::empty(self.signature.clone(), m);
        let mut digits = Vec::new();
        for (rel, r) in self.signature.relations.iter().enumerate() {
            let k = r.arity;
            digits.clear();
            digits.resize(k, 0usize);
            let total = power(m, k);
            let src = &self.rels[rel];
            let dst = &mut out.rels[rel];
            for idx in 0..total {
                let old = digits.iter().fold(0, |acc, &d| acc * self.n + map[d]);
                if src.get(old) {
                    dst.set(idx, true);
                }
                // odometer increment
                for d in digits.iter_mut().rev() {
                    *d += 1;
                    if *d < m {
                        break;
                    }
                    *d = 0;
                }
            }
        }
        out
    }

    /// `M^φ`: `s⃗ ∈ R^{M^φ}` iff `φ(s⃗) ∈ R^M`, re-indexed onto `[1,|dom φ|]`.
    pub fn relabel(&self, phi: &Injection) -> Result<Relabeled> {
        if phi.images.iter().any(|&y| y == 0 || y > self.n) {
            return Err(Error::ImageOutOfUniverse { universe: self.n });
        }
        let map: Vec<usize> = phi.images.iter().map(|&y| y - 1).collect();
        Ok(Relabeled {
            structure: self.pull_back(&map),
            labels: phi.domain.clone(),
        })
    }

    /// `M|_S`, re-indexed onto `[1,|S|]` in increasing order.
    pub fn restrict(&self, subset: &[usize]) -> Result<Structure> {
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != subset.len() || s.iter().any(|&x| x == 0 || x > self.n) {
            return Err(Error::NotSubset {
                subset: subset.to_vec(),
                universe: self.n,
            });
        }
        let map: Vec<usize> = s.iter().map(|&x| x - 1).collect();
        Ok(self.pull_back(&map))
    }

    /// `M|_[m]` for `m ≤ n`.
    pub fn prefix(&self, m: usize) -> Structure {
        assert!(m <= self.n, "prefix {m} of a structure on [1,{}]", self.n);
        if m == self.n {
            return self.clone();
        }
        let map: Vec<usize> = (0..m).collect();
        self.pull_back(&map)
    }

    /// Order on the fixed bit-serialization: relations in signature order,
    /// each as membership bits over tuples in lexicographic order.
    pub fn cmp_encoding(&self, other: &Structure) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            for (a, b) in self.rels.iter().zip(&other.rels) {
                match a.cmp_bits(b) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }

    /// Named relation map with sorted 1-indexed tuples; every relation of the
    /// signature is present.
    pub fn relation_map(&self) -> BTreeMap<String, Vec<Vec<usize>>> {
        self.signature
            .relations
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), self.tuples(i)))
            .collect()
    }

    pub fn to_file(&self) -> StructureFile {
        StructureFile {
            relations: self.relation_map(),
            signature: self.signature.relations.clone(),
            universe: self.n,
        }
    }

    /// Serializes to the structure file format (compact JSON, sorted keys).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("structure serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Structure> {
        let file: StructureFile = serde_json::from_str(text)?;
        file.into_structure()
    }
}

impl Serialize for Structure {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        StructureFile::deserialize(deserializer)?
            .into_structure()
            .map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Structure({})", self.to_json())
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[1,{}]", self.n)?;
        for (i, r) in self.signature.relations.iter().enumerate() {
            let ts: Vec<String> = self
                .tuples(i)
                .iter()
                .map(|t| {
                    let parts: Vec<String> = t.iter().map(usize::to_string).collect();
                    format!("({})", parts.join(","))
                })
                .collect();
            write!(
                f,
                "  {}: {}",
                r.name,
                if ts.is_empty() {
                    "∅".to_string()
                } else {
                    ts.join(" ")
                }
            )?;
        }
        Ok(())
    }
}

/// On-disk form of a [`Structure`]. Field order is alphabetical so that the
/// derived serializer emits sorted keys.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
    pub signature: Vec<Relation>,
    pub universe: usize,
}

impl StructureFile {
    pub fn into_structure(self) -> Result<Structure> {
        let sig = Signature::new(self.signature)?;
        for name in self.relations.keys() {
            if sig.index_of(name).is_none() {
                return Err(Error::UnknownRelation(name.clone()));
            }
        }
        let mut s = Structure::empty(sig, self.universe);
        for (name, tuples) in &self.relations {
            let rel = s.signature.index_of(name).expect("checked above");
            for t in tuples {
                s.insert(rel, t)?;
            }
        }
        Ok(s)
    }
}

/// All `k`-subsets of `[1,n]` in lexicographic order.
pub fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..=n {
            if n - x + 1 < k - cur.len() {
                break;
            }
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(1, n, k, &mut cur, &mut out);
    out
}

/// All permutations of `[0,n)` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..n)
            .rev()
            .find(|&j| p[j] > p[i - 1])
            .expect("pivot exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn signature_validation() {
        assert!(Signature::from_pairs(&[("R", 0)]).is_err());
        assert!(Signature::from_pairs(&[("R", 2), ("R", 1)]).is_err());
        assert!(Signature::from_pairs(&[("2R", 1)]).is_err());
        assert!(Signature::from_pairs(&[]).unwrap().is_empty());
    }

    #[test]
    fn identity_relabel_keeps_directed_edge() {
        let sig = Signature::from_pairs(&[("R", 2)]).unwrap();
        let m = Structure::from_tuples(sig, 2, [("R", vec![1, 2])]).unwrap();
        let r = m.relabel(&Injection::identity(2)).unwrap();
        assert_eq!(r.structure, m);
        assert_eq!(r.labels, vec![1, 2]);
    }

    #[test]
    fn relabel_path_endpoints_gives_no_edges() {
        let path = graph(3, &[(1, 2), (2, 3)]);
        let phi = Injection::new(vec![(1, 1), (2, 3)]).unwrap();
        let r = path.relabel(&phi).unwrap();
        assert_eq!(r.structure, graph(2, &[]));
        // composing with the identity changes nothing
        let again = r.structure.relabel(&Injection::identity(2)).unwrap();
        let composed = phi.compose(&Injection::identity(2)).unwrap();
        assert_eq!(again.structure, path.relabel(&composed).unwrap().structure);
    }

    #[test]
    fn relabel_rejects_image_outside_universe() {
        let path = graph(3, &[(1, 2)]);
        let phi = Injection::new(vec![(1, 4)]).unwrap();
        assert!(matches!(
            path.relabel(&phi),
            Err(Error::ImageOutOfUniverse { .. })
        ));
    }

    #[test]
    fn restrictions() {
        let sig = Signature::from_pairs(&[("R", 2)]).unwrap();
        // equivalence {1,2}/{3}
        let mut eq = Structure::empty(sig.clone(), 3);
        for (a, b) in [(1, 1), (2, 2), (3, 3), (1, 2), (2, 1)] {
            eq.insert(0, &[a, b]).unwrap();
        }
        let block = eq.restrict(&[1, 2]).unwrap();
        assert_eq!(
            block.tuples(0),
            vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]
        );
        assert_eq!(eq.restrict(&[1, 2, 3]).unwrap(), eq);

        let path = graph(3, &[(1, 2), (2, 3)]);
        assert_eq!(path.restrict(&[1, 3]).unwrap(), graph(2, &[]));
        assert!(matches!(
            path.restrict(&[1, 4]),
            Err(Error::NotSubset { .. })
        ));
        assert!(path.restrict(&[1, 1]).is_err());
    }

    #[test]
    fn json_format_is_bit_exact() {
        let sig = Signature::from_pairs(&[("R", 2)]).unwrap();
        let s = Structure::from_tuples(sig, 3, [("R", vec![2, 1]), ("R", vec![1, 2])]).unwrap();
        assert_eq!(
            s.to_json(),
            r#"{"relations":{"R":[[1,2],[2,1]]},"signature":[{"arity":2,"name":"R"}],"universe":3}"#
        );
        assert_eq!(Structure::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn json_rejects_bad_tuples() {
        let bad =
            r#"{"relations":{"R":[[1,4]]},"signature":[{"arity":2,"name":"R"}],"universe":3}"#;
        assert!(matches!(
            Structure::from_json(bad),
            Err(Error::TupleOutOfRange { .. })
        ));
        let bad = r#"{"relations":{"R":[[1]]},"signature":[{"arity":2,"name":"R"}],"universe":3}"#;
        assert!(matches!(
            Structure::from_json(bad),
            Err(Error::ArityMismatch { .. })
        ));
        let bad = r#"{"relations":{"Q":[]},"signature":[{"arity":2,"name":"R"}],"universe":3}"#;
        assert!(matches!(
            Structure::from_json(bad),
            Err(Error::UnknownRelation(_))
        ));
    }

    #[test]
    fn injection_basics() {
        assert!(Injection::new(vec![(1, 2), (2, 2)]).is_err());
        let phi = Injection::new(vec![(3, 1), (1, 5)]).unwrap();
        assert_eq!(phi.domain(), &[1, 3]);
        assert_eq!(phi.apply(3), Some(1));
        assert_eq!(phi.inverse().apply(5), Some(1));
    }

    #[test]
    fn subsets_and_permutations() {
        assert_eq!(subsets_of_size(4, 2).len(), 6);
        assert_eq!(subsets_of_size(3, 0), vec![Vec::<usize>::new()]);
        let perms = permutations(3);
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[0], vec![0, 1, 2]);
        assert_eq!(perms[5], vec![2, 1, 0]);
        assert_eq!(permutations(0).len(), 1);
    }
}
