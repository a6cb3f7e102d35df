//! Ages, joint embedding, disjoint amalgamation and its `n`-ary form.
//!
//! All searches are exhaustive within a size cap. Candidate amalgams are
//! built on a [`Frame`]: a partial structure plus a mask of tuples already
//! fixed by the pieces placed on it; the remaining tuples are enumerated
//! group by group (grouped by their set of entries) and pruned with the
//! class predicate on every restriction completed so far.

use crate::bitset::TupleSet;
use crate::class::{FiniteClass, MAX_FREE_TUPLES};
use crate::embeddings::enumerate_embeddings;
use crate::error::{Error, Result};
use crate::iso::canonical_form;
use crate::parallel::Execution;
use crate::structure::{decode_tuple, power, tuple_index, Signature, Structure};
use serde::Serialize;
use std::collections::BTreeMap;

pub const DEFAULT_CAP: usize = 6;
pub const MAX_CAP: usize = 8;

#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub cap: usize,
    pub exec: Execution,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            cap: DEFAULT_CAP,
            exec: Execution::default(),
        }
    }
}

impl CheckConfig {
    pub fn with_cap(cap: usize) -> Result<Self> {
        if cap > MAX_CAP {
            return Err(Error::CapExceeded {
                n: cap,
                cap: MAX_CAP,
            });
        }
        Ok(CheckConfig {
            cap,
            ..Default::default()
        })
    }

    pub fn exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.cap || self.cap > MAX_CAP {
            Err(Error::CapExceeded {
                n,
                cap: self.cap.min(MAX_CAP),
            })
        } else {
            Ok(())
        }
    }
}

/// A structure on `[1,u]` with some tuples fixed.
#[derive(Clone, Debug)]
pub struct Frame {
    partial: Structure,
    known: Vec<TupleSet>,
}

impl Frame {
    pub fn new(signature: Signature, u: usize) -> Self {
        let partial = Structure::empty(signature, u);
        let known = partial
            .signature()
            .relations()
            .iter()
            .map(|r| TupleSet::new(power(u, r.arity)))
            .collect();
        Frame { partial, known }
    }

    pub fn universe(&self) -> usize {
        self.partial.universe()
    }

    /// Fixes every tuple over the image of `positions` (1-based, injective)
    /// to agree with `piece`: `piece` holds on `t` iff the frame holds on
    /// `positions∘t`. Returns `false`, leaving the frame partially updated,
    /// on a clash with earlier pieces.
    pub fn place(&mut self, piece: &Structure, positions: &[usize]) -> bool {
        debug_assert_eq!(piece.universe(), positions.len());
        let n = piece.universe();
        let u = self.universe();
        let mut t = Vec::new();
        let mut image = Vec::new();
        for (rel, r) in piece.signature().relations().iter().enumerate() {
            t.resize(r.arity, 0);
            image.resize(r.arity, 0);
            for idx in 0..power(n, r.arity) {
                decode_tuple(idx, n, &mut t);
                for (dst, &x) in image.iter_mut().zip(&t) {
                    *dst = positions[x] - 1;
                }
                let j = tuple_index(&image, u);
                let value = piece.bits(rel).get(idx);
                if self.known[rel].get(j) {
                    if self.partial.bits(rel).get(j) != value {
                        return false;
                    }
                } else {
                    self.known[rel].set(j, true);
                    self.partial.bits_mut(rel).set(j, value);
                }
            }
        }
        true
    }

    /// Visits, in a fixed order, every member of `class` on `[1,u]` that
    /// agrees with the fixed tuples. `visit` returns `false` to stop.
    pub fn complete<C, F>(&self, class: &C, mut visit: F) -> Result<()>
    where
        C: FiniteClass + ?Sized,
        F: FnMut(&Structure) -> bool,
    {
        let u = self.universe();
        if let Some(theory) = class.theory() {
            theory.search_models(u, Some((&self.partial, &self.known)), &mut visit);
            return Ok(());
        }
        let groups = self.free_groups();
        if let Some(g) = groups.iter().find(|g| g.tuples.len() > MAX_FREE_TUPLES) {
            return Err(Error::SearchTooLarge {
                free: g.tuples.len(),
            });
        }
        let mut work = self.partial.clone();
        fn go<C: FiniteClass + ?Sized, F: FnMut(&Structure) -> bool>(
            gi: usize,
            groups: &[Group],
            u: usize,
            class: &C,
            work: &mut Structure,
            visit: &mut F,
        ) -> bool {
            if gi == groups.len() {
                if class.contains(work) {
                    return visit(work);
                }
                return true;
            }
            let g = &groups[gi];
            for mask in 0u64..(1u64 << g.tuples.len()) {
                for (b, &(rel, idx)) in g.tuples.iter().enumerate() {
                    work.bits_mut(rel).set(idx, mask >> b & 1 == 1);
                }
                if g.range.len() < u
                    && !class.contains(&work.restrict(&g.range).expect("range within frame"))
                {
                    continue;
                }
                if g.closes_level && g.level < u && !class.contains(&work.prefix(g.level)) {
                    continue;
                }
                if !go(gi + 1, groups, u, class, work, visit) {
                    return false;
                }
            }
            for &(rel, idx) in &g.tuples {
                work.bits_mut(rel).set(idx, false);
            }
            true
        }
        go(0, &groups, u, class, &mut work, &mut visit);
        Ok(())
    }

    pub fn first_completion<C: FiniteClass + ?Sized>(
        &self,
        class: &C,
    ) -> Result<Option<Structure>> {
        let mut found = None;
        self.complete(class, |s| {
            found = Some(s.clone());
            false
        })?;
        Ok(found)
    }

    pub fn all_completions<C: FiniteClass + ?Sized>(&self, class: &C) -> Result<Vec<Structure>> {
        let mut out = Vec::new();
        self.complete(class, |s| {
            out.push(s.clone());
            true
        })?;
        Ok(out)
    }

    /// Unfixed tuples grouped by their set of entries, ordered by largest
    /// entry, then size, then lexicographically; so each group's proper
    /// sub-ranges come earlier.
    fn free_groups(&self) -> Vec<Group> {
        let u = self.universe();
        let mut by_range: BTreeMap<(usize, usize, Vec<usize>), Vec<(usize, usize)>> =
            BTreeMap::new();
        let mut t = Vec::new();
        for (rel, r) in self.partial.signature().relations().iter().enumerate() {
            t.resize(r.arity, 0);
            for idx in 0..power(u, r.arity) {
                if self.known[rel].get(idx) {
                    continue;
                }
                decode_tuple(idx, u, &mut t);
                let mut range: Vec<usize> = t.iter().map(|&x| x + 1).collect();
                range.sort_unstable();
                range.dedup();
                let key = (*range.last().expect("arity ≥ 1"), range.len(), range);
                by_range.entry(key).or_default().push((rel, idx));
            }
        }
        let keys: Vec<_> = by_range.into_iter().collect();
        let count = keys.len();
        let mut groups = Vec::with_capacity(count);
        for (i, ((level, _, range), tuples)) in keys.iter().cloned().enumerate() {
            let closes_level = i + 1 == count || keys[i + 1].0 .0 != level;
            groups.push(Group {
                range,
                level,
                closes_level,
                tuples,
            });
        }
        groups
    }
}

struct Group {
    range: Vec<usize>,
    level: usize,
    closes_level: bool,
    tuples: Vec<(usize, usize)>,
}

/// Every member of `class` on `[1,n]`.
pub fn enumerate_age(
    class: &dyn FiniteClass,
    n: usize,
    config: &CheckConfig,
) -> Result<Vec<Structure>> {
    config.check(n)?;
    class.enumerate(n)
}

/// One representative (the canonical form) per isomorphism class of members
/// on `[1,n]`, sorted by encoding.
pub fn age_representatives(
    class: &dyn FiniteClass,
    n: usize,
    config: &CheckConfig,
) -> Result<Vec<Structure>> {
    let members = enumerate_age(class, n, config)?;
    let mut forms = config.exec.map(&members, canonical_form);
    forms.sort_by(Structure::cmp_encoding);
    forms.dedup();
    Ok(forms)
}

/// `[n]∖{i}` in increasing order, 1-based.
fn omit(n: usize, i: usize) -> Vec<usize> {
    (1..=n).filter(|&x| x != i).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct NdapReport {
    pub n: usize,
    pub holds: bool,
    /// A compatible family with no amalgam; `S_i` re-indexed onto `[1,n-1]`.
    pub witness_family: Option<Vec<Structure>>,
    /// An amalgam of the first family enumerated, when the property holds.
    pub amalgam: Option<Structure>,
}

enum FamilyOutcome {
    Amalgam(Structure),
    Stuck(Vec<Structure>),
}

/// Decides `n`-DAP for `class` by enumerating every compatible family
/// `(S_i)` of members on `[n]∖{i}` and searching for a member on `[n]`
/// extending all of them. Families are visited in lexicographic order of
/// member indices; the first family without an amalgam is the witness.
pub fn check_ndap(class: &dyn FiniteClass, n: usize, config: &CheckConfig) -> Result<NdapReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-DAP needs n ≥ 1".into()));
    }
    config.check(n)?;
    let members = class.enumerate(n - 1)?;
    let sig = class.signature().clone();
    let slots: Vec<Vec<usize>> = (1..=n).map(|i| omit(n, i)).collect();

    // Search below a fixed choice for S_1; returns the first stuck family or
    // the first amalgam found.
    let explore = |first: usize| -> Result<Option<FamilyOutcome>> {
        let mut frame = Frame::new(sig.clone(), n);
        if !frame.place(&members[first], &slots[0]) {
            return Ok(None);
        }
        let mut chosen = vec![first];
        let mut first_amalgam = None;
        let stuck = family_search(
            class,
            &members,
            &slots,
            1,
            &frame,
            &mut chosen,
            &mut first_amalgam,
        )?;
        Ok(match stuck {
            Some(family) => Some(FamilyOutcome::Stuck(family)),
            None => first_amalgam.map(FamilyOutcome::Amalgam),
        })
    };

    let outcomes = config.exec.map_indices(members.len(), explore);
    let mut example = None;
    for outcome in outcomes {
        match outcome? {
            Some(FamilyOutcome::Stuck(family)) => {
                return Ok(NdapReport {
                    n,
                    holds: false,
                    witness_family: Some(family),
                    amalgam: None,
                })
            }
            Some(FamilyOutcome::Amalgam(a)) => {
                example.get_or_insert(a);
            }
            None => {}
        }
    }
    if members.is_empty() {
        // No families at all: n-DAP holds vacuously.
        return Ok(NdapReport {
            n,
            holds: true,
            witness_family: None,
            amalgam: None,
        });
    }
    Ok(NdapReport {
        n,
        holds: true,
        witness_family: None,
        amalgam: example,
    })
}

fn family_search(
    class: &dyn FiniteClass,
    members: &[Structure],
    slots: &[Vec<usize>],
    i: usize,
    frame: &Frame,
    chosen: &mut Vec<usize>,
    first_amalgam: &mut Option<Structure>,
) -> Result<Option<Vec<Structure>>> {
    if i == slots.len() {
        return match frame.first_completion(class)? {
            Some(a) => {
                first_amalgam.get_or_insert(a);
                Ok(None)
            }
            None => Ok(Some(chosen.iter().map(|&c| members[c].clone()).collect())),
        };
    }
    for (c, m) in members.iter().enumerate() {
        let mut next = frame.clone();
        if !next.place(m, &slots[i]) {
            continue;
        }
        chosen.push(c);
        let found = family_search(class, members, slots, i + 1, &next, chosen, first_amalgam)?;
        chosen.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct AmalgamSet {
    /// Every member on `[1,n]` extending the family, sorted by encoding.
    pub all: Vec<Structure>,
    /// The encoding-least amalgam from each isomorphism class, sorted.
    pub representatives: Vec<Structure>,
}

/// All amalgams of a compatible family `(S_i)`, `S_i` on `[n]∖{i}` given
/// re-indexed onto `[1,n-1]`.
pub fn amalgams(family: &[Structure], class: &dyn FiniteClass) -> Result<AmalgamSet> {
    let n = family.len();
    let sig = class.signature();
    let mut frame = Frame::new(sig.clone(), n);
    for (i, s) in family.iter().enumerate() {
        if s.signature() != sig {
            return Err(Error::SignatureMismatch(format!(
                "{} vs {}",
                s.signature(),
                sig
            )));
        }
        if s.universe() + 1 != n {
            return Err(Error::InvalidArgument(format!(
                "family member {} has {} points, expected {}",
                i + 1,
                s.universe(),
                n.saturating_sub(1)
            )));
        }
        if !class.contains(s) {
            return Err(Error::NotInClass(format!("family member {}: {s}", i + 1)));
        }
        if !frame.place(s, &omit(n, i + 1)) {
            return Err(Error::IncompatibleFamily(format!(
                "member {} disagrees with an earlier member",
                i + 1
            )));
        }
    }
    let mut all = frame.all_completions(class)?;
    all.sort_by(Structure::cmp_encoding);
    Ok(AmalgamSet {
        representatives: representatives(&all),
        all,
    })
}

/// Encoding-least element of each isomorphism class, sorted by encoding.
pub fn representatives(structures: &[Structure]) -> Vec<Structure> {
    let mut best: BTreeMap<Structure, Structure> = BTreeMap::new();
    for s in structures {
        best.entry(canonical_form(s))
            .and_modify(|b| {
                if s.cmp_encoding(b).is_lt() {
                    *b = s.clone();
                }
            })
            .or_insert_with(|| s.clone());
    }
    let mut out: Vec<Structure> = best.into_values().collect();
    out.sort_by(Structure::cmp_encoding);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct JepReport {
    pub bound: usize,
    pub holds: bool,
    pub failing_pair: Option<(Structure, Structure)>,
}

/// Injections `[1,b] → [1,u]` whose image contains `[a+1,u]`.
fn covering_placements(a: usize, b: usize, u: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(b);
    let mut used = vec![false; u + 1];
    fn go(
        a: usize,
        b: usize,
        u: usize,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == b {
            if (a + 1..=u).all(|x| used[x]) {
                out.push(cur.clone());
            }
            return;
        }
        for x in 1..=u {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                go(a, b, u, cur, used, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    go(a, b, u, &mut cur, &mut used, &mut out);
    out
}

/// Whether every two members with at most `bound` points embed jointly in a
/// member with at most their combined size.
pub fn check_jep(class: &dyn FiniteClass, bound: usize, config: &CheckConfig) -> Result<JepReport> {
    config.check(bound)?;
    let mut reps = Vec::new();
    for n in 0..=bound {
        reps.extend(age_representatives(class, n, config)?);
    }
    let pairs: Vec<(usize, usize)> = (0..reps.len())
        .flat_map(|i| (i..reps.len()).map(move |j| (i, j)))
        .collect();
    let sig = class.signature().clone();
    let joint = |&(i, j): &(usize, usize)| -> Result<bool> {
        let (s, t) = (&reps[i], &reps[j]);
        let (a, b) = (s.universe(), t.universe());
        let id: Vec<usize> = (1..=a).collect();
        for u in a.max(b)..=a + b {
            for tau in covering_placements(a, b, u) {
                let mut frame = Frame::new(sig.clone(), u);
                if frame.place(s, &id)
                    && frame.place(t, &tau)
                    && frame.first_completion(class)?.is_some()
                {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    };
    let verdicts = config.exec.map(&pairs, joint);
    for (p, v) in pairs.iter().zip(verdicts) {
        if !v? {
            return Ok(JepReport {
                bound,
                holds: false,
                failing_pair: Some((reps[p.0].clone(), reps[p.1].clone())),
            });
        }
    }
    Ok(JepReport {
        bound,
        holds: true,
        failing_pair: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DapWitness {
    pub base: Structure,
    pub left: Structure,
    pub right: Structure,
    /// Images of the base in `left` and `right`, 1-based.
    pub left_map: Vec<usize>,
    pub right_map: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DapReport {
    pub bound: usize,
    /// The overlap formulation's verdict.
    pub holds: bool,
    pub via_two_dap: bool,
    pub via_overlap: bool,
    pub witness: Option<DapWitness>,
}

/// Checks disjoint amalgamation twice: as 2-DAP, and directly on all
/// `S ↪ T, S ↪ T'` over representatives with at most `bound` points, the
/// amalgam being searched on `|T|+|T'|−|S|` points.
///
/// The verdict follows the direct route. 2-DAP only amalgamates over the
/// empty structure, so it can hold where the direct route fails (graphs with
/// at most one edge); both results are reported.
pub fn check_dap(class: &dyn FiniteClass, bound: usize, config: &CheckConfig) -> Result<DapReport> {
    config.check(bound)?;
    let two = check_ndap(
        class,
        2,
        &CheckConfig {
            cap: config.cap.max(2),
            ..*config
        },
    )?;
    let mut by_size = Vec::new();
    for n in 0..=bound {
        by_size.push(age_representatives(class, n, config)?);
    }
    let all: Vec<&Structure> = by_size.iter().flatten().collect();
    let mut triples = Vec::new();
    for (si, s) in all.iter().enumerate() {
        for (ti, t) in all.iter().enumerate() {
            for (ri, r) in all.iter().enumerate().skip(ti) {
                if t.universe() >= s.universe() && r.universe() >= s.universe() {
                    triples.push((si, ti, ri));
                }
            }
        }
    }
    let sig = class.signature().clone();
    let overlap = |&(si, ti, ri): &(usize, usize, usize)| -> Result<Option<DapWitness>> {
        let (s, t, r) = (all[si], all[ti], all[ri]);
        let left = enumerate_embeddings(s, t)?;
        let right = enumerate_embeddings(s, r)?;
        let u = t.universe() + r.universe() - s.universe();
        let id: Vec<usize> = (1..=t.universe()).collect();
        for phi in &left.maps {
            for psi in &right.maps {
                // points of r: the image of psi lands on phi's image, the
                // rest on fresh points after t
                let mut positions = vec![0; r.universe()];
                for (x, y) in psi.pairs() {
                    positions[y - 1] = phi.apply(x).expect("total on source");
                }
                let mut next = t.universe();
                for p in positions.iter_mut().filter(|p| **p == 0) {
                    next += 1;
                    *p = next;
                }
                let mut frame = Frame::new(sig.clone(), u);
                let ok = frame.place(t, &id)
                    && frame.place(r, &positions)
                    && frame.first_completion(class)?.is_some();
                if !ok {
                    return Ok(Some(DapWitness {
                        base: s.clone(),
                        left: t.clone(),
                        right: r.clone(),
                        left_map: phi.images().to_vec(),
                        right_map: psi.images().to_vec(),
                    }));
                }
            }
        }
        Ok(None)
    };
    let results = config.exec.map(&triples, overlap);
    let mut witness = None;
    for r in results {
        if let Some(w) = r? {
            witness = Some(w);
            break;
        }
    }
    let via_overlap = witness.is_none();
    Ok(DapReport {
        bound,
        holds: via_overlap,
        via_two_dap: two.holds,
        via_overlap,
        witness,
    })
}
