//! Age-indexed laws: one finite law per member `S` of the age of a reference
//! structure `M`, estimated from a sampler through the natural embedding
//! `ρ_{S,M}`, and the sequential sampler that grows a structure point by
//! point by conditioning these laws.

use super::Sampler;
use crate::class::FiniteClass;
use crate::embeddings::{enumerate_embeddings, natural_embedding, RestrictionOracle};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::random::{derive_seed, RandomSource};
use crate::structure::{Injection, Signature, Structure};
use serde::Serialize;
use std::collections::BTreeMap;

/// Default least conditioning mass accepted by [`sample_sequential`].
pub const DEFAULT_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct AgeLawConfig {
    /// Largest member size tabulated.
    pub cap: usize,
    /// Monte Carlo draws per member.
    pub samples: usize,
    /// Search bound for natural embeddings.
    pub bound: usize,
    pub meta_seed: u64,
    pub exec: Execution,
}

impl Default for AgeLawConfig {
    fn default() -> Self {
        AgeLawConfig {
            cap: 3,
            samples: 2000,
            bound: 32,
            meta_seed: 0,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AgeIndexedLaw {
    /// Signature of the random structures.
    pub signature: Signature,
    /// Outcome probabilities per member, outcomes sorted by encoding.
    #[serde(serialize_with = "tables_as_list")]
    pub tables: BTreeMap<Structure, Vec<(Structure, f64)>>,
    /// Largest `|p_S(A) − (φ-pushforward of p_T)(A)|` over the tabulated
    /// embeddings `φ: S → T`.
    pub discrepancy: f64,
    pub worst_pair: Option<(Structure, Structure)>,
}

#[derive(Serialize)]
struct TableEntry<'a> {
    member: &'a Structure,
    outcomes: &'a [(Structure, f64)],
}

fn tables_as_list<S: serde::Serializer>(
    tables: &BTreeMap<Structure, Vec<(Structure, f64)>>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_seq(
        tables
            .iter()
            .map(|(member, outcomes)| TableEntry { member, outcomes }),
    )
}

impl AgeIndexedLaw {
    /// A law from explicit tables; each must sum to 1.
    pub fn from_tables(
        signature: Signature,
        tables: BTreeMap<Structure, Vec<(Structure, f64)>>,
    ) -> Result<Self> {
        for (s, t) in &tables {
            let total: f64 = t.iter().map(|(_, p)| p).sum();
            if (total - 1.0).abs() > 1e-9 || t.iter().any(|(_, p)| *p < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "table at {s} sums to {total}"
                )));
            }
            if let Some((a, _)) = t
                .iter()
                .find(|(a, _)| a.universe() != s.universe() || a.signature() != &signature)
            {
                return Err(Error::InvalidArgument(format!(
                    "outcome {a} does not fit member {s}"
                )));
            }
        }
        let (discrepancy, worst_pair) = invariance_discrepancy(&tables)?;
        Ok(AgeIndexedLaw {
            signature,
            tables,
            discrepancy,
            worst_pair,
        })
    }

    pub fn probability(&self, member: &Structure, outcome: &Structure) -> f64 {
        self.tables
            .get(member)
            .and_then(|t| t.iter().find(|(a, _)| a == outcome))
            .map_or(0.0, |(_, p)| *p)
    }
}

fn invariance_discrepancy(
    tables: &BTreeMap<Structure, Vec<(Structure, f64)>>,
) -> Result<(f64, Option<(Structure, Structure)>)> {
    let mut worst = 0.0;
    let mut pair = None;
    for (s, ps) in tables {
        for (t, pt) in tables {
            if t.universe() < s.universe() {
                continue;
            }
            for phi in enumerate_embeddings(s, t)?.maps {
                let mut pushed: BTreeMap<Structure, f64> = BTreeMap::new();
                for (b, p) in pt {
                    *pushed.entry(b.relabel(&phi)?.structure).or_default() += p;
                }
                for (a, _) in ps {
                    pushed.entry(a.clone()).or_default();
                }
                for (a, q) in &pushed {
                    let p = ps.iter().find(|(x, _)| x == a).map_or(0.0, |(_, p)| *p);
                    let d = (p - q).abs();
                    if d > worst {
                        worst = d;
                        pair = Some((s.clone(), t.clone()));
                    }
                }
            }
        }
    }
    Ok((worst, pair))
}

/// Estimates `X^S = X^{ρ_{S,M}}` for every member `S` of `class` with at
/// most `cap` points by Monte Carlo over seeds derived from the meta seed.
pub fn age_indexed_from_sampler(
    sampler: &dyn Sampler,
    reference: &dyn RestrictionOracle,
    class: &dyn FiniteClass,
    config: &AgeLawConfig,
) -> Result<AgeIndexedLaw> {
    let mut members = Vec::new();
    for n in 0..=config.cap {
        for s in class.enumerate(n)? {
            let rho = natural_embedding(&s, reference, config.bound)?;
            members.push((s, rho));
        }
    }
    let top = members
        .iter()
        .flat_map(|(_, rho)| rho.images().iter().copied())
        .max()
        .unwrap_or(0);
    let draws: Vec<Vec<Structure>> = config.exec.try_map_indices(config.samples, |i| {
        let x = sampler.sample_seed(top, derive_seed(config.meta_seed, i as u64))?;
        members
            .iter()
            .map(|(_, rho): &(Structure, Injection)| Ok(x.relabel(rho)?.structure))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut tables = BTreeMap::new();
    for (j, (s, _)) in members.iter().enumerate() {
        let mut counts: BTreeMap<Structure, usize> = BTreeMap::new();
        for d in &draws {
            *counts.entry(d[j].clone()).or_default() += 1;
        }
        let mut table: Vec<(Structure, f64)> = counts
            .into_iter()
            .map(|(a, c)| (a, c as f64 / config.samples as f64))
            .collect();
        table.sort_by(|a, b| a.0.cmp_encoding(&b.0));
        tables.insert(s.clone(), table);
    }
    AgeIndexedLaw::from_tables(sampler.signature().clone(), tables)
}

/// Grows `X|_[1], …, X|_[n]`: step `m` draws from the table at `M|_[m]`
/// conditioned on agreeing with `X|_[m-1]`, using `ξ_{m}`.
pub fn sample_sequential(
    law: &AgeIndexedLaw,
    reference: &dyn RestrictionOracle,
    n: usize,
    src: &dyn RandomSource,
    floor: f64,
) -> Result<Structure> {
    let mut current = Structure::empty(law.signature.clone(), 0);
    for m in 1..=n {
        let key = reference.prefix(m)?;
        let table = law.tables.get(&key).ok_or(Error::MissingTable(m))?;
        let options: Vec<&(Structure, f64)> = table
            .iter()
            .filter(|(a, _)| a.prefix(m - 1) == current)
            .collect();
        let mass: f64 = options.iter().map(|(_, p)| p).sum();
        if mass < floor {
            return Err(Error::ZeroProbabilityConditioning { step: m, mass });
        }
        let u = src.xi(&[m])? * mass;
        let mut acc = 0.0;
        let mut pick = options.last().expect("positive mass").0.clone();
        for (a, p) in options {
            acc += p;
            if u < acc {
                pick = a.clone();
                break;
            }
        }
        current = pick;
    }
    Ok(current)
}
