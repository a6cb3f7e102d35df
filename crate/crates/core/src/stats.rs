//! Chi-square checks of the invariances of random structures: equality in
//! law, exchangeability, relative exchangeability, dissociation.
//!
//! Samples come from seeds derived from a meta seed, one independent stream
//! per role, so every report is reproducible. Cells with expected count
//! below 5 are pooled before testing; families of comparisons are combined
//! with a Bonferroni correction.

use crate::embeddings::{enumerate_embeddings, RestrictionOracle};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::random::derive_seed;
use crate::samplers::Sampler;
use crate::structure::{permutations, subsets_of_size, Injection, Structure};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug)]
pub struct StatConfig {
    pub alpha: f64,
    /// Draws per stream.
    pub samples: usize,
    pub meta_seed: u64,
    pub exec: Execution,
    /// Random permutations probed when `n > 5`.
    pub max_permutations: usize,
}

impl Default for StatConfig {
    fn default() -> Self {
        StatConfig {
            alpha: 0.01,
            samples: 2000,
            meta_seed: 0,
            exec: Execution::default(),
            max_permutations: 24,
        }
    }
}

impl StatConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha {} not in (0,1)",
                self.alpha
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument(
                "at least one sample is needed".into(),
            ));
        }
        Ok(())
    }
}

/// Counts of serialized structures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmpiricalLaw {
    pub subset: Vec<usize>,
    pub counts: BTreeMap<String, u64>,
    pub n: u64,
}

impl EmpiricalLaw {
    pub fn from_keys(subset: Vec<usize>, keys: impl IntoIterator<Item = String>) -> Self {
        let mut counts = BTreeMap::new();
        let mut n = 0;
        for k in keys {
            *counts.entry(k).or_insert(0) += 1;
            n += 1;
        }
        EmpiricalLaw { subset, counts, n }
    }

    pub fn frequency(&self, key: &str) -> f64 {
        self.counts.get(key).copied().unwrap_or(0) as f64 / self.n.max(1) as f64
    }
}

/// `N` samples on `[1,n]` from stream `stream` of the meta seed.
pub fn draw(
    sampler: &dyn Sampler,
    n: usize,
    stream: u64,
    config: &StatConfig,
) -> Result<Vec<Structure>> {
    let base = derive_seed(config.meta_seed, stream);
    config.exec.try_map_indices(config.samples, |i| {
        sampler.sample_seed(n, derive_seed(base, i as u64))
    })
}

/// Law of `X|_S` over one stream.
pub fn empirical_law(
    sampler: &dyn Sampler,
    subset: &[usize],
    stream: u64,
    config: &StatConfig,
) -> Result<EmpiricalLaw> {
    let top = subset.iter().copied().max().unwrap_or(0);
    let draws = draw(sampler, top, stream, config)?;
    let keys = draws
        .iter()
        .map(|x| Ok(x.restrict(subset)?.to_json()))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalLaw::from_keys(subset.to_vec(), keys))
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub key: String,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub contribution: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub label: String,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub test: String,
    /// Statistic and degrees of freedom of the most significant comparison.
    pub statistic: f64,
    pub dof: usize,
    /// Bonferroni-adjusted when several comparisons were made.
    pub p_value: f64,
    pub alpha: f64,
    pub passed: bool,
    pub comparisons: Vec<Comparison>,
    pub skipped: Vec<String>,
    /// Cells of the most significant comparison.
    pub details: Vec<Cell>,
}

struct ChiSquare {
    statistic: f64,
    dof: usize,
    p_value: f64,
    cells: Vec<Cell>,
}

fn upper_tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    d.sf(statistic).clamp(0.0, 1.0)
}

/// Pools the rarest categories until every expected count reaches the
/// threshold. `totals` are the marginal counts per category and
/// `other_min` the smallest marginal of the other dimension; the result
/// maps each category to its group.
fn pool_rare(totals: &[u64], grand: u64, other_min: u64) -> Vec<usize> {
    let k = totals.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (totals[i], i));
    let mut group: Vec<usize> = (0..k).collect();
    let expected = |t: u64| t as f64 * other_min as f64 / grand as f64;
    let mut pooled: Vec<usize> = Vec::new();
    let mut pooled_total = 0;
    for &i in &order {
        let rare_alone = expected(totals[i]) < MIN_EXPECTED;
        let pool_small = !pooled.is_empty() && expected(pooled_total) < MIN_EXPECTED;
        if rare_alone || pool_small {
            pooled.push(i);
            pooled_total += totals[i];
        } else {
            break;
        }
    }
    if let Some(&first) = pooled.first() {
        for &i in &pooled {
            group[i] = first;
        }
    }
    // relabel groups densely in category order
    let mut dense = BTreeMap::new();
    for g in group.iter_mut() {
        let next = dense.len();
        *g = *dense.entry(*g).or_insert(next);
    }
    group
}

/// Chi-square test of independence on an `r × c` table of counts.
fn independence(col_keys: &[String], table: &[Vec<u64>]) -> Result<ChiSquare> {
    let grand: u64 = table.iter().flatten().sum();
    if grand == 0 {
        return Err(Error::InsufficientCounts("empty table".into()));
    }
    let row_tot: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_tot: Vec<u64> = (0..col_keys.len())
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let min_positive = |v: &[u64]| v.iter().copied().filter(|&t| t > 0).min().unwrap_or(0);
    let cols = pool_rare(&col_tot, grand, min_positive(&row_tot));
    let nc = cols.iter().max().map_or(0, |m| m + 1);
    let mut pooled_cols = vec![0u64; nc];
    for (j, &t) in col_tot.iter().enumerate() {
        pooled_cols[cols[j]] += t;
    }
    let rows = pool_rare(&row_tot, grand, min_positive(&pooled_cols));
    let nr = rows.iter().max().map_or(0, |m| m + 1);
    let mut merged = vec![vec![0u64; nc]; nr];
    let mut col_names = vec![Vec::new(); nc];
    for (j, name) in col_keys.iter().enumerate() {
        col_names[cols[j]].push(name.clone());
    }
    for (i, r) in table.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            merged[rows[i]][cols[j]] += v;
        }
    }
    let rt: Vec<u64> = merged.iter().map(|r| r.iter().sum()).collect();
    let ct: Vec<u64> = (0..nc).map(|j| merged.iter().map(|r| r[j]).sum()).collect();
    let live_rows = rt.iter().filter(|&&t| t > 0).count();
    let live_cols = ct.iter().filter(|&&t| t > 0).count();
    let mut statistic = 0.0;
    let mut cells = Vec::new();
    for j in 0..nc {
        let mut observed = Vec::new();
        let mut expected = Vec::new();
        let mut contribution = 0.0;
        for i in 0..nr {
            let e = rt[i] as f64 * ct[j] as f64 / grand as f64;
            let o = merged[i][j];
            if e > 0.0 {
                contribution += (o as f64 - e).powi(2) / e;
            }
            observed.push(o);
            expected.push(e);
        }
        statistic += contribution;
        let key = if col_names[j].len() == 1 {
            col_names[j][0].clone()
        } else {
            format!("other ({} cells)", col_names[j].len())
        };
        cells.push(Cell {
            key,
            observed,
            expected,
            contribution,
        });
    }
    let dof = live_rows.saturating_sub(1) * live_cols.saturating_sub(1);
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: upper_tail(statistic, dof),
        cells,
    })
}

fn two_sample(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<ChiSquare> {
    if a.n == 0 || b.n == 0 {
        return Err(Error::InsufficientCounts("a law has no samples".into()));
    }
    let keys: Vec<String> = a
        .counts
        .keys()
        .chain(b.counts.keys())
        .cloned()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let row = |l: &EmpiricalLaw| {
        keys.iter()
            .map(|k| l.counts.get(k).copied().unwrap_or(0))
            .collect::<Vec<_>>()
    };
    independence(&keys, &[row(a), row(b)])
}

fn combine(
    test: &str,
    alpha: f64,
    results: Vec<(String, ChiSquare)>,
    skipped: Vec<String>,
) -> TestReport {
    let m = results.len();
    let best = results
        .iter()
        .enumerate()
        .min_by(|x, y| {
            x.1 .1
                .p_value
                .total_cmp(&y.1 .1.p_value)
                .then(x.0.cmp(&y.0))
        })
        .map(|(i, _)| i);
    let comparisons: Vec<Comparison> = results
        .iter()
        .map(|(label, c)| Comparison {
            label: label.clone(),
            statistic: c.statistic,
            dof: c.dof,
            p_value: c.p_value,
        })
        .collect();
    let (statistic, dof, p_min, details) = match best {
        Some(i) => {
            let c = &results[i].1;
            (c.statistic, c.dof, c.p_value, c.cells.clone())
        }
        None => (0.0, 0, 1.0, Vec::new()),
    };
    let p_value = (p_min * m.max(1) as f64).min(1.0);
    TestReport {
        test: test.to_string(),
        statistic,
        dof,
        p_value,
        alpha,
        passed: p_value >= alpha,
        comparisons,
        skipped,
        details,
    }
}

/// Two-sample chi-square test of `law(A) = law(B)`.
pub fn test_equal_law(a: &EmpiricalLaw, b: &EmpiricalLaw, alpha: f64) -> Result<TestReport> {
    if a.subset.len() != b.subset.len() {
        return Err(Error::InvalidArgument(
            "laws live on subsets of different sizes".into(),
        ));
    }
    let c = two_sample(a, b)?;
    Ok(combine(
        "equal-law",
        alpha,
        vec![("a vs b".into(), c)],
        Vec::new(),
    ))
}

/// Compares the laws of `X|_S` under two samplers on independent streams.
pub fn test_equal_samplers(
    a: &dyn Sampler,
    b: &dyn Sampler,
    subset: &[usize],
    config: &StatConfig,
) -> Result<TestReport> {
    config.validate()?;
    let la = empirical_law(a, subset, 1, config)?;
    let lb = empirical_law(b, subset, 2, config)?;
    test_equal_law(&la, &lb, config.alpha)
}

fn relabeled_keys(draws: &[Structure], phi: &Injection) -> Result<Vec<String>> {
    draws
        .iter()
        .map(|x| Ok(x.relabel(phi)?.structure.to_json()))
        .collect()
}

/// Tests `X^σ|_[n] = X|_[n]` in law for every non-identity permutation `σ`
/// of `[n]` (`n ≤ 5`), or for random ones otherwise.
pub fn test_exchangeability(
    sampler: &dyn Sampler,
    n: usize,
    config: &StatConfig,
) -> Result<TestReport> {
    config.validate()?;
    let mut perms: Vec<Vec<usize>> = if n <= 5 {
        permutations(n)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.meta_seed, 3));
        (0..config.max_permutations)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect()
    };
    perms.retain(|p| p.iter().enumerate().any(|(i, &x)| i != x));
    perms.sort();
    perms.dedup();
    if perms.is_empty() {
        return Ok(combine(
            "exchangeability",
            config.alpha,
            Vec::new(),
            Vec::new(),
        ));
    }
    let a = draw(sampler, n, 1, config)?;
    let b = draw(sampler, n, 2, config)?;
    let all: Vec<usize> = (1..=n).collect();
    let law_a = EmpiricalLaw::from_keys(all.clone(), a.iter().map(Structure::to_json));
    let results = config.exec.try_map_indices(perms.len(), |k| {
        let sigma = Injection::from_images(perms[k].iter().map(|&x| x + 1).collect())?;
        let law_b = EmpiricalLaw::from_keys(all.clone(), relabeled_keys(&b, &sigma)?);
        Ok::<_, Error>((format!("sigma={sigma}"), two_sample(&law_a, &law_b)?))
    })?;
    Ok(combine(
        "exchangeability",
        config.alpha,
        results,
        Vec::new(),
    ))
}

/// Tests `law(X|_S) = law((X|_T)^φ)` for pairs of subsets with an
/// embedding `φ: M|_S → M|_T`. Without explicit pairs, every pair of
/// distinct subsets of `[1,window]` with at most `n` points is probed.
/// Pairs without an embedding are reported as skipped.
pub fn test_relative_exchangeability(
    sampler: &dyn Sampler,
    reference: &dyn RestrictionOracle,
    n: usize,
    window: usize,
    pairs: Option<Vec<(Vec<usize>, Vec<usize>)>>,
    config: &StatConfig,
) -> Result<TestReport> {
    config.validate()?;
    let pairs = match pairs {
        Some(p) => p,
        None => {
            let mut subsets = Vec::new();
            for k in 1..=n.min(window) {
                subsets.extend(subsets_of_size(window, k));
            }
            let mut out = Vec::new();
            for (i, s) in subsets.iter().enumerate() {
                for t in &subsets[i + 1..] {
                    if s.len() == t.len() {
                        out.push((s.clone(), t.clone()));
                    }
                }
            }
            out
        }
    };
    let top = pairs
        .iter()
        .flat_map(|(s, t)| s.iter().chain(t))
        .copied()
        .max()
        .unwrap_or(0)
        .max(window);
    let m = reference.prefix(top)?;
    let mut skipped = Vec::new();
    let mut probes = Vec::new();
    for (s, t) in pairs {
        let ms = m.restrict(&s)?;
        let mt = m.restrict(&t)?;
        match enumerate_embeddings(&ms, &mt)?.maps.into_iter().next() {
            Some(phi) => probes.push((s, t, phi)),
            None => skipped.push(format!("{s:?} -> {t:?}: no embedding")),
        }
    }
    if probes.is_empty() {
        return Ok(combine(
            "relative-exchangeability",
            config.alpha,
            Vec::new(),
            skipped,
        ));
    }
    let a = draw(sampler, top, 1, config)?;
    let b = draw(sampler, top, 2, config)?;
    let results = config.exec.try_map_indices(probes.len(), |k| {
        let (s, t, phi) = &probes[k];
        let law_a = EmpiricalLaw::from_keys(
            s.clone(),
            a.iter()
                .map(|x| x.restrict(s).map(|y| y.to_json()))
                .collect::<Result<Vec<_>>>()?,
        );
        let restricted: Vec<Structure> = b.iter().map(|x| x.restrict(t)).collect::<Result<_>>()?;
        let law_b = EmpiricalLaw::from_keys(s.clone(), relabeled_keys(&restricted, phi)?);
        Ok::<_, Error>((
            format!("{s:?} <- {t:?} via {phi}"),
            two_sample(&law_a, &law_b)?,
        ))
    })?;
    Ok(combine(
        "relative-exchangeability",
        config.alpha,
        results,
        skipped,
    ))
}

/// Chi-square test that `X|_S` and `X|_T` are independent, `S ∩ T = ∅`.
pub fn test_dissociation(
    sampler: &dyn Sampler,
    s: &[usize],
    t: &[usize],
    config: &StatConfig,
) -> Result<TestReport> {
    config.validate()?;
    if s.iter().any(|x| t.contains(x)) {
        return Err(Error::InvalidArgument(format!("{s:?} and {t:?} overlap")));
    }
    let top = s.iter().chain(t).copied().max().unwrap_or(0);
    let draws = draw(sampler, top, 1, config)?;
    let mut rows: BTreeMap<String, usize> = BTreeMap::new();
    let mut cols: BTreeMap<String, usize> = BTreeMap::new();
    let mut pairs = Vec::with_capacity(draws.len());
    for x in &draws {
        let a = x.restrict(s)?.to_json();
        let b = x.restrict(t)?.to_json();
        let next = rows.len();
        rows.entry(a.clone()).or_insert(next);
        let next = cols.len();
        cols.entry(b.clone()).or_insert(next);
        pairs.push((a, b));
    }
    // index categories in key order for determinism
    let row_keys: Vec<String> = rows.keys().cloned().collect();
    let col_keys: Vec<String> = cols.keys().cloned().collect();
    let mut table = vec![vec![0u64; col_keys.len()]; row_keys.len()];
    for (a, b) in pairs {
        let i = row_keys.binary_search(&a).expect("present");
        let j = col_keys.binary_search(&b).expect("present");
        table[i][j] += 1;
    }
    let c = independence(&col_keys, &table)?;
    Ok(combine(
        "dissociation",
        config.alpha,
        vec![(format!("{s:?} vs {t:?}"), c)],
        Vec::new(),
    ))
}
