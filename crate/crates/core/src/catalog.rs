//! Checkable claims about the shipped classes, theories and example
//! samplers. Each claim is decided exactly or by Monte Carlo at 4σ.

use crate::amalgamation::{age_representatives, check_ndap, CheckConfig};
use crate::class::{BuiltinClass, FiniteClass};
use crate::error::{Error, Result};
use crate::iso::canonical_form;
use crate::parallel::Execution;
use crate::random::derive_seed;
use crate::resolve::parse_sampler;
use crate::samplers::reference::example;
use crate::samplers::{FramewiseSampler, Sampler};
use crate::stats::{draw, empirical_law, test_dissociation, StatConfig};
use crate::structure::{subsets_of_size, Structure};
use crate::theory::{corpus_theory, parse_theory, TheoryClass};
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::Arc;

#[derive(Clone, Copy, Debug)]
pub struct CatalogConfig {
    /// Draws per Monte Carlo claim.
    pub samples: usize,
    pub meta_seed: u64,
    pub alpha: f64,
    pub exec: Execution,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        CatalogConfig {
            samples: 4000,
            meta_seed: 0,
            alpha: 0.01,
            exec: Execution::default(),
        }
    }
}

impl CatalogConfig {
    fn stat(&self) -> StatConfig {
        StatConfig {
            alpha: self.alpha,
            samples: self.samples,
            meta_seed: self.meta_seed,
            exec: self.exec,
            ..StatConfig::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimOutcome {
    pub id: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub struct Claim {
    pub id: &'static str,
    pub statement: &'static str,
    check: fn(&CatalogConfig) -> Result<(bool, String)>,
}

impl Claim {
    pub fn run(&self, config: &CatalogConfig) -> ClaimOutcome {
        let (passed, detail) = match (self.check)(config) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        ClaimOutcome {
            id: self.id,
            statement: self.statement,
            passed,
            detail,
        }
    }
}

/// `|freq - p| ≤ 4·sqrt(p(1-p)/N)`.
pub fn within_four_sigma(freq: f64, p: f64, n: usize) -> bool {
    (freq - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Whether a witness family for 3-DAP of equivalence relations has the
/// shape "two pairs joined, one pair split".
pub fn is_split_triangle(family: &[Structure]) -> bool {
    family.len() == 3 && family.iter().filter(|s| !s.holds(0, &[1, 2])).count() == 1
}

fn equivalence_three_dap(_: &CatalogConfig) -> Result<(bool, String)> {
    let r = check_ndap(&BuiltinClass::equivalence(), 3, &CheckConfig::default())?;
    let ok = !r.holds && r.witness_family.as_deref().is_some_and(is_split_triangle);
    Ok((
        ok,
        format!("holds={} witness={}", r.holds, r.witness_family.is_some()),
    ))
}

fn equivalence_framewise(_: &CatalogConfig) -> Result<(bool, String)> {
    let s = FramewiseSampler::new(Arc::new(BuiltinClass::equivalence()));
    for seed in 0..256 {
        if let Err(Error::AmalgamationFailure { subset, .. }) = s.sample_seed(3, seed) {
            return Ok((true, format!("seed {seed} fails at {subset:?}")));
        }
    }
    Ok((false, "no failure in 256 seeds".into()))
}

fn graphs_ndap(_: &CatalogConfig) -> Result<(bool, String)> {
    let cfg = CheckConfig::default();
    for n in 1..=5 {
        if !check_ndap(&BuiltinClass::graphs(), n, &cfg)?.holds {
            return Ok((false, format!("fails at n={n}")));
        }
    }
    Ok((true, "holds for n ≤ 5".into()))
}

fn parity_four_dap(_: &CatalogConfig) -> Result<(bool, String)> {
    let r = check_ndap(
        &BuiltinClass::parity_hypergraphs(),
        4,
        &CheckConfig::default(),
    )?;
    let ok = !r.holds && r.witness_family.as_ref().is_some_and(|f| f.len() == 4);
    Ok((ok, format!("holds={}", r.holds)))
}

fn parametric_classifier(_: &CatalogConfig) -> Result<(bool, String)> {
    let symmetric = parse_theory("rel R/2;\nforall x y. R(x,y) -> R(y,x);\n")?.is_parametric();
    let irreflexive = parse_theory("rel R/2;\nforall x. !R(x,x);\n")?.is_parametric();
    let transitive =
        parse_theory("rel R/2;\nforall x y z. R(x,y) & R(y,z) -> R(x,z);\n")?.is_parametric();
    let ok = symmetric.parametric
        && irreflexive.parametric
        && !transitive.parametric
        && transitive.atom.as_deref() == Some("R(x,y)");
    Ok((
        ok,
        format!("transitivity offending atom {:?}", transitive.atom),
    ))
}

fn parametric_corpus(_: &CatalogConfig) -> Result<(bool, String)> {
    let cfg = CheckConfig::default();
    for name in [
        "graphs",
        "digraphs",
        "tournaments",
        "hypergraphs3",
        "hypergraphs4",
    ] {
        let theory = corpus_theory(name)?;
        if !theory.is_parametric().parametric {
            return Ok((false, format!("{name} is not parametric")));
        }
        let class = TheoryClass::new(name, theory);
        for n in 1..=4 {
            if !check_ndap(&class, n, &cfg)?.holds {
                return Ok((false, format!("{name} fails n-DAP at n={n}")));
            }
        }
    }
    Ok((true, "n-DAP holds for n ≤ 4".into()))
}

/// Every labeled structure of `class` on `[1,3]` at frequency `1/count`.
fn uniform_on_three(
    sampler: &dyn Sampler,
    class: &dyn FiniteClass,
    config: &CatalogConfig,
) -> Result<(bool, String)> {
    let law = empirical_law(sampler, &[1, 2, 3], 1, &config.stat())?;
    let members = class.enumerate(3)?;
    let p = 1.0 / members.len() as f64;
    let worst = members
        .iter()
        .map(|m| (law.frequency(&m.to_json()) - p).abs())
        .fold(0.0, f64::max);
    let ok = law.counts.len() == members.len()
        && members
            .iter()
            .all(|m| within_four_sigma(law.frequency(&m.to_json()), p, config.samples));
    Ok((
        ok,
        format!("{} outcomes, worst deviation {worst:.4}", law.counts.len()),
    ))
}

fn random_graph_rule(config: &CatalogConfig) -> Result<(bool, String)> {
    uniform_on_three(
        &*parse_sampler("exchangeable:random-graph")?,
        &BuiltinClass::graphs(),
        config,
    )
}

fn tournament_rule(config: &CatalogConfig) -> Result<(bool, String)> {
    let s = parse_sampler("exchangeable:tournament")?;
    let class = BuiltinClass::tournaments();
    let bad = draw(&*s, 5, 1, &config.stat())?
        .iter()
        .filter(|x| !class.contains(x))
        .count();
    Ok((bad == 0, format!("{bad} non-tournaments")))
}

fn framewise_graphs(config: &CatalogConfig) -> Result<(bool, String)> {
    uniform_on_three(
        &*parse_sampler("framewise:graphs")?,
        &BuiltinClass::graphs(),
        config,
    )
}

fn framewise_tournaments(config: &CatalogConfig) -> Result<(bool, String)> {
    uniform_on_three(
        &*parse_sampler("framewise:tournaments")?,
        &BuiltinClass::tournaments(),
        config,
    )
}

fn framewise_coverage(config: &CatalogConfig) -> Result<(bool, String)> {
    let s = parse_sampler("framewise:graphs")?;
    let want: BTreeSet<Structure> =
        age_representatives(&BuiltinClass::graphs(), 4, &CheckConfig::default())?
            .into_iter()
            .collect();
    let mut seen = BTreeSet::new();
    let quads = subsets_of_size(6, 4);
    let stat = StatConfig {
        samples: config.samples.min(1000),
        ..config.stat()
    };
    for x in draw(&*s, 6, 1, &stat)? {
        for q in &quads {
            seen.insert(canonical_form(&x.restrict(q)?));
        }
        if seen.len() == want.len() {
            break;
        }
    }
    Ok((
        seen == want,
        format!("{} of {} classes", seen.len(), want.len()),
    ))
}

fn inclusion_frequencies(name: &str, n: usize, config: &CatalogConfig) -> Result<Vec<f64>> {
    let ex = example(name)?;
    let draws = draw(&*ex.sampler, n, 1, &config.stat())?;
    Ok((1..=n)
        .map(|i| draws.iter().filter(|x| x.holds(0, &[i])).count() as f64 / draws.len() as f64)
        .collect())
}

fn strong_rep_marginals(config: &CatalogConfig) -> Result<(bool, String)> {
    let f = inclusion_frequencies("strong-rep", 4, config)?;
    let ok = f.iter().enumerate().all(|(i, &x)| {
        within_four_sigma(x, if (i + 1) % 2 == 0 { 0.7 } else { 0.3 }, config.samples)
    });
    Ok((ok, format!("frequencies {f:.3?}")))
}

fn strong_rep_mixed(config: &CatalogConfig) -> Result<(bool, String)> {
    let ex = example("strong-rep-mixed")?;
    let stat = StatConfig {
        samples: config.samples.max(20000),
        ..config.stat()
    };
    let r = test_dissociation(&*ex.sampler, &[1, 2], &[3, 4], &stat)?;
    Ok((!r.passed, format!("p = {:.3e}", r.p_value)))
}

fn tdc_one_third(config: &CatalogConfig) -> Result<(bool, String)> {
    let f = inclusion_frequencies("tdc-evens", 4, config)?;
    let ok = f
        .iter()
        .all(|&x| within_four_sigma(x, 1.0 / 3.0, config.samples));
    Ok((ok, format!("frequencies {f:.3?}")))
}

/// For every `i` and `j, k ≠ i` in different classes of `R(i)`, exactly one
/// of `(i,j), (i,k)` lies in `S`.
pub fn weak_rep_holds(m: &Structure, x: &Structure) -> bool {
    let n = x.universe();
    for i in 1..=n {
        for j in 1..=n {
            for k in j + 1..=n {
                if j == i || k == i {
                    continue;
                }
                if !m.holds(0, &[i, j, k]) && x.holds(0, &[i, j]) == x.holds(0, &[i, k]) {
                    return false;
                }
            }
        }
    }
    true
}

fn weak_rep(config: &CatalogConfig) -> Result<(bool, String)> {
    let ex = example("weak-rep")?;
    let n = 5;
    let m = ex.reference.prefix(n)?;
    let draws = draw(&*ex.sampler, n, 1, &config.stat())?;
    let bad = draws.iter().filter(|x| !weak_rep_holds(&m, x)).count();
    Ok((
        bad == 0,
        format!("{bad} of {} samples violate", draws.len()),
    ))
}

/// For distinct `x < y < z`, `|S ∩ pairs|` is even iff `R(x,y,z)`.
pub fn parity_overlay_holds(m: &Structure, x: &Structure) -> bool {
    subsets_of_size(x.universe(), 3).iter().all(|t| {
        let (a, b, c) = (t[0], t[1], t[2]);
        let count = [(a, b), (a, c), (b, c)]
            .iter()
            .filter(|&&(u, v)| x.holds(0, &[u, v]))
            .count();
        (count % 2 == 0) == m.holds(0, &[a, b, c])
    })
}

fn parity_overlay(config: &CatalogConfig) -> Result<(bool, String)> {
    let ex = example("parity-overlay")?;
    let n = 6;
    let m = ex.reference.prefix(n)?;
    let stat = StatConfig {
        samples: config.samples.min(1000),
        ..config.stat()
    };
    let draws = draw(&*ex.sampler, n, 1, &stat)?;
    let bad = draws
        .iter()
        .filter(|x| !parity_overlay_holds(&m, x))
        .count();
    Ok((
        bad == 0,
        format!("{bad} of {} samples violate", draws.len()),
    ))
}

fn projectivity(config: &CatalogConfig) -> Result<(bool, String)> {
    let specs = [
        "framewise:graphs",
        "framewise:tournaments",
        "exchangeable:random-graph",
        "m-exch:two-coin@evens",
        "example:weak-rep",
        "example:parity-overlay",
    ];
    for spec in specs {
        let s = parse_sampler(spec)?;
        for i in 0..20 {
            let seed = derive_seed(config.meta_seed, i);
            let big = s.sample_seed(6, seed)?;
            for m in 0..6 {
                if big.prefix(m) != s.sample_seed(m, seed)? {
                    return Ok((false, format!("{spec}: seed {seed}, m = {m}")));
                }
            }
        }
    }
    Ok((true, format!("{} samplers", specs.len())))
}

pub const CLAIMS: &[Claim] = &[
    Claim {
        id: "equivalence-3dap",
        statement: "equivalence relations fail 3-DAP with two pairs joined and one split",
        check: equivalence_three_dap,
    },
    Claim {
        id: "equivalence-framewise-failure",
        statement: "the frame-wise sampler for equivalence relations hits an amalgamation failure",
        check: equivalence_framewise,
    },
    Claim {
        id: "graphs-ndap",
        statement: "graphs have n-DAP for n ≤ 5",
        check: graphs_ndap,
    },
    Claim {
        id: "parity-4dap",
        statement: "parity 3-hypergraphs fail 4-DAP with a witness on 4 points",
        check: parity_four_dap,
    },
    Claim {
        id: "parametric-classifier",
        statement: "symmetry and irreflexivity are parametric, transitivity is not",
        check: parametric_classifier,
    },
    Claim {
        id: "parametric-corpus-ndap",
        statement: "parametric corpus theories have n-DAP for n ≤ 4",
        check: parametric_corpus,
    },
    Claim {
        id: "random-graph-rule",
        statement: "the threshold rule gives each labeled graph on 3 points probability 1/8",
        check: random_graph_rule,
    },
    Claim {
        id: "tournament-rule",
        statement: "the ordering rule always yields a tournament",
        check: tournament_rule,
    },
    Claim {
        id: "framewise-graphs-uniform",
        statement: "frame-wise graphs on 3 points are uniform over the 8 labeled graphs",
        check: framewise_graphs,
    },
    Claim {
        id: "framewise-tournaments-uniform",
        statement: "frame-wise tournaments on 3 points are uniform over the 8 labeled tournaments",
        check: framewise_tournaments,
    },
    Claim {
        id: "framewise-age-coverage",
        statement: "frame-wise graphs on 6 points realize all 11 graphs on 4 points",
        check: framewise_coverage,
    },
    Claim {
        id: "projectivity",
        statement: "sample(n)|_[m] equals sample(m) for the same seed",
        check: projectivity,
    },
    Claim {
        id: "strong-rep-marginals",
        statement: "two-coin inclusion frequencies are 0.7 on P and 0.3 off P",
        check: strong_rep_marginals,
    },
    Claim {
        id: "strong-rep-mixed-dependent",
        statement: "the two-coin sampler mixed through the empty-set variable is not dissociated",
        check: strong_rep_mixed,
    },
    Claim {
        id: "weak-rep-exactly-one",
        statement: "for j, k in different classes of R(i), exactly one of (i,j), (i,k) is in S",
        check: weak_rep,
    },
    Claim {
        id: "tdc-evens-one-third",
        statement: "every element appears with marginal probability 1/3",
        check: tdc_one_third,
    },
    Claim {
        id: "parity-overlay",
        statement: "|S ∩ pairs of {x,y,z}| is even iff R(x,y,z)",
        check: parity_overlay,
    },
];

pub fn run_catalog(config: &CatalogConfig) -> Vec<ClaimOutcome> {
    CLAIMS.iter().map(|c| c.run(config)).collect()
}
