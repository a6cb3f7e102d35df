//! `relex`: amalgamation checks, theories, samplers and invariance tests
//! from the command line.
//!
//! Exit status: 0 on success, 1 when a checked property fails, 2 on usage
//! errors.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use relex::amalgamation::{DEFAULT_CAP, MAX_CAP};
use relex::catalog::{run_catalog, CatalogConfig};
use relex::resolve::{
    build_sampler, parse_sampler, resolve_class, resolve_reference, resolve_theory, SamplerKind,
};
use relex::stats::{
    test_dissociation, test_equal_samplers, test_exchangeability, test_relative_exchangeability,
};
use relex::{
    age_representatives, check_dap, check_jep, check_ndap, enumerate_age, enumerate_embeddings,
    CheckConfig, Error, Execution, HierarchicalRandomSource, StatConfig, Structure, TestReport,
};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "relex",
    version,
    about = "Relational structures, amalgamation and exchangeable sampling"
)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Seed for sampling and for Monte Carlo tests.
    #[arg(long, global = true, env = "RELEX_SEED", default_value_t = 0)]
    seed: u64,

    /// Largest structure size enumerated.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP, value_parser = parse_cap)]
    cap: usize,

    /// Significance level of statistical tests.
    #[arg(long, global = true, default_value_t = 0.01, value_parser = parse_alpha)]
    alpha: f64,

    /// Samples per stream in statistical tests.
    #[arg(long, global = true, default_value_t = 2000, value_parser = parse_samples)]
    samples: usize,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,

    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("{a} is not in (0,1)"))
    }
}

fn parse_cap(s: &str) -> std::result::Result<usize, String> {
    let c: usize = s.parse().map_err(|e| format!("{e}"))?;
    if c <= MAX_CAP {
        Ok(c)
    } else {
        Err(format!("cap {c} exceeds {MAX_CAP}"))
    }
}

fn parse_samples(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>().map_err(|e| format!("{e}"))? {
        0 => Err("at least one sample is needed".into()),
        n => Ok(n),
    }
}

/// A set of points, e.g. `1,3,4`.
#[derive(Clone, Debug)]
struct Subset(Vec<usize>);

fn parse_points(s: &str) -> std::result::Result<Subset, String> {
    parse_subset(s).map(Subset)
}

fn parse_subset(s: &str) -> std::result::Result<Vec<usize>, String> {
    let v: Vec<usize> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.contains(&0) {
        return Err("points are numbered from 1".into());
    }
    let mut sorted = v.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != v.len() {
        return Err("repeated point".into());
    }
    Ok(sorted)
}

fn parse_pair(s: &str) -> std::result::Result<(Vec<usize>, Vec<usize>), String> {
    let (a, b) = s.split_once(':').ok_or("expected S:T, e.g. 1,2:3,4")?;
    Ok((parse_subset(a)?, parse_subset(b)?))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Amalgamation properties of a class.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Isomorphism types of members on [1,n].
    Age {
        #[arg(long)]
        class: String,
        #[arg(long)]
        n: usize,
    },
    /// Universal theories.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Draw one random structure on [1,n].
    Sample {
        /// framewise, exchangeable, m-exch or maxseg.
        kind: String,
        #[arg(long)]
        rules: Option<String>,
        #[arg(long)]
        class: Option<String>,
        #[arg(long = "ref")]
        reference: Option<String>,
        #[arg(long)]
        n: usize,
    },
    /// Statistical tests of invariance properties.
    #[command(subcommand)]
    Test(TestCommand),
    /// Check every claim of the example catalog.
    VerifyPaperExamples,
    /// All embeddings of one structure file into another.
    Embeddings {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// n-DAP by exhaustive family enumeration.
    Ndap {
        #[arg(long)]
        class: String,
        #[arg(long)]
        n: usize,
    },
    /// Disjoint amalgamation up to a size bound.
    Dap {
        #[arg(long)]
        class: String,
        #[arg(long)]
        bound: usize,
    },
    /// Joint embedding up to a size bound.
    Jep {
        #[arg(long)]
        class: String,
        #[arg(long)]
        bound: usize,
    },
}

#[derive(Subcommand, Debug)]
enum TheoryCommand {
    /// Parse, classify and count models up to n.
    Check {
        file: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// List the models on [1,n].
    Models {
        file: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
enum TestCommand {
    /// Exchangeability on [1,n].
    Exch {
        /// e.g. framewise:graphs, exchangeable:random-graph, example:loop-at-one.
        #[arg(long)]
        sampler: String,
        #[arg(long)]
        n: usize,
    },
    /// Relative exchangeability over a reference structure.
    RelExch {
        #[arg(long)]
        sampler: String,
        #[arg(long = "ref")]
        reference: String,
        /// Largest probed subset.
        #[arg(long)]
        n: usize,
        /// Subsets are drawn from [1,window].
        #[arg(long, default_value_t = 4)]
        window: usize,
        /// Explicit pair S:T, repeatable.
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<(Vec<usize>, Vec<usize>)>,
    },
    /// Independence of the restrictions to two disjoint sets.
    Dissoc {
        #[arg(long)]
        sampler: String,
        #[arg(long, value_parser = parse_points)]
        s: Subset,
        #[arg(long, value_parser = parse_points)]
        t: Subset,
    },
    /// Equality in law of two samplers restricted to a set.
    Equal {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_parser = parse_points)]
        subset: Subset,
    },
}

/// What a command produced: a verdict, a JSON value and a rendering.
struct Outcome {
    ok: bool,
    json: Value,
    text: String,
}

impl RunConfig {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn check(&self) -> Result<CheckConfig> {
        Ok(CheckConfig::with_cap(self.cap)?.exec(self.exec()))
    }

    fn stat(&self) -> StatConfig {
        StatConfig {
            alpha: self.alpha,
            samples: self.samples,
            meta_seed: self.seed,
            exec: self.exec(),
            ..StatConfig::default()
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "holds"
    } else {
        "fails"
    }
}

fn structures_text(out: &mut String, label: &str, items: &[Structure]) {
    for (i, s) in items.iter().enumerate() {
        let _ = writeln!(out, "  {label}{}: {s}", i + 1);
    }
}

fn check(cmd: &CheckCommand, run: &RunConfig) -> Result<Outcome> {
    let cfg = run.check()?;
    Ok(match cmd {
        CheckCommand::Ndap { class, n } => {
            let c = resolve_class(class)?;
            let r = check_ndap(&*c, *n, &cfg)?;
            let mut text = format!("{}-DAP for {}: {}\n", n, c.name(), verdict(r.holds));
            if let Some(f) = &r.witness_family {
                text.push_str("witness family (S_i on [1,n]∖{i}, relabeled onto [1,n-1]):\n");
                structures_text(&mut text, "S", f);
            }
            Outcome {
                ok: r.holds,
                json: serde_json::to_value(&r)?,
                text,
            }
        }
        CheckCommand::Dap { class, bound } => {
            let c = resolve_class(class)?;
            let r = check_dap(&*c, *bound, &cfg)?;
            let mut text = format!(
                "DAP for {} up to {} points: {} (2-DAP route {}, overlap route {})\n",
                c.name(),
                bound,
                verdict(r.holds),
                verdict(r.via_two_dap),
                verdict(r.via_overlap)
            );
            if let Some(w) = &r.witness {
                let _ = writeln!(text, "  base: {}", w.base);
                let _ = writeln!(text, "  left: {} via {:?}", w.left, w.left_map);
                let _ = writeln!(text, "  right: {} via {:?}", w.right, w.right_map);
            }
            Outcome {
                ok: r.holds,
                json: serde_json::to_value(&r)?,
                text,
            }
        }
        CheckCommand::Jep { class, bound } => {
            let c = resolve_class(class)?;
            let r = check_jep(&*c, *bound, &cfg)?;
            let mut text = format!(
                "JEP for {} up to {} points: {}\n",
                c.name(),
                bound,
                verdict(r.holds)
            );
            if let Some((a, b)) = &r.failing_pair {
                let _ = writeln!(text, "  no joint embedding of {a} and {b}");
            }
            Outcome {
                ok: r.holds,
                json: serde_json::to_value(&r)?,
                text,
            }
        }
    })
}

fn age(class: &str, n: usize, run: &RunConfig) -> Result<Outcome> {
    let cfg = run.check()?;
    let c = resolve_class(class)?;
    let labeled = enumerate_age(&*c, n, &cfg)?.len();
    let reps = age_representatives(&*c, n, &cfg)?;
    let mut text = format!(
        "{} on [1,{}]: {} labeled, {} up to isomorphism\n",
        c.name(),
        n,
        labeled,
        reps.len()
    );
    structures_text(&mut text, "#", &reps);
    Ok(Outcome {
        ok: true,
        json: json!({ "class": c.name(), "n": n, "labeled": labeled, "representatives": reps }),
        text,
    })
}

fn theory(cmd: &TheoryCommand, run: &RunConfig) -> Result<Outcome> {
    Ok(match cmd {
        TheoryCommand::Check { file, n } => {
            let t = resolve_theory(file)?;
            let top = n.unwrap_or(run.cap.min(4));
            if top > run.cap {
                return Err(Error::CapExceeded {
                    n: top,
                    cap: run.cap,
                }
                .into());
            }
            let counts = t.model_counts(top)?;
            let report = t.is_parametric();
            let mut text = format!("signature {}\n", t.signature);
            let _ = writeln!(text, "parametric: {}", report.parametric);
            if let (Some(i), Some(atom)) = (report.sentence, &report.atom) {
                let _ = writeln!(
                    text,
                    "  sentence {} has atom {} missing a variable",
                    i + 1,
                    atom
                );
            }
            let _ = writeln!(text, "models on [1,n] for n = 0..={top}: {counts:?}");
            Outcome {
                ok: true,
                json: json!({ "signature": t.signature, "parametric": report, "model_counts": counts }),
                text,
            }
        }
        TheoryCommand::Models { file, n } => {
            let t = resolve_theory(file)?;
            let models = t.enumerate_models(*n, run.cap)?;
            let mut text = format!("{} models on [1,{}]\n", models.len(), n);
            structures_text(&mut text, "#", &models);
            Outcome {
                ok: true,
                json: json!({ "n": n, "models": models }),
                text,
            }
        }
    })
}

fn sample(
    kind: &str,
    rules: Option<&str>,
    class: Option<&str>,
    reference: Option<&str>,
    n: usize,
    run: &RunConfig,
) -> Result<Outcome> {
    let kind: SamplerKind = kind.parse()?;
    let sampler = build_sampler(kind, class, rules, reference)?;
    let src = HierarchicalRandomSource::new(run.seed, relex::Sampler::randomness_arity(&*sampler));
    match sampler.sample(n, &src) {
        Ok(s) => Ok(Outcome {
            ok: true,
            text: format!("{s}\n"),
            json: serde_json::to_value(&s)?,
        }),
        Err(Error::AmalgamationFailure { subset, family }) => {
            let mut text =
                format!("amalgamation failure at {subset:?}; family of proper restrictions:\n");
            structures_text(&mut text, "", &family);
            Ok(Outcome {
                ok: false,
                json: json!({ "amalgamation_failure": { "subset": subset, "family": family } }),
                text,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn report_text(r: &TestReport) -> String {
    let mut text = format!(
        "{}: {} (statistic {:.4}, dof {}, p = {:.4e}, alpha = {})\n",
        r.test,
        if r.passed { "pass" } else { "fail" },
        r.statistic,
        r.dof,
        r.p_value,
        r.alpha
    );
    let _ = writeln!(text, "  {} comparisons", r.comparisons.len());
    for c in r.comparisons.iter().filter(|c| c.p_value < r.alpha) {
        let _ = writeln!(
            text,
            "  significant: {} (statistic {:.4}, dof {}, p = {:.4e})",
            c.label, c.statistic, c.dof, c.p_value
        );
    }
    for s in &r.skipped {
        let _ = writeln!(text, "  skipped: {s}");
    }
    if !r.details.is_empty() {
        let _ = writeln!(text, "  {:<56} {:>16} {:>12}", "cell", "observed", "chi2");
        for c in &r.details {
            let key =
                Structure::from_json(&c.key).map_or_else(|_| c.key.clone(), |s| s.to_string());
            let _ = writeln!(
                text,
                "  {:<56} {:>16} {:>12.4}",
                key,
                format!("{:?}", c.observed),
                c.contribution
            );
        }
    }
    text
}

fn test(cmd: &TestCommand, run: &RunConfig) -> Result<Outcome> {
    let cfg = run.stat();
    let r = match cmd {
        TestCommand::Exch { sampler, n } => {
            test_exchangeability(&*parse_sampler(sampler)?, *n, &cfg)?
        }
        TestCommand::RelExch {
            sampler,
            reference,
            n,
            window,
            pairs,
        } => {
            let m = resolve_reference(reference)?;
            let pairs = if pairs.is_empty() {
                None
            } else {
                Some(pairs.clone())
            };
            test_relative_exchangeability(&*parse_sampler(sampler)?, &*m, *n, *window, pairs, &cfg)?
        }
        TestCommand::Dissoc { sampler, s, t } => {
            test_dissociation(&*parse_sampler(sampler)?, &s.0, &t.0, &cfg)?
        }
        TestCommand::Equal { a, b, subset } => {
            test_equal_samplers(&*parse_sampler(a)?, &*parse_sampler(b)?, &subset.0, &cfg)?
        }
    };
    Ok(Outcome {
        ok: r.passed,
        text: report_text(&r),
        json: serde_json::to_value(&r)?,
    })
}

fn verify(run: &RunConfig) -> Result<Outcome> {
    let cfg = CatalogConfig {
        meta_seed: run.seed,
        alpha: run.alpha,
        exec: run.exec(),
        ..CatalogConfig::default()
    };
    let outcomes = run_catalog(&cfg);
    let mut text = String::new();
    for o in &outcomes {
        let _ = writeln!(
            text,
            "{} {:<32} {} ({})",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.statement,
            o.detail
        );
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(text, "{passed}/{} claims pass", outcomes.len());
    Ok(Outcome {
        ok: passed == outcomes.len(),
        json: serde_json::to_value(&outcomes)?,
        text,
    })
}

fn read_structure(path: &PathBuf) -> Result<Structure> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Structure::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn embeddings(source: &PathBuf, target: &PathBuf) -> Result<Outcome> {
    let s = read_structure(source)?;
    let t = read_structure(target)?;
    let set = enumerate_embeddings(&s, &t)?;
    let maps: Vec<&[usize]> = set.maps.iter().map(|m| m.images()).collect();
    let mut text = format!("{} embeddings\n", maps.len());
    for m in &set.maps {
        let _ = writeln!(text, "  {m}");
    }
    Ok(Outcome {
        ok: true,
        json: json!({ "count": maps.len(), "maps": maps }),
        text,
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let run = &cli.run;
    match &cli.command {
        Command::Check(c) => check(c, run),
        Command::Age { class, n } => age(class, *n, run),
        Command::Theory(t) => theory(t, run),
        Command::Sample {
            kind,
            rules,
            class,
            reference,
            n,
        } => sample(
            kind,
            rules.as_deref(),
            class.as_deref(),
            reference.as_deref(),
            *n,
            run,
        ),
        Command::Test(t) => test(t, run),
        Command::VerifyPaperExamples => verify(run),
        Command::Embeddings { source, target } => embeddings(source, target),
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    let body = if cli.run.json {
        let mut s = serde_json::to_string_pretty(&outcome.json)?;
        s.push('\n');
        s
    } else {
        outcome.text.clone()
    };
    match &cli.run.output {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|o| {
        emit(&cli, &o)?;
        Ok(o.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn subsets_parse() {
        assert_eq!(parse_subset("3,1").unwrap(), vec![1, 3]);
        assert!(parse_subset("0,1").is_err());
        assert!(parse_subset("1,1").is_err());
        assert_eq!(parse_pair("1,2:3,4").unwrap(), (vec![1, 2], vec![3, 4]));
        assert!(parse_alpha("1.5").is_err());
    }
}
