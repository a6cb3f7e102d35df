//! Name resolution shared by the command line and the example catalog.
//!
//! * classes: a builtin name (`graphs`, `hypergraphs:3`, `free:P/1,R/2`, …),
//!   `theory:<corpus name>`, or a path to a theory file;
//! * rules: a builtin rule name, `builtin:<name>`, or a path to a JSON file;
//! * references: a named reference or a path to a structure JSON file.

use crate::class::{BuiltinClass, FiniteClass};
use crate::embeddings::{FiniteReference, RestrictionOracle};
use crate::error::{Error, Result};
use crate::rules::{builtin_rules, DecisionFunction, BUILTIN_RULES};
use crate::samplers::reference::reference_by_name;
use crate::samplers::{FramewiseSampler, RuleSampler, Sampler};
use crate::structure::Structure;
use crate::theory::{corpus_theory, Theory, TheoryClass};
use std::path::Path;
use std::sync::Arc;

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{path}: {e}"))))
}

pub fn resolve_theory(spec: &str) -> Result<Theory> {
    match spec.strip_prefix("theory:") {
        Some(name) => corpus_theory(name),
        None if Path::new(spec).is_file() => Theory::parse(&read(spec)?),
        None => corpus_theory(spec),
    }
}

pub fn resolve_class(spec: &str) -> Result<Arc<dyn FiniteClass>> {
    if spec.starts_with("theory:") || Path::new(spec).is_file() {
        let name = spec.strip_prefix("theory:").unwrap_or(spec);
        return Ok(Arc::new(TheoryClass::new(name, resolve_theory(spec)?)));
    }
    Ok(Arc::new(BuiltinClass::from_name(spec)?))
}

pub fn resolve_rules(spec: &str) -> Result<DecisionFunction> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin_rules(name);
    }
    if BUILTIN_RULES.iter().any(|(n, _)| *n == spec) && !Path::new(spec).is_file() {
        return builtin_rules(spec);
    }
    DecisionFunction::from_json(&read(spec)?)
}

pub fn resolve_reference(spec: &str) -> Result<Arc<dyn RestrictionOracle>> {
    if Path::new(spec).is_file() {
        let s = Structure::from_json(&read(spec)?)?;
        return Ok(Arc::new(FiniteReference(s)));
    }
    reference_by_name(spec)
}

/// The four sampler constructions by their command-line names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    Framewise,
    Exchangeable,
    MExchangeable,
    MaxSegment,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "framewise" => SamplerKind::Framewise,
            "exchangeable" | "exch" => SamplerKind::Exchangeable,
            "m-exch" | "m-exchangeable" => SamplerKind::MExchangeable,
            "maxseg" | "max-segment" => SamplerKind::MaxSegment,
            _ => return Err(Error::UnknownName(s.to_string())),
        })
    }
}

fn need<'a>(v: Option<&'a str>, what: &str) -> Result<&'a str> {
    v.ok_or_else(|| Error::InvalidArgument(format!("this sampler needs {what}")))
}

/// Builds a sampler; each kind reads only the arguments it needs.
pub fn build_sampler(
    kind: SamplerKind,
    class: Option<&str>,
    rules: Option<&str>,
    reference: Option<&str>,
) -> Result<Arc<dyn Sampler>> {
    Ok(match kind {
        SamplerKind::Framewise => Arc::new(FramewiseSampler::new(resolve_class(need(
            class, "a class",
        )?)?)),
        SamplerKind::Exchangeable => Arc::new(RuleSampler::exchangeable(&resolve_rules(need(
            rules, "rules",
        )?)?)?),
        SamplerKind::MExchangeable => Arc::new(RuleSampler::relative(
            &resolve_rules(need(rules, "rules")?)?,
            resolve_reference(need(reference, "a reference")?)?,
        )?),
        SamplerKind::MaxSegment => Arc::new(RuleSampler::max_segment(
            &resolve_rules(need(rules, "rules")?)?,
            resolve_reference(need(reference, "a reference")?)?,
        )?),
    })
}

/// Parses a sampler description such as `framewise:graphs`,
/// `exchangeable:random-graph`, `m-exch:two-coin@evens`,
/// `maxseg:rules.json@weak-rep` or `example:strong-rep`.
pub fn parse_sampler(spec: &str) -> Result<Arc<dyn Sampler>> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidArgument(format!("sampler `{spec}` has no kind prefix")))?;
    if kind == "example" {
        return Ok(crate::samplers::reference::example(rest)?.sampler);
    }
    let kind: SamplerKind = kind.parse()?;
    match kind {
        SamplerKind::Framewise => build_sampler(kind, Some(rest), None, None),
        SamplerKind::Exchangeable => build_sampler(kind, None, Some(rest), None),
        _ => {
            let (rules, reference) = rest.rsplit_once('@').ok_or_else(|| {
                Error::InvalidArgument(format!("sampler `{spec}` needs rules@reference"))
            })?;
            build_sampler(kind, None, Some(rules), Some(reference))
        }
    }
}
