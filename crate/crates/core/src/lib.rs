//! Finite relational structures, amalgamation-property checkers, samplers for
//! exchangeable and relatively exchangeable random structures, and a
//! statistical harness for their invariance properties.
//!
//! Structures live on `[1,n]` ([`Structure`]); randomness is keyed by finite
//! subsets ([`HierarchicalRandomSource`]) so every sampler is projective:
//! `sample(n)|_[m] == sample(m)` for the same seed.

pub mod amalgamation;
mod bitset;
pub mod catalog;
pub mod class;
pub mod embeddings;
pub mod error;
pub mod iso;
pub mod parallel;
pub mod random;
pub mod resolve;
pub mod rules;
pub mod samplers;
pub mod stats;
pub mod structure;
pub mod theory;

pub use amalgamation::{
    age_representatives, amalgams, check_dap, check_jep, check_ndap, enumerate_age, AmalgamSet,
    CheckConfig, DapReport, DapWitness, Frame, JepReport, NdapReport,
};
pub use class::{Builtin, BuiltinClass, FiniteClass, PredicateClass};
pub use embeddings::{
    automorphisms, enumerate_embeddings, natural_embedding, EmbeddingSet, FiniteReference,
    RestrictionOracle, TupleReference,
};
pub use error::{Error, Result};
pub use iso::{canonical_form, canonical_labeling, is_isomorphic};
pub use parallel::Execution;
pub use random::{induced_ordering, HierarchicalRandomSource, InducedOrdering, RandomSource};
pub use rules::{builtin_rules, DecisionFunction, Scope, TupleRule, TupleView};
pub use samplers::{FramewiseSampler, RuleSampler, Sampler};
pub use stats::{
    empirical_law, test_dissociation, test_equal_law, test_equal_samplers, test_exchangeability,
    test_relative_exchangeability, EmpiricalLaw, StatConfig, TestReport,
};
pub use structure::{Injection, Relabeled, Relation, Signature, Structure, StructureFile};
pub use theory::{corpus_theory, parse_theory, ParametricReport, Theory, TheoryClass};
