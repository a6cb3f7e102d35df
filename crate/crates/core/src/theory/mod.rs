//! Universal first-order theories over relational signatures: parsing, the
//! parametric test, and finite model enumeration.

mod parse;

pub use parse::parse_theory;

use crate::amalgamation::MAX_CAP;
use crate::bitset::TupleSet;
use crate::class::FiniteClass;
use crate::error::{Error, Result};
use crate::structure::{decode_tuple, power, tuple_index, Signature, Structure};
use serde::Serialize;
use std::fmt;

/// Quantifier-free matrix; variables are indices into the sentence's list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Atom { rel: usize, args: Vec<usize> },
    Eq(usize, usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Truth value under `assignment` (variable index → 1-based element).
    pub fn eval(&self, s: &Structure, assignment: &[usize]) -> bool {
        match self {
            Formula::Atom { rel, args } => {
                let t: Vec<usize> = args.iter().map(|&v| assignment[v] - 1).collect();
                s.bits(*rel).get(tuple_index(&t, s.universe()))
            }
            Formula::Eq(a, b) => assignment[*a] == assignment[*b],
            Formula::Not(f) => !f.eval(s, assignment),
            Formula::And(a, b) => a.eval(s, assignment) && b.eval(s, assignment),
            Formula::Or(a, b) => a.eval(s, assignment) || b.eval(s, assignment),
            Formula::Implies(a, b) => !a.eval(s, assignment) || b.eval(s, assignment),
        }
    }

    fn atoms<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) => out.push(self),
            Formula::Not(f) => f.atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub vars: Vec<String>,
    pub matrix: Formula,
}

impl Sentence {
    fn write(
        &self,
        f: &mut fmt::Formatter<'_>,
        g: &Formula,
        sig: &Signature,
        top: bool,
    ) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, open: bool| {
            if !top && open {
                write!(f, "(")
            } else {
                Ok(())
            }
        };
        match g {
            Formula::Atom { rel, args } => {
                let names: Vec<&str> = args.iter().map(|&v| self.vars[v].as_str()).collect();
                write!(f, "{}({})", sig.relations()[*rel].name, names.join(","))
            }
            Formula::Eq(a, b) => write!(f, "{} = {}", self.vars[*a], self.vars[*b]),
            Formula::Not(inner) => {
                write!(f, "!")?;
                self.write(f, inner, sig, matches!(**inner, Formula::Atom { .. }))
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let op = match g {
                    Formula::And(..) => " & ",
                    Formula::Or(..) => " | ",
                    _ => " -> ",
                };
                paren(f, true)?;
                self.write(f, a, sig, false)?;
                write!(f, "{op}")?;
                self.write(f, b, sig, false)?;
                if !top {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }

    /// Renders one atom of this sentence, e.g. `R(x,y)`.
    pub fn atom_text(&self, atom: &Formula, sig: &Signature) -> String {
        struct Show<'a>(&'a Sentence, &'a Formula, &'a Signature);
        impl fmt::Display for Show<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write(f, self.1, self.2, true)
            }
        }
        Show(self, atom, sig).to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub signature: Signature,
    pub sentences: Vec<Sentence>,
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.signature.relations() {
            writeln!(f, "rel {r};")?;
        }
        for s in &self.sentences {
            write!(f, "forall {} . ", s.vars.join(" "))?;
            s.write(f, &s.matrix, &self.signature, true)?;
            writeln!(f, ";")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParametricReport {
    pub parametric: bool,
    /// Index of the first sentence with an atom missing a variable.
    pub sentence: Option<usize>,
    pub atom: Option<String>,
}

/// Every assignment `[1,n]^k`, odometer order.
fn assignments(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut t = vec![0; k];
    (0..power(n, k)).map(move |idx| {
        decode_tuple(idx, n.max(1), &mut t);
        t.iter().map(|&x| x + 1).collect()
    })
}

impl Theory {
    pub fn parse(text: &str) -> Result<Theory> {
        parse_theory(text)
    }

    /// Whether every atom of every sentence mentions all of that sentence's
    /// variables; otherwise the first offending atom.
    pub fn is_parametric(&self) -> ParametricReport {
        for (i, s) in self.sentences.iter().enumerate() {
            let mut atoms = Vec::new();
            s.matrix.atoms(&mut atoms);
            for a in atoms {
                let mentioned: Vec<usize> = match a {
                    Formula::Atom { args, .. } => args.clone(),
                    Formula::Eq(x, y) => vec![*x, *y],
                    _ => unreachable!("atoms only"),
                };
                if (0..s.vars.len()).any(|v| !mentioned.contains(&v)) {
                    return ParametricReport {
                        parametric: false,
                        sentence: Some(i),
                        atom: Some(s.atom_text(a, &self.signature)),
                    };
                }
            }
        }
        ParametricReport {
            parametric: true,
            sentence: None,
            atom: None,
        }
    }

    pub fn max_variables(&self) -> usize {
        self.sentences
            .iter()
            .map(|s| s.vars.len())
            .max()
            .unwrap_or(0)
    }

    /// Whether `s` satisfies every sentence under every assignment.
    pub fn satisfies(&self, s: &Structure) -> bool {
        s.signature() == &self.signature
            && self.sentences.iter().all(|sen| {
                assignments(s.universe(), sen.vars.len()).all(|a| sen.matrix.eval(s, &a))
            })
    }

    /// All models on `[1,n]`, sorted by encoding.
    pub fn enumerate_models(&self, n: usize, cap: usize) -> Result<Vec<Structure>> {
        if n > cap || cap > MAX_CAP {
            return Err(Error::CapExceeded {
                n,
                cap: cap.min(MAX_CAP),
            });
        }
        let mut out = Vec::new();
        self.search_models(n, None, &mut |m| {
            out.push(m.clone());
            true
        });
        out.sort_by(Structure::cmp_encoding);
        Ok(out)
    }

    /// Visits the models on `[1,n]`, optionally only those agreeing with
    /// `fixed.0` on the tuples marked in `fixed.1`. `visit` returns `false`
    /// to stop.
    ///
    /// Backtracks over tuples ordered by largest entry; each ground instance
    /// of a sentence is checked as soon as its last tuple is decided.
    pub(crate) fn search_models(
        &self,
        n: usize,
        fixed: Option<(&Structure, &[TupleSet])>,
        visit: &mut dyn FnMut(&Structure) -> bool,
    ) {
        let sig = &self.signature;
        // decision order over (relation, index)
        let mut order: Vec<(usize, usize, usize)> = Vec::new();
        let mut t = Vec::new();
        for (rel, r) in sig.relations().iter().enumerate() {
            t.resize(r.arity, 0);
            for idx in 0..power(n, r.arity) {
                decode_tuple(idx, n, &mut t);
                order.push((*t.iter().max().expect("arity ≥ 1"), rel, idx));
            }
        }
        order.sort_unstable();
        let mut position = vec![Vec::new(); sig.len()];
        for (rel, r) in sig.relations().iter().enumerate() {
            position[rel] = vec![0; power(n, r.arity)];
        }
        for (p, &(_, rel, idx)) in order.iter().enumerate() {
            position[rel][idx] = p;
        }

        // ground instances keyed by the position completing them
        let mut due: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); order.len() + 1];
        for (si, sen) in self.sentences.iter().enumerate() {
            let mut atoms = Vec::new();
            sen.matrix.atoms(&mut atoms);
            for a in assignments(n, sen.vars.len()) {
                let last = atoms
                    .iter()
                    .filter_map(|atom| match atom {
                        Formula::Atom { rel, args } => {
                            let t: Vec<usize> = args.iter().map(|&v| a[v] - 1).collect();
                            Some(position[*rel][tuple_index(&t, n)] + 1)
                        }
                        _ => None,
                    })
                    .max()
                    .unwrap_or(0);
                due[last].push((si, a));
            }
        }

        let choices: Vec<&[bool]> = order
            .iter()
            .map(|&(_, rel, idx)| match fixed {
                Some((partial, known)) if known[rel].get(idx) => {
                    if partial.bits(rel).get(idx) {
                        &[true][..]
                    } else {
                        &[false][..]
                    }
                }
                _ => &[false, true][..],
            })
            .collect();
        let mut work = Structure::empty(sig.clone(), n);
        let ok_at = |k: usize, work: &Structure| {
            due[k]
                .iter()
                .all(|(si, a)| self.sentences[*si].matrix.eval(work, a))
        };
        struct Search<'a> {
            order: &'a [(usize, usize, usize)],
            choices: &'a [&'a [bool]],
            ok_at: &'a dyn Fn(usize, &Structure) -> bool,
        }
        fn go(
            k: usize,
            s: &Search,
            work: &mut Structure,
            visit: &mut dyn FnMut(&Structure) -> bool,
        ) -> bool {
            if k == s.order.len() {
                return visit(work);
            }
            let (_, rel, idx) = s.order[k];
            for &value in s.choices[k] {
                work.bits_mut(rel).set(idx, value);
                if (s.ok_at)(k + 1, work) && !go(k + 1, s, work, visit) {
                    return false;
                }
            }
            work.bits_mut(rel).set(idx, false);
            true
        }
        if ok_at(0, &work) {
            let search = Search {
                order: &order,
                choices: &choices,
                ok_at: &ok_at,
            };
            go(0, &search, &mut work, visit);
        }
    }

    /// Model counts for `n = 0..=cap`; the "models of every finite size"
    /// hypothesis holds up to `cap` iff all are positive.
    pub fn model_counts(&self, cap: usize) -> Result<Vec<usize>> {
        (0..=cap)
            .map(|n| Ok(self.enumerate_models(n, cap)?.len()))
            .collect()
    }
}

/// The finite models of a theory as a class.
#[derive(Clone, Debug)]
pub struct TheoryClass {
    name: String,
    theory: Theory,
}

impl TheoryClass {
    pub fn new(name: impl Into<String>, theory: Theory) -> Self {
        TheoryClass {
            name: name.into(),
            theory,
        }
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }
}

impl FiniteClass for TheoryClass {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn signature(&self) -> &Signature {
        &self.theory.signature
    }

    fn contains(&self, s: &Structure) -> bool {
        self.theory.satisfies(s)
    }

    fn width(&self) -> Option<usize> {
        Some(self.theory.max_variables())
    }

    fn enumerate(&self, n: usize) -> Result<Vec<Structure>> {
        self.theory.enumerate_models(n, MAX_CAP)
    }

    fn theory(&self) -> Option<&Theory> {
        Some(&self.theory)
    }
}

/// Theory files shipped with the crate, by name.
pub const CORPUS: &[(&str, &str)] = &[
    ("graphs", include_str!("../../theories/graphs.thy")),
    ("digraphs", include_str!("../../theories/digraphs.thy")),
    (
        "tournaments",
        include_str!("../../theories/tournaments.thy"),
    ),
    (
        "hypergraphs3",
        include_str!("../../theories/hypergraphs3.thy"),
    ),
    (
        "hypergraphs4",
        include_str!("../../theories/hypergraphs4.thy"),
    ),
    (
        "equivalence",
        include_str!("../../theories/equivalence.thy"),
    ),
];

pub fn corpus_theory(name: &str) -> Result<Theory> {
    let (_, text) = CORPUS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownName(name.to_string()))?;
    parse_theory(text)
}
