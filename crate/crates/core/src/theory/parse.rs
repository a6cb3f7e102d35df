//! Lexer and recursive-descent parser for theory files.
//!
//! ```text
//! theory   := (decl | sentence)*
//! decl     := "rel" IDENT "/" NUMBER ";"
//! sentence := "forall" IDENT+ "." formula ";"
//! formula  := disj ("->" formula)?
//! disj     := conj ("|" conj)*
//! conj     := lit ("&" lit)*
//! lit      := "!" lit | "(" formula ")" | atom | IDENT ("=" | "!=") IDENT
//! atom     := IDENT "(" IDENT ("," IDENT)* ")"
//! ```
//! `#` starts a comment running to the end of the line.

use super::{Formula, Sentence, Theory};
use crate::error::{Error, Result};
use crate::structure::{is_identifier, Relation, Signature};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(usize),
    Dot,
    Semi,
    Comma,
    Slash,
    LParen,
    RParen,
    Not,
    And,
    Or,
    Arrow,
    Eq,
    Neq,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(n) => format!("`{n}`"),
        Tok::Dot => "`.`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Slash => "`/`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Not => "`!`".into(),
        Tok::And => "`&`".into(),
        Tok::Or => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Neq => "`!=`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (lineno + 1, i + 1);
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse().map_err(|_| Error::Parse {
                    line,
                    column,
                    message: format!("number `{s}` out of range"),
                })?;
                push(&mut out, Tok::Number(n));
                continue;
            }
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('!', Some('=')) => (Tok::Neq, 2),
                ('!', _) => (Tok::Not, 1),
                ('&', _) => (Tok::And, 1),
                ('|', _) => (Tok::Or, 1),
                ('.', _) => (Tok::Dot, 1),
                (';', _) => (Tok::Semi, 1),
                (',', _) => (Tok::Comma, 1),
                ('/', _) => (Tok::Slash, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('=', _) => (Tok::Eq, 1),
                _ => {
                    return Err(Error::Parse {
                        line,
                        column,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            push(&mut out, tok);
            i += width;
        }
    }
    let (line, column) = out.last().map_or((1, 1), |t| (t.line, t.column + 1));
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

/// An atom as written, before relation symbols are resolved.
struct RawAtom {
    name: String,
    args: Vec<usize>,
    line: usize,
    column: usize,
}

enum Raw {
    Atom(RawAtom),
    Eq(usize, usize),
    Not(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Implies(Box<Raw>, Box<Raw>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, t: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<Token> {
        let t = self.bump();
        if t.tok == want {
            Ok(t)
        } else {
            self.error(
                &t,
                format!("expected {}, found {}", describe(&want), describe(&t.tok)),
            )
        }
    }

    fn ident(&mut self) -> Result<(String, Token)> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => self.error(
                &t,
                format!("expected identifier, found {}", describe(other)),
            ),
        }
    }

    fn var(&mut self, vars: &[String]) -> Result<usize> {
        let (name, t) = self.ident()?;
        match vars.iter().position(|v| *v == name) {
            Some(i) => Ok(i),
            None => self.error(&t, format!("variable `{name}` is not quantified")),
        }
    }

    fn formula(&mut self, vars: &[String]) -> Result<Raw> {
        let lhs = self.disj(vars)?;
        if self.peek().tok == Tok::Arrow {
            self.bump();
            let rhs = self.formula(vars)?;
            return Ok(Raw::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disj(&mut self, vars: &[String]) -> Result<Raw> {
        let mut acc = self.conj(vars)?;
        while self.peek().tok == Tok::Or {
            self.bump();
            acc = Raw::Or(Box::new(acc), Box::new(self.conj(vars)?));
        }
        Ok(acc)
    }

    fn conj(&mut self, vars: &[String]) -> Result<Raw> {
        let mut acc = self.lit(vars)?;
        while self.peek().tok == Tok::And {
            self.bump();
            acc = Raw::And(Box::new(acc), Box::new(self.lit(vars)?));
        }
        Ok(acc)
    }

    fn lit(&mut self, vars: &[String]) -> Result<Raw> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Not => {
                self.bump();
                Ok(Raw::Not(Box::new(self.lit(vars)?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula(vars)?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                let name = name.clone();
                self.bump();
                match self.peek().tok {
                    Tok::LParen => {
                        self.bump();
                        let mut args = vec![self.var(vars)?];
                        while self.peek().tok == Tok::Comma {
                            self.bump();
                            args.push(self.var(vars)?);
                        }
                        self.expect(Tok::RParen)?;
                        Ok(Raw::Atom(RawAtom {
                            name,
                            args,
                            line: t.line,
                            column: t.column,
                        }))
                    }
                    Tok::Eq | Tok::Neq => {
                        let negate = self.bump().tok == Tok::Neq;
                        let Some(a) = vars.iter().position(|v| *v == name) else {
                            return self.error(&t, format!("variable `{name}` is not quantified"));
                        };
                        let b = self.var(vars)?;
                        let eq = Raw::Eq(a, b);
                        Ok(if negate { Raw::Not(Box::new(eq)) } else { eq })
                    }
                    _ => {
                        let next = self.peek().clone();
                        self.error(
                            &next,
                            format!(
                                "expected `(` or `=` after `{name}`, found {}",
                                describe(&next.tok)
                            ),
                        )
                    }
                }
            }
            other => self.error(&t, format!("expected a literal, found {}", describe(other))),
        }
    }
}

fn collect_atoms<'a>(raw: &'a Raw, out: &mut Vec<&'a RawAtom>) {
    match raw {
        Raw::Atom(a) => out.push(a),
        Raw::Eq(..) => {}
        Raw::Not(f) => collect_atoms(f, out),
        Raw::And(a, b) | Raw::Or(a, b) | Raw::Implies(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
    }
}

fn resolve(raw: Raw, sig: &Signature) -> Formula {
    match raw {
        Raw::Atom(a) => Formula::Atom {
            rel: sig.index_of(&a.name).expect("checked during parsing"),
            args: a.args,
        },
        Raw::Eq(a, b) => Formula::Eq(a, b),
        Raw::Not(f) => Formula::Not(Box::new(resolve(*f, sig))),
        Raw::And(a, b) => Formula::And(Box::new(resolve(*a, sig)), Box::new(resolve(*b, sig))),
        Raw::Or(a, b) => Formula::Or(Box::new(resolve(*a, sig)), Box::new(resolve(*b, sig))),
        Raw::Implies(a, b) => {
            Formula::Implies(Box::new(resolve(*a, sig)), Box::new(resolve(*b, sig)))
        }
    }
}

/// Parses a theory. Without any `rel` declaration the signature is inferred
/// from the atoms, in order of first use.
pub fn parse_theory(text: &str) -> Result<Theory> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut declared: Vec<Relation> = Vec::new();
    let mut raw_sentences: Vec<(Vec<String>, Raw)> = Vec::new();
    loop {
        let t = p.peek().clone();
        match &t.tok {
            Tok::End => break,
            Tok::Ident(k) if k == "rel" => {
                p.bump();
                let (name, nt) = p.ident()?;
                p.expect(Tok::Slash)?;
                let at = p.bump();
                let Tok::Number(arity) = at.tok else {
                    return p.error(&at, format!("expected arity, found {}", describe(&at.tok)));
                };
                if arity == 0 {
                    return p.error(&at, "arity must be positive");
                }
                if !is_identifier(&name) || declared.iter().any(|r| r.name == name) {
                    return p.error(&nt, format!("bad or duplicate relation name `{name}`"));
                }
                p.expect(Tok::Semi)?;
                declared.push(Relation::new(name, arity));
            }
            Tok::Ident(k) if k == "forall" => {
                p.bump();
                let mut vars: Vec<String> = Vec::new();
                while let Tok::Ident(v) = &p.peek().tok {
                    let v = v.clone();
                    let vt = p.bump();
                    if vars.contains(&v) {
                        return p.error(&vt, format!("variable `{v}` quantified twice"));
                    }
                    vars.push(v);
                }
                if vars.is_empty() {
                    let t = p.peek().clone();
                    return p.error(&t, "expected at least one variable after `forall`");
                }
                p.expect(Tok::Dot)?;
                let f = p.formula(&vars)?;
                p.expect(Tok::Semi)?;
                raw_sentences.push((vars, f));
            }
            other => {
                return p.error(
                    &t,
                    format!("expected `rel` or `forall`, found {}", describe(other)),
                )
            }
        }
    }

    let infer = declared.is_empty();
    let mut rels = declared;
    for (_, f) in &raw_sentences {
        let mut atoms = Vec::new();
        collect_atoms(f, &mut atoms);
        for a in atoms {
            let err = |message: String| Error::Parse {
                line: a.line,
                column: a.column,
                message,
            };
            match rels.iter().find(|r| r.name == a.name) {
                Some(r) if r.arity != a.args.len() => {
                    return Err(err(format!(
                        "`{}` has arity {}, used with {} arguments",
                        a.name,
                        r.arity,
                        a.args.len()
                    )))
                }
                Some(_) => {}
                None if infer => rels.push(Relation::new(a.name.clone(), a.args.len())),
                None => return Err(err(format!("unknown relation `{}`", a.name))),
            }
        }
    }
    let signature = Signature::new(rels)?;
    let sentences = raw_sentences
        .into_iter()
        .map(|(vars, f)| Sentence {
            vars,
            matrix: resolve(f, &signature),
        })
        .collect();
    Ok(Theory {
        signature,
        sentences,
    })
}
