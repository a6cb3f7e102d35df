use relex::amalgamation::Frame;
use relex::theory::CORPUS;
use relex::{
    check_ndap, corpus_theory, parse_theory, BuiltinClass, CheckConfig, FiniteClass,
    PredicateClass, Signature, Structure, Theory, TheoryClass,
};

/// Every structure on `[1,n]` over `sig`, by counting through all bit
/// patterns.
fn all_structures(sig: &Signature, n: usize) -> Vec<Structure> {
    let sizes: Vec<usize> = sig
        .relations()
        .iter()
        .map(|r| n.pow(r.arity as u32))
        .collect();
    let total: usize = sizes.iter().sum();
    assert!(total <= 20, "too many tuples for brute force");
    let mut out = Vec::new();
    for mask in 0u64..(1 << total) {
        let mut s = Structure::empty(sig.clone(), n);
        let mut bit = 0;
        for (rel, r) in sig.relations().iter().enumerate() {
            let mut t = vec![1; r.arity];
            for _ in 0..sizes[rel] {
                s.set(rel, &t, mask >> bit & 1 == 1).unwrap();
                bit += 1;
                // odometer over [1,n]^arity
                for x in t.iter_mut().rev() {
                    if *x < n {
                        *x += 1;
                        break;
                    }
                    *x = 1;
                }
            }
        }
        out.push(s);
    }
    out
}

fn check_against_filter(theory: &Theory, max_n: usize) {
    for n in 0..=max_n {
        let mut want: Vec<Structure> = all_structures(&theory.signature, n)
            .into_iter()
            .filter(|s| theory.satisfies(s))
            .collect();
        want.sort_by(Structure::cmp_encoding);
        assert_eq!(
            theory.enumerate_models(n, 8).unwrap(),
            want,
            "n = {n}\n{theory}"
        );
    }
}

#[test]
fn model_search_matches_naive_filtering() {
    for (name, _) in CORPUS {
        let t = corpus_theory(name).unwrap();
        let max_arity = t
            .signature
            .relations()
            .iter()
            .map(|r| r.arity)
            .max()
            .unwrap();
        let max_n = match max_arity {
            1 | 2 => 4,
            3 => 2,
            _ => 1,
        };
        check_against_filter(&t, max_n);
    }
    for text in [
        "rel R/2;\nforall x y z . R(x,y) & R(y,z) -> R(x,z);",
        "rel R/2; rel P/1;\nforall x y . P(x) & R(x,y) -> P(y);",
        "rel R/2;\nforall x y . x != y -> R(x,y) | R(y,x);",
        "rel P/1;\nforall x y . P(x) | P(y) | x = y;",
    ] {
        check_against_filter(&parse_theory(text).unwrap(), 4);
    }
}

#[test]
fn corpus_theories_define_the_builtin_classes() {
    for name in [
        "graphs",
        "digraphs",
        "tournaments",
        "equivalence",
        "hypergraphs3",
    ] {
        let theory = TheoryClass::new(name, corpus_theory(name).unwrap());
        let builtin = BuiltinClass::from_name(name).unwrap();
        for n in 0..=3 {
            assert_eq!(
                theory.enumerate(n).unwrap(),
                builtin.enumerate(n).unwrap(),
                "{name} n = {n}"
            );
        }
    }
}

#[test]
fn theory_completion_agrees_with_generic_completion() {
    // The same class with and without its axiomatization: the first routes
    // frame completion through model search, the second through brute force.
    for name in ["equivalence", "tournaments", "graphs"] {
        let theory = corpus_theory(name).unwrap();
        let axiomatized = TheoryClass::new(name, theory.clone());
        let plain = PredicateClass::new(name, theory.signature.clone(), move |s: &Structure| {
            theory.satisfies(s)
        });
        let members = axiomatized.enumerate(2).unwrap();
        for a in &members {
            for b in &members {
                let mut frame = Frame::new(axiomatized.signature().clone(), 3);
                if !frame.place(a, &[1, 2]) || !frame.place(b, &[2, 3]) {
                    continue;
                }
                let mut x = frame.all_completions(&axiomatized).unwrap();
                let mut y = frame.all_completions(&plain).unwrap();
                x.sort_by(Structure::cmp_encoding);
                y.sort_by(Structure::cmp_encoding);
                assert_eq!(x, y, "{name}");
            }
        }
    }
}

#[test]
fn amalgamation_verdicts_agree_with_builtins() {
    let cfg = CheckConfig::default();
    for name in ["graphs", "tournaments", "equivalence"] {
        let theory = TheoryClass::new(name, corpus_theory(name).unwrap());
        let builtin = BuiltinClass::from_name(name).unwrap();
        for n in 1..=4 {
            let a = check_ndap(&theory, n, &cfg).unwrap();
            let b = check_ndap(&builtin, n, &cfg).unwrap();
            assert_eq!(a.holds, b.holds, "{name} n = {n}");
            assert_eq!(a.witness_family, b.witness_family, "{name} n = {n}");
        }
    }
}

#[test]
fn corpus_theories_print_and_reparse() {
    for (name, _) in CORPUS {
        let t = corpus_theory(name).unwrap();
        let again = parse_theory(&t.to_string()).unwrap();
        assert_eq!(again.to_string(), t.to_string(), "{name}");
        assert_eq!(
            again.model_counts(3).unwrap(),
            t.model_counts(3).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn parse_errors_point_at_the_problem() {
    let err = parse_theory("rel R/2;\nforall x . R(x,y);")
        .unwrap_err()
        .to_string();
    assert!(err.contains("2:"), "{err}");
    assert!(parse_theory("rel R/2;\nforall x . R(x);").is_err());
    assert!(parse_theory("forall x . R(x) & R(x,x);").is_err());
}
