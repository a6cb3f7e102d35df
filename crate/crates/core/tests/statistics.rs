use relex::resolve::parse_sampler;
use relex::samplers::reference::{evens, example, trivial};
use relex::stats::{
    draw, empirical_law, test_dissociation, test_equal_law, test_exchangeability,
    test_relative_exchangeability, EmpiricalLaw, StatConfig,
};
use relex::{DecisionFunction, Execution, RuleSampler, Sampler};

fn cfg(samples: usize, meta_seed: u64) -> StatConfig {
    StatConfig {
        samples,
        meta_seed,
        ..StatConfig::default()
    }
}

fn coin(theta: f64) -> RuleSampler {
    let json = format!(
        r#"{{"rules":[{{"relation":{{"name":"X","arity":1}},"default":false,
            "clauses":[{{"xi":[{{"subset":[1],"from":0.0,"to":{theta}}}],"output":true}}]}}]}}"#
    );
    RuleSampler::exchangeable(&DecisionFunction::from_json(&json).unwrap()).unwrap()
}

#[test]
fn constant_sampler_has_one_outcome() {
    let s = parse_sampler("exchangeable:complete").unwrap();
    let law = empirical_law(&*s, &[2, 5], 1, &cfg(300, 0)).unwrap();
    assert_eq!(law.counts.len(), 1);
    assert_eq!(law.counts.values().sum::<u64>(), 300);
    assert_eq!(law.n, 300);
}

#[test]
fn random_graph_edges_have_probability_one_half() {
    let s = parse_sampler("exchangeable:random-graph").unwrap();
    let n = 10000;
    let x = draw(&*s, 2, 1, &cfg(n, 1)).unwrap();
    let f = x.iter().filter(|g| g.holds(0, &[1, 2])).count() as f64 / n as f64;
    assert!((f - 0.5).abs() <= 4.0 * (0.25f64 / n as f64).sqrt(), "{f}");
}

#[test]
fn framewise_graphs_realize_eight_outcomes() {
    let s = parse_sampler("framewise:graphs").unwrap();
    let law = empirical_law(&*s, &[1, 2, 3], 1, &cfg(4000, 2)).unwrap();
    assert_eq!(law.counts.len(), 8);
    for c in law.counts.values() {
        assert!((*c as f64 / 4000.0 - 0.125).abs() < 0.03);
    }
}

#[test]
fn random_graph_edges_match_tournament_arcs() {
    // Forget all but whether (1,2) holds: both laws are a fair coin.
    let bit = |spec: &str, stream: u64| {
        let s = parse_sampler(spec).unwrap();
        let keys = draw(&*s, 2, stream, &cfg(5000, 3))
            .unwrap()
            .iter()
            .map(|x| x.holds(0, &[1, 2]).to_string())
            .collect::<Vec<_>>();
        EmpiricalLaw::from_keys(vec![1, 2], keys)
    };
    let r = test_equal_law(
        &bit("exchangeable:random-graph", 1),
        &bit("exchangeable:tournament", 2),
        0.01,
    )
    .unwrap();
    assert!(r.passed, "p = {}", r.p_value);
}

#[test]
fn different_coins_are_told_apart() {
    let a = empirical_law(&coin(0.3), &[1], 1, &cfg(10000, 4)).unwrap();
    let b = empirical_law(&coin(0.7), &[1], 2, &cfg(10000, 4)).unwrap();
    let r = test_equal_law(&a, &b, 0.01).unwrap();
    assert!(!r.passed);
    assert!(r.p_value < 1e-100);
}

#[test]
fn exchangeability_on_one_point_is_trivial() {
    let r = test_exchangeability(
        &*parse_sampler("example:loop-at-one").unwrap(),
        1,
        &cfg(100, 0),
    )
    .unwrap();
    assert!(r.passed);
    assert!(r.comparisons.is_empty());
}

#[test]
fn exchangeability_with_random_permutations() {
    let s = parse_sampler("exchangeable:random-graph").unwrap();
    let r = test_exchangeability(
        &*s,
        6,
        &StatConfig {
            max_permutations: 6,
            ..cfg(1000, 5)
        },
    )
    .unwrap();
    assert!(r.comparisons.len() <= 6 && !r.comparisons.is_empty());
}

#[test]
fn relative_exchangeability_reports_missing_embeddings() {
    let ex = example("strong-rep").unwrap();
    let pairs = vec![
        (vec![2], vec![1]),
        (vec![2, 4], vec![1, 3]),
        (vec![2], vec![4]),
    ];
    let r =
        test_relative_exchangeability(&*ex.sampler, &*evens(), 2, 4, Some(pairs), &cfg(2000, 6))
            .unwrap();
    assert_eq!(r.skipped.len(), 2);
    assert_eq!(r.comparisons.len(), 1);
    assert!(r.passed);
}

#[test]
fn label_parity_is_not_exchangeable_over_the_pure_set() {
    let ex = example("label-parity").unwrap();
    let r = test_relative_exchangeability(&*ex.sampler, &*trivial(), 1, 4, None, &cfg(2000, 7))
        .unwrap();
    assert!(!r.passed);
}

#[test]
fn deterministic_and_framewise_samplers_are_dissociated() {
    let r = test_dissociation(
        &*parse_sampler("exchangeable:complete").unwrap(),
        &[1, 2],
        &[3, 4],
        &cfg(500, 8),
    )
    .unwrap();
    assert!(r.passed && r.dof == 0 && r.p_value == 1.0);
    let r = test_dissociation(
        &*parse_sampler("framewise:graphs").unwrap(),
        &[1, 2],
        &[3, 4],
        &cfg(4000, 8),
    )
    .unwrap();
    assert!(r.passed, "p = {}", r.p_value);
    assert!(test_dissociation(
        &*parse_sampler("framewise:graphs").unwrap(),
        &[1, 2],
        &[2, 3],
        &cfg(10, 0)
    )
    .is_err());
}

#[test]
fn reports_are_reproducible_and_execution_independent() {
    let s = parse_sampler("framewise:graphs").unwrap();
    let a = test_exchangeability(&*s, 3, &cfg(800, 9)).unwrap();
    let b = test_exchangeability(
        &*s,
        3,
        &StatConfig {
            exec: Execution::Sequential,
            ..cfg(800, 9)
        },
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

/// Under the null, each test rejects in at most 5% of 200 repetitions at
/// α = 0.01.
fn rejection_rate(run: impl Fn(u64) -> bool) -> usize {
    (0..200).filter(|&rep| !run(rep)).count()
}

#[test]
fn equal_law_is_calibrated() {
    let s = parse_sampler("framewise:graphs").unwrap();
    let rejected = rejection_rate(|rep| {
        let c = cfg(400, 100 + rep);
        let a = empirical_law(&*s, &[1, 2, 3], 1, &c).unwrap();
        let b = empirical_law(&*s, &[1, 2, 3], 2, &c).unwrap();
        test_equal_law(&a, &b, 0.01).unwrap().passed
    });
    assert!(rejected <= 10, "{rejected}/200");
}

#[test]
fn dissociation_is_calibrated() {
    let s = parse_sampler("framewise:graphs").unwrap();
    let rejected = rejection_rate(|rep| {
        test_dissociation(&*s, &[1, 2], &[3, 4], &cfg(400, 300 + rep))
            .unwrap()
            .passed
    });
    assert!(rejected <= 10, "{rejected}/200");
}

#[test]
fn relative_exchangeability_is_calibrated() {
    let ex = example("strong-rep").unwrap();
    let rejected = rejection_rate(|rep| {
        test_relative_exchangeability(
            &*ex.sampler,
            &*ex.reference,
            2,
            4,
            None,
            &cfg(400, 500 + rep),
        )
        .unwrap()
        .passed
    });
    assert!(rejected <= 10, "{rejected}/200");
}

#[test]
fn samplers_keep_their_signature() {
    let s = coin(0.5);
    assert_eq!(s.signature().to_string(), "{X/1}");
}
