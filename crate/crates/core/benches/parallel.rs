use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relex::stats::empirical_law;
use relex::{
    check_ndap, enumerate_embeddings, BuiltinClass, CheckConfig, Execution, FramewiseSampler,
    Sampler, StatConfig,
};
use std::hint::black_box;
use std::sync::Arc;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn empirical(c: &mut Criterion) {
    let sampler = FramewiseSampler::new(Arc::new(BuiltinClass::graphs()));
    let mut g = c.benchmark_group("empirical_law");
    for (name, exec) in MODES {
        let cfg = StatConfig {
            samples: 4000,
            exec,
            ..StatConfig::default()
        };
        g.bench_function(
            BenchmarkId::new(name, "framewise graphs on 5 points"),
            |b| b.iter(|| empirical_law(&sampler, black_box(&[1, 2, 3, 4, 5]), 1, &cfg).unwrap()),
        );
    }
    g.finish();
}

fn ndap(c: &mut Criterion) {
    let graphs = BuiltinClass::graphs();
    let mut g = c.benchmark_group("check_ndap");
    g.sample_size(20);
    for (name, exec) in MODES {
        let cfg = CheckConfig::default().exec(exec);
        g.bench_function(BenchmarkId::new(name, "graphs n=5"), |b| {
            b.iter(|| assert!(check_ndap(&graphs, black_box(5), &cfg).unwrap().holds))
        });
    }
    g.finish();
}

fn embeddings(c: &mut Criterion) {
    let sampler = FramewiseSampler::new(Arc::new(BuiltinClass::graphs()));
    let pairs: Vec<_> = (0..256)
        .map(|s| {
            (
                sampler.sample_seed(4, s).unwrap(),
                sampler.sample_seed(7, s + 1000).unwrap(),
            )
        })
        .collect();
    let mut g = c.benchmark_group("embedding_batch");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "256 pairs 4 into 7"), |b| {
            b.iter(|| exec.map(&pairs, |(s, t)| enumerate_embeddings(s, t).unwrap().len()))
        });
    }
    g.finish();
}

criterion_group!(benches, empirical, ndap, embeddings);
criterion_main!(benches);
