use criterion::{black_box, criterion_group, criterion_main, Criterion};
use webrank_core::abel::abel_trace;
use webrank_core::expr::{Env, Tape};
use webrank_core::fixtures;
use webrank_core::obstruction::{kappa_reduce_4web, kappa_reduce_5web};
use webrank_core::projective::linearizability_verdict;
use webrank_core::rank::classify_rank4;
use webrank_core::ChartedWeb;

fn zero_test(c: &mut Criterion) {
    let web = fixtures::W4_R1NL.web().unwrap();
    let charted = ChartedWeb::new(&web).unwrap();
    let k = charted.curvature();
    c.bench_function("zero test, curvature of W4-R1NL", |b| {
        b.iter(|| web.is_zero(black_box(&k)).unwrap())
    });
    let tape = Tape::compile(std::slice::from_ref(&k));
    c.bench_function("tape eval, curvature of W4-R1NL", |b| {
        b.iter(|| tape.eval_one(black_box(&Env::xy(2.5, 0.75))).unwrap())
    });
}

fn obstruction(c: &mut Criterion) {
    let web = fixtures::W4_R2.web().unwrap();
    c.bench_function("kappa reduction, 4-web", |b| {
        b.iter(|| kappa_reduce_4web(&ChartedWeb::new(black_box(&web)).unwrap()).unwrap())
    });
    let bol = fixtures::W5_BOL.web().unwrap();
    c.bench_function("kappa reduction, Bol 5-web", |b| {
        b.iter(|| kappa_reduce_5web(&ChartedWeb::new(black_box(&bol)).unwrap()).unwrap())
    });
}

fn verdicts(c: &mut Criterion) {
    let mut g = c.benchmark_group("verdicts");
    g.sample_size(20);
    for f in [fixtures::W4_R3, fixtures::W4_R1, fixtures::W4_R0] {
        let web = f.web().unwrap();
        g.bench_function(format!("rank {}", f.name), |b| b.iter(|| classify_rank4(black_box(&web)).unwrap()));
        g.bench_function(format!("abel {}", f.name), |b| b.iter(|| abel_trace(black_box(&web)).unwrap()));
    }
    let web = fixtures::W4_R2NL.web().unwrap();
    g.bench_function("linearizability W4-R2NL", |b| {
        b.iter(|| linearizability_verdict(black_box(&web)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, zero_test, obstruction, verdicts);
criterion_main!(benches);
