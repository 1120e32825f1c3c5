use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fop_core::eval::{brute_force_value, BruteForceConfig};
use fop_core::exec::Exec;
use fop_core::ground::{naive_infer, NaiveConfig};
use fop_core::lifted::entailment_refutand;
use fop_core::normal::normalize;
use fop_core::parser::{parse_formula, parse_problem};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn brute_force(c: &mut Criterion) {
    let p = parse_problem(
        "pred p/1 in int[0,1]; pred q/1 in int[0,2]; fun f/1; fun A/0;
         sentence !x. ((q(x) - 2*p(f(x))) ^ ?y. (p(y) + q(f(y)) - q(A) - 1));",
    )
    .unwrap();
    let mut g = c.benchmark_group("brute_force_value");
    for (name, exec) in MODES {
        let cfg = BruteForceConfig { cap: 1 << 24, real_grid: None, exec };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| brute_force_value(black_box(&p.sentence), &p.signature, 3, cfg).unwrap())
        });
    }
    g.finish();
}

fn naive(c: &mut Criterion) {
    let p = parse_problem("pred x/1 in int[0,8]; fun S/1; sentence x(i) - 2*x(S(i));").unwrap();
    let q4 = parse_formula("-x(S(S(S(S(i)))))", &p.signature).unwrap();
    let r = normalize(&entailment_refutand(&p.sentence, &q4, &p.signature).unwrap(), &p.signature);
    let mut g = c.benchmark_group("naive_infer");
    g.sample_size(20);
    for (name, exec) in MODES {
        let cfg = NaiveConfig { max_depth: 4, exec, ..Default::default() };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| b.iter(|| naive_infer(black_box(&r), cfg)));
    }
    g.finish();
}

criterion_group!(benches, brute_force, naive);
criterion_main!(benches);
