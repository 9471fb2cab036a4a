use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pd_core::dickman::DickmanEvaluator;
use pd_core::numerics::quad::{quad, EndpointWeights};
use pd_core::params::validate_params;
use pd_core::sampler::{beta_variate, stick_breaking, top_m, RngStream, StopRule};

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampling");
    group.bench_function("beta_variate(0.5, 20.5)", |b| {
        let mut rng = RngStream::new(1, 0);
        b.iter(|| beta_variate(0.5, 20.5, &mut rng).unwrap());
    });
    for &(alpha, theta) in &[(0.0, 1.0), (0.5, 0.5)] {
        let p = validate_params(alpha, theta).unwrap();
        group.bench_with_input(
            BenchmarkId::new("sticks_to_1e-6", format!("({alpha},{theta})")),
            &p,
            |b, &p| {
                let mut rng = RngStream::new(2, 0);
                b.iter(|| stick_breaking(p, StopRule::ResidualBelow(1e-6), &mut rng).unwrap());
            },
        );
    }
    let p = validate_params(0.3, 0.7).unwrap();
    group.bench_function("certified top_3 (0.3,0.7)", |b| {
        let mut rng = RngStream::new(3, 0);
        b.iter(|| top_m(p, 3, &mut rng).unwrap());
    });
    group.finish();
}

fn bench_quad(c: &mut Criterion) {
    c.bench_function("quad Beta(1/2,1/2)", |b| {
        let w = EndpointWeights::new(-0.5, -0.5).unwrap();
        b.iter(|| quad(|_| 1.0, 0.0, 1.0, w, 1e-10).unwrap());
    });
}

fn bench_dickman(c: &mut Criterion) {
    let mut group = c.benchmark_group("dickman");
    group.sample_size(10);
    group.bench_function("rho_series (0.3,0.7) at 3.5", |b| {
        b.iter(|| {
            let ev = DickmanEvaluator::new(validate_params(0.3, 0.7).unwrap());
            ev.rho_series(3.5).unwrap()
        });
    });
    group.bench_function("volterra table (0.5,0.5) to 8 at 2^-9", |b| {
        let ev = DickmanEvaluator::new(validate_params(0.5, 0.5).unwrap());
        b.iter(|| ev.rho_table(8.0, 1.0 / 512.0).unwrap());
    });
    group.finish();
}

criterion_group!(benches, bench_sampling, bench_quad, bench_dickman);
criterion_main!(benches);
