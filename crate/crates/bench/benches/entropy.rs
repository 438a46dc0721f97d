use std::f64::consts::LN_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use furstenberg_core::*;

fn single() -> Scenario {
    let kappa = KappaMeasure::point_mass(Element::Cantor("{1}".parse().unwrap()));
    Scenario::new(
        GroupSpec::DirectSumZ2,
        kappa,
        BaseSystem::HaarOdometer,
        CocycleSpec::canonical(),
        ProductMeasureSpec::constant(LN_2),
    )
    .unwrap()
}

fn spread() -> Scenario {
    let atoms =
        (1..=8u32).map(|k| (Element::Cantor(GroupElement::from_coords([k, 2 * k + 3]).unwrap()), 0.125)).collect();
    Scenario::new(
        GroupSpec::DirectSumZ2,
        KappaMeasure::from_f64(atoms).unwrap(),
        BaseSystem::HaarOdometer,
        CocycleSpec::canonical(),
        ProductMeasureSpec::power(1.0, 0.5),
    )
    .unwrap()
}

fn exact(c: &mut Criterion) {
    let s = spread();
    c.bench_function("skew_entropy/8 atoms", |b| b.iter(|| skew_entropy(black_box(&s)).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let s = spread();
    let mut g = c.benchmark_group("mc_entropy");
    g.sample_size(10);
    for workers in [1, 0] {
        let cfg = McConfig::new(20_000, 1).workers(workers);
        g.bench_function(format!("20k samples, workers={workers}"), |b| {
            b.iter(|| mc_entropy(black_box(&s), &cfg).unwrap())
        });
    }
    g.finish();
}

fn realization(c: &mut Criterion) {
    let s = single();
    c.bench_function("realize_target/t=5", |b| b.iter(|| realize_target(black_box(&s), 1, 5.0, 1e-9).unwrap()));
}

fn ratio_set(c: &mut Criterion) {
    let spec = ProductMeasureSpec::power(1.0, 0.5);
    let mut g = c.benchmark_group("ratio_set_estimate");
    g.sample_size(10);
    g.bench_function("depth 400, 10k samples", |b| {
        b.iter(|| ratio_set_estimate(black_box(&spec), 400, 10_000, 5, 0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, exact, monte_carlo, realization, ratio_set);
criterion_main!(benches);
