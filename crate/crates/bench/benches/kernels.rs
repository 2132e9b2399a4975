use criterion::{criterion_group, criterion_main, Criterion};

use subpress_core::budget::Budgets;
use subpress_core::lattice::folner_box;
use subpress_core::measure::{entropy_rate, InvariantMeasure, OptMode};
use subpress_core::potential::Potential;
use subpress_core::pressure::pressure_term;
use subpress_core::space::{join_over, ClopenSet, Cover, Partition, ShiftSpace};

fn bench_pressure_terms(c: &mut Criterion) {
    let budgets = Budgets::roomy();

    let golden = ShiftSpace::golden_mean();
    let standard = Cover::zero_site_partition(&golden);
    let zero = Potential::zero(1, 2);
    let box12 = folner_box(1, 12).unwrap();
    c.bench_function("pressure_term golden-mean n=12", |b| {
        b.iter(|| {
            pressure_term(&golden, &zero, &standard, &box12, OptMode::Exact, &budgets).unwrap()
        })
    });

    let full2 = ShiftSpace::full_shift(1, 2).unwrap();
    let site = Potential::site_potential(1, vec![(3.0f64).ln(), 0.0]).unwrap();
    let u2 = Cover::zero_site_partition(&full2);
    c.bench_function("pressure_term gibbs full-2-shift n=12", |b| {
        b.iter(|| pressure_term(&full2, &site, &u2, &box12, OptMode::Exact, &budgets).unwrap())
    });

    let full3 = ShiftSpace::full_shift(1, 3).unwrap();
    let w = folner_box(1, 1).unwrap();
    let overlap = Cover::from_clopen_sets(
        &full3,
        vec![
            ClopenSet::new(w.clone(), vec![vec![0], vec![1]]).unwrap(),
            ClopenSet::new(w, vec![vec![1], vec![2]]).unwrap(),
        ],
        &budgets,
    )
    .unwrap();
    let zero3 = Potential::zero(1, 3);
    let box8 = folner_box(1, 8).unwrap();
    c.bench_function("pressure_term overlapping cover n=8", |b| {
        b.iter(|| pressure_term(&full3, &zero3, &overlap, &box8, OptMode::Exact, &budgets).unwrap())
    });
}

fn bench_joins_and_entropy(c: &mut Criterion) {
    let budgets = Budgets::roomy();
    let golden = ShiftSpace::golden_mean();
    let standard = Cover::zero_site_partition(&golden);
    let box14 = folner_box(1, 14).unwrap();
    c.bench_function("join_over golden-mean n=14", |b| {
        b.iter(|| join_over(&golden, &standard, &box14, &budgets).unwrap())
    });

    let mu = InvariantMeasure::parry(&golden).unwrap();
    let alpha = Partition::zero_site(&golden);
    c.bench_function("entropy_rate golden-mean n=16", |b| {
        b.iter(|| entropy_rate(&golden, &mu, &alpha, 16, &budgets).unwrap())
    });
}

criterion_group!(benches, bench_pressure_terms, bench_joins_and_entropy);
criterion_main!(benches);
