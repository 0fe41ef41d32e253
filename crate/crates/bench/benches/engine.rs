use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use martingale_bench::{condexp_case, fair_walk, submartingale_case};
use martingale_core::crossings::upcrossing_estimate_sweep;
use martingale_core::ui::KnapsackStrategy;
use martingale_core::{
    classify, simulate_map, Band, CheckedProcess, CondexpInput, Exponent, FunctionFamily, PathCrossings, Rational,
    RunConfig, Scalar, TrajectoryModel,
};

fn condexp(c: &mut Criterion) {
    let mut group = c.benchmark_group("condexp");
    for atoms in [16, 256, 4096] {
        let exact = condexp_case::<Rational>(1, atoms);
        let float = condexp_case::<f64>(1, atoms);
        group.bench_with_input(BenchmarkId::new("block_average_exact", atoms), &exact, |b, k| {
            let input = CondexpInput::new(&k.space, &k.ambient, &k.sub, &k.f).unwrap();
            b.iter(|| black_box(input.condexp()))
        });
        group.bench_with_input(BenchmarkId::new("block_average_float", atoms), &float, |b, k| {
            let input = CondexpInput::new(&k.space, &k.ambient, &k.sub, &k.f).unwrap();
            b.iter(|| black_box(input.condexp()))
        });
        if atoms <= 256 {
            group.bench_with_input(BenchmarkId::new("projection_exact", atoms), &exact, |b, k| {
                let input = CondexpInput::new(&k.space, &k.ambient, &k.sub, &k.f).unwrap();
                b.iter(|| black_box(input.condexp_l2().unwrap()))
            });
        }
    }
    group.finish();
}

fn classification(c: &mut Criterion) {
    let (space, filt, f) = submartingale_case(2, 16, 8);
    c.bench_function("classify/16_atoms_h8", |b| b.iter(|| black_box(classify(&space, &filt, &f).unwrap())));
}

fn crossings(c: &mut Criterion) {
    let path: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 0.37).sin() * 3.0).collect();
    let band = Band::new(-1.0, 1.0);
    c.bench_function("crossings/path_10k", |b| {
        b.iter(|| black_box(PathCrossings::new(&band, &path, path.len() - 1).upcrossings()))
    });
    let e = fair_walk(10);
    let sub = CheckedProcess::submartingale(&e.space, &e.filtration, &e.process).unwrap();
    let bands = [Band::new(Rational::from_i64(-1), Rational::one())];
    c.bench_function("crossings/estimate_sweep_fair_walk_h10", |b| {
        b.iter(|| black_box(upcrossing_estimate_sweep(&bands, &sub).unwrap()))
    });
}

fn knapsack(c: &mut Criterion) {
    let mut group = c.benchmark_group("analyst_modulus");
    for atoms in [12, 20] {
        let k = condexp_case::<Rational>(3, atoms);
        let fam = FunctionFamily::new(vec![k.f.clone()], Exponent::ONE).unwrap();
        let delta = k.space.total_mass() * Rational::new(1, 3);
        for strategy in [KnapsackStrategy::Exhaustive, KnapsackStrategy::BranchAndBound] {
            group.bench_function(BenchmarkId::new(format!("{strategy:?}"), atoms), |b| {
                b.iter(|| black_box(fam.analyst_modulus(&k.space, &delta, strategy).unwrap()))
            });
        }
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let cfg = RunConfig {
        seed: 42,
        trials: 1_000,
        horizon: 1_000,
        checkpoints: Vec::new(),
    };
    for (label, model) in [
        ("fair_walk", TrajectoryModel::FairWalk { step: Rational::one() }),
        ("polya", TrajectoryModel::PolyaUrn { red: 1, black: 1 }),
    ] {
        group.bench_function(label, |b| {
            b.iter(|| black_box(simulate_map(&model, &cfg, |_, p| p[p.len() - 1]).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, condexp, classification, crossings, knapsack, simulation);
criterion_main!(benches);
