use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use costsens::calibration::{fit_pav, fit_platt, CalibrationMethod, MatrixCalibrator};
use costsens::metrics::{binary_auc, mauc};
use costsens::reopt::{ga_search, lf_optimize, metaclass_optimize, threshold_moving};
use costsens::GaConfig;
use costsens_bench::{one_vs_rest, problem};

fn auc(c: &mut Criterion) {
    let mut g = c.benchmark_group("auc");
    for n in [1_000, 10_000, 100_000] {
        let p = problem(n, 2, 1);
        let (s, y) = one_vs_rest(&p, 0);
        let pos: Vec<f64> = s.iter().zip(&y).filter(|(_, &t)| t).map(|(v, _)| *v).collect();
        let neg: Vec<f64> = s.iter().zip(&y).filter(|(_, &t)| !t).map(|(v, _)| *v).collect();
        g.bench_with_input(BenchmarkId::new("binary", n), &n, |b, _| {
            b.iter(|| binary_auc(black_box(&pos), black_box(&neg)).unwrap())
        });
    }
    for c_ in [3, 10] {
        let p = problem(10_000, c_, 2);
        g.bench_with_input(BenchmarkId::new("mauc_10k", c_), &c_, |b, _| {
            b.iter(|| mauc(black_box(&p.scores), black_box(&p.labels)).unwrap())
        });
    }
    g.finish();
}

fn calibration(c: &mut Criterion) {
    let mut g = c.benchmark_group("calibration");
    let p = problem(10_000, 2, 3);
    let (s, y) = one_vs_rest(&p, 0);
    g.bench_function("platt_10k", |b| b.iter(|| fit_platt(black_box(&s), black_box(&y)).unwrap()));
    g.bench_function("pav_10k", |b| b.iter(|| fit_pav(black_box(&s), black_box(&y)).unwrap()));
    let p = problem(5_000, 5, 4);
    g.bench_function("matrix_platt_5k_5c", |b| {
        b.iter(|| MatrixCalibrator::fit(black_box(&p.scores), &p.labels, CalibrationMethod::Platt).unwrap())
    });
    g.finish();
}

fn reoptimization(c: &mut Criterion) {
    let mut g = c.benchmark_group("reopt");
    g.sample_size(10);
    let p = problem(10_000, 2, 5);
    let (s, y) = one_vs_rest(&p, 0);
    let pos: Vec<f64> = s.iter().zip(&y).filter(|(_, &t)| t).map(|(v, _)| *v).collect();
    let neg: Vec<f64> = s.iter().zip(&y).filter(|(_, &t)| !t).map(|(v, _)| *v).collect();
    g.bench_function("threshold_10k", |b| {
        b.iter(|| threshold_moving(black_box(&pos), black_box(&neg), |fp, fn_| 5.0 * fp as f64 + fn_ as f64))
    });
    let p = problem(2_000, 6, 6);
    g.bench_function("lf_2k_6c", |b| b.iter(|| lf_optimize(&p.scores, &p.labels, &p.costs).unwrap()));
    g.bench_function("metaclass_2k_6c", |b| {
        b.iter(|| metaclass_optimize(&p.scores, &p.labels, &p.costs).unwrap())
    });
    let ga = GaConfig::default();
    g.bench_function("ga_2k_6c", |b| b.iter(|| ga_search(&p.scores, &p.labels, &p.costs, &ga, 7).unwrap()));
    g.finish();
}

criterion_group!(benches, auc, calibration, reoptimization);
criterion_main!(benches);
