use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ctrap::lattice::{mollified_monomial_sums, RadialExp};
use ctrap::{assemble_k, builtin_phi, correction_term, enumerate_grid, integrate, J1};
use ctrap_bench::{kernel, table};

fn lattice(c: &mut Criterion) {
    let k = kernel("s1");
    let t = table(&k, 1);
    let phi = builtin_phi(3);
    let mut group = c.benchmark_group("integrate_s1_p1");
    group.sample_size(10);
    for j in [3, 4, 5] {
        let h = 0.5f64.powi(j);
        group.bench_with_input(BenchmarkId::from_parameter(format!("h=2^-{j}")), &h, |b, &h| {
            b.iter(|| (integrate(&phi, &k, &t, h).unwrap().value - J1).abs())
        });
    }
    group.finish();
}

fn shell_sums(c: &mut Criterion) {
    let grid = enumerate_grid(3, 3, 1).unwrap();
    let exps: Vec<Vec<u32>> = (0..grid.len()).map(|i| grid.row_exponent(i).iter().map(|e| e + u32::from(i == 0)).collect()).collect();
    let mut group = c.benchmark_group("mollified_monomial_sums_s2_p3");
    group.sample_size(10);
    for j in [3, 4] {
        let h = 0.5f64.powi(j);
        group.bench_with_input(BenchmarkId::from_parameter(format!("h=2^-{j}")), &h, |b, &h| {
            b.iter(|| mollified_monomial_sums(RadialExp { m: 7 }, h, 2.0, 2.0, black_box(&exps)).unwrap())
        });
    }
    group.finish();
}

fn matrix(c: &mut Criterion) {
    let grid = enumerate_grid(4, 4, 0).unwrap();
    c.bench_function("assemble_k_n4_p4", |b| b.iter(|| assemble_k(black_box(&grid))));
}

fn weights(c: &mut Criterion) {
    let k = kernel("s2");
    let mut group = c.benchmark_group("compute_weights_s2");
    group.sample_size(10);
    for p in [1, 2] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| b.iter(|| table(&k, p)));
    }
    group.finish();
}

fn correction(c: &mut Criterion) {
    let k = kernel("s2");
    let t = table(&k, 3);
    let phi = builtin_phi(3);
    c.bench_function("correction_term_s2_p3", |b| b.iter(|| correction_term(&phi, &t, black_box(1.0 / 32.0))));
}

criterion_group!(benches, lattice, shell_sums, matrix, weights, correction);
criterion_main!(benches);
