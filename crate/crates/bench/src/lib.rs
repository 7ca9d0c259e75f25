//! Shared fixtures for the benchmarks.

use ctrap::{compute_weights, enumerate_grid, s1, s2, KernelSpec, SolveOptions, WeightTable};

/// `s1` or `s2`.
pub fn kernel(id: &str) -> KernelSpec {
    if id == "s1" {
        s1()
    } else {
        s2()
    }
}

/// Weight table at the default settings.
pub fn table(kernel: &KernelSpec, p: usize) -> WeightTable {
    let grid = enumerate_grid(kernel.n, p, kernel.kappa).expect("grid");
    compute_weights(kernel, &grid, &SolveOptions::default()).expect("weights")
}
