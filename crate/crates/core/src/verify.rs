//! Property suites over the coefficient matrix, the grid combinatorics and
//! the parity structure of the rule.

use crate::ddouble::DoubleDouble;
use crate::error::{Error, Result};
use crate::kernel::{s1, s2, KernelSpec};
use crate::lattice::{punctured_trapezoid, truncation_radius_for, Decay, LatticeSumRequest};
use crate::multiindex::{
    binomial, count_positive_compositions, enumerate_grid, falling_factorial_int, multiplicity_total,
    positive_compositions, positive_grid, CorrectionGrid, MultiIndex,
};
use crate::quadrature::{correction_term, RegularPart};
use crate::weights::{
    assemble_k, compute_weights, monomial_moment, solve_system, verify_block_structure, CoefficientMatrix,
    ReferenceMollifier, SolveOptions, WeightTable,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

/// Deliberate defects for exercising the suites.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    #[default]
    None,
    /// The orbit sign also picks up the first even coordinate.
    SignOffByOne,
}

/// Which cases the suites cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyScope {
    pub n_max: usize,
    pub p_max: usize,
    pub kappas: Vec<usize>,
    /// Upper `p` for the enumeration lemmas.
    pub combinatorics_p_max: usize,
    /// Mesh size for the parity suite.
    pub parity_h: f64,
    pub fault: Fault,
}

impl Default for VerifyScope {
    fn default() -> Self {
        VerifyScope { n_max: 3, p_max: 3, kappas: vec![0, 1, 2], combinatorics_p_max: 8, parity_h: 0.125, fault: Fault::None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: Vec<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scope: VerifyScope,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Relative residual bound for the solver check.
pub const SOLVE_TOL: f64 = 1e-12;
/// Relative tolerance on `log |det K|`.
pub const DET_TOL: f64 = 1e-9;
/// Parity sums must stay below this fraction of the absolute sum.
pub const PARITY_TOL: f64 = 1e-13;

struct Suite {
    name: &'static str,
    cases: usize,
    failures: Vec<String>,
    start: Instant,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, cases: 0, failures: Vec::new(), start: Instant::now() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.into(),
            passed: self.failures.is_empty(),
            cases: self.cases,
            failures: self.failures,
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// `K` as assembled under `fault`.
pub fn assemble_with_fault(grid: &CorrectionGrid, fault: Fault) -> CoefficientMatrix {
    let mut k = assemble_k(grid);
    if fault == Fault::SignOffByOne && grid.kappa < grid.n {
        let s = grid.len();
        let c = grid.kappa;
        for i in 0..s {
            let expo = grid.row_exponent(i);
            for (j, orbit) in grid.orbits.iter().enumerate() {
                k.exact[i * s + j] = orbit
                    .iter()
                    .map(|beta| {
                        let b = beta.entries();
                        let sign = beta.sign(c) as i128 * if b[c] < 0 { -1 } else { 1 };
                        b.iter().zip(&expo).fold(sign, |acc, (&v, &e)| acc * (v as i128).pow(e))
                    })
                    .sum();
            }
        }
    }
    k
}

fn grids(scope: &VerifyScope) -> Vec<CorrectionGrid> {
    let mut out = Vec::new();
    for n in 1..=scope.n_max {
        for p in 0..=scope.p_max {
            for &kappa in &scope.kappas {
                if kappa > n {
                    continue;
                }
                if let Ok(g) = enumerate_grid(n, p, kappa) {
                    if !g.is_empty() {
                        out.push(g);
                    }
                }
            }
        }
    }
    out
}

/// Zero pattern, sub-block equality and solver success for every grid in scope.
pub fn structure_suite(scope: &VerifyScope) -> SuiteResult {
    let mut suite = Suite::new("zero_pattern");
    for grid in grids(scope) {
        let label = format!("n={} p={} kappa={}", grid.n, grid.p, grid.kappa);
        let k = assemble_with_fault(&grid, scope.fault);
        match verify_block_structure(&k) {
            Ok(_) => suite.check(true, String::new),
            Err(Error::StructureViolation { row, col, reason }) => suite.check(false, || {
                format!("{label}: entry ({row},{col}) row {} col {}: {reason}", grid.points[row], grid.points[col])
            }),
            Err(e) => suite.check(false, || format!("{label}: {e}")),
        }
        // A generic right-hand side with entries of mixed sign and size.
        let rhs: Vec<DoubleDouble> =
            (0..grid.len()).map(|i| DoubleDouble::from(((i * 7919) % 13) as f64 - 6.5)).collect();
        match solve_system(&k, &rhs) {
            Ok((_, rel)) => suite.check(rel <= SOLVE_TOL, || format!("{label}: relative residual {rel:e}")),
            Err(e) => suite.check(false, || format!("{label}: {e}")),
        }
    }
    suite.finish()
}

/// `ln |det|` of a dense matrix by LU.
fn ln_abs_det(m: DMatrix<f64>) -> f64 {
    let lu = m.lu();
    lu.u().diagonal().iter().map(|v| v.abs().ln()).sum()
}

/// `D_m`: the matrix generated by `I+(m, p)` with entries `eta_j^(2 xi_i)`.
pub fn d_matrix(m: usize, p: usize) -> DMatrix<f64> {
    let pts = positive_grid(m, p);
    let s = pts.len();
    DMatrix::from_fn(s, s, |i, j| {
        pts[j].0.iter().zip(&pts[i].0).map(|(&b, &a)| (b as f64).powi(2 * a as i32)).product()
    })
}

/// Outcome of [`det_factorization`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetCheck {
    pub ln_det_k: f64,
    pub ln_product: f64,
    /// `log2 |det K / prod_k det(D_(n-k))^C(n,k)|`.
    pub fitted_power: f64,
    pub predicted_power: u64,
}

/// Compares `|det K|` with `2^C prod_k |det D_(n-k)|^C(n,k)` for `kappa = 0`.
pub fn det_factorization(grid: &CorrectionGrid, k: &CoefficientMatrix) -> DetCheck {
    let (n, p) = (grid.n, grid.p);
    let ln_det_k = ln_abs_det(k.to_dmatrix());
    let mut ln_product = 0.0;
    let mut predicted_power = 0u64;
    for zeros in 0..=n {
        let dim = n - zeros;
        let d = positive_grid(dim, p);
        if d.is_empty() {
            continue;
        }
        let ln_d = if dim == 0 { 0.0 } else { ln_abs_det(d_matrix(dim, p)) };
        let copies = binomial(n as u64, zeros as u64) as f64;
        ln_product += copies * ln_d;
        predicted_power += (dim as u64) * copies as u64 * d.len() as u64;
    }
    DetCheck {
        ln_det_k,
        ln_product,
        fitted_power: (ln_det_k - ln_product) / std::f64::consts::LN_2,
        predicted_power,
    }
}

/// Determinant factorization for `kappa = 0` grids in scope.
pub fn determinant_suite(scope: &VerifyScope) -> SuiteResult {
    let mut suite = Suite::new("determinant_factorization");
    for grid in grids(scope).into_iter().filter(|g| g.kappa == 0) {
        let k = assemble_with_fault(&grid, scope.fault);
        let c = det_factorization(&grid, &k);
        let label = format!("n={} p={}", grid.n, grid.p);
        if !c.ln_det_k.is_finite() {
            suite.check(false, || format!("{label}: K is singular"));
            continue;
        }
        let rounded = c.fitted_power.round();
        let predicted = c.ln_product + c.predicted_power as f64 * std::f64::consts::LN_2;
        let scale = c.ln_det_k.abs().max(1.0);
        suite.check((c.fitted_power - rounded).abs() * std::f64::consts::LN_2 <= DET_TOL * scale, || {
            format!("{label}: fitted power {} is not an integer", c.fitted_power)
        });
        suite.check((c.ln_det_k - predicted).abs() <= DET_TOL * scale, || {
            format!("{label}: fitted power {} vs predicted {}", c.fitted_power, c.predicted_power)
        });
    }
    suite.finish()
}

/// Counting identities for compositions and falling factorials.
pub fn enumeration_suite(scope: &VerifyScope) -> SuiteResult {
    let mut suite = Suite::new("enumeration_lemma");
    let n_max = scope.n_max.max(4);
    let p_max = scope.combinatorics_p_max;
    for n in 1..=n_max {
        for p in 0..=p_max {
            let by_count = positive_compositions(n, p).len() as u64;
            let closed = count_positive_compositions(n, p);
            suite.check(by_count == closed, || format!("N({n},{p}): closed form {closed}, enumeration {by_count}"));
        }
        for m in 1..=p_max {
            let set = positive_compositions(n, m);
            for j in 1..m {
                let lhs = multiplicity_total(&set, j as u32);
                let rhs = n as u64 * count_positive_compositions(n - 1, m - j);
                suite.check(lhs == rhs, || format!("Lambda_L+({n},{m})({j}) = {lhs}, n N(n-1,m-j) = {rhs}"));
            }
        }
    }
    for m in 1..=5u32 {
        for big in (m + 1)..=10 {
            let lhs: i128 = (m..=big).map(|j| falling_factorial_int(j as i64, m)).sum();
            let num = falling_factorial_int(big as i64 + 1, m + 1);
            let ok = num % (m as i128 + 1) == 0 && lhs == num / (m as i128 + 1);
            suite.check(ok, || format!("sum_(j={m})^{big} (j)_{m} = {lhs}, (M+1)_(m+1)/(m+1) = {num}/{}", m + 1));
        }
    }
    for n in 1..=n_max {
        for p in 0..=p_max.min(6) {
            let Ok(grid) = enumerate_grid(n, p, 0) else { continue };
            let total: usize = grid.blocks.iter().map(|b| b.range.len()).sum();
            suite.check(total == grid.len(), || format!("I({n},{p}): blocks hold {total} of {} points", grid.len()));
        }
    }
    suite.finish()
}

/// Exponents `xi` with `|xi|_1 <= max_deg` whose parity differs from that of
/// the kernel: even in some odd axis or odd in some even axis.
pub fn mismatched_exponents(n: usize, kappa: usize, max_deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut xi = vec![0u32; n];
    fn walk(xi: &mut Vec<u32>, axis: usize, left: u32, kappa: usize, out: &mut Vec<Vec<u32>>) {
        if axis == xi.len() {
            let bad = xi.iter().enumerate().any(|(j, &v)| (j < kappa) == (v % 2 == 0));
            if bad {
                out.push(xi.clone());
            }
            return;
        }
        for v in 0..=left {
            xi[axis] = v;
            walk(xi, axis + 1, left - v, kappa, out);
        }
        xi[axis] = 0;
    }
    walk(&mut xi, 0, max_deg, kappa, &mut out);
    out
}

/// Mollifier used by the parity suite.
pub const PARITY_MOLLIFIER: u32 = 8;

fn parity_for(kernel: &KernelSpec, table: &WeightTable, h: f64, suite: &mut Suite) {
    let g = ReferenceMollifier::new(PARITY_MOLLIFIER);
    let n = kernel.n;
    let radius = truncation_radius_for(Decay::ExpPower { m: g.m as f64, n, p: 2 }, 1e-30);
    let mono = kernel.monomial.clone().expect("parity suite uses monomial kernels");
    for xi_internal in mismatched_exponents(n, kernel.kappa, 4) {
        let xi = kernel.to_natural(&xi_internal);
        let label = format!("{} xi={}", kernel.id, MultiIndex(xi.clone()));
        let power = |x: &[f64]| -> f64 { x.iter().zip(&xi).map(|(&v, &e)| v.powi(e as i32)).product() };
        let f = |x: &[f64]| g.eval(x) * kernel.eval(x) * power(x);
        let fa = |x: &[f64]| f(x).abs();
        let sum = |integrand: &(dyn Fn(&[f64]) -> f64 + Sync)| {
            punctured_trapezoid(&LatticeSumRequest { h, n, integrand, truncation_radius: radius, compensated: true })
        };
        match (sum(&f), sum(&fa)) {
            (Ok(t), Ok(mag)) => {
                suite.check(t.abs() <= PARITY_TOL * mag, || format!("{label}: T = {t:e}, |T| sum {mag:e}"));
                let e: Vec<u32> = mono.alpha.0.iter().zip(&xi).map(|(a, b)| a + b).collect();
                let moment = monomial_moment(g, &e, mono.r).to_f64();
                suite.check(moment.abs() <= PARITY_TOL * mag, || format!("{label}: moment = {moment:e}"));
            }
            (Err(e), _) | (_, Err(e)) => suite.check(false, || format!("{label}: {e}")),
        }
        let xi_c = xi.clone();
        let phi = RegularPart::new(
            Arc::new(move |x: &[f64]| {
                let q: f64 = x.iter().map(|v| v * v).sum();
                (-q.powi(PARITY_MOLLIFIER as i32 / 2)).exp()
                    * x.iter().zip(&xi_c).map(|(&v, &e)| v.powi(e as i32)).product::<f64>()
            }),
            f64::INFINITY,
            None,
        );
        let a = correction_term(&phi, table, h);
        let mut abs_table = table.clone();
        abs_table.weights.iter_mut().for_each(|w| *w = w.abs());
        let abs_phi = RegularPart::new(
            {
                let phi = phi.clone();
                Arc::new(move |x: &[f64]| phi.eval(x).abs())
            },
            f64::INFINITY,
            None,
        );
        let mag = correction_term_abs(&abs_phi, &abs_table, h);
        suite.check(a.abs() <= PARITY_TOL * mag.max(f64::MIN_POSITIVE), || format!("{label}: A = {a:e}, magnitude {mag:e}"));
    }
}

/// `h^delta sum |w| sum |phi|`, the magnitude scale of `A_h^p[phi]`.
fn correction_term_abs(phi: &RegularPart, abs_table: &WeightTable, h: f64) -> f64 {
    let mut acc = 0.0;
    for (orbit, &w) in abs_table.grid.orbits.iter().zip(&abs_table.weights) {
        for beta in orbit {
            let y: Vec<f64> = beta.entries().iter().map(|&b| b as f64 * h).collect();
            acc += w * phi.eval(&abs_table.to_natural(&y));
        }
    }
    acc * h.powf(abs_table.delta)
}

/// Order used for the weight tables of the parity suite.
pub const PARITY_ORDER: usize = 2;

/// Parity annihilation of `T_h^0`, the moment and `A_h^p` for `s1` and `s2`.
pub fn parity_suite(scope: &VerifyScope) -> Result<SuiteResult> {
    let mut suite = Suite::new("parity_annihilation");
    for kernel in [s1(), s2()] {
        let grid = enumerate_grid(kernel.n, PARITY_ORDER, kernel.kappa)?;
        let table = compute_weights(&kernel, &grid, &SolveOptions::default())?;
        parity_for(&kernel, &table, scope.parity_h, &mut suite);
    }
    Ok(suite.finish())
}

/// Runs every suite.
pub fn run_all(scope: &VerifyScope) -> Result<VerifyReport> {
    let suites = vec![
        structure_suite(scope),
        determinant_suite(scope),
        enumeration_suite(scope),
        parity_suite(scope)?,
    ];
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyReport { scope: scope.clone(), suites, passed })
}
