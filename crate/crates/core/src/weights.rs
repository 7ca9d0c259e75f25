//! Correction weights.
//!
//! The weights solve `K w = c`, where `K` is the integer coefficient matrix
//! of the grid and `c = lim_{h -> 0} c(h)` with
//!
//! ```text
//! c_i(h) = h^(-a_i) (M_i - T_h^0[g s x^(gamma_i)]),  gamma_i = 2 xi_i - sum_{j<kappa} e_j,
//! ```
//!
//! `a_i = |gamma_i| + delta` and `M_i` the exact moment. The limit does not
//! depend on the mollifier `g`; the mollifier only controls how fast `c(h)`
//! converges. The limit is taken by two Richardson steps.

use crate::ddouble::DoubleDouble;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::lattice::{self, Decay, LatticeSumRequest, RadialExp};
use crate::multiindex::{enumerate_grid, CorrectionGrid, MultiIndex};
use crate::special::{gamma, gamma_dd};
use crate::sphere::integrate_sphere;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Default gate on the Richardson consistency estimate.
pub const DEFAULT_GATE: f64 = 1e-11;
/// Orders above this need [`SolveOptions::force`].
pub const MAX_UNFORCED_ORDER: usize = 6;

/// Radial mollifier `g(x) = exp(-|x|^m)`.
///
/// `g - 1` vanishes to order `m - 1` at the origin, and `c(h) - c` expands in
/// powers `h^m, h^(2m), ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceMollifier {
    pub m: u32,
}

impl ReferenceMollifier {
    pub fn new(m: u32) -> Self {
        ReferenceMollifier { m }
    }

    /// `exp(-|x|^8)`.
    pub fn fixed8() -> Self {
        ReferenceMollifier { m: 8 }
    }

    /// The least flat admissible choice `m = 2p - kappa + 2`; the leading
    /// error term of `c(h)` then sits exactly at the first Richardson order.
    pub fn matched(p: usize, kappa: usize) -> Self {
        ReferenceMollifier { m: (2 * p + 2 - kappa) as u32 }
    }

    pub fn flatness(&self) -> u32 {
        self.m - 1
    }

    pub fn eval_radial(&self, t: f64) -> f64 {
        (-t.powi(self.m as i32)).exp()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let q: f64 = x.iter().map(|v| v * v).sum();
        (-q.powf(0.5 * self.m as f64)).exp()
    }

    /// Requires `m - 1 >= 2p - kappa + 1`.
    pub fn check(&self, p: usize, kappa: usize) -> Result<()> {
        if self.m < 2 || (self.m as usize) < 2 * p + 2 - kappa.min(2 * p + 2) {
            return Err(Error::InvalidArgument(format!(
                "mollifier exponent m={} is not flat enough for p={p}, kappa={kappa}",
                self.m
            )));
        }
        Ok(())
    }
}

/// The coefficient matrix, exact.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    pub grid: CorrectionGrid,
    /// Row-major integer entries.
    pub exact: Vec<i128>,
}

impl CoefficientMatrix {
    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.exact[i * self.size() + j]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let s = self.size();
        DMatrix::from_fn(s, s, |i, j| self.get(i, j) as f64)
    }
}

/// `K_ij = sum_{beta in G_j} sgn(prod_{l<kappa} beta_l) beta^(2 xi_i - sum e_l)`,
/// summed over the orbit in integer arithmetic.
pub fn assemble_k(grid: &CorrectionGrid) -> CoefficientMatrix {
    let s = grid.len();
    let mut exact = vec![0i128; s * s];
    for i in 0..s {
        let expo = grid.row_exponent(i);
        for (j, orbit) in grid.orbits.iter().enumerate() {
            let mut acc = 0i128;
            for beta in orbit {
                let mut v = beta.sign(grid.kappa) as i128;
                for (&b, &e) in beta.entries().iter().zip(&expo) {
                    v *= (b as i128).pow(e);
                }
                acc += v;
            }
            exact[i * s + j] = acc;
        }
    }
    CoefficientMatrix { grid: grid.clone(), exact }
}

/// Sizes found by [`verify_block_structure`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// `(k, block size, group sizes)` in grid order.
    pub blocks: Vec<(usize, usize, Vec<usize>)>,
    pub checked_entries: usize,
}

/// Checks the zero pattern and diagonal sub-blocks of `K`.
///
/// * entries below the diagonal blocks are zero;
/// * inside a diagonal block, entries between different zero patterns are
///   zero;
/// * each diagonal sub-block equals `2^(n-k) D H`, with `D` generated by
///   `I+(n-k, p)` through `eta^(2 xi)` and `H = diag(1 / prod_{l<kappa} eta_l)`.
pub fn verify_block_structure(k: &CoefficientMatrix) -> Result<StructureReport> {
    let grid = &k.grid;
    let (n, kappa) = (grid.n, grid.kappa);
    let s = grid.len();
    let mut block_of = vec![0usize; s];
    let mut group_of = vec![0usize; s];
    let mut g = 0;
    for (b, block) in grid.blocks.iter().enumerate() {
        for group in &block.groups {
            for i in group.range.clone() {
                block_of[i] = b;
                group_of[i] = g;
            }
            g += 1;
        }
    }
    let violation = |row, col, reason: String| Err(Error::StructureViolation { row, col, reason });
    let mut checked = 0;
    for i in 0..s {
        for j in 0..s {
            let v = k.get(i, j);
            if block_of[i] > block_of[j] && v != 0 {
                return violation(i, j, format!("entry {v} below the diagonal blocks"));
            }
            if block_of[i] == block_of[j] && group_of[i] != group_of[j] && v != 0 {
                return violation(i, j, format!("entry {v} couples different zero patterns"));
            }
            checked += 1;
        }
    }

    for block in &grid.blocks {
        let dim = n - block.k;
        let d_points = crate::multiindex::positive_grid(dim, grid.p);
        for group in &block.groups {
            let keep: Vec<usize> = (0..n).filter(|c| !group.zeros.contains(c)).collect();
            let proj = |x: &MultiIndex| MultiIndex(keep.iter().map(|&c| x.0[c]).collect());
            let projected: Vec<MultiIndex> = grid.points[group.range.clone()].iter().map(proj).collect();
            // For kappa > 0 the first kappa coordinates of I+ start at 1 as well,
            // so the projected group is exactly I+(n-k, p).
            if projected != d_points {
                return violation(
                    group.range.start,
                    group.range.start,
                    format!("zero pattern {:?} does not project onto I+({dim},{})", group.zeros, grid.p),
                );
            }
            let scale = 1i128 << (n - block.k);
            for (a, i) in group.range.clone().enumerate() {
                for (b, j) in group.range.clone().enumerate() {
                    let d = d_points[b].pow(&d_points[a].0.iter().map(|v| 2 * v).collect::<Vec<_>>()) as i128;
                    let h_inv: i128 = grid.points[j].0[..kappa].iter().map(|&v| v as i128).product();
                    if k.get(i, j) * h_inv != scale * d {
                        return violation(
                            i,
                            j,
                            format!("sub-block entry {} differs from 2^{} D = {}", k.get(i, j), n - block.k, scale * d),
                        );
                    }
                }
            }
        }
    }
    Ok(StructureReport {
        blocks: grid
            .blocks
            .iter()
            .map(|b| (b.k, b.range.len(), b.groups.iter().map(|g| g.range.len()).collect()))
            .collect(),
        checked_entries: checked,
    })
}

/// Exact moments `M_i = int g(x) s(x) x^(gamma_i) dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    pub values: Vec<DoubleDouble>,
}

/// Angular rule for kernels without a closed-form moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularRule {
    /// Nodes per angle; the check compares against `order + order / 2`.
    pub order: usize,
    pub tol: f64,
}

/// Closed-form moment of `exp(-|x|^m) x^e / |x|^r` over `R^n`:
/// `Gamma((n+|e|-r)/m)/m * 2 prod Gamma((e_i+1)/2) / Gamma((n+|e|)/2)`,
/// zero when some `e_i` is odd.
pub fn monomial_moment(g: ReferenceMollifier, e: &[u32], r: f64) -> DoubleDouble {
    if e.iter().any(|v| v % 2 == 1) {
        return DoubleDouble::ZERO;
    }
    let n = e.len() as f64;
    let deg: u32 = e.iter().sum();
    let m = g.m as f64;
    let md = DoubleDouble::from(m);
    // The argument must be formed in double-double: (n+|e|-r)/m is rarely dyadic.
    let radial = gamma_dd(DoubleDouble::from(n + deg as f64 - r) / md) / md;
    let mut angular = DoubleDouble::from(2.0);
    for &v in e {
        angular *= gamma_dd(DoubleDouble::from((v as f64 + 1.0) / 2.0));
    }
    radial * angular / gamma_dd(DoubleDouble::from((n + deg as f64) / 2.0))
}

/// Exponent vectors `alpha + gamma_i` in internal coordinates.
fn monomial_exponents(kernel: &KernelSpec, grid: &CorrectionGrid) -> Option<Vec<Vec<u32>>> {
    let alpha = kernel.internal_alpha()?;
    Some(
        (0..grid.len())
            .map(|i| grid.row_exponent(i).iter().zip(&alpha).map(|(g, a)| g + a).collect())
            .collect(),
    )
}

/// Moments for every grid row.
pub fn moments(
    kernel: &KernelSpec,
    g: ReferenceMollifier,
    grid: &CorrectionGrid,
    angular: Option<AngularRule>,
) -> Result<MomentVector> {
    check_compatible(kernel, grid)?;
    if let (Some(mono), Some(exps)) = (&kernel.monomial, monomial_exponents(kernel, grid)) {
        return Ok(MomentVector { values: exps.iter().map(|e| monomial_moment(g, e, mono.r)).collect() });
    }
    let rule = angular.ok_or_else(|| Error::QuadratureNotConfigured(kernel.id.clone()))?;
    let n = kernel.n;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let gam = grid.row_exponent(i);
        let deg: u32 = gam.iter().sum();
        let integrand = |t: &[f64]| {
            let mono: f64 = t.iter().zip(&gam).map(|(v, &e)| v.powi(e as i32)).product();
            kernel.angular(&kernel.to_natural(t)) * mono
        };
        let a = integrate_sphere(n, rule.order, &integrand);
        let b = integrate_sphere(n, rule.order + rule.order / 2, &integrand);
        let diff = (a - b).abs();
        if diff > rule.tol * b.abs().max(1.0) {
            return Err(Error::AngularNotConverged { diff, tol: rule.tol });
        }
        let m = g.m as f64;
        let radial = gamma((kernel.delta + deg as f64) / m) / m;
        values.push(DoubleDouble::from(radial * b));
    }
    Ok(MomentVector { values })
}

fn check_compatible(kernel: &KernelSpec, grid: &CorrectionGrid) -> Result<()> {
    if kernel.n != grid.n || kernel.kappa != grid.kappa {
        return Err(Error::InvalidArgument(format!(
            "grid (n={}, kappa={}) does not match kernel '{}' (n={}, kappa={})",
            grid.n, grid.kappa, kernel.id, kernel.n, kernel.kappa
        )));
    }
    Ok(())
}

/// Controls for [`rhs_c`] and [`solve_weights`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub h0: f64,
    pub mollifier: Option<ReferenceMollifier>,
    pub gate: f64,
    /// Relative truncation level for the mollified lattice sums.
    pub truncation_eps: f64,
    pub angular: Option<AngularRule>,
    /// Allow `p > 6`.
    pub force: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            h0: 0.125,
            mollifier: None,
            gate: DEFAULT_GATE,
            truncation_eps: 1e-34,
            angular: None,
            force: false,
        }
    }
}

impl SolveOptions {
    pub fn mollifier_for(&self, p: usize, kappa: usize) -> ReferenceMollifier {
        self.mollifier.unwrap_or_else(|| default_mollifier(p, kappa))
    }
}

/// Mollifier used when none is configured.
///
/// `m = 2p - kappa + 2` makes `c(h) - c` start at the first Richardson
/// order. When that order is 2 the Gaussian is replaced by `m = 4`, which
/// the second step removes exactly, and whose lattice sums are far cheaper.
pub fn default_mollifier(p: usize, kappa: usize) -> ReferenceMollifier {
    let a0 = (2 * p + 2).saturating_sub(kappa) as u32;
    ReferenceMollifier::new(if a0 <= 2 { 4 } else { a0 })
}

/// Context shared by the right-hand sides at different mesh sizes.
pub struct RhsContext<'a> {
    kernel: &'a KernelSpec,
    grid: &'a CorrectionGrid,
    g: ReferenceMollifier,
    moments: MomentVector,
    exponents: Option<Vec<Vec<u32>>>,
    radius: f64,
}

impl<'a> RhsContext<'a> {
    pub fn new(
        kernel: &'a KernelSpec,
        g: ReferenceMollifier,
        grid: &'a CorrectionGrid,
        opts: &SolveOptions,
    ) -> Result<Self> {
        let moments = moments(kernel, g, grid, opts.angular)?;
        let exponents = monomial_exponents(kernel, grid);
        let radius = lattice::truncation_radius_for(
            Decay::ExpPower { m: g.m as f64, n: grid.n, p: grid.p },
            opts.truncation_eps,
        );
        Ok(RhsContext { kernel, grid, g, moments, exponents, radius })
    }

    pub fn moments(&self) -> &MomentVector {
        &self.moments
    }

    /// `a_i = |gamma_i| + delta`.
    pub fn scale_exponent(&self, i: usize) -> f64 {
        self.grid.row_exponent(i).iter().sum::<u32>() as f64 + self.kernel.delta
    }

    /// `c(h)`.
    pub fn at(&self, h: f64) -> Result<Vec<DoubleDouble>> {
        let hd = DoubleDouble::from(h);
        match (&self.exponents, &self.kernel.monomial) {
            (Some(exps), Some(mono)) => {
                // c_i = M_i h^(-a_i) - S_i with S_i the unscaled lattice sum.
                let sums = lattice::mollified_monomial_sums(RadialExp { m: self.g.m }, h, mono.r, self.radius, exps)?;
                Ok((0..self.grid.len())
                    .map(|i| self.moments.values[i] * hd.powf(-self.scale_exponent(i)) - sums[i])
                    .collect())
            }
            _ => {
                let mut out = Vec::with_capacity(self.grid.len());
                for i in 0..self.grid.len() {
                    let gam = self.grid.row_exponent(i);
                    let integrand = |y: &[f64]| {
                        let mono: f64 = y.iter().zip(&gam).map(|(v, &e)| v.powi(e as i32)).product();
                        self.g.eval(y) * self.kernel.eval_internal(y) * mono
                    };
                    let t = lattice::punctured_trapezoid(&LatticeSumRequest {
                        h,
                        n: self.grid.n,
                        integrand: &integrand,
                        truncation_radius: self.radius,
                        compensated: true,
                    })?;
                    let diff = self.moments.values[i] - DoubleDouble::from(t);
                    out.push(diff * hd.powf(-self.scale_exponent(i)));
                }
                Ok(out)
            }
        }
    }
}

/// `c(h)` for the given kernel, mollifier and grid.
pub fn rhs_c(
    kernel: &KernelSpec,
    g: ReferenceMollifier,
    grid: &CorrectionGrid,
    h: f64,
    opts: &SolveOptions,
) -> Result<Vec<DoubleDouble>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidMeshSize(h));
    }
    RhsContext::new(kernel, g, grid, opts)?.at(h)
}

/// Result of [`richardson_limit`].
#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolation {
    pub limit: Vec<DoubleDouble>,
    pub est_error: f64,
    /// Mesh sizes used, coarsest first.
    pub levels: Vec<f64>,
}

fn richardson_step(fine: &[DoubleDouble], coarse: &[DoubleDouble], order: f64) -> Vec<DoubleDouble> {
    let denom = DoubleDouble::from(2.0).powf(order) - DoubleDouble::ONE;
    fine.iter().zip(coarse).map(|(&f, &c)| f + (f - c) / denom).collect()
}

/// Two Richardson steps on `c(h0), c(h0/2), c(h0/4), c(h0/8)` with orders
/// `order0` and `order0 + 2`.
///
/// Returns `c2(h0/2)` and `max_i |c2_i(h0) - c2_i(h0/2)|`.
pub fn richardson_from_levels(levels: &[Vec<DoubleDouble>], order0: f64) -> Result<(Vec<DoubleDouble>, f64)> {
    if levels.len() < 4 {
        return Err(Error::InsufficientLevels { needed: 4, got: levels.len() });
    }
    let c1: Vec<Vec<DoubleDouble>> = (0..3).map(|k| richardson_step(&levels[k + 1], &levels[k], order0)).collect();
    let c2: Vec<Vec<DoubleDouble>> = (0..2).map(|k| richardson_step(&c1[k + 1], &c1[k], order0 + 2.0)).collect();
    let est = c2[0]
        .iter()
        .zip(&c2[1])
        .map(|(a, b)| (*a - *b).to_f64().abs())
        .fold(0.0, f64::max);
    Ok((c2[1].clone(), est))
}

/// Evaluates `c_at` on `h0, h0/2, h0/4, h0/8` and extrapolates.
pub fn richardson_limit(
    mut c_at: impl FnMut(f64) -> Result<Vec<DoubleDouble>>,
    h0: f64,
    order0: f64,
) -> Result<Extrapolation> {
    let hs: Vec<f64> = (0..4).map(|k| h0 / (1u32 << k) as f64).collect();
    let levels = hs.iter().map(|&h| c_at(h)).collect::<Result<Vec<_>>>()?;
    let (limit, est_error) = richardson_from_levels(&levels, order0)?;
    Ok(Extrapolation { limit, est_error, levels: hs })
}

/// Converged weights for one kernel and order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    pub grid: CorrectionGrid,
    pub kernel: String,
    pub delta: f64,
    pub kappa: usize,
    pub weights: Vec<f64>,
    pub est_error: f64,
    pub h_base: f64,
    pub mollifier: ReferenceMollifier,
    /// `max|K w - c| / max|c|`.
    pub residual: f64,
    pub gate: f64,
    /// Internal axis `i` is natural axis `permutation[i]`.
    pub permutation: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct WeightRecord {
    kernel: String,
    n: usize,
    p: usize,
    kappa: usize,
    delta: f64,
    h_base: f64,
    est_error: f64,
    mollifier_m: u32,
    residual: f64,
    gate: f64,
    permutation: Vec<usize>,
    grid: Vec<MultiIndex>,
    weights: Vec<f64>,
}

impl WeightTable {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn p(&self) -> usize {
        self.grid.p
    }

    pub fn gate_passed(&self) -> bool {
        self.est_error <= self.gate
    }

    /// Maps a point in internal coordinates to natural ones.
    pub fn to_natural(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; y.len()];
        for (i, &axis) in self.permutation.iter().enumerate() {
            x[axis] = y[i];
        }
        x
    }

    /// Weight of grid point `eta`.
    pub fn weight(&self, eta: &[u32]) -> Option<f64> {
        self.grid.index_of(&MultiIndex(eta.to_vec())).map(|i| self.weights[i])
    }

    /// `w_beta = sgn(prod_{j<kappa} beta_j) w_|beta|`, zero off the stencil.
    pub fn signed_weight(&self, beta: &[i64]) -> f64 {
        let pt = crate::multiindex::SignedLatticePoint(beta.to_vec());
        match self.grid.index_of(&pt.abs()) {
            Some(i) => pt.sign(self.kappa) as f64 * self.weights[i],
            None => 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let rec = WeightRecord {
            kernel: self.kernel.clone(),
            n: self.grid.n,
            p: self.grid.p,
            kappa: self.kappa,
            delta: self.delta,
            h_base: self.h_base,
            est_error: self.est_error,
            mollifier_m: self.mollifier.m,
            residual: self.residual,
            gate: self.gate,
            permutation: self.permutation.clone(),
            grid: self.grid.points.clone(),
            weights: self.weights.clone(),
        };
        serde_json::to_string_pretty(&rec).expect("weight table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: WeightRecord = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let grid = enumerate_grid(rec.n, rec.p, rec.kappa)?;
        let mut sorted = rec.permutation.clone();
        sorted.sort_unstable();
        if grid.points != rec.grid || rec.weights.len() != grid.len() || sorted != (0..rec.n).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("weight table grid is not canonical".into()));
        }
        Ok(WeightTable {
            grid,
            kernel: rec.kernel,
            delta: rec.delta,
            kappa: rec.kappa,
            weights: rec.weights,
            est_error: rec.est_error,
            h_base: rec.h_base,
            mollifier: ReferenceMollifier::new(rec.mollifier_m),
            residual: rec.residual,
            gate: rec.gate,
            permutation: rec.permutation,
        })
    }

    /// Rows `family,orbit,weight` in grid order, e.g. `(1,1,0),(±1,±1,0),...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,orbit,weight\n");
        for (eta, w) in self.grid.points.iter().zip(&self.weights) {
            let orbit: Vec<String> =
                eta.0.iter().map(|&v| if v == 0 { "0".into() } else { format!("±{v}") }).collect();
            let _ = writeln!(out, "\"{eta}\",\"({})\",{w}", orbit.join(","));
        }
        out
    }
}

/// Solves `K x = b` with partial pivoting and two steps of iterative
/// refinement against the exact `K` with a double-double residual.
fn solve_refined(k: &CoefficientMatrix, b: &[DoubleDouble]) -> Result<(Vec<DoubleDouble>, f64)> {
    let s = k.size();
    let kf = k.to_dmatrix();
    let lu = kf.clone().lu();
    let condition = || {
        let sv = kf.clone().singular_values();
        sv.max() / sv.min()
    };
    let hi = DVector::from_iterator(s, b.iter().map(|v| v.to_f64()));
    let x0 = lu.solve(&hi).ok_or_else(|| Error::SingularMatrix { condition: condition() })?;
    let mut x: Vec<DoubleDouble> = x0.iter().map(|&v| DoubleDouble::from(v)).collect();
    let residual = |x: &[DoubleDouble]| -> Vec<DoubleDouble> {
        (0..s)
            .map(|i| {
                let mut acc = b[i];
                for (j, &xj) in x.iter().enumerate() {
                    acc -= DoubleDouble::from_i128(k.get(i, j)) * xj;
                }
                acc
            })
            .collect()
    };
    for _ in 0..2 {
        let r = residual(&x);
        let rv = DVector::from_iterator(s, r.iter().map(|v| v.to_f64()));
        let dx = lu.solve(&rv).ok_or_else(|| Error::SingularMatrix { condition: condition() })?;
        for (xi, d) in x.iter_mut().zip(dx.iter()) {
            *xi = xi.add_f64(*d);
        }
    }
    let bnorm = b.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let rel = residual(&x).iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max) / bnorm;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularMatrix { condition: condition() });
    }
    Ok((x, rel))
}

/// Solves `K w = rhs` for an arbitrary right-hand side and returns `w` with
/// the relative residual.
pub fn solve_system(k: &CoefficientMatrix, rhs: &[DoubleDouble]) -> Result<(Vec<DoubleDouble>, f64)> {
    solve_refined(k, rhs)
}

/// Extrapolates `c` and solves for the weights without applying the gate.
pub fn compute_weights(kernel: &KernelSpec, grid: &CorrectionGrid, opts: &SolveOptions) -> Result<WeightTable> {
    check_compatible(kernel, grid)?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid { n: grid.n, p: grid.p, kappa: grid.kappa });
    }
    let (p, kappa) = (grid.p, grid.kappa);
    if 2 * p < kappa {
        return Err(Error::OrderBelowSymmetry { p, kappa });
    }
    if p > MAX_UNFORCED_ORDER && !opts.force {
        return Err(Error::IllConditioned(p));
    }
    let g = opts.mollifier_for(p, kappa);
    g.check(p, kappa)?;
    let ctx = RhsContext::new(kernel, g, grid, opts)?;
    let order0 = (2 * p + 2 - kappa) as f64;
    let ext = richardson_limit(|h| ctx.at(h), opts.h0, order0)?;
    let k = assemble_k(grid);
    let (w, residual) = solve_refined(&k, &ext.limit)?;
    Ok(WeightTable {
        grid: grid.clone(),
        kernel: kernel.id.clone(),
        delta: kernel.delta,
        kappa,
        weights: w.iter().map(|v| v.to_f64()).collect(),
        est_error: ext.est_error,
        h_base: opts.h0,
        mollifier: g,
        residual,
        gate: opts.gate,
        permutation: kernel.permutation.clone(),
    })
}

/// [`compute_weights`] followed by the extrapolation gate.
pub fn solve_weights(kernel: &KernelSpec, grid: &CorrectionGrid, opts: &SolveOptions) -> Result<WeightTable> {
    let table = compute_weights(kernel, grid, opts)?;
    if !table.gate_passed() {
        return Err(Error::ExtrapolationNotConverged { est_error: table.est_error, gate: table.gate });
    }
    Ok(table)
}
