//! The corrected rule `Q_h^p[phi s] = T_h^0[phi s] + A_h^p[phi]` with
//!
//! ```text
//! A_h^p[phi] = h^delta sum_{eta in I(n,p)} w_eta sum_{beta in G_eta} sgn(prod_{j<kappa} beta_j) phi(beta h).
//! ```

use crate::ddouble::DoubleDouble;
use crate::error::{Error, Result};
use crate::kernel::{Evaluator, KernelSpec};
use crate::lattice::{punctured_trapezoid_counted, LatticeSumRequest};
use crate::weights::WeightTable;
use std::fmt;
use std::sync::Arc;

/// A compactly supported regular part `phi`.
#[derive(Clone)]
pub struct RegularPart {
    evaluate: Evaluator,
    pub support_radius: f64,
    /// Declared smoothness `N` of `phi in C_c^N`; informational.
    pub smoothness: Option<u32>,
}

impl fmt::Debug for RegularPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegularPart")
            .field("support_radius", &self.support_radius)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl RegularPart {
    pub fn new(evaluate: Evaluator, support_radius: f64, smoothness: Option<u32>) -> Self {
        RegularPart { evaluate, support_radius, smoothness }
    }

    /// `phi(x)`, forced to zero outside the support ball.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let q: f64 = x.iter().map(|v| v * v).sum();
        if q > self.support_radius * self.support_radius {
            0.0
        } else {
            (self.evaluate)(x)
        }
    }
}

/// Outcome of [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub h: f64,
    pub p: usize,
    pub n_lattice_points: u64,
    pub trapezoid: f64,
    pub correction_term: f64,
}

/// `A_h^p[phi]`.
pub fn correction_term(phi: &RegularPart, table: &WeightTable, h: f64) -> f64 {
    let kappa = table.kappa;
    let mut acc = DoubleDouble::ZERO;
    for (orbit, &w) in table.grid.orbits.iter().zip(&table.weights) {
        let mut inner = DoubleDouble::ZERO;
        for beta in orbit {
            let y: Vec<f64> = beta.entries().iter().map(|&b| b as f64 * h).collect();
            let v = phi.eval(&table.to_natural(&y));
            inner = inner.add_f64(beta.sign(kappa) as f64 * v);
        }
        acc += inner.mul_f64(w);
    }
    acc.to_f64() * h.powf(table.delta)
}

fn check_table(kernel: &KernelSpec, table: &WeightTable) -> Result<()> {
    let mut problems = Vec::new();
    if kernel.n != table.n() {
        problems.push(format!("n {} vs {}", kernel.n, table.n()));
    }
    if kernel.kappa != table.kappa {
        problems.push(format!("kappa {} vs {}", kernel.kappa, table.kappa));
    }
    if (kernel.delta - table.delta).abs() > 1e-12 * kernel.delta {
        problems.push(format!("delta {} vs {}", kernel.delta, table.delta));
    }
    if kernel.permutation != table.permutation {
        problems.push(format!("axis order {:?} vs {:?}", kernel.permutation, table.permutation));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::TableKernelMismatch(problems.join(", ")))
    }
}

/// `Q_h^p[phi s]`: the punctured sum over the support box plus the correction.
pub fn integrate(phi: &RegularPart, kernel: &KernelSpec, table: &WeightTable, h: f64) -> Result<QuadratureResult> {
    check_table(kernel, table)?;
    if !phi.support_radius.is_finite() {
        return Err(Error::InvalidArgument("regular part needs a finite support radius".into()));
    }
    let integrand = |x: &[f64]| {
        let v = phi.eval(x);
        if v == 0.0 {
            0.0
        } else {
            v * kernel.eval(x)
        }
    };
    let sum = punctured_trapezoid_counted(&LatticeSumRequest {
        h,
        n: kernel.n,
        integrand: &integrand,
        truncation_radius: phi.support_radius.max(h),
        compensated: true,
    })?;
    let correction = correction_term(phi, table, h);
    Ok(QuadratureResult {
        value: sum.value + correction,
        h,
        p: table.p(),
        n_lattice_points: sum.points,
        trapezoid: sum.value,
        correction_term: correction,
    })
}

/// `phi(x) = prod_i (1 + x_i + x_i^2) max((1 - |x|^2)^9, 0)`, supported in
/// the unit ball and of class `C^8`.
pub fn builtin_phi(n: usize) -> RegularPart {
    let _ = n;
    RegularPart::new(
        Arc::new(|x: &[f64]| {
            let q: f64 = x.iter().map(|v| v * v).sum();
            let poly: f64 = x.iter().map(|v| 1.0 + v + v * v).product();
            poly * (1.0 - q).max(0.0).powi(9)
        }),
        1.0,
        Some(8),
    )
}

/// `int phi s1 = (148281598410752 / 943446919389975) pi`.
pub const J1: f64 = 148281598410752.0 / 943446919389975.0 * std::f64::consts::PI;
/// `int phi s2 = (85458944 / 4504759875) pi`.
pub const J2: f64 = 85458944.0 / 4504759875.0 * std::f64::consts::PI;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{s1, s2};
    use crate::multiindex::enumerate_grid;
    use crate::weights::ReferenceMollifier;

    fn table(kernel: &KernelSpec, p: usize, weights: Vec<f64>) -> WeightTable {
        let grid = enumerate_grid(3, p, kernel.kappa).unwrap();
        assert_eq!(grid.len(), weights.len());
        WeightTable {
            grid,
            kernel: kernel.id.clone(),
            delta: kernel.delta,
            kappa: kernel.kappa,
            weights,
            est_error: 0.0,
            h_base: 0.125,
            mollifier: ReferenceMollifier::new(4),
            residual: 0.0,
            gate: 1e-11,
            permutation: kernel.permutation.clone(),
        }
    }

    fn constant() -> RegularPart {
        RegularPart::new(Arc::new(|_: &[f64]| 1.0), 10.0, None)
    }

    #[test]
    fn even_phi_cancels_odd_table() {
        let k = s2();
        let t = table(&k, 2, vec![0.17, -0.04, 0.018, 0.018]);
        assert_eq!(correction_term(&constant(), &t, 0.1), 0.0);
    }

    #[test]
    fn single_origin_weight() {
        let k = s1();
        let t = table(&k, 0, vec![1.6075733114131817]);
        let h: f64 = 0.125;
        let got = correction_term(&constant(), &t, h);
        assert!((got - h.powf(1.5) * 1.6075733114131817).abs() < 1e-16);
    }

    #[test]
    fn zero_phi_gives_zero() {
        let k = s1();
        let t = table(&k, 0, vec![1.6]);
        let zero = RegularPart::new(Arc::new(|_: &[f64]| 0.0), 1.0, None);
        let r = integrate(&zero, &k, &t, 0.25).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn mismatched_table_is_rejected() {
        let t = table(&s1(), 0, vec![1.6]);
        assert!(matches!(integrate(&builtin_phi(3), &s2(), &t, 0.25), Err(Error::TableKernelMismatch(_))));
    }

    #[test]
    fn support_wrapper() {
        let phi = RegularPart::new(Arc::new(|_: &[f64]| 1.0), 1.0, None);
        assert_eq!(phi.eval(&[0.6, 0.8, 0.0]), 1.0);
        assert_eq!(phi.eval(&[0.6, 0.81, 0.0]), 0.0);
        assert_eq!(builtin_phi(3).eval(&[0.0, 0.0, 0.0]), 1.0);
    }
}
