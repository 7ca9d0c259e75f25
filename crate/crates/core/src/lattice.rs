//! Punctured trapezoidal sums `T_h^0[f] = h^n sum_{beta != 0} f(beta h)`.
//!
//! [`punctured_trapezoid`] sums an arbitrary integrand over a truncation
//! box. [`mollified_monomial_sums`] is a specialised engine for integrands
//! of the form `g(x) x^e / |x|^r` with radial `g`: it accumulates the
//! integer monomials exactly per shell `|beta|^2 = q` and applies the
//! radial weight once per shell in double-double arithmetic.

use crate::ddouble::DoubleDouble;
use crate::error::{Error, Result};
use rayon::prelude::*;

const MAX_AXIS_POINTS: f64 = 2147483648.0;

/// A truncated punctured trapezoidal sum.
pub struct LatticeSumRequest<'a> {
    pub h: f64,
    pub n: usize,
    pub integrand: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    /// Points with `|beta h|_inf <= truncation_radius` are summed.
    pub truncation_radius: f64,
    /// Accumulate in double-double and reduce slices by magnitude.
    pub compensated: bool,
}

/// Value of a lattice sum with the number of integrand evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSum {
    pub value: f64,
    pub points: u64,
}

fn axis_extent(radius: f64, h: f64) -> Result<i64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidMeshSize(h));
    }
    if radius.is_nan() || radius < h {
        return Err(Error::EmptyLattice { radius, h });
    }
    let ratio = radius / h;
    if ratio > MAX_AXIS_POINTS {
        return Err(Error::LatticeTooLarge(ratio));
    }
    // Tolerate rounding in R/h so that R = k h keeps the boundary points.
    Ok((ratio * (1.0 + 4.0 * f64::EPSILON)).floor() as i64)
}

/// Evaluates `h^n` times the sum of the integrand over all nonzero lattice
/// points in the truncation box.
///
/// Work is split by the first coordinate into fixed slices, so the result
/// does not depend on the thread count. With `compensated` set each slice is
/// accumulated in double-double and the slice totals are added in order of
/// increasing magnitude.
pub fn punctured_trapezoid(req: &LatticeSumRequest<'_>) -> Result<f64> {
    punctured_trapezoid_counted(req).map(|s| s.value)
}

/// [`punctured_trapezoid`] that also reports the number of points evaluated.
pub fn punctured_trapezoid_counted(req: &LatticeSumRequest<'_>) -> Result<LatticeSum> {
    let n = req.n;
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let m = axis_extent(req.truncation_radius, req.h)?;
    let h = req.h;
    let side = (2 * m + 1) as u64;
    let slices: Vec<Result<(DoubleDouble, u64)>> = (-m..=m)
        .into_par_iter()
        .map(|b0| {
            let mut beta = vec![-m; n];
            beta[0] = b0;
            let mut x = vec![0.0; n];
            let mut acc = DoubleDouble::ZERO;
            let mut plain = 0.0;
            let mut count = 0u64;
            loop {
                if beta.iter().any(|&b| b != 0) {
                    for (xi, &bi) in x.iter_mut().zip(&beta) {
                        *xi = bi as f64 * h;
                    }
                    let v = (req.integrand)(&x);
                    if !v.is_finite() {
                        return Err(Error::NonFiniteSample { point: beta.clone(), value: v });
                    }
                    if req.compensated {
                        acc = acc.add_f64(v);
                    } else {
                        plain += v;
                    }
                    count += 1;
                }
                // Odometer over axes 1..n; axis 0 is fixed for the slice.
                let mut axis = n - 1;
                loop {
                    if axis == 0 {
                        let total = if req.compensated { acc } else { DoubleDouble::from(plain) };
                        return Ok((total, count));
                    }
                    if beta[axis] < m {
                        beta[axis] += 1;
                        break;
                    }
                    beta[axis] = -m;
                    axis -= 1;
                }
            }
        })
        .collect();

    let mut parts = Vec::with_capacity(slices.len());
    let mut points = 0u64;
    for s in slices {
        let (v, c) = s?;
        parts.push(v);
        points += c;
    }
    debug_assert_eq!(points, side.pow(n as u32) - 1);
    let total = if req.compensated {
        parts.sort_by(|a, b| a.hi().abs().total_cmp(&b.hi().abs()));
        parts.into_iter().sum::<DoubleDouble>()
    } else {
        DoubleDouble::from(parts.iter().map(|p| p.to_f64()).sum::<f64>())
    };
    Ok(LatticeSum { value: total.to_f64() * h.powi(n as i32), points })
}

/// Decay model used to pick a truncation radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decay {
    /// `exp(-r^m)` with polynomial safety factor `r^(n + 2p)`.
    ExpPower { m: f64, n: usize, p: usize },
    /// Integrand vanishes for `|x| > radius`.
    CompactSupport { radius: f64 },
}

/// Smallest `R >= 1` with `exp(-R^m) R^(n+2p) <= eps` beyond which the
/// bound keeps decreasing; the support radius for compact support.
pub fn truncation_radius_for(decay: Decay, eps: f64) -> f64 {
    match decay {
        Decay::CompactSupport { radius } => radius,
        Decay::ExpPower { m, n, p } => {
            let k = (n + 2 * p) as f64;
            let target = -eps.ln();
            // phi(R) = R^m - k ln R is increasing for R >= (k/m)^(1/m).
            let phi = |r: f64| r.powf(m) - k * r.ln();
            let mut lo = (k / m).powf(1.0 / m).max(1.0);
            if phi(lo) >= target {
                return lo;
            }
            let mut hi = 2.0 * lo;
            while phi(hi) < target {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if phi(mid) >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            hi
        }
    }
}

/// Radial factor `g(t) = exp(-t^m)` of the mollified monomial sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialExp {
    pub m: u32,
}

impl RadialExp {
    /// `exp(-(h^2 q)^(m/2)) q^(-r/2)` for a shell `|beta|^2 = q`.
    fn shell_weight(&self, h2: DoubleDouble, q: u64, r: f64) -> DoubleDouble {
        let qd = DoubleDouble::from(q as f64);
        let t2 = h2 * qd;
        let tm = if self.m.is_multiple_of(2) {
            t2.powi((self.m / 2) as i32)
        } else {
            t2.sqrt().powi(self.m as i32)
        };
        (-tm).exp() * qd.powf(-0.5 * r)
    }
}

/// `S_i = sum_{0 < |beta| h <= radius} g(h |beta|) beta^(e_i) |beta|^(-r)`
/// for each exponent vector `e_i`, in double-double.
///
/// Sums whose exponent has an odd entry vanish by symmetry and are returned
/// as exact zeros. The others are folded onto the closed positive orthant.
pub fn mollified_monomial_sums(
    g: RadialExp,
    h: f64,
    r: f64,
    radius: f64,
    exponents: &[Vec<u32>],
) -> Result<Vec<DoubleDouble>> {
    let n = match exponents.first() {
        Some(e) => e.len(),
        None => return Ok(Vec::new()),
    };
    let m = axis_extent(radius, h)?;
    let qmax = ((radius / h) * (radius / h) * (1.0 + 4.0 * f64::EPSILON)).floor() as u64;
    let live: Vec<usize> = (0..exponents.len())
        .filter(|&i| exponents[i].iter().all(|&v| v % 2 == 0))
        .collect();
    let mut out = vec![DoubleDouble::ZERO; exponents.len()];
    if live.is_empty() {
        return Ok(out);
    }

    // Worst-case magnitude of the integer shell sums.
    let max_deg = live.iter().map(|&i| exponents[i].iter().sum::<u32>()).max().unwrap_or(0);
    let bound = (m as f64).powi(max_deg as i32) * 2f64.powi(n as i32) * ((m + 1) as f64).powi(n as i32);
    if bound >= 2f64.powi(126) {
        return Err(Error::LatticeTooLarge(radius / h));
    }

    // pow[j][b] = b^(e_j) per live row and axis.
    let pows: Vec<Vec<Vec<i128>>> = live
        .iter()
        .map(|&i| {
            exponents[i]
                .iter()
                .map(|&e| (0..=m).map(|b| (b as i128).pow(e)).collect())
                .collect()
        })
        .collect();

    let rows = live.len();
    let stride = (qmax + 1) as usize;
    let threads = rayon::current_num_threads().max(1);
    let chunk = ((m + 1) as usize).div_ceil(threads);
    let starts: Vec<i64> = (0..=m).step_by(chunk).collect();
    let partial: Vec<Vec<i128>> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + chunk as i64 - 1).min(m);
            let mut acc = vec![0i128; rows * stride];
            let mut beta = vec![0i64; n];
            for b0 in start..=end {
                beta[0] = b0;
                shell_walk(&mut beta, 1, (b0 * b0) as u64, qmax, &mut |beta, q| {
                    if q == 0 {
                        return;
                    }
                    let fold = 1i128 << beta.iter().filter(|&&b| b != 0).count();
                    for (row, pw) in pows.iter().enumerate() {
                        let mut v = fold;
                        for (axis, &b) in beta.iter().enumerate() {
                            v *= pw[axis][b as usize];
                        }
                        acc[row * stride + q as usize] += v;
                    }
                });
            }
            acc
        })
        .collect();

    let h2 = DoubleDouble::from(h).sqr();
    let mut shells = vec![0i128; rows * stride];
    for p in partial {
        for (s, v) in shells.iter_mut().zip(p) {
            *s += v;
        }
    }
    let weights: Vec<DoubleDouble> = (0..stride as u64)
        .into_par_iter()
        .map(|q| if q == 0 { DoubleDouble::ZERO } else { g.shell_weight(h2, q, r) })
        .collect();
    for (row, &i) in live.iter().enumerate() {
        let mut terms: Vec<DoubleDouble> = (1..stride)
            .filter(|&q| shells[row * stride + q] != 0)
            .map(|q| weights[q] * DoubleDouble::from_i128(shells[row * stride + q]))
            .collect();
        terms.sort_by(|a, b| a.hi().abs().total_cmp(&b.hi().abs()));
        out[i] = terms.into_iter().sum();
    }
    Ok(out)
}

/// Visits every `beta[axis..]` in the closed orthant with
/// `q0 + sum beta_j^2 <= qmax`.
fn shell_walk(beta: &mut [i64], axis: usize, q0: u64, qmax: u64, f: &mut impl FnMut(&[i64], u64)) {
    if axis == beta.len() {
        f(beta, q0);
        return;
    }
    let mut b = 0i64;
    loop {
        let q = q0 + (b * b) as u64;
        if q > qmax {
            break;
        }
        beta[axis] = b;
        shell_walk(beta, axis + 1, q, qmax, f);
        b += 1;
    }
    beta[axis] = 0;
}
