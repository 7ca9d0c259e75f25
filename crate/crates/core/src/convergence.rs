//! Empirical order of accuracy from a mesh ladder.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quadrature::{integrate, RegularPart};
use crate::weights::WeightTable;
use serde::{Deserialize, Serialize};

/// Errors below `ROUNDOFF_FACTOR * eps * |I|` are treated as roundoff.
pub const ROUNDOFF_FACTOR: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub h: f64,
    pub q: f64,
    pub abs_error: f64,
    /// Excluded from the fit as below the roundoff floor.
    pub below_floor: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kernel: String,
    pub p: usize,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `log err` against `log h`; `None` with fewer
    /// than two points above the floor.
    pub slope: Option<f64>,
    /// `2p - kappa + 2 + delta`.
    pub theory: f64,
    pub tolerance: f64,
    pub floor: f64,
    /// Errors decrease strictly from point to point above the floor.
    pub monotone: bool,
    pub pass: bool,
}

/// Least-squares slope through `(ln x, ln y)`.
pub fn loglog_slope(xy: &[(f64, f64)]) -> Option<f64> {
    if xy.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = xy.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs [`integrate`] over the ladder and fits the order above the floor.
pub fn run_convergence(
    phi: &RegularPart,
    kernel: &KernelSpec,
    table: &WeightTable,
    exact: f64,
    ladder: &[f64],
    tolerance: f64,
) -> Result<ConvergenceReport> {
    run_convergence_with(phi, kernel, table, exact, ladder, tolerance, |_| Ok(()))
}

/// [`run_convergence`] with a callback after each mesh size; an error from
/// the callback aborts the run.
pub fn run_convergence_with(
    phi: &RegularPart,
    kernel: &KernelSpec,
    table: &WeightTable,
    exact: f64,
    ladder: &[f64],
    tolerance: f64,
    mut on_point: impl FnMut(&ConvergencePoint) -> Result<()>,
) -> Result<ConvergenceReport> {
    if ladder.is_empty() {
        return Err(Error::InvalidArgument("empty mesh ladder".into()));
    }
    let floor = ROUNDOFF_FACTOR * f64::EPSILON * exact.abs();
    let mut points = Vec::with_capacity(ladder.len());
    for &h in ladder {
        let start = std::time::Instant::now();
        let r = integrate(phi, kernel, table, h)?;
        let abs_error = (r.value - exact).abs();
        points.push(ConvergencePoint {
            h,
            q: r.value,
            abs_error,
            below_floor: abs_error < floor,
            seconds: start.elapsed().as_secs_f64(),
        });
        on_point(points.last().expect("just pushed"))?;
    }
    Ok(summarize(kernel, table, points, floor, tolerance))
}

fn summarize(
    kernel: &KernelSpec,
    table: &WeightTable,
    points: Vec<ConvergencePoint>,
    floor: f64,
    tolerance: f64,
) -> ConvergenceReport {
    let theory = (2 * table.p()) as f64 - table.kappa as f64 + 2.0 + table.delta;
    let mut above: Vec<&ConvergencePoint> = points.iter().filter(|p| !p.below_floor).collect();
    above.sort_by(|a, b| b.h.total_cmp(&a.h));
    let fit: Vec<(f64, f64)> = above.iter().map(|p| (p.h, p.abs_error)).collect();
    let slope = loglog_slope(&fit);
    let monotone = above.windows(2).all(|w| w[1].abs_error < w[0].abs_error);
    let pass = match slope {
        Some(s) => (s - theory).abs() <= tolerance,
        None => false,
    };
    ConvergenceReport {
        kernel: kernel.id.clone(),
        p: table.p(),
        points,
        slope,
        theory,
        tolerance,
        floor,
        monotone,
        pass,
    }
}

impl ConvergenceReport {
    /// `h,Q,abs_error` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,Q,abs_error\n");
        for p in &self.points {
            out.push_str(&format!("{:e},{:.17e},{:.6e}\n", p.h, p.q, p.abs_error));
        }
        out
    }
}
