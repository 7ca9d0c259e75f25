//! Product quadrature on the unit sphere `S^(n-1)`.
//!
//! Polar angles `phi_1..phi_(n-2)` in `[0, pi]` use Gauss-Legendre nodes
//! with the Jacobian `prod sin^(n-1-j) phi_j`; the last angle uses the
//! periodic trapezoidal rule. Both converge spectrally for smooth
//! integrands.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    for i in 0..order.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // p1 = P_order(z), p2 = P_(order-1)(z)
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..order {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = order as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[order - 1 - i] = wi;
    }
    (x, w)
}

/// Integrates `f` over `S^(n-1)` with `order` nodes per angle.
pub fn integrate_sphere(n: usize, order: usize, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    assert!(n >= 2, "sphere quadrature needs n >= 2");
    let (gx, gw) = gauss_legendre(order);
    let polar: Vec<(f64, f64)> = gx.iter().zip(&gw).map(|(&t, &w)| (0.5 * PI * (t + 1.0), 0.5 * PI * w)).collect();
    let az = 2 * order;
    let mut theta = vec![0.0; n];
    let mut total = 0.0;
    let mut idx = vec![0usize; n - 2];
    loop {
        let mut weight = 1.0;
        let mut radius = 1.0;
        for (j, &k) in idx.iter().enumerate() {
            let (phi, w) = polar[k];
            theta[j] = radius * phi.cos();
            weight *= w * phi.sin().powi((n - 2 - j) as i32);
            radius *= phi.sin();
        }
        let mut ring = 0.0;
        for a in 0..az {
            let psi = 2.0 * PI * a as f64 / az as f64;
            theta[n - 2] = radius * psi.cos();
            theta[n - 1] = radius * psi.sin();
            ring += f(&theta);
        }
        total += weight * ring * 2.0 * PI / az as f64;

        let mut j = n - 2;
        loop {
            if j == 0 {
                return total;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < order {
                break;
            }
            idx[j] = 0;
        }
    }
}
