use ctrap::special::gamma;
use ctrap::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn g8(x: &[f64]) -> f64 {
    let q: f64 = x.iter().map(|v| v * v).sum();
    (-q.powi(4)).exp()
}

fn sum(h: f64, radius: f64, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
    punctured_trapezoid(&LatticeSumRequest { h, n: 3, integrand: f, truncation_radius: radius, compensated: true }).unwrap()
}

/// Plain serial triple loop over the box.
fn serial(h: f64, radius: f64, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    let m = (radius / h).floor() as i64;
    // Neumaier summation keeps the oracle exact to about one ulp.
    let (mut acc, mut comp) = (0.0f64, 0.0f64);
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                if (a, b, c) != (0, 0, 0) {
                    let v = f(&[a as f64 * h, b as f64 * h, c as f64 * h]);
                    let t = acc + v;
                    comp += if acc.abs() >= v.abs() { (acc - t) + v } else { (v - t) + acc };
                    acc = t;
                }
            }
        }
    }
    (acc + comp) * h * h * h
}

#[test]
fn mollified_s1_matches_serial_loop() {
    let k = s1();
    let f = |x: &[f64]| g8(x) * k.eval(x);
    let (a, b) = (sum(0.125, 2.25, &f), serial(0.125, 2.25, &f));
    assert!((a - b).abs() < 1e-14 * b.abs(), "{a} vs {b}");
}

#[test]
fn parallel_matches_serial_on_random_integrands() {
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..5 {
        let c: [f64; 4] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.5..3.0)];
        let f = move |x: &[f64]| {
            let q: f64 = x.iter().map(|v| v * v).sum();
            (c[0] + c[1] * x[0] + c[2] * x[1] * x[2]) * (-c[3] * q).exp()
        };
        let (a, b) = (sum(0.1, 3.0, &f), serial(0.1, 3.0, &f));
        assert!((a - b).abs() <= 1e-14 * b.abs().max(1e-3), "{a} vs {b}");
    }
}

#[test]
fn repeated_sums_are_bitwise_identical() {
    let k = s2();
    let f = |x: &[f64]| g8(x) * k.eval(x) * x[0];
    let first = sum(1.0 / 32.0, 2.0, &f);
    for _ in 0..3 {
        assert_eq!(sum(1.0 / 32.0, 2.0, &f).to_bits(), first.to_bits());
    }
}

#[test]
fn punctured_rule_error_is_the_missing_origin_term() {
    // int exp(-|x|^8) over R^3 = 4 pi Gamma(3/8) / 8.
    let exact = 0.5 * PI * gamma(0.375);
    let err = |h: f64| sum(h, 2.25, &g8) - exact;
    // With h^3 g(0) restored the rule is spectrally accurate.
    let full = |h: f64| (err(h) + h * h * h).abs();
    let slope = (full(0.25) / full(1.0 / 16.0)).log2() / 2.0;
    assert!(slope >= 8.0, "slope {slope}");
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        assert!(full(h) < 1e-13, "h={h}: {:e}", full(h));
    }
    // Without it the error is -h^3, i.e. order n.
    let order = (err(1.0 / 16.0) / err(1.0 / 32.0)).log2();
    assert!((order - 3.0).abs() < 1e-9, "{order}");
}

#[test]
fn truncation_tail_below_eps() {
    let radius = truncation_radius_for(Decay::ExpPower { m: 8.0, n: 3, p: 2 }, 1e-18);
    let k = s1();
    let f = |x: &[f64]| g8(x) * k.eval(x);
    let inner = sum(0.125, radius, &f);
    let outer = sum(0.125, radius + 1.0, &f);
    assert!((outer - inner).abs() < 1e-18);
}
