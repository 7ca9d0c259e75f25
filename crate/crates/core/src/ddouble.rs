//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`,
//! giving roughly 106 bits of significand. Only the operations needed by
//! the moment and lattice-sum code paths are provided. The algorithms
//! follow the classic error-free transformations (two-sum, fused
//! two-product) and the argument-reduction schemes of the QD library.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

// 1/k! for k = 3..=11
const INV_FACT: [(f64, f64); 9] = [
    (0.16666666666666666, 9.25185853854297e-18),
    (0.041666666666666664, 2.3129646346357427e-18),
    (0.008333333333333333, 1.1564823173178714e-19),
    (0.001388888888888889, -5.300543954373577e-20),
    (0.0001984126984126984, 1.7209558293420705e-22),
    (2.48015873015873e-05, 2.1511947866775882e-23),
    (2.7557319223985893e-06, -1.858393274046472e-22),
    (2.755731922398589e-07, 2.3767714622250297e-23),
    (2.505210838544172e-08, -1.448814070935912e-24),
];

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const LN2: Self = Self { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
    pub const PI: Self = Self { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
    pub const HALF_LN_TWO_PI: Self = Self { hi: 0.9189385332046728, lo: -3.8782941580672414e-17 };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Builds a normalized value from two arbitrary doubles.
    #[inline]
    pub fn from_parts(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        Self { hi: s, lo: e }
    }

    /// Nearest double-double to a 128-bit signed integer (exact below 2^106).
    pub fn from_i128(v: i128) -> Self {
        let hi = v as f64;
        // |v - hi| < 2^75 because |v| < 2^127, so the residual fits in i128.
        let rest = v - hi as i128;
        Self::from_parts(hi, rest as f64)
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Exact ratio of two integers-valued doubles rounded to double-double.
    pub fn ratio(num: f64, den: f64) -> Self {
        Self::from_f64(num) / Self::from_f64(den)
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s1, s2) = two_sum(self.hi, b);
        let (s1, s2) = quick_two_sum(s1, s2 + self.lo);
        Self { hi: s1, lo: s2 }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let (p1, p2) = quick_two_sum(p1, p2 + self.lo * b);
        Self { hi: p1, lo: p2 }
    }

    /// Multiplication by an exact power of two.
    #[inline]
    pub fn mul_pow2(self, b: f64) -> Self {
        Self { hi: self.hi * b, lo: self.lo * b }
    }

    #[inline]
    pub fn sqr(self) -> Self {
        let (p1, p2) = two_prod(self.hi, self.hi);
        let p2 = p2 + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (p1, p2) = quick_two_sum(p1, p2);
        Self { hi: p1, lo: p2 }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::ZERO;
        }
        if self.hi < 0.0 {
            return Self::from_f64(f64::NAN);
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let corr = (self - Self::from_f64(ax).sqr()).hi * (x * 0.5);
        let (s, e) = two_sum(ax, corr);
        Self { hi: s, lo: e }
    }

    pub fn powi(self, mut k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        let invert = k < 0;
        if invert {
            k = -k;
        }
        let mut base = self;
        let mut acc = Self::ONE;
        loop {
            if k & 1 == 1 {
                acc *= base;
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.sqr();
        }
        if invert {
            acc.recip()
        } else {
            acc
        }
    }

    /// `self^e` for `self > 0`. Exponents that are multiples of 1/4 avoid the
    /// exp/ln round trip.
    pub fn powf(self, e: f64) -> Self {
        let quarters = e * 4.0;
        if quarters == quarters.round() && quarters.abs() < 1.0e6 {
            let q = quarters as i64;
            let whole = q.div_euclid(4) as i32;
            let frac = q.rem_euclid(4);
            let mut out = self.powi(whole);
            if frac != 0 {
                let root2 = self.sqrt();
                match frac {
                    1 => out *= root2.sqrt(),
                    2 => out *= root2,
                    _ => out *= root2 * root2.sqrt(),
                }
            }
            return out;
        }
        (self.ln() * Self::from_f64(e)).exp()
    }

    pub fn exp(self) -> Self {
        const K: f64 = 512.0;
        const INV_K: f64 = 1.0 / K;
        if self.hi <= -709.0 {
            return Self::ZERO;
        }
        if self.hi >= 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi == 0.0 {
            return Self::ONE;
        }
        let m = (self.hi / Self::LN2.hi + 0.5).floor();
        let r = (self - Self::LN2.mul_f64(m)).mul_pow2(INV_K);
        let mut p = r.sqr();
        let mut s = r + p.mul_pow2(0.5);
        p *= r;
        let mut t = p * Self::from_parts(INV_FACT[0].0, INV_FACT[0].1);
        let mut i = 0;
        loop {
            s += t;
            p *= r;
            i += 1;
            t = p * Self::from_parts(INV_FACT[i].0, INV_FACT[i].1);
            if t.hi.abs() <= INV_K * 4.93038065763132e-32 || i >= 7 {
                break;
            }
        }
        s += t;
        for _ in 0..9 {
            s = s.mul_pow2(2.0) + s.sqr();
        }
        s = s.add_f64(1.0);
        let scale = 2f64.powi(m as i32);
        s.mul_pow2(scale)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(f64::NAN);
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return Self::ZERO;
        }
        // One Newton step on exp(y) = x doubles the precision of the f64 seed.
        let y = Self::from_f64(self.hi.ln());
        y + self * (-y).exp() - Self::ONE
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (s1, s2) = quick_two_sum(s1, s2 + t2);
        Self { hi: s1, lo: s2 }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (p1, p2) = quick_two_sum(p1, p2);
        Self { hi: p1, lo: p2 }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 }.add_f64(q3)
    }
}

impl AddAssign for DoubleDouble {
    #[inline]
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    #[inline]
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    #[inline]
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}
