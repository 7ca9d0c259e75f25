//! Weakly singular kernels `s(x) = |x|^(delta-n) rho(x/|x|)`.
//!
//! A kernel has dilation exponent `delta` and symmetry index `kappa`: it is
//! odd in its first `kappa` coordinates and even in the rest. Kernels given
//! in natural coordinates are relabeled internally so that the odd axes come
//! first; [`KernelSpec::permutation`] records the relabeling.

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// A pure real-valued function of a point in `R^n`.
pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `x^alpha / |x|^r` in natural coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialKernel {
    pub alpha: MultiIndex,
    pub r: f64,
}

impl MonomialKernel {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let q: f64 = x.iter().map(|v| v * v).sum();
        monomial(x, &self.alpha.0) / q.powf(0.5 * self.r)
    }
}

fn monomial(x: &[f64], alpha: &[u32]) -> f64 {
    x.iter().zip(alpha).map(|(&v, &a)| v.powi(a as i32)).product()
}

/// An admissible weakly singular kernel.
#[derive(Clone)]
pub struct KernelSpec {
    pub id: String,
    pub n: usize,
    pub delta: f64,
    pub kappa: usize,
    /// Internal axis `i` is natural axis `permutation[i]`.
    pub permutation: Vec<usize>,
    evaluate: Evaluator,
    angular: Evaluator,
    pub monomial: Option<MonomialKernel>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("id", &self.id)
            .field("n", &self.n)
            .field("delta", &self.delta)
            .field("kappa", &self.kappa)
            .field("permutation", &self.permutation)
            .field("monomial", &self.monomial)
            .finish()
    }
}

impl KernelSpec {
    /// A kernel from arbitrary evaluators. Axes must already be ordered with
    /// the `kappa` odd axes first; use [`validate_kernel`] to check the
    /// declared `delta` and `kappa`.
    pub fn custom(
        id: impl Into<String>,
        n: usize,
        delta: f64,
        kappa: usize,
        evaluate: Evaluator,
        angular: Evaluator,
    ) -> Result<Self> {
        crate::multiindex::check_shape(n, 0, kappa)?;
        if !(delta > 0.0 && delta < n as f64) {
            return Err(Error::AdmissibilityViolation(format!(
                "delta={delta} must lie in (0, {n})"
            )));
        }
        Ok(KernelSpec {
            id: id.into(),
            n,
            delta,
            kappa,
            permutation: (0..n).collect(),
            evaluate,
            angular,
            monomial: None,
        })
    }

    /// `s(x)` at a nonzero point in natural coordinates.
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.evaluate)(x)
    }

    /// `rho(theta)` at a unit vector in natural coordinates.
    pub fn angular(&self, theta: &[f64]) -> f64 {
        (self.angular)(theta)
    }

    pub fn evaluator(&self) -> Evaluator {
        self.evaluate.clone()
    }

    /// Maps internal coordinates to natural ones.
    pub fn to_natural<T: Copy + Default>(&self, y: &[T]) -> Vec<T> {
        let mut x = vec![T::default(); self.n];
        for (i, &axis) in self.permutation.iter().enumerate() {
            x[axis] = y[i];
        }
        x
    }

    /// `s` evaluated at a point given in internal coordinates.
    pub fn eval_internal(&self, y: &[f64]) -> f64 {
        self.eval(&self.to_natural(y))
    }

    /// Monomial exponent in internal coordinates.
    pub fn internal_alpha(&self) -> Option<Vec<u32>> {
        self.monomial
            .as_ref()
            .map(|m| self.permutation.iter().map(|&a| m.alpha.0[a]).collect())
    }
}

/// Builds `x^alpha / |x|^r`. Requires `|alpha| < r < |alpha| + n`.
pub fn make_monomial_kernel(alpha: MultiIndex, r: f64) -> Result<KernelSpec> {
    let n = alpha.dim();
    crate::multiindex::check_shape(n, 0, 0)?;
    let deg = alpha.norm1() as f64;
    if !(r > deg && r < deg + n as f64) {
        return Err(Error::AdmissibilityViolation(format!(
            "r={r} must satisfy {deg} < r < {}",
            deg + n as f64
        )));
    }
    let (odd, even): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| alpha.0[i] % 2 == 1);
    let kappa = odd.len();
    let permutation: Vec<usize> = odd.into_iter().chain(even).collect();
    let mono = MonomialKernel { alpha: alpha.clone(), r };
    let m1 = mono.clone();
    let a2 = alpha.clone();
    Ok(KernelSpec {
        id: format!("monomial{alpha}/r{r}"),
        n,
        delta: n as f64 + deg - r,
        kappa,
        permutation,
        evaluate: Arc::new(move |x| m1.eval(x)),
        angular: Arc::new(move |t| monomial(t, &a2.0)),
        monomial: Some(mono),
    })
}

/// `x_1^2 / |x|^3.5` in three dimensions (`delta = 1.5`, `kappa = 0`).
pub fn s1() -> KernelSpec {
    let mut k = make_monomial_kernel(MultiIndex(vec![2, 0, 0]), 3.5).expect("admissible");
    k.id = "s1".into();
    k
}

/// `x_1 / |x|^2` in three dimensions (`delta = 2`, `kappa = 1`).
pub fn s2() -> KernelSpec {
    let mut k = make_monomial_kernel(MultiIndex(vec![1, 0, 0]), 2.0).expect("admissible");
    k.id = "s2".into();
    k
}

/// Outcome of [`validate_kernel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Largest relative dilation defect `|s(hx) - h^(delta-n) s(x)|`.
    pub dilation_max: f64,
    /// Largest relative defect of the parity rule over single-axis flips.
    pub symmetry_max: f64,
    /// Natural axis where the symmetry defect is largest.
    pub worst_axis: Option<usize>,
    pub tol: f64,
    pub passed: bool,
}

fn rel_defect(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Checks the dilation and symmetry properties at `samples` seeded random
/// points plus the coordinate unit vectors.
pub fn validate_kernel(k: &KernelSpec, samples: usize, tol: f64) -> ValidationReport {
    let n = k.n;
    let mut rng = StdRng::seed_from_u64(0x5eed_c7a9);
    let mut points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            k.to_natural(&e)
        })
        .collect();
    // Points off the axes so that every coordinate enters.
    points.push(vec![1.0; n]);
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if x.iter().any(|&v| v != 0.0) {
            points.push(x);
        }
    }

    let mut dilation_max: f64 = 0.0;
    let mut symmetry_max: f64 = 0.0;
    let mut worst_axis = None;
    for x in &points {
        let sx = k.eval(x);
        for h in [0.5, 2.0, 3.7] {
            let hx: Vec<f64> = x.iter().map(|v| h * v).collect();
            let want = h.powf(k.delta - n as f64) * sx;
            dilation_max = dilation_max.max(rel_defect(k.eval(&hx), want));
        }
        for (internal, &axis) in k.permutation.iter().enumerate() {
            let mut y = x.clone();
            y[axis] = -y[axis];
            let parity = if internal < k.kappa { -1.0 } else { 1.0 };
            let d = rel_defect(k.eval(&y), parity * sx);
            if d > symmetry_max {
                symmetry_max = d;
                worst_axis = Some(axis);
            }
        }
    }
    ValidationReport {
        dilation_max,
        symmetry_max,
        worst_axis,
        tol,
        passed: dilation_max <= tol && symmetry_max <= tol,
    }
}

/// Kernel description as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelConfig {
    Monomial { alpha: Vec<u32>, r: f64 },
    Custom { name: String },
}

/// Named custom kernels available to [`KernelConfig::build`].
#[derive(Clone, Debug, Default)]
pub struct KernelRegistry {
    kernels: HashMap<String, KernelSpec>,
}

impl KernelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: impl Into<String>, kernel: KernelSpec) {
        self.kernels.insert(name.into(), kernel);
    }

    pub fn get(&self, name: &str) -> Option<&KernelSpec> {
        self.kernels.get(name)
    }
}

impl KernelConfig {
    pub fn build(&self, registry: &KernelRegistry) -> Result<KernelSpec> {
        match self {
            KernelConfig::Monomial { alpha, r } => {
                let k = make_monomial_kernel(MultiIndex(alpha.clone()), *r)?;
                Ok(rename_builtin(k))
            }
            KernelConfig::Custom { name } => registry
                .get(name)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("no custom kernel named '{name}'"))),
        }
    }
}

fn rename_builtin(mut k: KernelSpec) -> KernelSpec {
    let m = k.monomial.as_ref().expect("monomial");
    if m.alpha.0 == [2, 0, 0] && m.r == 3.5 {
        k.id = "s1".into();
    } else if m.alpha.0 == [1, 0, 0] && m.r == 2.0 {
        k.id = "s2".into();
    }
    k
}
