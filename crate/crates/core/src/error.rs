use thiserror::Error;

/// Errors produced by the quadrature library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension n={0}: must satisfy 1 <= n <= {max}", max = crate::multiindex::MAX_DIMENSION)]
    InvalidDimension(usize),

    #[error("symmetry index kappa={kappa} out of range for n={n}")]
    KappaOutOfRange { n: usize, kappa: usize },

    #[error("correction order p={0} exceeds the supported limit {max}", max = crate::multiindex::MAX_ORDER)]
    OrderTooLarge(usize),

    #[error("kernel is not admissible: {0}")]
    AdmissibilityViolation(String),

    #[error("non-finite integrand value {value} at lattice point {point:?}")]
    NonFiniteSample { point: Vec<i64>, value: f64 },

    #[error("empty lattice: truncation radius {radius} is smaller than the mesh size {h}")]
    EmptyLattice { radius: f64, h: f64 },

    #[error("lattice too large: {0} points per axis exceeds 2^31")]
    LatticeTooLarge(f64),

    #[error("invalid mesh size h={0}")]
    InvalidMeshSize(f64),

    #[error("angular quadrature not configured for kernel '{0}'")]
    QuadratureNotConfigured(String),

    #[error("angular quadrature did not converge: difference {diff:e} between orders exceeds {tol:e}")]
    AngularNotConverged { diff: f64, tol: f64 },

    #[error("Richardson extrapolation needs {needed} mesh levels, got {got}")]
    InsufficientLevels { needed: usize, got: usize },

    #[error("extrapolation did not converge: estimated error {est_error:e} exceeds gate {gate:e}")]
    ExtrapolationNotConverged { est_error: f64, gate: f64 },

    #[error("coefficient matrix is singular (internal error, condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("correction order p={p} with kappa={kappa} violates 2p >= kappa")]
    OrderBelowSymmetry { p: usize, kappa: usize },

    #[error("correction order p={0} > 6 is ill-conditioned; set the force flag to proceed")]
    IllConditioned(usize),

    #[error("empty correction grid for n={n}, p={p}, kappa={kappa}")]
    EmptyGrid { n: usize, p: usize, kappa: usize },

    #[error("structure violation at ({row}, {col}): {reason}")]
    StructureViolation { row: usize, col: usize, reason: String },

    #[error("weight table does not match kernel: {0}")]
    TableKernelMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("runtime budget exceeded: {elapsed:.1} s spent, cap {cap:.1} s")]
    RuntimeBudgetExceeded { elapsed: f64, cap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
