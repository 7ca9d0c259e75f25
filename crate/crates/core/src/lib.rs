//! Corrected trapezoidal rules for weakly singular integrals.
//!
//! The rule `Q_h^p[phi s] = T_h^0[phi s] + A_h^p[phi]` adds to the punctured
//! trapezoidal sum a correction supported on a small stencil around the
//! singularity. Its weights come from a moment-matching linear system whose
//! right-hand side is obtained by Richardson extrapolation.

pub mod convergence;
pub mod ddouble;
pub mod error;
pub mod kernel;
pub mod lattice;
pub mod multiindex;
pub mod quadrature;
pub mod special;
pub mod sphere;
pub mod verify;
pub mod weights;

pub use ddouble::DoubleDouble;
pub use error::{Error, Result};
pub use kernel::{
    make_monomial_kernel, s1, s2, validate_kernel, KernelConfig, KernelRegistry, KernelSpec, MonomialKernel, ValidationReport,
};
pub use lattice::{punctured_trapezoid, truncation_radius_for, Decay, LatticeSumRequest};
pub use quadrature::{builtin_phi, correction_term, integrate, QuadratureResult, RegularPart, J1, J2};
pub use convergence::{loglog_slope, run_convergence, run_convergence_with, ConvergencePoint, ConvergenceReport};
pub use multiindex::{enumerate_grid, orbit, CorrectionGrid, MultiIndex, SignedLatticePoint};
pub use weights::{
    assemble_k, compute_weights, moments, rhs_c, richardson_limit, solve_weights, verify_block_structure,
    CoefficientMatrix, ReferenceMollifier, SolveOptions, WeightTable,
};
