//! Explicit uniformly bounded orthonormal bases of the spaces `P_N` of
//! degree-`N` homogeneous holomorphic polynomials on the unit balls of C^2
//! and C^3, together with the numerical machinery to verify their
//! properties: exact orthonormality in the normalized-monomial frame,
//! flatness of the underlying sign and quadratic-phase sequences,
//! diophantine constants, exponential-sum cancellation, tile localization
//! of monomial mass, and sup-norm boundedness across degrees.
//!
//! All coefficient-space math is generic over the scalar type through the
//! [`Real`] trait (`f32` or `f64`); concrete `f64` aliases are exported at
//! the crate root and are what the CLI and the verification harness use.

pub mod basis;
pub mod cli;
pub mod error;
pub mod expsum;
pub mod geometry;
pub mod io;
pub mod monomial;
pub mod report;
pub mod scalar;
pub mod sequences;
pub mod supnorm;

pub use error::Error;
pub use scalar::Real;

pub use basis::{absorption, assemble, build_eta, build_phi2, build_psi, haar};
pub use basis::{AbsorptionMatrix, BasisMatrix, BlockTag, HaarMatrix};
pub use geometry::{
    enumerate_regions, fold, make_tile, reflect, Degree, GridPoint, MultiIndex, RegionLabel,
    TileShape,
};
pub use monomial::{
    eval_normalized_monomial, gram_deviation, inner_product, kernel_diag, mc_l2_norm,
    monomial_norm_sq, CoefficientVector, Dim, McEstimate, SpherePoint,
};
pub use sequences::{diophantine_min, flatness_ratio, quadratic_phase, rudin_shapiro};
pub use supnorm::{localization, scan_basis, sup_norm, torus_max, SupNormEstimate, SupNormOpts};
pub use expsum::{bump, mollified_sum, scaling_fit, ScalingFit, SumSpec, SumVariant, WeightKind};

/// Concrete `f64` instantiations of the generic core types.
pub type CoefficientVector64 = monomial::CoefficientVector<f64>;
pub type CoefficientVector32 = monomial::CoefficientVector<f32>;
pub type SpherePoint64 = monomial::SpherePoint<f64>;
pub type SpherePoint32 = monomial::SpherePoint<f32>;
pub type BasisMatrix64 = basis::BasisMatrix<f64>;
pub type BasisMatrix32 = basis::BasisMatrix<f32>;
pub type SupNormEstimate64 = supnorm::SupNormEstimate<f64>;
pub type SumSpec64 = expsum::SumSpec<f64>;
