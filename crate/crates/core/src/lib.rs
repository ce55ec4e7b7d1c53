//! Discrete variational tools for the one-dimensional p-Laplacian: the first
//! eigenpair, the first nontrivial Fucik curve via a mountain-pass string
//! method on the `L^p` sphere, a region classifier for the `(a, b)` plane and
//! multiplicity solvers for asymptotically Fucik boundary value problems.
//!
//! Every routine is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common case.

// Negated comparisons reject NaN; index loops mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bvp;
pub mod checks;
pub mod eigen;
pub mod energy;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod minimax;
pub mod scalar;
pub mod solvers;
pub mod spectrum;
pub mod sphere;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use scalar::Real;

/// Crate version recorded in artifact provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Domain = grid::Domain<f64>;
pub type Field = grid::Field<f64>;
pub type Exponent = grid::Exponent<f64>;
pub type SpherePoint = sphere::SpherePoint<f64>;
pub type Path = sphere::Path<f64>;
pub type FucikParams = energy::FucikParams<f64>;
pub type ShiftParam = energy::ShiftParam<f64>;
pub type PerturbationSpec = energy::PerturbationSpec<f64>;
pub type EigenPair = eigen::EigenPair<f64>;
pub type MinimaxConfig = minimax::MinimaxConfig<f64>;
pub type MinimaxResult = minimax::MinimaxResult<f64>;
pub type CurvePoint = spectrum::CurvePoint<f64>;
pub type SpectrumData = spectrum::SpectrumData<f64>;
pub type Nonlinearity = bvp::Nonlinearity<f64>;
pub type SolveReport = bvp::SolveReport<f64>;
pub type SolveConfig = bvp::SolveConfig<f64>;

pub mod f32 {
    //! Single-precision aliases.
    pub type Domain = crate::grid::Domain<f32>;
    pub type Field = crate::grid::Field<f32>;
    pub type Exponent = crate::grid::Exponent<f32>;
    pub type SpherePoint = crate::sphere::SpherePoint<f32>;
    pub type FucikParams = crate::energy::FucikParams<f32>;
    pub type EigenPair = crate::eigen::EigenPair<f32>;
    pub type MinimaxConfig = crate::minimax::MinimaxConfig<f32>;
}
