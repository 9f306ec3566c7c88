//! Spline collocation for nonlinear boundary value problems driven by the
//! Riesz-Caputo fractional derivative of order `1 < alpha < 2`.

pub mod bspline;
pub mod collocation;
pub mod error;
pub mod fracops;
pub mod oracle;
pub mod problems;
pub mod specfun;

pub use bspline::{KnotVector, SplineBasis, TruncatedPowerExpansion, TruncatedPowerTerm};
pub use error::{Error, Result};
pub use fracops::{BasisCaputo, FractionalOrder, KernelIntegrator, QuadratureRule};
pub use collocation::{BoundaryCondition, NewtonOptions, ProblemSpec, SolveReport, SplineSolution};
