//! Resolvent families for evolution equations with memory,
//!
//! ```text
//! u′(t) = ∫₀ᵗ g(t−s) A u(s) ds + f(t, u(t)),
//! ```
//!
//! on the Dirichlet Laplacian of an interval or rectangle, for kernels
//! g(t) = Σ kᵢ t^{αᵢ−1} e^{cᵢ t}.
//!
//! The crate computes scalar resolvents by time stepping and by contour
//! inversion, measures their smoothing on the interpolation scale X_α, solves
//! mild formulations of semilinear problems with blow-up detection, and
//! evaluates the exponent arithmetic that decides when such problems are
//! well posed.
//!
//! ```
//! use memres_core::{scalar_resolvent_volterra, MaterialKernel};
//!
//! let table = scalar_resolvent_volterra(&MaterialKernel::hookean(), 4.0, 1e-3, 1.0).unwrap();
//! let t = table.time(500);
//! assert!((table.values[500] - (2.0 * t).cos()).abs() < 1e-5);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod kernel;
pub mod mild;
pub mod quadrature;
pub mod resolvent;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use exponents::{EpsRegularParams, Openness};
pub use kernel::{check_hypotheses, MaterialKernel, SectorReport, Term, Verdict};
pub use mild::{solve_mild, MildProblem, MildSolution, NonlinearitySpec, SolveStatus};
pub use resolvent::{scalar_resolvent_talbot, scalar_resolvent_volterra, ScalarResolventTable, TalbotOptions};
pub use spectral::{build_operator, OperatorConfig, ScaleVector, SpectralOperator};
