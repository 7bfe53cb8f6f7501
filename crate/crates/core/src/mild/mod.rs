//! Mild solutions of u′ = ∫₀ᵗ g(t−s) A u(s) ds + f(t, u) in spectral coordinates.
//!
//! Mode m obeys û_m(t) = s_m(t) û_{0,m} + ∫₀ᵗ s_m(t−r) f̂_m(r) dr with s_m the
//! scalar resolvent at μ_m. The integral is a trapezoid sum on a uniform grid;
//! the implicit endpoint value is found by fixed-point iteration.

mod budget;
mod export;
mod problem;
mod profile;
mod solver;

pub use budget::{certified_existence_time, lipschitz_dependence, CertifiedWindow, LipschitzReport, WellPosednessBudget};
pub use export::{write_coefficient_dump, write_solution_csv, SOLUTION_CSV_HEADER};
pub use problem::{ForcingPath, MildProblem, NonlinearityKind, NonlinearitySpec, TableSource};
pub use profile::{eps_regular_profile, EpsProfile, DECAY_RATIO};
pub use solver::{continue_mild, mode_resolvents, solve_mild, MildSolution, SmallTimeDiagnostics, SolveStatus};
