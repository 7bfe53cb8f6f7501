//! Scalar resolvents s_μ(t) solving s(t) = 1 − μ ∫₀ᵗ a(t−r) s(r) dr, computed
//! either by product-trapezoid time stepping or by numerical Laplace
//! inversion of ŝ_μ(λ) = 1/(λ + μ ĝ(λ)), and the diagonal operator
//! resolvent S(t) built from them.

mod smoothing;
mod table;
mod talbot;
mod volterra;

pub use smoothing::{
    fit_resolvent_constants, fit_smoothing_rate, log_continuity_ratios, operator_smoothing_norm,
    probe_departure_time, resolvent_values, smoothing_norm, ResolventConstants, SmoothingFit,
};
pub use table::{write_tables_csv, Method, ScalarResolventTable, CSV_HEADER};
pub use talbot::{
    resolvent_integral_talbot, scalar_resolvent_talbot, scalar_resolvent_talbot_detailed, scalar_resolvent_talbot_many,
    talbot_invert,
    TalbotOptions, TalbotResult,
};
pub use volterra::{scalar_resolvent_volterra, volterra_tables, VolterraWeights, OVERFLOW_LIMIT};
pub(crate) use volterra::grid_steps;
