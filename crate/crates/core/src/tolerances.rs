//! Pinned residual thresholds.
//!
//! Three regimes: purely algebraic evaluations (rounding only), quantities
//! that need one finite-difference level, and quantities stacked on two or
//! three levels of differentiation.

/// Split-quaternion and ε-complex arithmetic.
pub const ALGEBRA: f64 = 1e-12;

/// Matrix identities evaluated in closed form.
pub const ALGEBRAIC: f64 = 1e-10;

/// Identities on randomly generated shape tensors, where products of three or
/// four matrices accumulate rounding.
pub const ALGEBRAIC_LOOSE: f64 = 1e-9;

/// One level of finite differencing.
pub const FD_FIRST: f64 = 1e-4;

/// Two or more stacked finite-difference levels.
pub const FD_SECOND: f64 = 1e-3;

/// Relative singular-value cutoff for rank decisions.
pub const RANK: f64 = 1e-8;

/// Pivot cutoff in pseudo-orthonormalisation.
pub const PIVOT: f64 = 1e-8;

/// Exact structural checks on flat examples (linear maps, constant fields).
pub const FLAT_EXACT: f64 = 1e-6;

/// Fundamental identity and shape-operator checks on the graph family.
pub const GRAPH_SECOND_ORDER: f64 = 1e-5;

/// Relative gate on `‖R_fd − ν̂R₀‖ / ‖R_fd‖` for model charts.
pub const CHART_GATE: f64 = 1e-3;

/// Threshold below which the reduced scalar curvature is treated as zero.
pub const NU_ZERO: f64 = 1e-6;

/// Default finite-difference step (scaled by `max(1, |x_i|)`).
///
/// All first derivatives use the fourth-order five-point stencil, whose
/// truncation/rounding optimum sits near `1e-3`.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
