//! Numerical tolerances shared across the crate.
//!
//! The CLI can override the three user-facing ones (`FORM`, `HOLONOMY`,
//! `RANK_RELATIVE`); everything else is fixed.

/// Max-abs entry of `A J A* - J` accepted for form preservation.
pub const FORM: f64 = 1e-9;

/// Entrywise tolerance for a projectively normalized holonomy to count as identity.
pub const HOLONOMY: f64 = 1e-8;

/// Singular values below `RANK_RELATIVE * sigma_max` are treated as zero.
pub const RANK_RELATIVE: f64 = 1e-6;

/// Minimum ratio between the last kept and first dropped singular value.
pub const RANK_GAP: f64 = 1e2;

/// Central finite-difference step for Jacobians.
pub const FD_STEP: f64 = 1e-6;

/// Agreement required between two angular invariants for a triple transport.
pub const INVARIANT_MATCH: f64 = 1e-9;

/// Relative size of `<Z,Z>` below which a vector counts as null.
pub const NULL_RELATIVE: f64 = 1e-9;

/// Threshold on `|Im(w conj z)|` in the commuting-translation test.
pub const COMMUTE: f64 = 1e-12;

/// Solver stopping rules.
pub const SOLVE_RESIDUAL: f64 = 1e-10;
pub const SOLVE_STEP: f64 = 1e-12;
pub const SOLVE_MAX_ITER: usize = 200;

/// Gradient norm at which the geometric center iteration stops.
pub const CENTER_GRADIENT: f64 = 1e-8;

/// `|(A - I)^3|` bound for unipotency.
pub const UNIPOTENT: f64 = 1e-8;
