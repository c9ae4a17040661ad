//! Shared numerical tolerances.

/// Entrywise agreement for measures, kernels and plans.
pub const ENTRY: f64 = 1e-12;
/// Total mass balance between marginals.
pub const MASS: f64 = 1e-10;
/// Primal and dual feasibility residuals reported by the LP solver.
pub const FEAS: f64 = 1e-9;
/// Relative duality gap accepted on optimal solutions.
pub const GAP: f64 = 1e-7;
/// Minimum margin a Farkas certificate must exhibit.
pub const FARKAS: f64 = 1e-9;
/// Readers clamp negative entries above this threshold to zero.
pub const READ_CLAMP: f64 = 1e-9;

/// Default solver tolerance, overridable through `VECOT_TOL`.
pub fn default_tol() -> f64 {
    std::env::var("VECOT_TOL")
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t >= 0.0)
        .unwrap_or(GAP)
}

/// Relative comparison scaled by `1 + |reference|`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}
