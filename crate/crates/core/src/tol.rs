//! Numerical tolerances shared by every module.
//!
//! `TAU_METRIC` governs triangle-inequality and segment membership checks
//! (relative). `tau_lp()` governs LP residuals, duality gaps and every
//! certificate comparison (absolute). The LP tolerance can be overridden
//! through the `FREEGEO_TOL` environment variable; that hook exists for
//! tests that probe the sensitivity of certificates and is read once.

use std::sync::OnceLock;

/// Relative tolerance for metric axioms and segment membership.
pub const TAU_METRIC: f64 = 1e-9;

/// Default absolute tolerance for LP residuals and certificates.
pub const TAU_LP_DEFAULT: f64 = 1e-9;

/// Name of the environment variable overriding [`tau_lp`].
pub const TOL_ENV: &str = "FREEGEO_TOL";

static TAU_LP: OnceLock<f64> = OnceLock::new();

/// Absolute LP tolerance in effect for this process.
pub fn tau_lp() -> f64 {
    *TAU_LP.get_or_init(|| {
        std::env::var(TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(TAU_LP_DEFAULT)
    })
}

/// Snapshot of the tolerances, embedded in every report.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub metric: f64,
    pub lp: f64,
}

impl Tolerances {
    pub fn current() -> Self {
        Self {
            metric: TAU_METRIC,
            lp: tau_lp(),
        }
    }
}
