//! Default numeric tolerances and the runtime-adjustable subset.
//!
//! Most tolerances are fixed contracts of individual operations and live
//! here as constants. The handful that sit on decision boundaries
//! (certificates, feasibility windows) are collected in [`Tolerances`] so a
//! caller can tighten or loosen them per problem.

/// Relative symmetry admission: `max |M_ij − M_ji| ≤ SYMMETRY · (1 + max |M_ij|)`.
pub const SYMMETRY: f64 = 1e-12;

/// Spectral factorization reconstruction bound, relative to `1 + ‖M‖`.
pub const RECONSTRUCT: f64 = 1e-10;

/// Base absolute tolerance for majorization prefix comparisons; scaled by
/// `1 + max |entry|` of the compared vectors at the call sites.
pub const MAJORIZATION: f64 = 1e-9;

/// Entries of a doubly stochastic matrix may undershoot zero by round-off
/// up to this much; anything lower is rejected.
pub const DS_NEGATIVE: f64 = -1e-12;

/// Row/column sums of a doubly stochastic matrix must be within this of 1.
pub const DS_SUM: f64 = 1e-10;

/// Support threshold for the Birkhoff matching loop, and the residual mass
/// at which the greedy loop stops.
pub const BIRKHOFF_RESIDUAL: f64 = 1e-12;

/// Birkhoff terms lighter than this are dropped during synthesis.
pub const NEGLIGIBLE_WEIGHT: f64 = 1e-12;

/// Relative gap for deciding a generator spectrum matches the prescribed one.
pub const ISOSPECTRAL: f64 = 1e-9;

/// Endpoint error allowed between a simulated schedule and its target.
pub const ENDPOINT: f64 = 1e-8;

/// Slack on the feasibility comparison `t1 + t2 ≤ T`.
pub const TIME_SLACK: f64 = 1e-12;

/// Log-norm growth audit slack per sample interval.
pub const NORM_GROWTH: f64 = 1e-8;

/// Tolerances that gate verdicts, overridable per call.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Majorization prefix-sum comparisons (absolute, pre-scaling).
    pub majorization: f64,
    /// Isotropy test `‖Σ − (tr Σ/n)I‖_F ≤ isotropy · tr Σ`.
    pub isotropy: f64,
    /// Relative mismatch allowed between `det(Σ_0)^{1/n}` and `det(Σ_T)^{1/n}`.
    pub det_match: f64,
    /// Endpoint error allowed when verifying schedules by simulation.
    pub endpoint: f64,
    /// Spectrum comparison for isospectrality checks.
    pub isospectral: f64,
    /// Slack on `t1 + t2 ≤ T`.
    pub time_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            majorization: MAJORIZATION,
            isotropy: 1e-9,
            det_match: 1e-9,
            endpoint: ENDPOINT,
            isospectral: ISOSPECTRAL,
            time_slack: TIME_SLACK,
        }
    }
}

impl Tolerances {
    /// Set a tolerance by name; names mirror the struct fields.
    pub fn set(&mut self, name: &str, value: f64) -> crate::Result<()> {
        match name {
            "majorization" => self.majorization = value,
            "isotropy" => self.isotropy = value,
            "det_match" => self.det_match = value,
            "endpoint" => self.endpoint = value,
            "isospectral" => self.isospectral = value,
            "time_slack" => self.time_slack = value,
            other => {
                return Err(crate::Error::InvalidInput(format!(
                    "unknown tolerance name `{other}` (expected one of: majorization, \
                     isotropy, det_match, endpoint, isospectral, time_slack)"
                )))
            }
        }
        Ok(())
    }
}
