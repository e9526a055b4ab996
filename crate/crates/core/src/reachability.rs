//! Reachability certificates for isospectral covariance steering.
//!
//! The decision layers, in the order the combined test applies them:
//!
//! 1. a necessary log-majorization condition on the forward problem, and a
//!    second one obtained from time-reversal symmetry (steering `Σ_0 → Σ_T`
//!    with spectrum `D` is equivalent to `Σ_T → Σ_0` with `−D`);
//! 2. an exact characterization when one endpoint is a multiple of the
//!    identity: from `Σ_0 = cI` the majorization
//!    `log λ(Σ_T) ≺ (log c)·1 + 2T·λ_D` is necessary *and* sufficient;
//! 3. a two-phase sufficient condition for general endpoints: contract
//!    `Σ_0` to `cI`, then inflate `cI` to `Σ_T`, each phase certified by
//!    the exact test above.
//!
//! These layers do not close the gap between necessary and sufficient in
//! general, so the combined verdict is tri-state: `Unreachable`,
//! `Reachable` (with a checkable witness), or an honest `Unknown`.

use nalgebra::DVector;

use crate::calculus::{trace_normalize, Covariance, SpectrumD, SteeringProblem};
use crate::error::{Error, Result};
use crate::majorization::majorizes;
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Unreachable,
    Reachable,
    Unknown,
}

/// Why the verdict came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    ForwardNecessaryFailed,
    ReverseNecessaryFailed,
    IsotropicExact,
    TwoPhase,
    Inconclusive,
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::ForwardNecessaryFailed => "forward-necessary-failed",
            Reason::ReverseNecessaryFailed => "reverse-necessary-failed",
            Reason::IsotropicExact => "isotropic-exact",
            Reason::TwoPhase => "two-phase",
            Reason::Inconclusive => "inconclusive",
        }
    }
}

/// Numeric witness backing a `Reachable` verdict: pass through `cI` at
/// time `t_split`, with the majorization prefix that binds tightest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub c: f64,
    pub t_split: f64,
    pub binding_prefix: usize,
}

/// One row of the prefix-sum audit trail: at order `k`, the compared
/// partial sums of the majorized side (`lhs`) and the majorizing side
/// (`rhs`); the condition requires `lhs ≤ rhs` for `k < n` and equality
/// at `k = n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefixAudit {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct ReachabilityCertificate {
    pub verdict: Verdict,
    pub reason: Reason,
    pub witness: Option<Witness>,
    pub forward_audit: Vec<PrefixAudit>,
    pub reverse_audit: Vec<PrefixAudit>,
}

/// Feasibility data of the two-phase (through-identity) construction.
#[derive(Debug, Clone, Copy)]
pub struct TwoPhaseWitness {
    pub c: f64,
    /// Minimum admissible duration of the contraction phase; the returned
    /// split time.
    pub t_split: f64,
    pub t1_min: f64,
    pub t2_min: f64,
    pub binding_k1: usize,
    pub binding_k2: usize,
}

/// Per-phase minimum durations for steering through a multiple of the
/// identity, and their sum.
#[derive(Debug, Clone, Copy)]
pub struct MinTimeBreakdown {
    pub c: f64,
    pub t1_min: f64,
    pub t2_min: f64,
    pub binding_k1: usize,
    pub binding_k2: usize,
}

impl MinTimeBreakdown {
    pub fn total(&self) -> f64 {
        self.t1_min + self.t2_min
    }
}

fn majorization_scale(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    1.0 + x
        .iter()
        .chain(y.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Descending prefix-sum audit rows for `x ≺ y` (both already descending).
fn prefix_audit(x: &DVector<f64>, y: &DVector<f64>) -> Vec<PrefixAudit> {
    let mut rows = Vec::with_capacity(x.len());
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for k in 0..x.len() {
        lhs += x[k];
        rhs += y[k];
        rows.push(PrefixAudit { k: k + 1, lhs, rhs });
    }
    rows
}

/// Index (1-based) where `rhs − lhs` is smallest: the prefix that binds.
fn tightest_prefix(audit: &[PrefixAudit]) -> usize {
    audit
        .iter()
        .min_by(|a, b| {
            (a.rhs - a.lhs)
                .partial_cmp(&(b.rhs - b.lhs))
                .expect("non-finite audit row")
        })
        .map(|row| row.k)
        .unwrap_or(1)
}

/// Right-hand side of the forward condition: `log λ↓(Σ_0) + 2T·λ_D↓`,
/// both vectors sorted descending before the addition.
fn forward_rhs(sigma0: &Covariance, spectrum: &SpectrumD, horizon: f64) -> DVector<f64> {
    sigma0.log_eigenvalues() + spectrum.values() * (2.0 * horizon)
}

/// Necessary condition on the forward problem:
/// `log λ(Σ_T) ≺ log λ↓(Σ_0) + 2T·λ_D↓`.
pub fn forward_necessary(problem: &SteeringProblem) -> bool {
    forward_necessary_with(problem, &Tolerances::default())
}

pub fn forward_necessary_with(problem: &SteeringProblem, tols: &Tolerances) -> bool {
    let x = problem.sigma_t.log_eigenvalues();
    let y = forward_rhs(&problem.sigma0, &problem.spectrum, problem.horizon);
    let tol = tols.majorization * majorization_scale(&x, &y);
    majorizes(&y, &x, tol).expect("equal dimensions by problem invariant")
}

/// Necessary condition on the time-reversed problem:
/// `log λ(Σ_0) ≺ log λ↓(Σ_T) + 2T·λ_{−D}↓`.
pub fn reverse_necessary(problem: &SteeringProblem) -> bool {
    reverse_necessary_with(problem, &Tolerances::default())
}

pub fn reverse_necessary_with(problem: &SteeringProblem, tols: &Tolerances) -> bool {
    let x = problem.sigma0.log_eigenvalues();
    let y = forward_rhs(&problem.sigma_t, &problem.spectrum.negated(), problem.horizon);
    let tol = tols.majorization * majorization_scale(&x, &y);
    majorizes(&y, &x, tol).expect("equal dimensions by problem invariant")
}

/// Exact reachability test from an isotropic start: `Σ_T` is reachable
/// from `cI` in time `horizon` iff `log λ(Σ_T) ≺ (log c)·1 + 2T·λ_D`.
pub fn identity_reachable(
    c: f64,
    spectrum: &SpectrumD,
    horizon: f64,
    sigma_t: &Covariance,
) -> Result<bool> {
    identity_reachable_with(c, spectrum, horizon, sigma_t, &Tolerances::default())
}

pub fn identity_reachable_with(
    c: f64,
    spectrum: &SpectrumD,
    horizon: f64,
    sigma_t: &Covariance,
    tols: &Tolerances,
) -> Result<bool> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("c must be positive, got {c}")));
    }
    if horizon < 0.0 {
        return Err(Error::InvalidInput(format!(
            "horizon must be nonnegative, got {horizon}"
        )));
    }
    if spectrum.len() != sigma_t.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma_t.dim(),
            found: spectrum.len(),
        });
    }
    let x = sigma_t.log_eigenvalues();
    let y = spectrum.values() * (2.0 * horizon) + DVector::from_element(spectrum.len(), c.ln());
    let tol = tols.majorization * majorization_scale(&x, &y);
    majorizes(&y, &x, tol)
}

/// Smallest `t ≥ 0` with `prefix_k(a) ≤ 2t·prefix_k(d)` for every proper
/// prefix `k`, together with the binding `k`. `a` and `d` are descending;
/// `a` must sum to ~0 (checked upstream through the determinant match).
/// Returns `None` when some constraint cannot be met at any `t`, which
/// happens only when a prefix of `d` vanishes while the matching prefix of
/// `a` is positive.
fn phase_min_time(a: &DVector<f64>, d: &DVector<f64>, tol: f64) -> Option<(f64, usize)> {
    let n = a.len();
    let d_scale = 1.0 + d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut best: Option<(f64, usize)> = None;
    let mut prefix_a = 0.0;
    let mut prefix_d = 0.0;
    for k in 0..n.saturating_sub(1) {
        prefix_a += a[k];
        prefix_d += d[k];
        let den = 2.0 * prefix_d;
        if den <= 1e-13 * d_scale {
            if prefix_a > tol {
                return None;
            }
            continue;
        }
        let ratio = prefix_a / den;
        match best {
            Some((value, _)) if ratio <= value => {}
            _ => best = Some((ratio, k + 1)),
        }
    }
    match best {
        Some((value, k)) => Some((value.max(0.0), k)),
        None => Some((0.0, 1)),
    }
}

/// Whether the two-phase construction `Σ_0 → cI → Σ_T` fits in the horizon.
///
/// The sum-equality constraint of majorization pins `c = det(Σ_0)^{1/n}`,
/// which must agree with `det(Σ_T)^{1/n}`; no search over `c` is needed.
/// Requires a traceless spectrum (trace-normalize the problem first).
pub fn two_phase_feasible(problem: &SteeringProblem) -> Result<Option<TwoPhaseWitness>> {
    two_phase_feasible_with(problem, &Tolerances::default())
}

pub fn two_phase_feasible_with(
    problem: &SteeringProblem,
    tols: &Tolerances,
) -> Result<Option<TwoPhaseWitness>> {
    if !problem.spectrum.is_traceless() {
        return Err(Error::InvalidInput(
            "two-phase feasibility requires a traceless spectrum; trace-normalize first".into(),
        ));
    }
    let n = problem.dim() as f64;
    let log_c = problem.sigma0.determinant().ln() / n;
    let log_c_t = problem.sigma_t.determinant().ln() / n;
    if (log_c - log_c_t).abs() > tols.det_match {
        return Ok(None);
    }
    let c = log_c.exp();

    let a1 = problem.sigma0.log_eigenvalues().add_scalar(-log_c);
    let a2 = problem.sigma_t.log_eigenvalues().add_scalar(-log_c);
    let scale = 1.0 + a1
        .iter()
        .chain(a2.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = tols.majorization * scale;

    if problem.spectrum.max_abs() <= 1e-13 {
        // zero spectrum: nothing can move, both endpoints must already be cI
        let still = a1.amax() <= tol && a2.amax() <= tol;
        return Ok(still.then_some(TwoPhaseWitness {
            c,
            t_split: 0.0,
            t1_min: 0.0,
            t2_min: 0.0,
            binding_k1: 1,
            binding_k2: 1,
        }));
    }

    let neg = problem.spectrum.negated();
    let Some((t1_min, binding_k1)) = phase_min_time(&a1, neg.values(), tol) else {
        return Ok(None);
    };
    let Some((t2_min, binding_k2)) = phase_min_time(&a2, problem.spectrum.values(), tol) else {
        return Ok(None);
    };
    if t1_min + t2_min <= problem.horizon + tols.time_slack {
        Ok(Some(TwoPhaseWitness {
            c,
            t_split: t1_min,
            t1_min,
            t2_min,
            binding_k1,
            binding_k2,
        }))
    } else {
        Ok(None)
    }
}

/// Minimum total time of the through-identity construction, phase by phase.
/// Finite for any traceless nonzero spectrum because every proper prefix
/// sum of `λ_D↓` is then strictly positive. Reported as an upper bound on
/// the true minimum steering time; the theory does not claim it is tight.
pub fn min_time_breakdown(
    sigma0: &Covariance,
    sigma_t: &Covariance,
    spectrum: &SpectrumD,
) -> Result<MinTimeBreakdown> {
    min_time_breakdown_with(sigma0, sigma_t, spectrum, &Tolerances::default())
}

pub fn min_time_breakdown_with(
    sigma0: &Covariance,
    sigma_t: &Covariance,
    spectrum: &SpectrumD,
    tols: &Tolerances,
) -> Result<MinTimeBreakdown> {
    if sigma0.dim() != sigma_t.dim() || spectrum.len() != sigma0.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma0.dim(),
            found: sigma_t.dim().max(spectrum.len()),
        });
    }
    if !spectrum.is_traceless() {
        return Err(Error::InvalidInput(
            "minimum through-identity time requires a traceless spectrum".into(),
        ));
    }
    let n = sigma0.dim() as f64;
    let log_c = sigma0.determinant().ln() / n;
    let log_c_t = sigma_t.determinant().ln() / n;
    if (log_c - log_c_t).abs() > tols.det_match {
        return Err(Error::InvalidInput(format!(
            "determinants differ: det(Σ_0)^(1/n) = {:.6e}, det(Σ_T)^(1/n) = {:.6e}",
            log_c.exp(),
            log_c_t.exp()
        )));
    }
    let c = log_c.exp();

    if spectrum.max_abs() <= 1e-13 {
        let diff = (sigma0.matrix() - sigma_t.matrix()).norm();
        let scale = 1.0 + sigma0.matrix().norm();
        if diff <= tols.majorization * scale {
            return Ok(MinTimeBreakdown {
                c,
                t1_min: 0.0,
                t2_min: 0.0,
                binding_k1: 1,
                binding_k2: 1,
            });
        }
        return Err(Error::Infeasible(
            "zero spectrum cannot move the covariance".into(),
        ));
    }

    let a1 = sigma0.log_eigenvalues().add_scalar(-log_c);
    let a2 = sigma_t.log_eigenvalues().add_scalar(-log_c);
    let scale = 1.0 + a1
        .iter()
        .chain(a2.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = tols.majorization * scale;
    let neg = spectrum.negated();
    let (t1_min, binding_k1) = phase_min_time(&a1, neg.values(), tol).ok_or_else(|| {
        Error::Infeasible("a prefix of the spectrum vanishes against positive log-eigenvalue mass".into())
    })?;
    let (t2_min, binding_k2) = phase_min_time(&a2, spectrum.values(), tol).ok_or_else(|| {
        Error::Infeasible("a prefix of the spectrum vanishes against positive log-eigenvalue mass".into())
    })?;
    Ok(MinTimeBreakdown {
        c,
        t1_min,
        t2_min,
        binding_k1,
        binding_k2,
    })
}

/// Minimum total time to steer `Σ_0 → Σ_T` through a multiple of the
/// identity (the sum of the two per-phase minima).
pub fn min_through_identity_time(
    sigma0: &Covariance,
    sigma_t: &Covariance,
    spectrum: &SpectrumD,
) -> Result<f64> {
    Ok(min_time_breakdown(sigma0, sigma_t, spectrum)?.total())
}

/// Combined tri-state certificate.
///
/// The problem is trace-normalized first (verdicts are invariant under the
/// normalization), then: `Unreachable` if either necessary condition
/// fails; `Reachable` via the exact isotropic test when an endpoint is a
/// multiple of the identity, or via the two-phase construction otherwise;
/// `Unknown` when no sufficiency layer fires. The toolkit never guesses on
/// `Unknown`: the gap between the layers is real.
pub fn certify(problem: &SteeringProblem) -> ReachabilityCertificate {
    certify_with(problem, &Tolerances::default())
}

pub fn certify_with(problem: &SteeringProblem, tols: &Tolerances) -> ReachabilityCertificate {
    let p = trace_normalize(problem);
    let n = p.dim() as f64;

    let x_fwd = p.sigma_t.log_eigenvalues();
    let y_fwd = forward_rhs(&p.sigma0, &p.spectrum, p.horizon);
    let forward_audit = prefix_audit(&x_fwd, &y_fwd);

    let x_rev = p.sigma0.log_eigenvalues();
    let y_rev = forward_rhs(&p.sigma_t, &p.spectrum.negated(), p.horizon);
    let reverse_audit = prefix_audit(&x_rev, &y_rev);

    if !forward_necessary_with(&p, tols) {
        return ReachabilityCertificate {
            verdict: Verdict::Unreachable,
            reason: Reason::ForwardNecessaryFailed,
            witness: None,
            forward_audit,
            reverse_audit,
        };
    }
    if !reverse_necessary_with(&p, tols) {
        return ReachabilityCertificate {
            verdict: Verdict::Unreachable,
            reason: Reason::ReverseNecessaryFailed,
            witness: None,
            forward_audit,
            reverse_audit,
        };
    }

    if p.sigma0.is_isotropic(tols.isotropy) {
        let c = p.sigma0.trace() / n;
        if identity_reachable_with(c, &p.spectrum, p.horizon, &p.sigma_t, tols)
            .expect("dimensions agree and c > 0")
        {
            return ReachabilityCertificate {
                verdict: Verdict::Reachable,
                reason: Reason::IsotropicExact,
                witness: Some(Witness {
                    c,
                    t_split: 0.0,
                    binding_prefix: tightest_prefix(&forward_audit),
                }),
                forward_audit,
                reverse_audit,
            };
        }
    }
    if p.sigma_t.is_isotropic(tols.isotropy) {
        let c = p.sigma_t.trace() / n;
        if identity_reachable_with(c, &p.spectrum.negated(), p.horizon, &p.sigma0, tols)
            .expect("dimensions agree and c > 0")
        {
            return ReachabilityCertificate {
                verdict: Verdict::Reachable,
                reason: Reason::IsotropicExact,
                witness: Some(Witness {
                    c,
                    t_split: p.horizon,
                    binding_prefix: tightest_prefix(&reverse_audit),
                }),
                forward_audit,
                reverse_audit,
            };
        }
    }

    if let Some(w) = two_phase_feasible_with(&p, tols).expect("spectrum traceless after normalization")
    {
        return ReachabilityCertificate {
            verdict: Verdict::Reachable,
            reason: Reason::TwoPhase,
            witness: Some(Witness {
                c: w.c,
                t_split: w.t_split,
                binding_prefix: w.binding_k1,
            }),
            forward_audit,
            reverse_audit,
        };
    }

    ReachabilityCertificate {
        verdict: Verdict::Unknown,
        reason: Reason::Inconclusive,
        witness: None,
        forward_audit,
        reverse_audit,
    }
}
