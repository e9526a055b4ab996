//! Construction of explicit piecewise-constant isospectral control
//! schedules realizing `Reachable` certificates.
//!
//! The engine behind every construction is the same: from an isotropic
//! state `cI`, the target's log-eigenvalue vector equals `2T·P·λ_D` for
//! some doubly stochastic `P` (shifted by `log c`); decomposing `P` into
//! permutations turns the steering into a mixture of commuting generators
//! `W Π D Πᵀ Wᵀ`, one segment per permutation, all diagonal in the target
//! eigenbasis `W`. Steering *to* the identity is the time reversal of the
//! same construction, and general endpoint pairs go through `cI` in two
//! phases.
//!
//! Within a phase the generators commute, so only total durations matter
//! for the endpoint. Segments are ordered palindromically (half of each
//! mixture component on each side of the smallest one); this symmetric
//! arrangement makes the phase midpoint carry exactly half of the phase's
//! net log-eigenvalue motion, which is also how the mid-phase states are
//! reported.

use nalgebra::DMatrix;

use crate::calculus::{sym_eig, trace_normalize, Covariance, SpectrumD, SteeringProblem, SymmetricMatrix};
use crate::error::{Error, Result};
use crate::majorization::{birkhoff_decompose, hlp_transfer_matrix, permute_spectrum, Permutation};
use crate::reachability::{certify_with, identity_reachable_with, ReachabilityCertificate, Reason, Verdict};
use crate::tol::{self, Tolerances};

/// One piece of a piecewise-constant control law.
#[derive(Debug, Clone)]
pub struct ControlSegment {
    pub duration: f64,
    pub generator: SymmetricMatrix,
}

/// An ordered piecewise-constant control law, tagged with the spectrum its
/// generators are meant to carry.
#[derive(Debug, Clone)]
pub struct ControlSchedule {
    segments: Vec<ControlSegment>,
    spectrum: SpectrumD,
}

impl ControlSchedule {
    /// Validates durations and per-segment isospectrality.
    pub fn new(segments: Vec<ControlSegment>, spectrum: SpectrumD) -> Result<Self> {
        let schedule = Self::lenient(segments, spectrum)?;
        for (i, seg) in schedule.segments.iter().enumerate() {
            if !generator_matches_spectrum(&seg.generator, &schedule.spectrum, tol::ISOSPECTRAL) {
                return Err(Error::InvalidInput(format!(
                    "segment {i} generator is not isospectral to the prescribed spectrum"
                )));
            }
        }
        Ok(schedule)
    }

    /// Validates shapes and durations only. Lets deliberately
    /// non-isospectral schedules through, e.g. for simulation of external
    /// documents; use [`verify_isospectral`] to test them.
    pub fn lenient(segments: Vec<ControlSegment>, spectrum: SpectrumD) -> Result<Self> {
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.duration > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "segment {i} duration must be positive, got {}",
                    seg.duration
                )));
            }
            if seg.generator.dim() != spectrum.len() {
                return Err(Error::DimensionMismatch {
                    expected: spectrum.len(),
                    found: seg.generator.dim(),
                });
            }
        }
        Ok(ControlSchedule { segments, spectrum })
    }

    pub fn empty(spectrum: SpectrumD) -> Self {
        ControlSchedule {
            segments: Vec::new(),
            spectrum,
        }
    }

    pub fn segments(&self) -> &[ControlSegment] {
        &self.segments
    }

    pub fn spectrum(&self) -> &SpectrumD {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// The time-reversed schedule: segments in reverse order with negated
    /// generators. Steers the original target back to the original start.
    pub fn reversed_negated(&self) -> ControlSchedule {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|seg| ControlSegment {
                duration: seg.duration,
                generator: seg.generator.negated(),
            })
            .collect();
        ControlSchedule {
            segments,
            spectrum: self.spectrum.negated(),
        }
    }

    fn concat(mut self, mut other: ControlSchedule) -> ControlSchedule {
        self.segments.append(&mut other.segments);
        self
    }
}

fn generator_matches_spectrum(g: &SymmetricMatrix, d: &SpectrumD, tol: f64) -> bool {
    let (eigs, _) = sym_eig(g);
    eigs.iter()
        .zip(d.values().iter())
        .all(|(a, b)| (a - b).abs() <= tol)
}

/// True iff every segment generator carries the prescribed eigenvalues.
pub fn verify_isospectral(schedule: &ControlSchedule, d: &SpectrumD) -> bool {
    schedule.dim() == d.len()
        && schedule
            .segments
            .iter()
            .all(|seg| generator_matches_spectrum(&seg.generator, d, tol::ISOSPECTRAL))
}

/// Mixture components of one phase: Birkhoff weight and permutation per
/// commuting generator.
pub type PhaseTerms = Vec<(f64, Permutation)>;

/// Bookkeeping attached to a synthesized schedule: the isotropic waypoint,
/// the phase split, and the Birkhoff mixture of each phase. The phase-1
/// terms describe the time-reversed contraction subproblem.
#[derive(Debug, Clone)]
pub struct SynthesisAudit {
    pub c: f64,
    pub t_split: f64,
    pub phase1: PhaseTerms,
    pub phase2: PhaseTerms,
}

/// A schedule plus the audit trail of its construction.
#[derive(Debug, Clone)]
pub struct SynthesizedSchedule {
    pub schedule: ControlSchedule,
    pub audit: SynthesisAudit,
}

/// Palindromic arrangement of mixture components: descending-weight halves
/// on both sides of the (whole) lightest component. The midpoint of the
/// phase then splits every component's duration in half, so exactly half
/// of the phase's net log-eigenvalue motion has happened there.
fn palindrome_segments(mut parts: Vec<(f64, SymmetricMatrix)>) -> Vec<ControlSegment> {
    parts.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("non-finite duration"));
    if parts.len() <= 1 {
        return parts
            .into_iter()
            .map(|(duration, generator)| ControlSegment {
                duration,
                generator,
            })
            .collect();
    }
    let last = parts.len() - 1;
    let mut segments: Vec<ControlSegment> = parts[..last]
        .iter()
        .map(|(d, g)| ControlSegment {
            duration: d / 2.0,
            generator: g.clone(),
        })
        .collect();
    segments.push(ControlSegment {
        duration: parts[last].0,
        generator: parts[last].1.clone(),
    });
    for (d, g) in parts[..last].iter().rev() {
        segments.push(ControlSegment {
            duration: d / 2.0,
            generator: g.clone(),
        });
    }
    segments
}

fn from_identity_with_terms(
    c: f64,
    sigma_t: &Covariance,
    d: &SpectrumD,
    horizon: f64,
    tols: &Tolerances,
) -> Result<(ControlSchedule, PhaseTerms)> {
    if !identity_reachable_with(c, d, horizon, sigma_t, tols)? {
        return Err(Error::Infeasible(format!(
            "target is not reachable from {c}·I in time {horizon} with the prescribed spectrum"
        )));
    }
    if horizon <= 0.0 {
        // reachability at zero horizon forces the target to equal cI
        return Ok((ControlSchedule::empty(d.clone()), Vec::new()));
    }
    let (lam_t, w) = sym_eig(sigma_t.as_symmetric());
    let x = lam_t.map(f64::ln).add_scalar(-c.ln());
    let y = d.values() * (2.0 * horizon);
    let p = hlp_transfer_matrix(&y, &x)?;
    let decomposition = birkhoff_decompose(&p)?;

    let mut terms: PhaseTerms = decomposition
        .terms()
        .iter()
        .filter(|(weight, _)| *weight > tol::NEGLIGIBLE_WEIGHT)
        .cloned()
        .collect();
    if terms.is_empty() {
        return Err(Error::NumericalDegeneracy(
            "Birkhoff decomposition produced no usable terms".into(),
        ));
    }
    // dropped dust is absorbed by rescaling so the phase keeps its length
    let total_weight: f64 = terms.iter().map(|(w, _)| w).sum();
    let parts: Vec<(f64, SymmetricMatrix)> = terms
        .iter()
        .map(|(weight, perm)| {
            let mixed = permute_spectrum(d, perm).expect("permutation size matches spectrum");
            let generator = SymmetricMatrix::from_product(
                &w * DMatrix::from_diagonal(&mixed) * w.transpose(),
            );
            (weight / total_weight * horizon, generator)
        })
        .collect();
    let schedule = ControlSchedule::new(palindrome_segments(parts), d.clone())?;
    for (weight, _) in terms.iter_mut() {
        *weight /= total_weight;
    }
    Ok((schedule, terms))
}

/// Schedule steering `cI → Σ_T` in time `horizon`; requires the exact
/// isotropic-start reachability test to pass.
pub fn synthesize_from_identity(
    c: f64,
    sigma_t: &Covariance,
    d: &SpectrumD,
    horizon: f64,
) -> Result<ControlSchedule> {
    from_identity_with_terms(c, sigma_t, d, horizon, &Tolerances::default()).map(|(s, _)| s)
}

fn to_identity_with_terms(
    sigma0: &Covariance,
    c: f64,
    d: &SpectrumD,
    horizon: f64,
    tols: &Tolerances,
) -> Result<(ControlSchedule, PhaseTerms)> {
    // time reversal: reaching cI from Σ_0 with spectrum D is reaching Σ_0
    // from cI with the negated spectrum
    let (reversed, terms) = from_identity_with_terms(c, sigma0, &d.negated(), horizon, tols)
        .map_err(|e| match e {
            Error::Infeasible(_) => Error::Infeasible(format!(
                "{c}·I is not reachable from the start in time {horizon} with the prescribed spectrum"
            )),
            other => other,
        })?;
    let segments = reversed
        .reversed_negated()
        .segments()
        .to_vec();
    Ok((ControlSchedule::new(segments, d.clone())?, terms))
}

/// Schedule steering `Σ_0 → cI` in time `horizon`, built by reversing and
/// negating the schedule of the time-reversed subproblem.
pub fn synthesize_to_identity(
    sigma0: &Covariance,
    c: f64,
    d: &SpectrumD,
    horizon: f64,
) -> Result<ControlSchedule> {
    to_identity_with_terms(sigma0, c, d, horizon, &Tolerances::default()).map(|(s, _)| s)
}

/// Contract-then-inflate schedule for a two-phase witness `(c, t_split)`:
/// `Σ_0 → cI` over `[0, t_split]`, then `cI → Σ_T` over the rest.
pub fn synthesize_two_phase(
    problem: &SteeringProblem,
    c: f64,
    t_split: f64,
) -> Result<ControlSchedule> {
    two_phase_with_audit(problem, c, t_split, &Tolerances::default()).map(|s| s.schedule)
}

fn two_phase_with_audit(
    problem: &SteeringProblem,
    c: f64,
    t_split: f64,
    tols: &Tolerances,
) -> Result<SynthesizedSchedule> {
    if !(0.0..=problem.horizon + tols.time_slack).contains(&t_split) {
        return Err(Error::InvalidInput(format!(
            "t_split = {t_split} outside [0, {}]",
            problem.horizon
        )));
    }
    let (phase1, terms1) = if t_split > 0.0 {
        to_identity_with_terms(&problem.sigma0, c, &problem.spectrum, t_split, tols)?
    } else {
        (ControlSchedule::empty(problem.spectrum.clone()), Vec::new())
    };
    let t2 = (problem.horizon - t_split).max(0.0);
    let (phase2, terms2) = if t2 > 0.0 {
        from_identity_with_terms(c, &problem.sigma_t, &problem.spectrum, t2, tols)?
    } else {
        (ControlSchedule::empty(problem.spectrum.clone()), Vec::new())
    };
    Ok(SynthesizedSchedule {
        schedule: phase1.concat(phase2),
        audit: SynthesisAudit {
            c,
            t_split,
            phase1: terms1,
            phase2: terms2,
        },
    })
}

/// Certify a problem and, when the verdict is `Reachable`, construct a
/// schedule realizing it. Handles trace normalization transparently: the
/// returned schedule steers the *original* problem, its generators carrying
/// the original spectrum.
pub fn synthesize_certified(
    problem: &SteeringProblem,
) -> Result<(ReachabilityCertificate, Option<SynthesizedSchedule>)> {
    synthesize_certified_with(problem, &Tolerances::default())
}

pub fn synthesize_certified_with(
    problem: &SteeringProblem,
    tols: &Tolerances,
) -> Result<(ReachabilityCertificate, Option<SynthesizedSchedule>)> {
    let certificate = certify_with(problem, tols);
    if certificate.verdict != Verdict::Reachable {
        return Ok((certificate, None));
    }
    let p = trace_normalize(problem);
    let witness = certificate
        .witness
        .expect("reachable certificates carry a witness");

    let mut synthesized = match certificate.reason {
        Reason::IsotropicExact if witness.t_split == 0.0 => {
            let (schedule, terms) =
                from_identity_with_terms(witness.c, &p.sigma_t, &p.spectrum, p.horizon, tols)?;
            SynthesizedSchedule {
                schedule,
                audit: SynthesisAudit {
                    c: witness.c,
                    t_split: 0.0,
                    phase1: Vec::new(),
                    phase2: terms,
                },
            }
        }
        Reason::IsotropicExact => {
            let (schedule, terms) =
                to_identity_with_terms(&p.sigma0, witness.c, &p.spectrum, p.horizon, tols)?;
            SynthesizedSchedule {
                schedule,
                audit: SynthesisAudit {
                    c: witness.c,
                    t_split: p.horizon,
                    phase1: terms,
                    phase2: Vec::new(),
                },
            }
        }
        _ => two_phase_with_audit(&p, witness.c, witness.t_split, tols)?,
    };

    if !problem.spectrum.is_traceless() {
        // undo the normalization: shifting every generator back by tr(D)/n
        // restores the original spectrum and endpoint
        let alpha = problem.spectrum.trace() / problem.dim() as f64;
        let segments = synthesized
            .schedule
            .segments()
            .iter()
            .map(|seg| ControlSegment {
                duration: seg.duration,
                generator: seg.generator.plus_identity(alpha),
            })
            .collect();
        synthesized.schedule = ControlSchedule::new(segments, problem.spectrum.clone())?;
    }
    Ok((certificate, Some(synthesized)))
}
