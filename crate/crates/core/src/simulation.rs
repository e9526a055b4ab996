//! Ground-truth propagation of the covariance flow `Σ̇ = AΣ + ΣA` and the
//! state-transition factor `Ẋ = AX`, plus the runtime checks that tie the
//! simulated trajectories back to the theory: the determinant (Liouville)
//! law and the compound-norm growth audit.
//!
//! Piecewise-constant schedules are propagated exactly, one spectral
//! exponential per segment; the fixed-step RK4 integrator exists to
//! cross-validate that closed form and to handle smoothly time-varying
//! generators.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::calculus::{spd_sqrt, sym_eig, Covariance, SpectrumD, SymmetricMatrix};
use crate::compound::compound_top_singular_value;
use crate::error::{Error, Result};
use crate::synthesis::ControlSchedule;
use crate::tol;

/// Samples taken inside each segment when no explicit count is given;
/// endpoints are always computed at full precision separately.
pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 32;

/// Time-stamped covariance samples, optionally with the state-transition
/// factor `X_t` satisfying `Σ_t = X_t X_tᵀ` (gauge-fixed by
/// `X_0 = Σ_0^{1/2}`).
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    covariances: Vec<Covariance>,
    transitions: Option<Vec<DMatrix<f64>>>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn covariances(&self) -> &[Covariance] {
        &self.covariances
    }

    pub fn transitions(&self) -> Option<&[DMatrix<f64>]> {
        self.transitions.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn endpoint(&self) -> &Covariance {
        self.covariances.last().expect("trajectories are non-empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectories are non-empty")
    }

    pub fn determinants(&self) -> Vec<f64> {
        self.covariances.iter().map(|c| c.determinant()).collect()
    }

    /// Largest relative deviation of `det Σ_t` from
    /// `det Σ_0 · e^{2·tr(D)·t}` over all samples.
    pub fn determinant_drift(&self, trace_d: f64) -> f64 {
        let det0 = self.covariances[0].determinant();
        self.times
            .iter()
            .zip(self.covariances.iter())
            .map(|(t, c)| {
                let expected = det0 * (2.0 * trace_d * t).exp();
                ((c.determinant() - expected) / expected).abs()
            })
            .fold(0.0f64, f64::max)
    }
}

/// `e^{hA} Σ e^{hA}`: the exact covariance flow under a constant generator.
pub fn propagate_constant(sigma: &Covariance, a: &SymmetricMatrix, h: f64) -> Result<Covariance> {
    if h < 0.0 {
        return Err(Error::InvalidInput(format!(
            "propagation time must be nonnegative, got {h}"
        )));
    }
    if sigma.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: a.dim(),
        });
    }
    let e = crate::calculus::sym_exp(&a.scaled(h));
    Covariance::new(e.matrix() * sigma.matrix() * e.matrix())
}

/// Exact covariance at an arbitrary instant of a piecewise-constant
/// schedule (partial propagation through the segment containing `t`).
pub fn covariance_at(sigma0: &Covariance, schedule: &ControlSchedule, t: f64) -> Result<Covariance> {
    let total = schedule.total_duration();
    if t < -tol::TIME_SLACK || t > total + 1e-9 {
        return Err(Error::InvalidInput(format!(
            "instant {t} outside the schedule span [0, {total}]"
        )));
    }
    let mut remaining = t.clamp(0.0, total);
    let mut sigma = sigma0.clone();
    for seg in schedule.segments() {
        if remaining <= seg.duration {
            return propagate_constant(&sigma, &seg.generator, remaining);
        }
        sigma = propagate_constant(&sigma, &seg.generator, seg.duration)?;
        remaining -= seg.duration;
    }
    Ok(sigma)
}

/// Exact piecewise propagation with `samples_per_segment` uniformly spaced
/// samples inside every segment. Sample values are computed from the
/// segment-start state with one spectral factorization per segment, so no
/// error accumulates within a segment; the segment endpoint uses the full
/// duration directly.
pub fn simulate_schedule(
    sigma0: &Covariance,
    schedule: &ControlSchedule,
    samples_per_segment: usize,
) -> Result<Trajectory> {
    if samples_per_segment < 1 {
        return Err(Error::InvalidInput(
            "samples_per_segment must be at least 1".into(),
        ));
    }
    if sigma0.dim() != schedule.dim() {
        return Err(Error::DimensionMismatch {
            expected: schedule.dim(),
            found: sigma0.dim(),
        });
    }
    let mut times = vec![0.0];
    let mut covariances = vec![sigma0.clone()];
    let mut transitions = vec![spd_sqrt(sigma0).matrix().clone()];

    let mut t_start = 0.0;
    for seg in schedule.segments() {
        let sigma_start = covariances.last().expect("non-empty").clone();
        let x_start = transitions.last().expect("non-empty").clone();
        let (vals, w) = sym_eig(&seg.generator);
        let exp_at = |s: f64| -> DMatrix<f64> {
            let scaled = DVector::from_iterator(vals.len(), vals.iter().map(|v| (v * s).exp()));
            &w * DMatrix::from_diagonal(&scaled) * w.transpose()
        };
        for i in 1..=samples_per_segment {
            let s = if i == samples_per_segment {
                seg.duration
            } else {
                seg.duration * i as f64 / samples_per_segment as f64
            };
            let e = exp_at(s);
            let sigma = Covariance::new(&e * sigma_start.matrix() * &e)?;
            times.push(t_start + s);
            covariances.push(sigma);
            transitions.push(&e * &x_start);
        }
        t_start += seg.duration;
    }
    Ok(Trajectory {
        times,
        covariances,
        transitions: Some(transitions),
    })
}

/// Classical fixed-step fourth-order Runge–Kutta integration of
/// `Σ̇ = A(t)Σ + ΣA(t)`. The step is `T/ceil(T/dt)`, so the grid lands on
/// `T` exactly and never exceeds the requested `dt`.
pub fn simulate_rk4<F>(sigma0: &Covariance, generator_at: F, horizon: f64, dt: f64) -> Result<Trajectory>
where
    F: Fn(f64) -> SymmetricMatrix,
{
    if !(dt > 0.0) || dt > horizon {
        return Err(Error::InvalidInput(format!(
            "need 0 < dt <= horizon, got dt = {dt}, horizon = {horizon}"
        )));
    }
    let steps = (horizon / dt).ceil() as usize;
    let h = horizon / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut covariances = Vec::with_capacity(steps + 1);
    times.push(0.0);
    covariances.push(sigma0.clone());
    let mut sigma = sigma0.matrix().clone();

    let rhs = |t: f64, s: &DMatrix<f64>| -> DMatrix<f64> {
        let a = generator_at(t);
        a.matrix() * s + s * a.matrix()
    };

    for step in 0..steps {
        let t = step as f64 * h;
        let k1 = rhs(t, &sigma);
        let k2 = rhs(t + 0.5 * h, &(&sigma + &k1 * (0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(&sigma + &k2 * (0.5 * h)));
        let k4 = rhs(t + h, &(&sigma + &k3 * h));
        sigma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        sigma = (&sigma + sigma.transpose()) * 0.5;
        let t_next = (step + 1) as f64 * h;
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: t_next });
        }
        times.push(t_next);
        covariances.push(Covariance::new(sigma.clone())?);
    }
    Ok(Trajectory {
        times,
        covariances,
        transitions: None,
    })
}

/// RK4 applied segment by segment to a piecewise-constant schedule, so no
/// integration step straddles a generator discontinuity and the classical
/// fourth-order convergence holds.
pub fn simulate_rk4_schedule(
    sigma0: &Covariance,
    schedule: &ControlSchedule,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let mut times = vec![0.0];
    let mut covariances = vec![sigma0.clone()];
    let mut t_start = 0.0;
    for seg in schedule.segments() {
        let start = covariances.last().expect("non-empty").clone();
        let generator = seg.generator.clone();
        let step = dt.min(seg.duration);
        let piece = simulate_rk4(&start, |_| generator.clone(), seg.duration, step)?;
        for (t, c) in piece.times().iter().zip(piece.covariances()).skip(1) {
            times.push(t_start + t);
            covariances.push(c.clone());
        }
        t_start += seg.duration;
    }
    Ok(Trajectory {
        times,
        covariances,
        transitions: None,
    })
}

/// A finite point cloud in `ℝⁿ`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    points: Vec<DVector<f64>>,
}

impl Ensemble {
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidInput("ensemble needs at least one point".into()));
        };
        let n = first.len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidInput(
                "ensemble points must share one dimension".into(),
            ));
        }
        Ok(Ensemble { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    /// Second moment `(1/N) Σ x xᵀ` about the origin. Returned as a plain
    /// symmetric matrix: degenerate clouds (fewer points than dimensions,
    /// or points at the origin) have a singular sample covariance.
    pub fn sample_covariance(&self) -> SymmetricMatrix {
        let n = self.dim();
        let mut acc = DMatrix::zeros(n, n);
        for p in &self.points {
            acc += p * p.transpose();
        }
        SymmetricMatrix::from_product(acc / self.points.len() as f64)
    }
}

/// Transport every point through the ordered product of segment
/// exponentials (one exponential per segment, shared by all points) and
/// return the moved cloud with its sample covariance. Transport is linear,
/// so the sample covariance follows the same flow as a simulated
/// covariance, with no statistical error.
pub fn simulate_ensemble(
    ensemble: &Ensemble,
    schedule: &ControlSchedule,
) -> Result<(Ensemble, SymmetricMatrix)> {
    if ensemble.dim() != schedule.dim() {
        return Err(Error::DimensionMismatch {
            expected: schedule.dim(),
            found: ensemble.dim(),
        });
    }
    let mut points = ensemble.points.clone();
    for seg in schedule.segments() {
        let e = crate::calculus::sym_exp(&seg.generator.scaled(seg.duration));
        for p in points.iter_mut() {
            *p = e.matrix() * &*p;
        }
    }
    let moved = Ensemble { points };
    let cov = moved.sample_covariance();
    Ok((moved, cov))
}

/// Check the compound-norm growth law along a trajectory with transitions:
/// for every order `k` and consecutive samples at times `s < t`,
///
/// `log‖∧ᵏX_t‖ − log‖∧ᵏX_s‖ ≤ (λ_D[1] + … + λ_D[k])·(t−s)`,
///
/// within slack, with equality at `k = n` (Liouville's formula: the top
/// compound is the determinant and its growth rate is exactly `tr D`).
pub fn norm_growth_audit(trajectory: &Trajectory, d: &SpectrumD) -> Result<bool> {
    let Some(transitions) = trajectory.transitions() else {
        return Err(Error::InvalidInput(
            "norm growth audit needs a trajectory with transition factors".into(),
        ));
    };
    let n = d.len();
    if transitions[0].nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: transitions[0].nrows(),
        });
    }
    let prefix: Vec<f64> = d
        .values()
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    for window in 0..trajectory.len().saturating_sub(1) {
        let dt = trajectory.times()[window + 1] - trajectory.times()[window];
        let x_s = &transitions[window];
        let x_t = &transitions[window + 1];
        for k in 1..=n {
            let log_s = compound_top_singular_value(x_s, k)?.ln();
            let log_t = compound_top_singular_value(x_t, k)?.ln();
            let increment = log_t - log_s;
            let bound = prefix[k - 1] * dt;
            if increment > bound + tol::NORM_GROWTH {
                return Ok(false);
            }
            if k == n && (increment - bound).abs() > tol::NORM_GROWTH {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Eigen-data of the covariance at one instant, for offline rendering of
/// the ellipsoid level sets.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Exact covariance eigen-data at the requested instants.
pub fn ellipsoid_snapshots(
    sigma0: &Covariance,
    schedule: &ControlSchedule,
    instants: &[f64],
) -> Result<Vec<Snapshot>> {
    instants
        .iter()
        .map(|&t| {
            let sigma = covariance_at(sigma0, schedule, t)?;
            let (eigenvalues, eigenvectors) = sym_eig(sigma.as_symmetric());
            Ok(Snapshot {
                t,
                eigenvalues,
                eigenvectors,
            })
        })
        .collect()
}

/// Write a trajectory as CSV: `t`, the row-major upper triangle of `Σ_t`,
/// the descending eigenvalues, and the determinant, all at 17 significant
/// digits.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, out: &mut W) -> io::Result<()> {
    let n = trajectory.covariances()[0].dim();
    let mut header = String::from("t");
    for i in 1..=n {
        for j in i..=n {
            header.push_str(&format!(",s{i}{j}"));
        }
    }
    for i in 1..=n {
        header.push_str(&format!(",lambda{i}"));
    }
    header.push_str(",det");
    writeln!(out, "{header}")?;
    for (t, cov) in trajectory.times().iter().zip(trajectory.covariances()) {
        let mut row = format!("{t:.16e}");
        for i in 0..n {
            for j in i..n {
                row.push_str(&format!(",{:.16e}", cov.matrix()[(i, j)]));
            }
        }
        for v in cov.eigenvalues().iter() {
            row.push_str(&format!(",{v:.16e}"));
        }
        row.push_str(&format!(",{:.16e}", cov.determinant()));
        writeln!(out, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::SteeringProblem;
    use crate::synthesis::{synthesize_two_phase, ControlSegment};

    fn diag_cov(values: &[f64]) -> Covariance {
        Covariance::from_diagonal(&DVector::from_vec(values.to_vec())).unwrap()
    }

    fn spectrum_202() -> SpectrumD {
        SpectrumD::new(vec![2.0, 0.0, -2.0]).unwrap()
    }

    fn rotated_target() -> Covariance {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = DMatrix::from_row_slice(3, 3, &[s, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, s]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 1.0, 1.0 / 9.0]));
        Covariance::new(&v * d * v.transpose()).unwrap()
    }

    fn reference_schedule() -> (SteeringProblem, ControlSchedule) {
        let problem = SteeringProblem::new(
            diag_cov(&[4.0, 1.0, 0.25]),
            rotated_target(),
            spectrum_202(),
            1.0,
        )
        .unwrap();
        let schedule = synthesize_two_phase(&problem, 1.0, 4.0f64.ln() / 4.0).unwrap();
        (problem, schedule)
    }

    #[test]
    fn propagate_zero_time_is_identity() {
        let s = diag_cov(&[3.0, 1.0, 0.5]);
        let a = spectrum_202().as_diagonal();
        let out = propagate_constant(&s, &a, 0.0).unwrap();
        assert!((out.matrix() - s.matrix()).norm() < 1e-15);
    }

    #[test]
    fn propagate_contraction_reaches_identity() {
        let s = diag_cov(&[4.0, 1.0, 0.25]);
        let a = SymmetricMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 0.0, 2.0]));
        let out = propagate_constant(&s, &a, 4.0f64.ln() / 4.0).unwrap();
        assert!((out.matrix() - DMatrix::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn propagate_inflation_reaches_rotated_target() {
        let v_d_vt = {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let v = DMatrix::from_row_slice(3, 3, &[s, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, s]);
            SymmetricMatrix::new(&v * DMatrix::from_diagonal(spectrum_202().values()) * v.transpose())
                .unwrap()
        };
        let out = propagate_constant(&Covariance::identity(3), &v_d_vt, 9.0f64.ln() / 4.0).unwrap();
        assert!((out.matrix() - rotated_target().matrix()).norm() < 1e-10);
    }

    #[test]
    fn empty_schedule_single_sample() {
        let s = diag_cov(&[2.0, 1.0]);
        let schedule = ControlSchedule::empty(SpectrumD::new(vec![1.0, -1.0]).unwrap());
        let traj = simulate_schedule(&s, &schedule, 8).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.times(), &[0.0]);
        assert!((traj.endpoint().matrix() - s.matrix()).norm() < 1e-15);
    }

    #[test]
    fn reference_trajectory_endpoint_and_midpoint() {
        let (problem, schedule) = reference_schedule();
        let traj = simulate_schedule(&problem.sigma0, &schedule, 32).unwrap();
        assert!((traj.endpoint().matrix() - problem.sigma_t.matrix()).norm() < 1e-8);
        // halfway through the contraction phase the covariance is diag(2, 1, 1/2)
        let mid = covariance_at(&problem.sigma0, &schedule, 4.0f64.ln() / 8.0).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 0.5]));
        assert!((mid.matrix() - expected).norm() < 1e-10);
        // transitions factor the covariance at every sample
        let transitions = traj.transitions().unwrap();
        for (x, c) in transitions.iter().zip(traj.covariances()) {
            assert!((x * x.transpose() - c.matrix()).norm() < 1e-8);
        }
    }

    #[test]
    fn determinant_law_on_reference() {
        let (problem, schedule) = reference_schedule();
        let traj = simulate_schedule(&problem.sigma0, &schedule, 16).unwrap();
        assert!(traj.determinant_drift(0.0) < 1e-9);
    }

    #[test]
    fn rk4_constant_zero_generator() {
        let s = diag_cov(&[2.0, 0.7]);
        let traj = simulate_rk4(&s, |_| SymmetricMatrix::zeros(2), 1.0, 0.01).unwrap();
        assert!((traj.endpoint().matrix() - s.matrix()).norm() < 1e-13);
    }

    #[test]
    fn rk4_matches_closed_form_contraction() {
        let s = diag_cov(&[4.0, 1.0, 0.25]);
        let a = SymmetricMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 0.0, 2.0]));
        let t1 = 4.0f64.ln() / 4.0;
        let traj = simulate_rk4(&s, |_| a.clone(), t1, 1e-4).unwrap();
        assert!((traj.endpoint().matrix() - DMatrix::identity(3, 3)).norm() < 1e-8);
    }

    #[test]
    fn rk4_rejects_bad_steps() {
        let s = diag_cov(&[1.0, 1.0]);
        assert!(simulate_rk4(&s, |_| SymmetricMatrix::zeros(2), 1.0, 0.0).is_err());
        assert!(simulate_rk4(&s, |_| SymmetricMatrix::zeros(2), 0.5, 1.0).is_err());
    }

    #[test]
    fn rk4_flags_divergence() {
        // a vastly under-resolved stiff flow overflows to non-finite values
        let s = diag_cov(&[1.0, 1.0]);
        let huge = SymmetricMatrix::from_diagonal(&DVector::from_vec(vec![1e5, 1e5]));
        let result = simulate_rk4(&s, move |_| huge.clone(), 20.0, 1.0);
        assert!(matches!(result, Err(Error::Divergence { .. })));
    }

    #[test]
    fn rk4_schedule_cross_validates_exact_propagation() {
        let (problem, schedule) = reference_schedule();
        let exact = covariance_at(&problem.sigma0, &schedule, schedule.total_duration()).unwrap();
        let rk4 = simulate_rk4_schedule(&problem.sigma0, &schedule, 1e-3).unwrap();
        assert!((rk4.endpoint().matrix() - exact.matrix()).norm() < 1e-6);
    }

    #[test]
    fn ensemble_origin_fixed_point() {
        let ens = Ensemble::new(vec![DVector::zeros(3)]).unwrap();
        let (_, schedule) = reference_schedule();
        let (moved, cov) = simulate_ensemble(&ens, &schedule).unwrap();
        assert!(moved.points()[0].norm() < 1e-15);
        assert!(cov.matrix().norm() < 1e-15);
    }

    #[test]
    fn ensemble_columns_of_scaled_sqrt_have_exact_covariance() {
        // n points: the columns of √n · Σ^{1/2} have sample covariance Σ
        let sigma = diag_cov(&[4.0, 1.0, 0.25]);
        let root = spd_sqrt(&sigma);
        let scale = 3.0f64.sqrt();
        let points: Vec<DVector<f64>> = (0..3)
            .map(|j| DVector::from_iterator(3, root.matrix().column(j).iter().map(|v| v * scale)))
            .collect();
        let ens = Ensemble::new(points).unwrap();
        assert!((ens.sample_covariance().matrix() - sigma.matrix()).norm() < 1e-12);
        let (_, schedule) = reference_schedule();
        let (_, cov) = simulate_ensemble(&ens, &schedule).unwrap();
        let expected = covariance_at(&sigma, &schedule, schedule.total_duration()).unwrap();
        assert!((cov.matrix() - expected.matrix()).norm() < 1e-8);
    }

    #[test]
    fn norm_growth_holds_on_diagonal_flow() {
        let d = spectrum_202();
        let schedule = ControlSchedule::new(
            vec![ControlSegment {
                duration: 0.8,
                generator: d.as_diagonal(),
            }],
            d.clone(),
        )
        .unwrap();
        let traj = simulate_schedule(&Covariance::identity(3), &schedule, 8).unwrap();
        assert!(norm_growth_audit(&traj, &d).unwrap());
    }

    #[test]
    fn norm_growth_needs_transitions() {
        let s = diag_cov(&[1.0, 1.0]);
        let traj = simulate_rk4(&s, |_| SymmetricMatrix::zeros(2), 0.1, 0.05).unwrap();
        assert!(matches!(
            norm_growth_audit(&traj, &SpectrumD::new(vec![1.0, -1.0]).unwrap()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn norm_growth_on_reference_schedule() {
        let (problem, schedule) = reference_schedule();
        let traj = simulate_schedule(&problem.sigma0, &schedule, 16).unwrap();
        assert!(norm_growth_audit(&traj, &spectrum_202()).unwrap());
    }

    #[test]
    fn snapshots_at_phase_instants() {
        let (problem, schedule) = reference_schedule();
        let t1 = 4.0f64.ln() / 4.0;
        let t2 = 1.0 - t1;
        let instants = [0.0, t1 / 2.0, t1, t1 + t2 / 2.0, 1.0];
        let snaps = ellipsoid_snapshots(&problem.sigma0, &schedule, &instants).unwrap();
        let expected = [
            [4.0, 1.0, 0.25],
            [2.0, 1.0, 0.5],
            [1.0, 1.0, 1.0],
            [3.0, 1.0, 1.0 / 3.0],
            [9.0, 1.0, 1.0 / 9.0],
        ];
        for (snap, exp) in snaps.iter().zip(expected.iter()) {
            for (got, want) in snap.eigenvalues.iter().zip(exp.iter()) {
                assert!(
                    (got - want).abs() < 1e-8,
                    "t = {}: eigenvalues {:?} vs {:?}",
                    snap.t,
                    snap.eigenvalues.as_slice(),
                    exp
                );
            }
        }
    }

    #[test]
    fn csv_export_shape() {
        let (problem, schedule) = reference_schedule();
        let traj = simulate_schedule(&problem.sigma0, &schedule, 2).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,s11,s12,s13,s22,s23,s33,lambda1,lambda2,lambda3,det"
        );
        assert_eq!(lines.count(), traj.len());
    }

    #[test]
    fn time_reversed_schedule_returns_home() {
        let (problem, schedule) = reference_schedule();
        let reversed = schedule.reversed_negated();
        let back = simulate_schedule(&problem.sigma_t, &reversed, 4).unwrap();
        assert!((back.endpoint().matrix() - problem.sigma0.matrix()).norm() < 1e-8);
    }
}
