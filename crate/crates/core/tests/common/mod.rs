//! Seeded random generators shared by the integration suites.
#![allow(dead_code)]

use isospec_core::calculus::{sym_eig, Covariance, SpectrumD, SteeringProblem, SymmetricMatrix};
use isospec_core::majorization::Permutation;
use isospec_core::reachability::{min_time_breakdown, two_phase_feasible};
use isospec_core::synthesis::{ControlSchedule, ControlSegment};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let m = random_matrix(rng, n);
        if m.determinant().abs() < 1e-6 {
            continue;
        }
        return m.qr().q();
    }
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    let m = random_matrix(rng, n);
    SymmetricMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

/// SPD with eigenvalues in `[0.2, 3.0]` and a random orthogonal eigenbasis.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Covariance {
    let q = random_orthogonal(rng, n);
    let eigs = DVector::from_fn(n, |_, _| rng.random_range(0.2..3.0));
    Covariance::new(&q * DMatrix::from_diagonal(&eigs) * q.transpose()).unwrap()
}

/// SPD rescaled to unit determinant.
pub fn random_spd_unit_det(rng: &mut ChaCha8Rng, n: usize) -> Covariance {
    let s = random_spd(rng, n);
    let det = s.determinant();
    s.scaled(det.powf(-1.0 / n as f64)).unwrap()
}

/// Random traceless spectrum with spread at least ~1.
pub fn random_traceless_spectrum(rng: &mut ChaCha8Rng, n: usize) -> SpectrumD {
    loop {
        let mut vals: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        for v in vals.iter_mut() {
            *v -= mean;
        }
        let d = SpectrumD::from_unsorted(vals).unwrap();
        if d.max_abs() > 0.5 {
            return d;
        }
    }
}

pub fn random_spectrum(rng: &mut ChaCha8Rng, n: usize) -> SpectrumD {
    let vals: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    SpectrumD::from_unsorted(vals).unwrap()
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut map: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        map.swap(i, j);
    }
    Permutation::new(map).unwrap()
}

/// Piecewise-constant schedule whose every generator is `U D Uᵀ` for random
/// orthogonal `U`.
pub fn random_isospectral_schedule(
    rng: &mut ChaCha8Rng,
    d: &SpectrumD,
    segments: usize,
) -> ControlSchedule {
    let n = d.len();
    let segs = (0..segments)
        .map(|_| {
            let u = random_orthogonal(rng, n);
            let generator = SymmetricMatrix::new(
                &u * DMatrix::from_diagonal(d.values()) * u.transpose(),
            )
            .unwrap();
            ControlSegment {
                duration: rng.random_range(0.05..0.6),
                generator,
            }
        })
        .collect();
    ControlSchedule::new(segs, d.clone()).unwrap()
}

/// Random problem guaranteed to be certified reachable through the
/// two-phase test: unit-determinant endpoints and a horizon comfortably
/// above the through-identity minimum.
pub fn random_reachable_problem(rng: &mut ChaCha8Rng, n: usize) -> SteeringProblem {
    loop {
        let sigma0 = random_spd_unit_det(rng, n);
        let sigma_t = random_spd_unit_det(rng, n);
        let spectrum = random_traceless_spectrum(rng, n);
        let Ok(breakdown) = min_time_breakdown(&sigma0, &sigma_t, &spectrum) else {
            continue;
        };
        let slack = rng.random_range(1.05..1.6);
        let horizon = (breakdown.total() * slack).max(0.05);
        let problem = SteeringProblem::new(sigma0, sigma_t, spectrum, horizon).unwrap();
        if matches!(two_phase_feasible(&problem), Ok(Some(_))) {
            return problem;
        }
    }
}

/// Zero-mean cloud of `count` points whose sample second moment is exactly
/// `sigma` (up to round-off): whiten a random cloud, then color it.
pub fn cloud_with_exact_covariance(
    rng: &mut ChaCha8Rng,
    sigma: &Covariance,
    count: usize,
) -> Vec<DVector<f64>> {
    let n = sigma.dim();
    assert!(count > n, "need more points than dimensions");
    loop {
        let mut points: Vec<DVector<f64>> =
            (0..count).map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))).collect();
        let mean = points.iter().sum::<DVector<f64>>() / count as f64;
        for p in points.iter_mut() {
            *p -= &mean;
        }
        let mut second_moment = DMatrix::zeros(n, n);
        for p in &points {
            second_moment += p * p.transpose();
        }
        second_moment /= count as f64;
        let Ok(sample) = Covariance::new(second_moment) else {
            continue;
        };
        let (vals, w) = sym_eig(sample.as_symmetric());
        let inv_root =
            &w * DMatrix::from_diagonal(&vals.map(|v| 1.0 / v.sqrt())) * w.transpose();
        let (tvals, tw) = sym_eig(sigma.as_symmetric());
        let color = &tw * DMatrix::from_diagonal(&tvals.map(f64::sqrt)) * tw.transpose();
        let transform = color * inv_root;
        for p in points.iter_mut() {
            *p = &transform * &*p;
        }
        return points;
    }
}

pub fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm()
}
