//! Symmetric-matrix primitives and the closed-form pieces of the steering
//! problem: spectral eigendecomposition, matrix log/exp/sqrt on the SPD
//! cone, the unique constant symmetric generator between two covariances,
//! shear cost of a schedule, and trace normalization of problem data.
//!
//! All matrix functions go through the spectral factorization rather than
//! series expansions: the matrices in this domain are small and symmetric,
//! so spectral calculus is exact up to eigensolver error.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::synthesis::ControlSchedule;
use crate::tol;

/// A real symmetric matrix. Construction symmetrizes `(M + Mᵀ)/2` once the
/// asymmetry is verified to be round-off-sized, so the stored entries are
/// exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    mat: DMatrix<f64>,
}

impl SymmetricMatrix {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidInput(format!(
                "expected a square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let scale = 1.0 + mat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut asym = 0.0f64;
        for i in 0..mat.nrows() {
            for j in (i + 1)..mat.ncols() {
                asym = asym.max((mat[(i, j)] - mat[(j, i)]).abs());
            }
        }
        let tolerance = tol::SYMMETRY * scale;
        if asym > tolerance {
            return Err(Error::NotSymmetric {
                asymmetry: asym,
                tolerance,
            });
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(SymmetricMatrix { mat: sym })
    }

    /// Build from entries already known to be symmetric (e.g. `W D Wᵀ`
    /// assembled in place); still symmetrizes to scrub round-off.
    pub(crate) fn from_product(mat: DMatrix<f64>) -> Self {
        let sym = (&mat + mat.transpose()) * 0.5;
        SymmetricMatrix { mat: sym }
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn from_diagonal(diag: &DVector<f64>) -> Self {
        SymmetricMatrix {
            mat: DMatrix::from_diagonal(diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    /// `tr(A²) = ‖A‖_F²` for symmetric `A`.
    pub fn trace_of_square(&self) -> f64 {
        self.mat.iter().map(|v| v * v).sum()
    }

    pub fn scaled(&self, factor: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            mat: &self.mat * factor,
        }
    }

    pub fn negated(&self) -> SymmetricMatrix {
        self.scaled(-1.0)
    }

    /// Shift by a multiple of the identity.
    pub fn plus_identity(&self, alpha: f64) -> SymmetricMatrix {
        let mut mat = self.mat.clone();
        for i in 0..mat.nrows() {
            mat[(i, i)] += alpha;
        }
        SymmetricMatrix { mat }
    }
}

/// A symmetric positive-definite matrix: the second moment of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    sym: SymmetricMatrix,
}

impl Covariance {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let sym = SymmetricMatrix::new(mat)?;
        let (eigenvalues, _) = sym_eig(&sym);
        let min_eigenvalue = eigenvalues[eigenvalues.len() - 1];
        if min_eigenvalue <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(Covariance { sym })
    }

    pub fn identity(n: usize) -> Self {
        Covariance {
            sym: SymmetricMatrix {
                mat: DMatrix::identity(n, n),
            },
        }
    }

    pub fn isotropic(n: usize, c: f64) -> Result<Self> {
        if c <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: c });
        }
        Ok(Covariance {
            sym: SymmetricMatrix {
                mat: DMatrix::identity(n, n) * c,
            },
        })
    }

    pub fn from_diagonal(diag: &DVector<f64>) -> Result<Self> {
        Covariance::new(DMatrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.sym.dim()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.sym.matrix()
    }

    pub fn as_symmetric(&self) -> &SymmetricMatrix {
        &self.sym
    }

    pub fn determinant(&self) -> f64 {
        self.sym.matrix().determinant()
    }

    pub fn trace(&self) -> f64 {
        self.sym.trace()
    }

    pub fn scaled(&self, factor: f64) -> Result<Covariance> {
        if factor <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: factor,
            });
        }
        Ok(Covariance {
            sym: self.sym.scaled(factor),
        })
    }

    /// Descending eigenvalues.
    pub fn eigenvalues(&self) -> DVector<f64> {
        sym_eig(&self.sym).0
    }

    /// Descending log-eigenvalues: the coordinates in which reachability
    /// becomes a majorization statement.
    pub fn log_eigenvalues(&self) -> DVector<f64> {
        self.eigenvalues().map(f64::ln)
    }

    /// `‖Σ − (tr Σ/n)·I‖_F ≤ tol · tr Σ`.
    pub fn is_isotropic(&self, tol: f64) -> bool {
        let n = self.dim();
        let c = self.trace() / n as f64;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { c } else { 0.0 };
                dev += (self.matrix()[(i, j)] - target).powi(2);
            }
        }
        dev.sqrt() <= tol * self.trace()
    }
}

/// The prescribed gain spectrum: eigenvalues of the diagonal `D`, sorted
/// descending. The `traceless` flag is derived from the entries at
/// construction, never set by callers.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumD {
    values: DVector<f64>,
    traceless: bool,
}

impl SpectrumD {
    /// Requires the values to already be sorted descending.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("spectrum must be non-empty".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(
                "spectrum values must be sorted descending".into(),
            ));
        }
        Ok(Self::from_sorted(DVector::from_vec(values)))
    }

    /// Sorts the values descending first.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("spectrum must be non-empty".into()));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("non-finite spectrum value"));
        Ok(Self::from_sorted(DVector::from_vec(values)))
    }

    fn from_sorted(values: DVector<f64>) -> Self {
        let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let traceless = values.sum().abs() <= 1e-12 * scale;
        SpectrumD { values, traceless }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn is_traceless(&self) -> bool {
        self.traceless
    }

    pub fn trace(&self) -> f64 {
        self.values.sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Spectrum of `−D`, re-sorted descending.
    pub fn negated(&self) -> SpectrumD {
        let mut vals: Vec<f64> = self.values.iter().map(|v| -v).collect();
        vals.reverse(); // negating a descending vector gives an ascending one
        Self::from_sorted(DVector::from_vec(vals))
    }

    /// Shift every value by `alpha` (order is preserved).
    pub fn shifted(&self, alpha: f64) -> SpectrumD {
        Self::from_sorted(self.values.map(|v| v + alpha))
    }

    /// The diagonal matrix `D` itself.
    pub fn as_diagonal(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(&self.values)
    }
}

/// Endpoint data of the steering question: initial and terminal covariances,
/// the prescribed gain spectrum, and the time horizon.
#[derive(Debug, Clone)]
pub struct SteeringProblem {
    pub sigma0: Covariance,
    pub sigma_t: Covariance,
    pub spectrum: SpectrumD,
    pub horizon: f64,
}

impl SteeringProblem {
    pub fn new(
        sigma0: Covariance,
        sigma_t: Covariance,
        spectrum: SpectrumD,
        horizon: f64,
    ) -> Result<Self> {
        let n = sigma0.dim();
        if sigma_t.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sigma_t.dim(),
            });
        }
        if spectrum.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: spectrum.len(),
            });
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(SteeringProblem {
            sigma0,
            sigma_t,
            spectrum,
            horizon,
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma0.dim()
    }
}

/// Spectral factorization `M = W diag(λ) Wᵀ` with eigenvalues sorted
/// descending; ties keep the eigensolver's order (stable sort).
pub fn sym_eig(m: &SymmetricMatrix) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.matrix().clone().symmetric_eigen();
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("non-finite eigenvalue")
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Apply a scalar function to a symmetric matrix through its spectrum.
fn spectral_map(m: &SymmetricMatrix, f: impl Fn(f64) -> f64) -> (DVector<f64>, SymmetricMatrix) {
    let (values, w) = sym_eig(m);
    let mapped = values.map(&f);
    let rebuilt = &w * DMatrix::from_diagonal(&mapped) * w.transpose();
    (values, SymmetricMatrix::from_product(rebuilt))
}

/// Principal logarithm of an SPD matrix.
pub fn spd_log(s: &Covariance) -> SymmetricMatrix {
    spectral_map(s.as_symmetric(), f64::ln).1
}

/// Exponential of a symmetric matrix; always SPD.
pub fn sym_exp(a: &SymmetricMatrix) -> Covariance {
    let (_, sym) = spectral_map(a, f64::exp);
    Covariance { sym }
}

/// Symmetric square root of an SPD matrix.
pub fn spd_sqrt(s: &Covariance) -> Covariance {
    let (_, sym) = spectral_map(s.as_symmetric(), f64::sqrt);
    Covariance { sym }
}

/// Inverse square root `S^{-1/2}` of an SPD matrix.
fn spd_inv_sqrt(s: &Covariance) -> SymmetricMatrix {
    spectral_map(s.as_symmetric(), |v| 1.0 / v.sqrt()).1
}

/// The unique constant symmetric generator steering `sigma0` to `sigma_t`
/// over `horizon`:
///
/// `A = (1/T) · log( Σ₀^{-1/2} (Σ₀^{1/2} Σ_T Σ₀^{1/2})^{1/2} Σ₀^{-1/2} )`,
///
/// which satisfies `e^{AT} Σ₀ e^{AT} = Σ_T`.
pub fn ot_generator(sigma0: &Covariance, sigma_t: &Covariance, horizon: f64) -> Result<SymmetricMatrix> {
    if sigma0.dim() != sigma_t.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma0.dim(),
            found: sigma_t.dim(),
        });
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let root = spd_sqrt(sigma0);
    let inv_root = spd_inv_sqrt(sigma0);
    let inner = SymmetricMatrix::from_product(root.matrix() * sigma_t.matrix() * root.matrix());
    let inner_root = spd_sqrt(&Covariance { sym: inner });
    let conjugated =
        SymmetricMatrix::from_product(inv_root.matrix() * inner_root.matrix() * inv_root.matrix());
    let geo_mean = Covariance { sym: conjugated };
    Ok(spd_log(&geo_mean).scaled(1.0 / horizon))
}

/// Shear cost `J = Σᵢ durationᵢ · tr(Aᵢ²)` of a piecewise-constant schedule.
/// An empty schedule (zero horizon) costs nothing. When every generator is
/// isospectral to `D`, this collapses to `T · Σⱼ λ_D[j]²`.
pub fn shear_cost(schedule: &ControlSchedule) -> f64 {
    schedule
        .segments()
        .iter()
        .map(|seg| seg.duration * seg.generator.trace_of_square())
        .sum()
}

/// Replace a problem by an equivalent one with a traceless gain spectrum:
/// with `α = −tr(D)/n`, shift the spectrum by `α` and scale the target by
/// `e^{2Tα}`. A nonzero trace only rescales the reachable set isotropically,
/// so the output problem is reachable iff the input is. Traceless input is
/// returned unchanged, which makes the operation idempotent.
pub fn trace_normalize(problem: &SteeringProblem) -> SteeringProblem {
    if problem.spectrum.is_traceless() {
        return problem.clone();
    }
    let n = problem.dim() as f64;
    let alpha = -problem.spectrum.trace() / n;
    let spectrum = problem.spectrum.shifted(alpha);
    let sigma_t = problem
        .sigma_t
        .scaled((2.0 * problem.horizon * alpha).exp())
        .expect("positive scaling preserves positive definiteness");
    SteeringProblem {
        sigma0: problem.sigma0.clone(),
        sigma_t,
        spectrum,
        horizon: problem.horizon,
    }
}
