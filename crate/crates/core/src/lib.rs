//! Numerical toolkit for steering covariance matrices under isospectral
//! gain constraints.
//!
//! The state of an ensemble driven by a common linear gradient field is its
//! second moment `Σ_t`, which evolves by the differential Lyapunov equation
//! `Σ̇ = AΣ + ΣA` with a symmetric gain `A_t`. When the gain is constrained
//! to a fixed spectrum `D` (only its eigenvectors may rotate), reachability
//! of a target covariance becomes a log-majorization question. This crate
//! decides that question where the theory allows, constructs explicit
//! piecewise-constant schedules realizing every positive answer, and checks
//! each answer by simulation.
//!
//! Module map:
//!
//! - [`calculus`] — symmetric-matrix primitives (spectral log/exp/sqrt),
//!   the constant steering generator, shear cost, trace normalization.
//! - [`compound`] — multiplicative compounds `∧ᵏX` (k-minor matrices) and
//!   additive compounds `A^[k]`, with the spectral facts relating them.
//! - [`majorization`] — the majorization preorder, Hardy–Littlewood–Pólya
//!   transfer matrices, Birkhoff–von Neumann decompositions.
//! - [`reachability`] — necessary conditions, the exact test from isotropic
//!   starts, two-phase sufficiency, and the combined tri-state certificate.
//! - [`synthesis`] — construction of isospectral control schedules that
//!   discharge `Reachable` certificates.
//! - [`simulation`] — ground-truth propagation of the Lyapunov flow,
//!   fixed-step RK4 cross-validation, ensemble transport, and the
//!   compound-norm growth audit.

pub mod calculus;
pub mod compound;
pub mod error;
pub mod majorization;
pub mod reachability;
pub mod simulation;
pub mod synthesis;
pub mod tol;

pub use calculus::{Covariance, SpectrumD, SteeringProblem, SymmetricMatrix};
pub use compound::{CompoundMatrix, MultiIndexBasis};
pub use error::{Error, Result};
pub use majorization::{BirkhoffDecomposition, DoublyStochasticMatrix, Permutation};
pub use reachability::{Reason, ReachabilityCertificate, Verdict, Witness};
pub use simulation::{Ensemble, Snapshot, Trajectory};
pub use synthesis::{ControlSchedule, ControlSegment};
pub use tol::Tolerances;
