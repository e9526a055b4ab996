//! Document schemas shared by every subcommand, their validation with
//! field-addressed error messages, and deterministic JSON emission.
//!
//! All documents are JSON with matrices as row-major nested arrays. Floats
//! are always written with 17 significant digits so identical inputs
//! produce byte-identical documents that round-trip exactly.

use std::collections::BTreeMap;
use std::io;

use isospec_core::calculus::{Covariance, SpectrumD, SteeringProblem};
use isospec_core::majorization::Permutation;
use isospec_core::synthesis::{ControlSchedule, ControlSegment, PhaseTerms, SynthesizedSchedule};
use isospec_core::{SymmetricMatrix, Tolerances};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter, Serializer};

/// Input-side failure with enough addressing to fix the file.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for InputError {}

impl From<isospec_core::Error> for InputError {
    fn from(e: isospec_core::Error) -> Self {
        InputError(e.to_string())
    }
}

pub type InputResult<T> = Result<T, InputError>;

// --------------------------------------------------------------- documents

#[derive(Debug, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub n: usize,
    pub sigma0: Vec<Vec<f64>>,
    #[serde(rename = "sigmaT")]
    pub sigma_t: Vec<Vec<f64>>,
    pub spectrum: Vec<f64>,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsDoc>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct OptionsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_segment: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tol: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub n: usize,
    pub spectrum: Vec<f64>,
    pub segments: Vec<SegmentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<ScheduleAuditDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentDoc {
    pub duration: f64,
    pub generator: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScheduleAuditDoc {
    pub c: f64,
    pub t_split: f64,
    pub birkhoff: BirkhoffDoc,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BirkhoffDoc {
    pub phase1: Vec<TermDoc>,
    pub phase2: Vec<TermDoc>,
}

/// One mixture component; `permutation` is the 0-based image list of a
/// row-selector permutation.
#[derive(Debug, Serialize, Deserialize)]
pub struct TermDoc {
    pub weight: f64,
    pub permutation: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub verdict: String,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
    pub audit: CertificateAuditDoc,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub c: f64,
    pub t_split: f64,
    pub binding_prefix: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateAuditDoc {
    pub forward: Vec<PrefixRowDoc>,
    pub reverse: Vec<PrefixRowDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PrefixRowDoc {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Serialize)]
pub struct SynthesisSummaryDoc {
    pub segments: usize,
    pub total_duration: f64,
    pub shear_cost: f64,
    pub endpoint_error: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateReportDoc {
    pub endpoint: Vec<Vec<f64>>,
    pub endpoint_eigenvalues: Vec<f64>,
    pub determinant_drift: f64,
    pub norm_growth_audit: bool,
    pub isospectral: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rk4_deviation: Option<f64>,
    pub snapshots: Vec<SnapshotDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SnapshotDoc {
    pub t: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct MinTimeReportDoc {
    pub t_min: f64,
    pub c: f64,
    pub phase1: PhaseMinDoc,
    pub phase2: PhaseMinDoc,
}

#[derive(Debug, Serialize)]
pub struct PhaseMinDoc {
    pub t_min: f64,
    pub binding_k: usize,
}

#[derive(Debug, Serialize)]
pub struct CompoundDoc {
    pub n: usize,
    pub k: usize,
    pub kind: String,
    pub labels: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct CostDoc {
    pub shear_cost: f64,
}

// ------------------------------------------------------------- conversions

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Validate a nested array as an `n`×`n` matrix, reporting the offending
/// row as `field[i]`.
pub fn rows_to_matrix(rows: &[Vec<f64>], n: usize, field: &str) -> InputResult<DMatrix<f64>> {
    if rows.len() != n {
        return Err(InputError(format!(
            "{field}: expected {n} rows, found {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(InputError(format!(
                "{field}[{i}]: expected {n} entries, found {}",
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn parse_problem_doc(doc: &ProblemDoc) -> InputResult<SteeringProblem> {
    let n = doc.n;
    if n == 0 {
        return Err(InputError("n: must be positive".into()));
    }
    let sigma0 = Covariance::new(rows_to_matrix(&doc.sigma0, n, "sigma0")?)
        .map_err(|e| InputError(format!("sigma0: {e}")))?;
    let sigma_t = Covariance::new(rows_to_matrix(&doc.sigma_t, n, "sigmaT")?)
        .map_err(|e| InputError(format!("sigmaT: {e}")))?;
    if doc.spectrum.len() != n {
        return Err(InputError(format!(
            "spectrum: expected {n} entries, found {}",
            doc.spectrum.len()
        )));
    }
    let spectrum = SpectrumD::from_unsorted(doc.spectrum.clone())
        .map_err(|e| InputError(format!("spectrum: {e}")))?;
    SteeringProblem::new(sigma0, sigma_t, spectrum, doc.horizon)
        .map_err(|e| InputError(format!("horizon: {e}")))
}

pub fn schedule_to_doc(schedule: &ControlSchedule, audit: Option<ScheduleAuditDoc>) -> ScheduleDoc {
    ScheduleDoc {
        n: schedule.dim(),
        spectrum: schedule.spectrum().values().iter().copied().collect(),
        segments: schedule
            .segments()
            .iter()
            .map(|seg| SegmentDoc {
                duration: seg.duration,
                generator: matrix_to_rows(seg.generator.matrix()),
            })
            .collect(),
        audit,
    }
}

pub fn terms_to_doc(terms: &PhaseTerms) -> Vec<TermDoc> {
    terms
        .iter()
        .map(|(weight, perm)| TermDoc {
            weight: *weight,
            permutation: perm.as_slice().to_vec(),
        })
        .collect()
}

pub fn synthesized_to_doc(synthesized: &SynthesizedSchedule) -> ScheduleDoc {
    schedule_to_doc(
        &synthesized.schedule,
        Some(ScheduleAuditDoc {
            c: synthesized.audit.c,
            t_split: synthesized.audit.t_split,
            birkhoff: BirkhoffDoc {
                phase1: terms_to_doc(&synthesized.audit.phase1),
                phase2: terms_to_doc(&synthesized.audit.phase2),
            },
        }),
    )
}

/// Reconstruct a schedule from its document, without the isospectrality
/// gate (external documents may be deliberately off-spectrum).
pub fn parse_schedule_doc(doc: &ScheduleDoc) -> InputResult<ControlSchedule> {
    let n = doc.n;
    if doc.spectrum.len() != n {
        return Err(InputError(format!(
            "spectrum: expected {n} entries, found {}",
            doc.spectrum.len()
        )));
    }
    let spectrum = SpectrumD::from_unsorted(doc.spectrum.clone())
        .map_err(|e| InputError(format!("spectrum: {e}")))?;
    let mut segments = Vec::with_capacity(doc.segments.len());
    for (i, seg) in doc.segments.iter().enumerate() {
        let field = format!("segments[{i}].generator");
        let generator = SymmetricMatrix::new(rows_to_matrix(&seg.generator, n, &field)?)
            .map_err(|e| InputError(format!("{field}: {e}")))?;
        segments.push(ControlSegment {
            duration: seg.duration,
            generator,
        });
    }
    ControlSchedule::lenient(segments, spectrum)
        .map_err(|e| InputError(format!("segments: {e}")))
}

/// Audit fields of a schedule document, as core types.
pub fn parse_schedule_audit(doc: &ScheduleDoc) -> InputResult<Option<(f64, f64)>> {
    Ok(doc.audit.as_ref().map(|a| (a.c, a.t_split)))
}

/// Permutations in documents must still be bijections.
pub fn validate_terms(doc: &ScheduleDoc) -> InputResult<()> {
    if let Some(audit) = &doc.audit {
        for (phase, terms) in [("phase1", &audit.birkhoff.phase1), ("phase2", &audit.birkhoff.phase2)] {
            for (i, term) in terms.iter().enumerate() {
                Permutation::new(term.permutation.clone()).map_err(|e| {
                    InputError(format!("audit.birkhoff.{phase}[{i}].permutation: {e}"))
                })?;
            }
        }
    }
    Ok(())
}

/// Apply option-map and `--tol` overrides onto the default tolerances.
pub fn tolerances_from(
    options: Option<&OptionsDoc>,
    flag_overrides: &[(String, f64)],
) -> InputResult<Tolerances> {
    let mut tols = Tolerances::default();
    if let Some(opts) = options {
        for (name, value) in &opts.tol {
            tols.set(name, *value)
                .map_err(|e| InputError(format!("options.tol: {e}")))?;
        }
    }
    for (name, value) in flag_overrides {
        tols.set(name, *value)
            .map_err(|e| InputError(format!("--tol: {e}")))?;
    }
    Ok(tols)
}

// ----------------------------------------------------------- JSON emission

/// Pretty formatter writing every float with 17 significant digits.
struct SciPretty<'a> {
    inner: PrettyFormatter<'a>,
}

impl<'a> SciPretty<'a> {
    fn new() -> Self {
        SciPretty {
            inner: PrettyFormatter::new(),
        }
    }
}

impl<'a> Formatter for SciPretty<'a> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serialize any document deterministically: pretty layout, floats at 17
/// significant digits, trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SciPretty::new());
    value
        .serialize(&mut ser)
        .expect("documents contain only finite numbers");
    let mut text = String::from_utf8(buf).expect("serde_json emits UTF-8");
    text.push('\n');
    text
}

/// Compact variant used for log lines.
#[allow(dead_code)]
pub fn to_json_compact<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, CompactFormatter);
    value.serialize(&mut ser).expect("documents contain only finite numbers");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
