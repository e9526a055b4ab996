//! `isospec` — certification, synthesis, and simulation of covariance
//! steering under isospectral gain constraints, over JSON documents.
//!
//! Exit codes: 0 success (certify: reachable), 1 input error,
//! 2 unreachable, 3 unknown.

mod docs;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isospec_core::calculus::{shear_cost, Covariance};
use isospec_core::compound::{additive_compound, multiplicative_compound, CompoundMatrix};
use isospec_core::reachability::{certify_with, min_time_breakdown_with, Verdict};
use isospec_core::simulation::{
    ellipsoid_snapshots, norm_growth_audit, simulate_rk4_schedule, simulate_schedule,
    write_trajectory_csv, DEFAULT_SAMPLES_PER_SEGMENT,
};
use isospec_core::synthesis::{synthesize_certified_with, verify_isospectral};

use docs::{InputError, InputResult};

#[derive(Parser)]
#[command(
    name = "isospec",
    version,
    about = "Reachability certificates and control synthesis for covariance steering \
             with fixed-spectrum gains"
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide reachability of a steering problem and emit a certificate.
    Certify {
        /// Problem document (JSON).
        input: PathBuf,
        #[command(flatten)]
        tol: TolOverrides,
    },
    /// Certify a problem and construct a schedule realizing it.
    Synthesize {
        /// Problem document (JSON).
        input: PathBuf,
        /// Write the schedule document here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolOverrides,
    },
    /// Simulate a schedule from an initial covariance.
    Simulate {
        /// Schedule document (JSON).
        schedule: PathBuf,
        /// Initial covariance: JSON file holding a nested row-major array.
        #[arg(long)]
        sigma0: PathBuf,
        /// Write the sampled trajectory as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Snapshot instants (comma separated); defaults to fractions
        /// {0, 1/4, 1/2, 3/4, 1} of the phase boundaries.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        snapshots: Option<Vec<f64>>,
        /// Samples per segment in the trajectory (default 32).
        #[arg(long = "samples-per-segment")]
        samples_per_segment: Option<usize>,
        /// Also integrate with fixed-step RK4 at this step and report the
        /// deviation from the closed-form propagation.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Minimum through-identity steering time of a problem.
    Mintime {
        /// Problem document (JSON).
        input: PathBuf,
        #[command(flatten)]
        tol: TolOverrides,
    },
    /// Print a compound matrix with multi-index row/column labels.
    Compound {
        /// Matrix file: JSON nested row-major array.
        matrix: PathBuf,
        /// Compound order.
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        kind: CompoundKind,
    },
    /// Shear cost of a schedule.
    Cost {
        /// Schedule document (JSON).
        schedule: PathBuf,
    },
}

#[derive(Args)]
struct TolOverrides {
    /// Override a named tolerance, e.g. --tol majorization=1e-8.
    #[arg(long = "tol", value_parser = parse_tol_flag)]
    tol: Vec<(String, f64)>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CompoundKind {
    /// Additive compound (the generator-side compound).
    #[arg(long)]
    additive: bool,
    /// Multiplicative compound (the matrix of k-minors).
    #[arg(long)]
    multiplicative: bool,
}

fn parse_tol_flag(raw: &str) -> Result<(String, f64), String> {
    let (name, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{raw}`"))?;
    let value: f64 = value
        .parse()
        .map_err(|e| format!("bad tolerance value `{value}`: {e}"))?;
    Ok((name.to_string(), value))
}

fn init_logging() {
    let level = match std::env::var("ISOSPEC_LOG").ok().as_deref() {
        Some("quiet") => log::LevelFilter::Off,
        Some("info") => log::LevelFilter::Info,
        Some("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let args = CliArgs::parse();
    match run(args.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read_to_string(path: &Path) -> InputResult<String> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> InputResult<T> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path, n: usize, field: &str) -> InputResult<nalgebra::DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = load_json(path)?;
    docs::rows_to_matrix(&rows, n, field)
}

fn write_or_fail(path: &Path, contents: &str) -> InputResult<()> {
    fs::write(path, contents).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> InputResult<u8> {
    match command {
        Command::Certify { input, tol } => cmd_certify(&input, &tol.tol),
        Command::Synthesize { input, out, tol } => cmd_synthesize(&input, out.as_deref(), &tol.tol),
        Command::Simulate {
            schedule,
            sigma0,
            csv,
            snapshots,
            samples_per_segment,
            dt,
        } => cmd_simulate(
            &schedule,
            &sigma0,
            csv.as_deref(),
            snapshots,
            samples_per_segment,
            dt,
        ),
        Command::Mintime { input, tol } => cmd_mintime(&input, &tol.tol),
        Command::Compound { matrix, k, kind } => cmd_compound(&matrix, k, kind.additive),
        Command::Cost { schedule } => cmd_cost(&schedule),
    }
}

fn certificate_doc(cert: &isospec_core::ReachabilityCertificate) -> docs::CertificateDoc {
    let verdict = match cert.verdict {
        Verdict::Reachable => "Reachable",
        Verdict::Unreachable => "Unreachable",
        Verdict::Unknown => "Unknown",
    };
    docs::CertificateDoc {
        verdict: verdict.to_string(),
        reason: cert.reason.as_str().to_string(),
        witness: cert.witness.map(|w| docs::WitnessDoc {
            c: w.c,
            t_split: w.t_split,
            binding_prefix: w.binding_prefix,
        }),
        audit: docs::CertificateAuditDoc {
            forward: cert
                .forward_audit
                .iter()
                .map(|row| docs::PrefixRowDoc {
                    k: row.k,
                    lhs: row.lhs,
                    rhs: row.rhs,
                })
                .collect(),
            reverse: cert
                .reverse_audit
                .iter()
                .map(|row| docs::PrefixRowDoc {
                    k: row.k,
                    lhs: row.lhs,
                    rhs: row.rhs,
                })
                .collect(),
        },
    }
}

fn verdict_exit(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Reachable => 0,
        Verdict::Unreachable => 2,
        Verdict::Unknown => 3,
    }
}

fn cmd_certify(input: &Path, tol_flags: &[(String, f64)]) -> InputResult<u8> {
    let doc: docs::ProblemDoc = load_json(input)?;
    let tols = docs::tolerances_from(doc.options.as_ref(), tol_flags)?;
    let problem = docs::parse_problem_doc(&doc)?;
    log::info!(
        "certifying n = {}, horizon = {}, traceless = {}",
        problem.dim(),
        problem.horizon,
        problem.spectrum.is_traceless()
    );
    let cert = certify_with(&problem, &tols);
    print!("{}", docs::to_json(&certificate_doc(&cert)));
    Ok(verdict_exit(cert.verdict))
}

fn cmd_synthesize(input: &Path, out: Option<&Path>, tol_flags: &[(String, f64)]) -> InputResult<u8> {
    let doc: docs::ProblemDoc = load_json(input)?;
    let tols = docs::tolerances_from(doc.options.as_ref(), tol_flags)?;
    let problem = docs::parse_problem_doc(&doc)?;
    let (cert, synthesized) = synthesize_certified_with(&problem, &tols)?;
    let Some(synthesized) = synthesized else {
        // embed the certificate so the caller sees why nothing was built
        print!("{}", docs::to_json(&certificate_doc(&cert)));
        return Ok(verdict_exit(cert.verdict));
    };

    let trajectory = simulate_schedule(&problem.sigma0, &synthesized.schedule, 4)?;
    let endpoint_error =
        (trajectory.endpoint().matrix() - problem.sigma_t.matrix()).norm();
    if endpoint_error > tols.endpoint {
        log::warn!("verification endpoint error {endpoint_error:.3e} exceeds tolerance");
    }
    let summary = docs::SynthesisSummaryDoc {
        segments: synthesized.schedule.segments().len(),
        total_duration: synthesized.schedule.total_duration(),
        shear_cost: shear_cost(&synthesized.schedule),
        endpoint_error,
    };
    let schedule_json = docs::to_json(&docs::synthesized_to_doc(&synthesized));
    match out {
        Some(path) => {
            write_or_fail(path, &schedule_json)?;
            log::info!("schedule written to {}", path.display());
            print!("{}", docs::to_json(&summary));
        }
        None => {
            print!("{schedule_json}");
            log::info!("summary: {}", docs::to_json_compact(&summary));
        }
    }
    Ok(0)
}

/// Fractions {0, 1/4, 1/2, 3/4, 1} mapped through the phase boundaries
/// (0, t_split, T): the contraction midpoint, the isotropic waypoint, the
/// inflation midpoint.
fn default_snapshot_instants(t_split: Option<f64>, total: f64) -> Vec<f64> {
    let split = t_split.unwrap_or(total / 2.0).clamp(0.0, total);
    [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&f| {
            if f <= 0.5 {
                2.0 * f * split
            } else {
                split + (2.0 * f - 1.0) * (total - split)
            }
        })
        .collect()
}

fn cmd_simulate(
    schedule_path: &Path,
    sigma0_path: &Path,
    csv: Option<&Path>,
    snapshots: Option<Vec<f64>>,
    samples_per_segment: Option<usize>,
    dt: Option<f64>,
) -> InputResult<u8> {
    let doc: docs::ScheduleDoc = load_json(schedule_path)?;
    docs::validate_terms(&doc)?;
    let schedule = docs::parse_schedule_doc(&doc)?;
    let sigma0 = Covariance::new(load_matrix(sigma0_path, doc.n, "sigma0")?)
        .map_err(|e| InputError(format!("sigma0: {e}")))?;

    let isospectral = verify_isospectral(&schedule, schedule.spectrum());
    if !isospectral {
        log::warn!("schedule has non-isospectral segments; simulating anyway");
    }

    let samples = samples_per_segment.unwrap_or(DEFAULT_SAMPLES_PER_SEGMENT);
    let trajectory = simulate_schedule(&sigma0, &schedule, samples)?;
    if let Some(path) = csv {
        let mut buf = Vec::new();
        write_trajectory_csv(&trajectory, &mut buf)
            .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        fs::write(path, buf).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        log::info!("trajectory written to {}", path.display());
    }

    let instants = snapshots.unwrap_or_else(|| {
        let split = docs::parse_schedule_audit(&doc)
            .ok()
            .flatten()
            .map(|(_, t_split)| t_split);
        default_snapshot_instants(split, schedule.total_duration())
    });
    let snaps = ellipsoid_snapshots(&sigma0, &schedule, &instants)?;

    let rk4_deviation = match dt {
        Some(dt) if !schedule.segments().is_empty() => {
            let rk4 = simulate_rk4_schedule(&sigma0, &schedule, dt)?;
            Some((rk4.endpoint().matrix() - trajectory.endpoint().matrix()).norm())
        }
        _ => None,
    };

    let report = docs::SimulateReportDoc {
        endpoint: docs::matrix_to_rows(trajectory.endpoint().matrix()),
        endpoint_eigenvalues: trajectory.endpoint().eigenvalues().iter().copied().collect(),
        determinant_drift: trajectory.determinant_drift(schedule.spectrum().trace()),
        norm_growth_audit: norm_growth_audit(&trajectory, schedule.spectrum())?,
        isospectral,
        rk4_deviation,
        snapshots: snaps
            .iter()
            .map(|s| docs::SnapshotDoc {
                t: s.t,
                eigenvalues: s.eigenvalues.iter().copied().collect(),
                eigenvectors: docs::matrix_to_rows(&s.eigenvectors),
            })
            .collect(),
    };
    print!("{}", docs::to_json(&report));
    Ok(0)
}

fn cmd_mintime(input: &Path, tol_flags: &[(String, f64)]) -> InputResult<u8> {
    let doc: docs::ProblemDoc = load_json(input)?;
    let tols = docs::tolerances_from(doc.options.as_ref(), tol_flags)?;
    let problem = docs::parse_problem_doc(&doc)?;
    let breakdown =
        min_time_breakdown_with(&problem.sigma0, &problem.sigma_t, &problem.spectrum, &tols)?;
    let report = docs::MinTimeReportDoc {
        t_min: breakdown.total(),
        c: breakdown.c,
        phase1: docs::PhaseMinDoc {
            t_min: breakdown.t1_min,
            binding_k: breakdown.binding_k1,
        },
        phase2: docs::PhaseMinDoc {
            t_min: breakdown.t2_min,
            binding_k: breakdown.binding_k2,
        },
    };
    print!("{}", docs::to_json(&report));
    Ok(0)
}

fn compound_doc(kind: &str, compound: &CompoundMatrix) -> docs::CompoundDoc {
    docs::CompoundDoc {
        n: compound.basis().ambient_dim(),
        k: compound.basis().order(),
        kind: kind.to_string(),
        labels: (0..compound.dim()).map(|i| compound.basis().label(i)).collect(),
        entries: docs::matrix_to_rows(compound.entries()),
    }
}

fn cmd_compound(matrix_path: &Path, k: usize, additive: bool) -> InputResult<u8> {
    let rows: Vec<Vec<f64>> = load_json(matrix_path)?;
    let n = rows.len();
    let matrix = docs::rows_to_matrix(&rows, n, "matrix")?;
    let (kind, compound) = if additive {
        ("additive", additive_compound(&matrix, k)?)
    } else {
        ("multiplicative", multiplicative_compound(&matrix, k)?)
    };
    print!("{}", docs::to_json(&compound_doc(kind, &compound)));
    Ok(0)
}

fn cmd_cost(schedule_path: &Path) -> InputResult<u8> {
    let doc: docs::ScheduleDoc = load_json(schedule_path)?;
    let schedule = docs::parse_schedule_doc(&doc)?;
    let report = docs::CostDoc {
        shear_cost: shear_cost(&schedule),
    };
    print!("{}", docs::to_json(&report));
    Ok(0)
}
