//! Subcommand front end. Every command prints one JSON report on stdout and
//! exits 0 when all verdicts pass, 1 when a mathematical verdict fails and 2
//! when the input cannot be used.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::algebra::Tolerance;
use crate::cnd::{cnd_to_pd, pd_to_cnd_reconstruct};
use crate::error::{Error, Result};
use crate::interpolation::{bounded_extension, interpolate_min_norm, InterpolationProblem};
use crate::io;
use crate::kernel::{KernelSample, PointFamily};
use crate::report::Report;
use crate::rkhm::Rkhm;
use crate::selftest::{self, SelftestConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cstar-kernels", version, about = "Operator-valued kernels on Hilbert C*-modules")]
struct Cli {
    /// Relative tolerance for spectral decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_rel: f64,
    /// Absolute floor added to every threshold.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_abs: f64,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = selftest::DEFAULT_SEED)]
    seed: u64,
    /// Also write the command's main artifact (or the report) to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a kernel file for a definiteness property.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Pd)]
        mode: Mode,
    },
    /// Move between a CND kernel and its PD companion.
    Transform {
        file: PathBuf,
        /// Defaults to the first point of the kernel.
        #[arg(long)]
        base_point: Option<String>,
        #[arg(long, value_enum, default_value_t = Direction::CndToPd)]
        direction: Direction,
    },
    /// Solve an interpolation problem, or a bounded extension when it sets `m`.
    Interpolate { file: PathBuf },
    /// Factor a PD kernel through its feature maps.
    Kolmogorov { file: PathBuf },
    /// Run the seeded property suites.
    Selftest {
        /// Fix the number of sample points.
        #[arg(long)]
        points: Option<usize>,
        /// Fix the module rank.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Pd,
    Cnd,
    Hermitian,
    Normalized,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    CndToPd,
    Reconstruct,
}

/// A finished command: the report plus the artifact `--output` writes.
struct Outcome {
    report: Report,
    artifact: Option<serde_json::Value>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, artifact: None }
    }
}

/// Input problems, as opposed to mathematical failures.
fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Malformed { .. }
            | Error::Io(_)
            | Error::InvalidShape(_)
            | Error::ShapeMismatch { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidTolerance { .. }
            | Error::UnknownPoint(_)
            | Error::DuplicatePoint(_)
            | Error::TooFewPoints { .. }
    )
}

/// A failed verdict standing in for a mathematical error.
fn failure_report(command: &str, e: &Error) -> Report {
    let mut r = Report::new(command);
    let (name, value) = match e {
        Error::NotHermitian { defect } => ("hermitian", *defect),
        Error::NotPositiveDefinite { min_eigenvalue } => ("positive_definite", *min_eigenvalue),
        Error::NotPositive { min_eigenvalue } => ("positive", *min_eigenvalue),
        Error::GapNotPositive { min_eigenvalue } => ("gap_positive_definite", *min_eigenvalue),
        Error::RangeViolation { residual, .. } => ("range_inclusion", *residual),
        Error::DegenerateSpan { residual } => ("riesz_solve", *residual),
        _ => ("preconditions", 1.0),
    };
    let metric = if name == "preconditions" { "violations" } else { "witness" };
    r.verdict(name, false, &[(metric, value)]);
    r.artifact("diagnostic", e.to_string());
    r
}

fn load_kernel(path: &Path, tol: &Tolerance) -> Result<KernelSample> {
    io::load_kernel(path, tol)
}

fn check(file: &Path, mode: Mode, tol: &Tolerance) -> Result<Outcome> {
    let k = load_kernel(file, tol)?;
    let mut r = Report::new("check");
    match mode {
        Mode::Pd => {
            let d = k.positive_definiteness(tol);
            r.verdict(
                "positive_definite",
                d.verdict,
                &[
                    ("min_eigenvalue", d.extremal_eigenvalue),
                    ("threshold", d.threshold),
                    ("hermitian_defect", k.hermitian_defect()),
                ],
            );
        }
        Mode::Cnd => match k.conditional_negativity(tol) {
            Ok(d) => {
                r.verdict(
                    "conditionally_negative_definite",
                    d.verdict,
                    &[("max_eigenvalue", d.extremal_eigenvalue), ("threshold", d.threshold)],
                );
            }
            Err(Error::NotHermitian { defect }) => {
                r.verdict("conditionally_negative_definite", false, &[("hermitian_defect", defect)]);
            }
            Err(e) => return Err(e),
        },
        Mode::Hermitian => {
            let defect = k.hermitian_defect();
            r.verdict(
                "hermitian",
                k.is_hermitian(tol),
                &[("defect", defect), ("threshold", tol.threshold(k.max_abs()))],
            );
        }
        Mode::Normalized => {
            let diag = (0..k.len()).map(|i| k.op(i, i).norm()).fold(0.0, f64::max);
            r.verdict(
                "normalized",
                k.is_normalized(tol),
                &[("max_diagonal_norm", diag), ("threshold", tol.threshold(k.max_abs()))],
            );
        }
    }
    r.metric("points", k.len() as f64);
    Ok(r.into())
}

fn transform(file: &Path, base_point: Option<&str>, direction: Direction, tol: &Tolerance) -> Result<Outcome> {
    let mut r = Report::new("transform");
    match direction {
        Direction::CndToPd => {
            let l = load_kernel(file, tol)?;
            let s0 = base_point.unwrap_or(&l.points()[0]).to_string();
            let t = cnd_to_pd(&l, &s0, tol)?;
            let back = pd_to_cnd_reconstruct(&t)?;
            let round_trip = back.max_abs_diff(&l) / (1.0 + l.max_abs());
            let d = t.kernel.positive_definiteness(tol);
            r.verdict(
                "positive_definite",
                d.verdict,
                &[("min_eigenvalue", d.extremal_eigenvalue), ("threshold", d.threshold)],
            );
            r.verdict("round_trip", round_trip <= 1e-9, &[("relative_defect", round_trip)]);
            r.metric("kernel_max_abs", t.kernel.max_abs());
            r.metric("psi_norm", t.psi_norm());
            r.metric("psi_vanishes", if t.psi_vanishes() { 1.0 } else { 0.0 });
            let wire = serde_json::to_value(io::transform_to_wire(&t, tol)).expect("plain data");
            r.artifact("transform", &wire);
            Ok(Outcome {
                report: r,
                artifact: Some(wire),
            })
        }
        Direction::Reconstruct => {
            let text = fs::read_to_string(file).map_err(|e| Error::Malformed {
                path: file.display().to_string(),
                message: e.to_string(),
            })?;
            let t = io::transform_from_json(&text, tol)?;
            if let Some(p) = base_point {
                if p != t.base_point {
                    return Err(Error::Malformed {
                        path: "base_point".into(),
                        message: format!("file uses `{}`, flag asks for `{p}`", t.base_point),
                    });
                }
            }
            let l = pd_to_cnd_reconstruct(&t)?;
            // Transforming back must land on the same pair.
            let again = cnd_to_pd(&l, &t.base_point, tol)?;
            let scale = 1.0 + t.kernel.max_abs();
            let k_gap = again.kernel.max_abs_diff(&t.kernel) / scale;
            let psi_gap = again
                .psi
                .iter()
                .zip(&t.psi)
                .map(|(a, b)| a.max_abs_diff(b))
                .fold(0.0, f64::max)
                / scale;
            r.verdict(
                "round_trip",
                k_gap.max(psi_gap) <= 1e-9,
                &[("kernel_defect", k_gap), ("psi_defect", psi_gap)],
            );
            r.metric("kernel_max_abs", l.max_abs());
            let wire = serde_json::to_value(io::kernel_to_wire(&l, tol)).expect("plain data");
            r.artifact("kernel", &wire);
            Ok(Outcome {
                report: r,
                artifact: Some(wire),
            })
        }
    }
}

fn interpolate(file: &Path, tol: &Tolerance) -> Result<Outcome> {
    let problem = io::load_problem(file, tol)?;
    let kernel = Arc::new(problem.kernel);
    let rkhm = Rkhm::from_arc(Arc::clone(&kernel), *tol)?;
    let mut r = Report::new("interpolate");
    let result = match problem.m {
        Some(m) => {
            let mut values = PointFamily::new();
            for (s, y) in &problem.targets {
                if values.contains(s) {
                    return Err(Error::DuplicatePoint(s.clone()));
                }
                values.insert(s.clone(), y.clone())?;
            }
            let points: Vec<String> = problem.targets.iter().map(|(s, _)| s.clone()).collect();
            let res = bounded_extension(&rkhm, &values, m, &points, tol)?;
            let h = res.f.as_ref().expect("extensions carry an element");
            let hh = h.inner(h)?.norm();
            r.verdict("gap_positive_definite", true, &[("bound", m)]);
            r.verdict("norm_bound", hh <= m + 1e-8, &[("inner_norm", hh), ("bound", m)]);
            r.verdict("agreement", res.evaluation_defect <= 1e-8, &[("defect", res.evaluation_defect)]);
            if let Some(l) = res.lambda_min {
                r.metric("least_bound", l);
            }
            res
        }
        None => {
            let p = InterpolationProblem::new(Arc::clone(&kernel), problem.targets)?;
            let res = interpolate_min_norm(&rkhm, &p, tol)?;
            r.verdict("feasible", res.feasible, &[("range_residual", res.residual)]);
            if res.feasible {
                r.verdict(
                    "interpolates",
                    res.evaluation_defect <= 1e-8,
                    &[("evaluation_defect", res.evaluation_defect), ("norm", res.norm)],
                );
                if let Some(c) = &res.minimality {
                    r.verdict(
                        "minimal_norm",
                        c.certified,
                        &[("worst_gap", c.worst_gap), ("null_dim", c.null_dim as f64)],
                    );
                }
            }
            res
        }
    };
    let artifact = result
        .f
        .as_ref()
        .map(|f| serde_json::to_value(io::rkhm_element_to_wire(f)).expect("plain data"));
    if let Some(a) = &artifact {
        r.artifact("interpolant", a);
    }
    Ok(Outcome { report: r, artifact })
}

fn kolmogorov(file: &Path, tol: &Tolerance) -> Result<Outcome> {
    let k = load_kernel(file, tol)?;
    let rkhm = Rkhm::new(k, *tol)?;
    let k = rkhm.kernel();
    let mut worst: f64 = 0.0;
    for s in k.points() {
        for t in k.points() {
            worst = worst.max(rkhm.kolmogorov_defect(s, t)?);
        }
    }
    let bound = 1e-8 * (1.0 + k.norm());
    let mut r = Report::new("kolmogorov");
    r.verdict("kolmogorov", worst <= bound, &[("max_defect", worst), ("bound", bound)]);
    r.metric("span_dim", rkhm.span_dim() as f64);
    r.metric("kernel_norm", k.norm());
    Ok(r.into())
}

fn selftest_cmd(seed: u64, points: Option<usize>, rank: Option<usize>, cases: usize) -> Result<Outcome> {
    if points == Some(0) || rank == Some(0) {
        return Err(Error::Precondition("points and rank must be positive".into()));
    }
    let cfg = SelftestConfig {
        seed,
        points,
        rank,
        cases,
    };
    Ok(selftest::report(&cfg, &selftest::run_all(&cfg)).into())
}

/// Parses `args` (program name first), runs the command, prints the report
/// and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let tol = match Tolerance::new(cli.tol_rel, cli.tol_abs) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_MALFORMED;
        }
    };
    let name = match &cli.command {
        Command::Check { .. } => "check",
        Command::Transform { .. } => "transform",
        Command::Interpolate { .. } => "interpolate",
        Command::Kolmogorov { .. } => "kolmogorov",
        Command::Selftest { .. } => "selftest",
    };
    let result = match &cli.command {
        Command::Check { file, mode } => check(file, *mode, &tol),
        Command::Transform {
            file,
            base_point,
            direction,
        } => transform(file, base_point.as_deref(), *direction, &tol),
        Command::Interpolate { file } => interpolate(file, &tol),
        Command::Kolmogorov { file } => kolmogorov(file, &tol),
        Command::Selftest { points, rank, cases } => selftest_cmd(cli.seed, *points, *rank, *cases),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) if is_input_error(&e) => {
            eprintln!("error: {e}");
            return EXIT_MALFORMED;
        }
        Err(e) => {
            eprintln!("error: {e}");
            failure_report(name, &e).into()
        }
    };
    if let Some(path) = &cli.output {
        let body = match &outcome.artifact {
            Some(a) => serde_json::to_string_pretty(a).expect("plain data"),
            None => outcome.report.to_json(),
        };
        if let Err(e) = fs::write(path, body + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_MALFORMED;
        }
    }
    for failed in outcome.report.verdicts.iter().filter(|(_, &v)| !v) {
        eprintln!("verdict failed: {}", failed.0);
    }
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", outcome.report.to_json());
    if outcome.report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
