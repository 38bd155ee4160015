//! The `convexity-atlas` command line.
//!
//! Every subcommand writes its table or document to `--output` (default
//! stdout) and diagnostics to stderr. Exit codes: 0 success / convex,
//! 1 non-convex witness, 2 invalid input, 3 degenerate or empty result,
//! 4 integration or search failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::convexity::{
    certify, intersections, linspace, scan, slice_curves, Bbox, CellVerdict, ConvexityCertificate,
    Resolution, ScanGrid, SliceCurve, Verdict,
};
use crate::dynamics::{Params, RegPoint};
use crate::error::{Error, Result};
use crate::flow::{
    default_bracket, find_symmetric_orbit, integrate, Branch, HalfAxis, PeriodicOrbit, Tolerances,
    Trajectory,
};
use crate::format::{csv_line, fmt17, slice_svg, F17};
use crate::lagrange::lagrange_points;

pub const EXIT_OK: i32 = 0;
pub const EXIT_WITNESS: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// Overrides `--jobs` when set.
pub const JOBS_ENV: &str = "CONVEXITY_ATLAS_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "convexity-atlas",
    version,
    about = "Convexity and dynamics of the regularized restricted three-body problem"
)]
pub struct Cli {
    /// Worker threads for parallel commands (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The five Lagrange points as CSV (label,q1,q2,value).
    Lagrange {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Positive-definiteness certificate of the Hessian on the filled energy surface.
    Certify {
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[command(flatten)]
        resolution: ResolutionArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Certificates on a (c, mu) grid as CSV (c,mu,lambda_min,verdict).
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        c_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        c_max: f64,
        #[arg(long)]
        nc: usize,
        #[arg(long, allow_hyphen_values = true)]
        mu_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu_max: f64,
        #[arg(long)]
        nmu: usize,
        #[command(flatten)]
        resolution: ResolutionArgs,
        /// Also write the heuristic per-row threshold mu0_hat(c) to this CSV file.
        #[arg(long)]
        mu0_output: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Level set and Hessian-determinant zero set on v2 = u1 = 0 at mu = 0.
    Slice {
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        v1_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        v1_max: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.5)]
        u2_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.5)]
        u2_max: f64,
        /// Grid nodes along v1.
        #[arg(long, default_value_t = 401)]
        nx: usize,
        /// Grid nodes along u2.
        #[arg(long, default_value_t = 401)]
        ny: usize,
        /// Also write an SVG plot of both curves.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Integrate the regularized flow as CSV (t,v1,v2,u1,u2,K).
    Flow {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        v1: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        v2: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        u1: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        u2: f64,
        #[arg(long, allow_hyphen_values = true)]
        t_end: f64,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Symmetric periodic orbit by shooting from the reversor's fixed set (JSON).
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        /// Lower end of the v1 bracket (default: first sign change on the negative axis).
        #[arg(long, allow_hyphen_values = true, requires = "v1_hi")]
        v1_lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "v1_lo")]
        v1_hi: Option<f64>,
        /// Target for |u1| at the half-orbit crossing.
        #[arg(long, default_value_t = crate::flow::SHOOTING_TOLERANCE)]
        tol: f64,
        /// Launch with u2 < 0 instead of u2 > 0.
        #[arg(long)]
        lower: bool,
        /// Search the default bracket on the positive v1 half-axis.
        #[arg(long)]
        positive_axis: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ResolutionArgs {
    #[arg(long, default_value_t = 40)]
    pub nr: usize,
    #[arg(long, default_value_t = 64)]
    pub ntheta: usize,
    #[arg(long, default_value_t = 16)]
    pub nw: usize,
    #[arg(long, default_value_t = 8)]
    pub nt: usize,
}

impl ResolutionArgs {
    fn resolve(&self) -> Result<Resolution> {
        Resolution::new(self.nr, self.ntheta, self.nw, self.nt)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ToleranceArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub drift: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::Singular { .. }
        | Error::OffSurface { .. }
        | Error::OffSection { .. } => EXIT_INVALID,
        Error::Iterate { source, .. } => exit_code(source),
        _ => EXIT_RUNTIME,
    }
}

pub fn lagrange_csv(mu: f64) -> Result<String> {
    let params = Params::new(mu, 0.0)?;
    let mut s = csv_line(&["label", "q1", "q2", "value"]);
    for p in lagrange_points(&params)? {
        s += &csv_line(&[
            p.label.to_string(),
            fmt17(p.q[0]),
            fmt17(p.q[1]),
            fmt17(p.value),
        ]);
    }
    Ok(s)
}

#[derive(Serialize)]
struct ResolutionJson {
    nr: usize,
    ntheta: usize,
    nw: usize,
    nt: usize,
}

#[derive(Serialize)]
struct CertificateJson {
    c: F17,
    mu: F17,
    resolution: ResolutionJson,
    lambda_min: Option<F17>,
    argmin: Option<[F17; 4]>,
    verdict: String,
}

fn f17s(a: [f64; 4]) -> [F17; 4] {
    a.map(F17)
}

pub fn certificate_json(cert: &ConvexityCertificate) -> String {
    let r = cert.resolution;
    let doc = CertificateJson {
        c: F17(cert.params.c()),
        mu: F17(cert.params.mu()),
        resolution: ResolutionJson {
            nr: r.nr,
            ntheta: r.ntheta,
            nw: r.nw,
            nt: r.nt,
        },
        lambda_min: cert.lambda_min.map(F17),
        argmin: cert.argmin.map(|z| f17s(z.to_array())),
        verdict: cert.verdict.to_string(),
    };
    serde_json::to_string(&doc).expect("serializable") + "\n"
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

/// One row per cell, sorted by `(c, mu)`.
pub fn scan_csv(grid: &ScanGrid) -> String {
    let mut cells: Vec<_> = grid.cells.iter().collect();
    cells.sort_by(|a, b| a.c.total_cmp(&b.c).then(a.mu.total_cmp(&b.mu)));
    let mut s = csv_line(&["c", "mu", "lambda_min", "verdict"]);
    for cell in cells {
        s += &csv_line(&[
            fmt17(cell.c),
            fmt17(cell.mu),
            opt17(cell.lambda_min),
            cell.verdict.to_string(),
        ]);
    }
    s
}

/// Heuristic threshold per row: smallest tested `mu` above which every tested cell is convex.
pub fn mu0_csv(grid: &ScanGrid) -> String {
    let mut s = csv_line(&["c", "mu0_hat_heuristic"]);
    for (ic, &c) in grid.c_values.iter().enumerate() {
        s += &csv_line(&[fmt17(c), opt17(grid.mu0_hat(ic))]);
    }
    s
}

/// `curve_id,v1,u2,path`: `path` numbers the polylines within each curve.
pub fn slice_csv(curves: &[SliceCurve]) -> String {
    let mut s = csv_line(&["curve_id", "v1", "u2", "path"]);
    for curve in curves {
        for (k, line) in curve.polylines.iter().enumerate() {
            for p in line {
                s += &csv_line(&[
                    curve.id.to_string(),
                    fmt17(p[0]),
                    fmt17(p[1]),
                    k.to_string(),
                ]);
            }
        }
    }
    s
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = csv_line(&["t", "v1", "v2", "u1", "u2", "K"]);
    for sample in &traj.samples {
        let z = sample.z.to_array();
        s += &csv_line(&[
            fmt17(sample.t),
            fmt17(z[0]),
            fmt17(z[1]),
            fmt17(z[2]),
            fmt17(z[3]),
            fmt17(sample.k),
        ]);
    }
    s
}

#[derive(Serialize)]
struct OrbitJson {
    z0: [F17; 4],
    period: F17,
    closure_error: F17,
    return_trace: F17,
}

pub fn orbit_json(orbit: &PeriodicOrbit) -> String {
    let doc = OrbitJson {
        z0: f17s(orbit.z0.to_array()),
        period: F17(orbit.period),
        closure_error: F17(orbit.closure_error),
        return_trace: F17(orbit.return_trace),
    };
    serde_json::to_string(&doc).expect("serializable") + "\n"
}

/// A finished command: the main document, extra files and the exit code.
struct Report {
    body: String,
    extra: Vec<(PathBuf, String)>,
    code: i32,
    notes: Vec<String>,
}

impl Report {
    fn ok(body: String) -> Self {
        Self {
            body,
            extra: Vec::new(),
            code: EXIT_OK,
            notes: Vec::new(),
        }
    }
}

fn execute(command: Command) -> Result<(Report, OutputArgs)> {
    match command {
        Command::Lagrange { mu, out } => Ok((Report::ok(lagrange_csv(mu)?), out)),
        Command::Certify {
            c,
            mu,
            resolution,
            out,
        } => {
            let cert = certify(&Params::new(mu, c)?, resolution.resolve()?)?;
            let mut report = Report::ok(certificate_json(&cert));
            report.code = match cert.verdict {
                Verdict::NumericallyConvex => EXIT_OK,
                Verdict::WitnessNonConvex => EXIT_WITNESS,
                Verdict::Degenerate => EXIT_DEGENERATE,
            };
            report.notes.extend(cert.note);
            Ok((report, out))
        }
        Command::Scan {
            c_min,
            c_max,
            nc,
            mu_min,
            mu_max,
            nmu,
            resolution,
            mu0_output,
            out,
        } => {
            let bounds = [c_min, c_max, mu_min, mu_max];
            if bounds.iter().any(|x| !x.is_finite())
                || c_min > c_max
                || mu_min > mu_max
                || nc == 0
                || nmu == 0
            {
                return Err(Error::InvalidParams(format!(
                    "bad scan ranges c in [{c_min}, {c_max}] x {nc}, mu in [{mu_min}, {mu_max}] x {nmu}"
                )));
            }
            let grid = scan(
                &linspace(c_min, c_max, nc),
                &linspace(mu_min, mu_max, nmu),
                resolution.resolve()?,
            )?;
            let mut report = Report::ok(scan_csv(&grid));
            let invalid = grid
                .cells
                .iter()
                .filter(|c| matches!(c.verdict, CellVerdict::InvalidParams(_)))
                .count();
            if invalid > 0 {
                report
                    .notes
                    .push(format!("{invalid} cell(s) had invalid parameters"));
            }
            if let Some(path) = mu0_output {
                report.extra.push((path, mu0_csv(&grid)));
            }
            Ok((report, out))
        }
        Command::Slice {
            c,
            v1_min,
            v1_max,
            u2_min,
            u2_max,
            nx,
            ny,
            svg,
            out,
        } => {
            let bbox = Bbox {
                v1_min,
                v1_max,
                u2_min,
                u2_max,
            };
            let curves = slice_curves(c, &bbox, nx, ny)?;
            let mut report = Report::ok(slice_csv(&curves));
            if curves.iter().all(|k| k.is_empty()) {
                report.code = EXIT_DEGENERATE;
                report.notes.push("both curves are empty in the box".into());
            } else {
                let hits = intersections(&curves[0], &curves[1]);
                report
                    .notes
                    .push(format!("{} intersection(s) between the curves", hits.len()));
            }
            if let Some(path) = svg {
                report.extra.push((path, slice_svg(c, &bbox, &curves)));
            }
            Ok((report, out))
        }
        Command::Flow {
            mu,
            c,
            v1,
            v2,
            u1,
            u2,
            t_end,
            tol,
            out,
        } => {
            let params = Params::new(mu, c)?;
            let tol = Tolerances {
                rtol: tol.rtol,
                atol: tol.atol,
                drift: tol.drift,
            };
            let traj = integrate(&params, &RegPoint::new([v1, v2], [u1, u2]), t_end, tol)?;
            Ok((Report::ok(trajectory_csv(&traj)), out))
        }
        Command::Orbit {
            mu,
            c,
            v1_lo,
            v1_hi,
            tol,
            lower,
            positive_axis,
            out,
        } => {
            let params = Params::new(mu, c)?;
            let branch = if lower { Branch::Lower } else { Branch::Upper };
            let bracket = match (v1_lo, v1_hi) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => default_bracket(
                    &params,
                    branch,
                    if positive_axis {
                        HalfAxis::Positive
                    } else {
                        HalfAxis::Negative
                    },
                )?,
            };
            let orbit = find_symmetric_orbit(&params, bracket, tol, branch)?;
            Ok((Report::ok(orbit_json(&orbit)), out))
        }
    }
}

fn jobs_from_env(flag: usize) -> std::result::Result<usize, String> {
    match std::env::var(JOBS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{JOBS_ENV}={v:?} is not a thread count")),
        Err(_) => Ok(flag),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let jobs = match jobs_from_env(cli.jobs) {
        Ok(j) => j,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_INVALID;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return EXIT_RUNTIME;
        }
    };
    let (report, out) = match pool.install(|| execute(cli.command)) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    for note in &report.notes {
        let _ = writeln!(stderr, "{note}");
    }
    let write = |path: &Option<PathBuf>, text: &str, stdout: &mut dyn Write| match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = write(&out.output, &report.body, stdout) {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_RUNTIME;
    }
    for (path, text) in &report.extra {
        if let Err(msg) = write(&Some(path.clone()), text, stdout) {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_RUNTIME;
        }
    }
    report.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("convexity-atlas").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn lagrange_table() {
        let (code, out, _) = run_str(&["lagrange", "--mu", "0.5"]);
        assert_eq!(code, 0);
        let rows: Vec<&str> = out.lines().collect();
        assert_eq!(rows[0], "label,q1,q2,value");
        assert_eq!(rows.len(), 6);
        assert!(rows[1].starts_with("L1,0.5,0,-2"));
        assert_eq!(run_str(&["lagrange", "--mu", "0"]).0, EXIT_INVALID);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["certify", "--c", "1.8"]).0, EXIT_INVALID);
        assert_eq!(run_str(&["bogus"]).0, EXIT_INVALID);
        assert_eq!(
            run_str(&["certify", "--c", "1.4", "--mu", "0.5"]).0,
            EXIT_INVALID
        );
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn certify_exit_codes() {
        let (code, out, _) = run_str(&["certify", "--c", "1.8", "--mu", "0.9999"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "NumericallyConvex");
        assert_eq!(v["resolution"]["ntheta"], 64);
        assert!(out.starts_with("{\"c\":1.8,\"mu\":0.99990000000000001,\"resolution\""));
        let (code, _, _) = run_str(&[
            "certify", "--c", "1.601", "--mu", "0", "--nr", "20", "--ntheta", "32",
        ]);
        assert_eq!(code, EXIT_WITNESS);
        let (code, out, _) = run_str(&["certify", "--c", "1.8", "--mu", "0.5", "--nr", "8"]);
        assert_eq!(code, EXIT_DEGENERATE);
        assert!(out.contains("\"lambda_min\":null"));
    }

    #[test]
    fn flow_rejects_off_surface() {
        let (code, _, err) = run_str(&[
            "flow", "--mu", "0", "--c", "1.8", "--v1", "0.1", "--t-end", "1",
        ]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("off the energy surface"));
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(
            exit_code(&Error::Drift {
                t: 1.0,
                residual: 1.0,
                bound: 0.1
            }),
            EXIT_RUNTIME
        );
        let wrapped = Error::Iterate {
            iterate: 2,
            source: Box::new(Error::OffSurface { residual: 1.0 }),
        };
        assert_eq!(exit_code(&wrapped), EXIT_INVALID);
        assert_eq!(exit_code(&Error::NoCrossing { t_max: 1.0 }), EXIT_RUNTIME);
    }
}
