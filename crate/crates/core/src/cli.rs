//! Command-line front end.
//!
//! Every setting can come from a flag or from a `key = value` file passed
//! with `--config`; flags win. Exit codes: 0 success, 1 a check or
//! comparison failed, 2 usage error, 3 numerical error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::builtins::{generalized_van_der_pol, linear_damping, linear_restoring};
use crate::error::Error;
use crate::funcmodel::{parse_rational, to_f64, FunctionSpec, Interval, Polynomial, Rational};
use crate::integrability::{check_chiellini, construct_f_from_g, construct_g_from_f, LienardSystem};
use crate::kernel::{f_closed, g0, log_h, signed_kernel, KernelRegime};
use crate::solver::{
    fit_chiellini, solve_k_zero, solve_parametric, trace_trajectory, InitialConditions, ParametricSolution,
    TraceOptions, DEFAULT_SAMPLES,
};
use crate::verify::{compare, integrate_reference};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const CHECK_GRID: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "lienard", version, about = "Exact solutions of Chiellini-integrable Lienard equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Check,
    Construct,
    Solve,
    Verify,
    Sweep,
    KernelEval,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test the integrability condition and print the certificate.
    Check(JobArgs),
    /// Print the partner coefficient of an integrable pair.
    Construct(JobArgs),
    /// Write the exact solution as CSV (w,x,t,xdot).
    Solve(JobArgs),
    /// Compare the exact solution with the reference integrator.
    Verify(JobArgs),
    /// Repeat verify over a grid of one parameter.
    Sweep(JobArgs),
    /// Print kernel values F(w,k) or G0.
    KernelEval(JobArgs),
}

/// All settings. Numeric parameters stay strings until use so rationals
/// like `1/3` survive into exact constructions.
#[derive(Debug, Clone, Default, Args)]
pub struct JobArgs {
    /// key = value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in family: eq48, eq53 or gvdp.
    #[arg(long)]
    pub system: Option<String>,
    /// Damping coefficient, e.g. "poly: [1, 1]" (ascending powers).
    #[arg(long)]
    pub f: Option<String>,
    /// Restoring force, e.g. "poly: [0, 1]".
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long = "C1", alias = "c1", allow_hyphen_values = true)]
    pub c1: Option<String>,
    #[arg(long = "C2", alias = "c2", allow_hyphen_values = true)]
    pub c2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Branch sign of the square root for eq53 and g-to-f constructions.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub xdot0: Option<String>,
    /// End time of a traced solve or verify.
    #[arg(long = "t-end")]
    pub t_end: Option<String>,
    /// End parameter; switches solve to a single-branch parameter sweep.
    #[arg(long = "w-end", allow_hyphen_values = true)]
    pub w_end: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    /// Domain "lo,hi" for check and g-to-f constructions.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Reference integrator tolerance.
    #[arg(long = "ref-tol")]
    pub ref_tol: Option<String>,
    /// Pass threshold on max |dx|.
    #[arg(long)]
    pub tol: Option<String>,
    /// Parameter name swept by `sweep`.
    #[arg(long)]
    pub param: Option<String>,
    /// Comma-separated values for `sweep`.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Comma-separated w values for `kernel-eval`.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<String>,
    /// G0 arguments for `kernel-eval`: "s,s_ref,k1,k2".
    #[arg(long, allow_hyphen_values = true)]
    pub g0: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write an SVG plot of x(t).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

impl JobArgs {
    fn flag_entries(&self) -> Vec<(&'static str, Option<String>)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.to_string_lossy().into_owned());
        vec![
            ("system", self.system.clone()),
            ("f", self.f.clone()),
            ("g", self.g.clone()),
            ("a", self.a.clone()),
            ("b", self.b.clone()),
            ("c", self.c.clone()),
            ("d", self.d.clone()),
            ("k", self.k.clone()),
            ("c1", self.c1.clone()),
            ("c2", self.c2.clone()),
            ("mu", self.mu.clone()),
            ("sign", self.sign.clone()),
            ("x0", self.x0.clone()),
            ("xdot0", self.xdot0.clone()),
            ("t_end", self.t_end.clone()),
            ("w_end", self.w_end.clone()),
            ("samples", self.samples.clone()),
            ("domain", self.domain.clone()),
            ("ref_tol", self.ref_tol.clone()),
            ("tol", self.tol.clone()),
            ("param", self.param.clone()),
            ("values", self.values.clone()),
            ("w", self.w.clone()),
            ("g0", self.g0.clone()),
            ("out", path(&self.out)),
            ("plot", path(&self.plot)),
        ]
    }
}

/// Failure of a job, mapped onto an exit code.
#[derive(Debug)]
pub enum JobError {
    Usage(String),
    Numeric(Error),
    Io(String),
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Usage(_) => EXIT_USAGE,
            JobError::Numeric(_) | JobError::Io(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for JobError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JobError::Usage(m) => write!(f, "usage: {m}"),
            JobError::Numeric(e) => write!(f, "numerical error: {e}"),
            JobError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for JobError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) | Error::Invalid(m) => JobError::Usage(m),
            other => JobError::Numeric(other),
        }
    }
}

type JobResult<T> = std::result::Result<T, JobError>;

/// A resolved job: the command plus the merged settings.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub command: CommandKind,
    pub values: BTreeMap<String, String>,
}

/// Text printed to stdout and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> JobResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| JobError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        out.insert(normalize_key(key), value.trim().to_string());
    }
    Ok(out)
}

impl JobConfig {
    pub fn from_command(command: &Command) -> JobResult<Self> {
        let (kind, args) = match command {
            Command::Check(a) => (CommandKind::Check, a),
            Command::Construct(a) => (CommandKind::Construct, a),
            Command::Solve(a) => (CommandKind::Solve, a),
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
            Command::KernelEval(a) => (CommandKind::KernelEval, a),
        };
        let mut values = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| JobError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        for (key, value) in args.flag_entries() {
            if let Some(v) = value {
                values.insert(key.to_string(), v);
            }
        }
        Ok(JobConfig { command: kind, values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn rational_or(&self, key: &str, default: i64) -> JobResult<Rational> {
        match self.get(key) {
            Some(v) => parse_rational(v).map_err(|e| JobError::Usage(format!("--{key}: {e}"))),
            None => Ok(Rational::from_integer(default.into())),
        }
    }

    fn rational(&self, key: &str) -> JobResult<Rational> {
        let v = self.get(key).ok_or_else(|| JobError::Usage(format!("missing --{key}")))?;
        parse_rational(v).map_err(|e| JobError::Usage(format!("--{key}: {e}")))
    }

    fn number_or(&self, key: &str, default: f64) -> JobResult<f64> {
        match self.get(key) {
            Some(v) => parse_number(key, v),
            None => Ok(default),
        }
    }

    fn number(&self, key: &str) -> JobResult<f64> {
        let v = self.get(key).ok_or_else(|| JobError::Usage(format!("missing --{key}")))?;
        parse_number(key, v)
    }

    fn list(&self, key: &str) -> JobResult<Vec<f64>> {
        let v = self.get(key).ok_or_else(|| JobError::Usage(format!("missing --{key}")))?;
        v.split(',').map(|s| parse_number(key, s.trim())).collect()
    }

    fn with(&self, key: &str, value: String) -> Self {
        let mut next = self.clone();
        next.values.insert(key.to_string(), value);
        next
    }
}

fn parse_number(key: &str, text: &str) -> JobResult<f64> {
    let r = parse_rational(text).map_err(|e| JobError::Usage(format!("--{key}: {e}")))?;
    Ok(to_f64(&r))
}

fn parse_function(key: &str, text: &str) -> JobResult<FunctionSpec> {
    Polynomial::parse(text)
        .map(FunctionSpec::from)
        .map_err(|e| JobError::Usage(format!("--{key}: {e}")))
}

fn sign_of(cfg: &JobConfig) -> JobResult<f64> {
    let s = cfg.number_or("sign", 1.0)?;
    if s == 1.0 || s == -1.0 {
        Ok(s)
    } else {
        Err(JobError::Usage(format!("--sign must be 1 or -1, got {s}")))
    }
}

fn parse_domain(cfg: &JobConfig) -> JobResult<Option<Interval>> {
    match cfg.get("domain") {
        None => Ok(None),
        Some(text) => {
            let parts: Vec<f64> =
                text.split(',').map(|s| parse_number("domain", s.trim())).collect::<JobResult<_>>()?;
            match parts[..] {
                [lo, hi] if lo < hi => Ok(Some(Interval::new(lo, hi))),
                _ => Err(JobError::Usage(format!("--domain expects lo,hi with lo < hi, got {text}"))),
            }
        }
    }
}

/// Builds the system from `system=` or from `f` and `g`. Built-in parameters
/// default to 1 (`d` to 0, `sign` to +1).
pub fn build_system(cfg: &JobConfig) -> JobResult<LienardSystem> {
    let mut sys = match cfg.get("system") {
        Some("eq48") => linear_damping(
            &cfg.rational_or("a", 1)?,
            &cfg.rational_or("b", 1)?,
            &cfg.rational_or("k", 1)?,
            &cfg.rational_or("c1", 1)?,
        ),
        Some("eq53") => linear_restoring(
            &cfg.rational_or("c", 1)?,
            &cfg.rational_or("d", 0)?,
            &cfg.rational_or("k", 1)?,
            &cfg.rational_or("c2", 1)?,
            sign_of(cfg)?,
        )?,
        Some("gvdp") => generalized_van_der_pol(
            &cfg.rational_or("mu", 1)?,
            &cfg.rational_or("k", 1)?,
            &cfg.rational_or("c1", 1)?,
        ),
        Some(other) => return Err(JobError::Usage(format!("unknown system `{other}` (eq48, eq53, gvdp)"))),
        None => {
            let f = cfg.get("f").ok_or_else(|| JobError::Usage("give --system or both --f and --g".into()))?;
            let g = cfg.get("g").ok_or_else(|| JobError::Usage("give --system or both --f and --g".into()))?;
            LienardSystem::new(parse_function("f", f)?, parse_function("g", g)?)
        }
    };
    if let Some(domain) = parse_domain(cfg)? {
        sys.domain = domain;
    }
    Ok(sys)
}

fn initial_conditions(cfg: &JobConfig, default: (f64, f64)) -> JobResult<InitialConditions> {
    Ok(InitialConditions::new(cfg.number_or("x0", default.0)?, cfg.number_or("xdot0", default.1)?))
}

/// `k` of a system: the stored value for built-ins, else the checker's.
fn integrability_constant(sys: &LienardSystem) -> JobResult<Option<f64>> {
    if let Some(k) = sys.known_k {
        return Ok(Some(k));
    }
    let cert = check_chiellini(sys, CHECK_GRID)?;
    Ok(cert.holds.then_some(cert.k))
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &str) -> JobResult<()> {
    let io = |e: std::io::Error| JobError::Io(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| JobError::Usage(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

/// CSV with header `w,x,t,xdot`, 17 significant digits.
pub fn solution_csv(sol: &ParametricSolution) -> String {
    let mut out = String::from("w,x,t,xdot\n");
    for s in &sol.samples {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", s.w, s.x, s.t, s.xdot);
    }
    out
}

/// Single-curve SVG of `ys` against `xs`.
pub fn svg_plot(xs: &[f64], ys: &[f64], x_label: &str, y_label: &str) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let range = |v: &[f64]| {
        let lo = v.iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            (lo - 1.0, lo + 1.0)
        } else {
            (lo, hi)
        }
    };
    let (x_lo, x_hi) = range(xs);
    let (y_lo, y_hi) = range(ys);
    let px = |x: f64| m + (x - x_lo) / (x_hi - x_lo) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y_lo) / (y_hi - y_lo) * (h - 2.0 * m);
    let mut points = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x.is_finite() && y.is_finite() {
            let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
        }
    }
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}">"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(svg, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, points.trim_end());
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(svg, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{y_label}</text>"#, h / 2.0, h / 2.0);
    let _ = writeln!(svg, r#"<text x="{m}" y="{}" font-size="11">{x_lo:.4}</text>"#, h - m + 15.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{x_hi:.4}</text>"#, w - m, h - m + 15.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y_lo:.4}</text>"#, m - 4.0, h - m);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y_hi:.4}</text>"#, m - 4.0, m + 4.0);
    svg.push_str("</svg>\n");
    svg
}

fn emit(cfg: &JobConfig, body: String) -> JobResult<String> {
    match cfg.get("out") {
        Some(path) => {
            write_atomic(Path::new(path), &body)?;
            Ok(String::new())
        }
        None => Ok(body),
    }
}

fn run_check(cfg: &JobConfig) -> JobResult<Outcome> {
    let sys = build_system(cfg)?;
    let cert = check_chiellini(&sys, CHECK_GRID)?;
    let code = if cert.holds { EXIT_OK } else { EXIT_FAIL };
    Ok(Outcome { stdout: format!("{cert}\n"), code })
}

fn run_construct(cfg: &JobConfig) -> JobResult<Outcome> {
    let k = cfg.rational("k")?;
    match (cfg.get("f"), cfg.get("g")) {
        (Some(f), None) => {
            let f = parse_function("f", f)?;
            let g = construct_g_from_f(&f, &k, &cfg.rational_or("c1", 0)?);
            let poly = g.as_polynomial().expect("polynomial input gives a polynomial");
            Ok(Outcome { stdout: format!("g(x) = {poly}\ng = {}\n", poly.to_list_string()), code: EXIT_OK })
        }
        (None, Some(g)) => {
            let gp = Polynomial::parse(g).map_err(|e| JobError::Usage(format!("--g: {e}")))?;
            let c2 = cfg.rational_or("c2", 0)?;
            let sign = sign_of(cfg)?;
            // fails early when the radicand is not positive on the requested domain
            construct_f_from_g(&FunctionSpec::from(gp.clone()), to_f64(&k), to_f64(&c2), sign, parse_domain(cfg)?)?;
            let radicand = &Polynomial::constant(c2) + &gp.antiderivative().scale(&(k * Rational::from_integer(2.into())));
            let s = if sign > 0.0 { "" } else { "-" };
            Ok(Outcome { stdout: format!("f(x) = {s}({gp}) / sqrt({radicand})\n"), code: EXIT_OK })
        }
        _ => Err(JobError::Usage("construct takes exactly one of --f or --g".into())),
    }
}

fn solve(cfg: &JobConfig, sys: &LienardSystem, ic: &InitialConditions, t_end: f64) -> JobResult<ParametricSolution> {
    let k = integrability_constant(sys)?
        .ok_or_else(|| JobError::Numeric(Error::Invalid("the system is not Chiellini-integrable".into())))?;
    let samples = cfg.number_or("samples", DEFAULT_SAMPLES as f64)? as usize;
    if k == 0.0 {
        let a = sys.ratio_at(ic.x0)?;
        let v0 = 1.0 / ic.xdot0;
        let v_end = match cfg.get("w_end") {
            Some(v) => parse_number("w_end", v)?,
            None => v0 * t_end.exp(),
        };
        return Ok(solve_k_zero(&sys.f, a, ic, (v0, v_end), samples)?);
    }
    let params = fit_chiellini(sys, k, ic)?;
    match cfg.get("w_end") {
        Some(v) => Ok(solve_parametric(sys, &params, (params.w0, parse_number("w_end", v)?), samples)?),
        None => Ok(trace_trajectory(sys, &params, t_end, &TraceOptions::default())?),
    }
}

fn run_solve(cfg: &JobConfig) -> JobResult<Outcome> {
    let sys = build_system(cfg)?;
    let ic = InitialConditions::new(cfg.number("x0")?, cfg.number("xdot0")?);
    let sol = solve(cfg, &sys, &ic, cfg.number_or("t_end", 5.0)?)?;
    if let Some(path) = cfg.get("plot") {
        let ts: Vec<f64> = sol.samples.iter().map(|s| s.t).collect();
        let xs: Vec<f64> = sol.samples.iter().map(|s| s.x).collect();
        write_atomic(Path::new(path), &svg_plot(&ts, &xs, "t", "x"))?;
    }
    let mut stdout = emit(cfg, solution_csv(&sol))?;
    if let Some(reason) = &sol.truncated {
        eprintln!("warning: {reason}");
    }
    if stdout.is_empty() {
        stdout = format!("wrote {} samples\n", sol.samples.len());
    }
    Ok(Outcome { stdout, code: EXIT_OK })
}

struct VerifyResult {
    summary: String,
    csv: String,
    max_dx: f64,
    max_dxdot: f64,
    pass: bool,
    xs: Vec<(f64, f64)>,
}

fn verify_once(cfg: &JobConfig) -> JobResult<VerifyResult> {
    let cfg = if cfg.get("system").is_none() && cfg.get("f").is_none() {
        cfg.with("system", "eq48".into())
    } else {
        cfg.clone()
    };
    let sys = build_system(&cfg)?;
    let ic = initial_conditions(&cfg, (0.0, 1.0))?;
    let t_end = cfg.number_or("t_end", 10.0)?;
    let sol = solve(&cfg, &sys, &ic, t_end)?;
    let (lo, hi) = sol.t_range();
    let reference = integrate_reference(&sys, &ic, (lo, hi), cfg.number_or("ref_tol", 1e-12)?)?;
    let report = compare(&sol, &reference, cfg.number_or("tol", 1e-6)?)?;
    Ok(VerifyResult {
        summary: report.summary(),
        csv: report.to_csv(),
        max_dx: report.max_abs_x_error,
        max_dxdot: report.max_abs_xdot_error,
        pass: report.pass,
        xs: report.rows.iter().map(|r| (r.t, r.x_exact)).collect(),
    })
}

fn run_verify(cfg: &JobConfig) -> JobResult<Outcome> {
    let result = verify_once(cfg)?;
    if let Some(path) = cfg.get("plot") {
        let (ts, xs): (Vec<f64>, Vec<f64>) = result.xs.iter().copied().unzip();
        write_atomic(Path::new(path), &svg_plot(&ts, &xs, "t", "x"))?;
    }
    if let Some(path) = cfg.get("out") {
        write_atomic(Path::new(path), &result.csv)?;
    }
    let code = if result.pass { EXIT_OK } else { EXIT_FAIL };
    Ok(Outcome { stdout: format!("{}\n", result.summary), code })
}

fn run_sweep(cfg: &JobConfig) -> JobResult<Outcome> {
    let param = normalize_key(cfg.get("param").ok_or_else(|| JobError::Usage("missing --param".into()))?);
    let raw = cfg.get("values").ok_or_else(|| JobError::Usage("missing --values".into()))?;
    let values: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
    for v in &values {
        parse_number("values", v)?;
    }
    let rows: Vec<(String, JobResult<VerifyResult>)> = values
        .par_iter()
        .map(|v| (v.clone(), verify_once(&cfg.with(&param, v.clone()))))
        .collect();
    let mut csv = format!("{param},max_abs_x_error,max_abs_xdot_error,pass,note\n");
    let mut all_pass = true;
    for (value, row) in rows {
        match row {
            Ok(r) => {
                all_pass &= r.pass;
                let _ = writeln!(csv, "{value},{:.16e},{:.16e},{},", r.max_dx, r.max_dxdot, r.pass);
            }
            Err(JobError::Usage(m)) => return Err(JobError::Usage(m)),
            Err(e) => {
                all_pass = false;
                let note = e.to_string().replace(',', ";");
                let _ = writeln!(csv, "{value},NaN,NaN,false,{note}");
            }
        }
    }
    let stdout = emit(cfg, csv)?;
    Ok(Outcome { stdout, code: if all_pass { EXIT_OK } else { EXIT_FAIL } })
}

fn run_kernel_eval(cfg: &JobConfig) -> JobResult<Outcome> {
    if let Some(text) = cfg.get("g0") {
        let parts: Vec<f64> = text.split(',').map(|s| parse_number("g0", s.trim())).collect::<JobResult<_>>()?;
        let [s, s_ref, k1, k2] = parts[..] else {
            return Err(JobError::Usage("--g0 expects s,s_ref,k1,k2".into()));
        };
        return Ok(Outcome { stdout: format!("G0 = {:.16e}\n", g0(s, s_ref, k1, k2)?), code: EXIT_OK });
    }
    let regime = KernelRegime::new(cfg.number("k")?);
    let mut out = String::from("w,F,E,log_h\n");
    for w in cfg.list("w")? {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            w,
            f_closed(w, &regime)?,
            signed_kernel(w, &regime)?,
            log_h(w, &regime)?
        );
    }
    let _ = writeln!(out, "# regime {} F(+inf) = {:.16e} F(-inf) = {:.16e}", regime.tag, regime.f_at_infinity(true), regime.f_at_infinity(false));
    Ok(Outcome { stdout: emit(cfg, out)?, code: EXIT_OK })
}

/// Runs one job.
pub fn run(cfg: &JobConfig) -> JobResult<Outcome> {
    match cfg.command {
        CommandKind::Check => run_check(cfg),
        CommandKind::Construct => run_construct(cfg),
        CommandKind::Solve => run_solve(cfg),
        CommandKind::Verify => run_verify(cfg),
        CommandKind::Sweep => run_sweep(cfg),
        CommandKind::KernelEval => run_kernel_eval(cfg),
    }
}

/// Parses arguments, runs the job, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = JobConfig::from_command(&cli.command).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            outcome.code
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
