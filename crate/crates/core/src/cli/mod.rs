//! Command-line front end: `catalogue`, `solve`, `derivs`, `kernel-check`,
//! `modmatrix`, `bloch`, `verify` and `sweep`.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure,
//! 3 indeterminate (marginal class), 4 numeric or file failure.

pub mod config;
pub mod sweep;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bloch::{self, Form};
use crate::error::Error;
use crate::kernel::{self, KernelThresholds};
use crate::modulation::{self, Classification};
use crate::persist;
use crate::symbols::CATALOGUE;
use crate::wave::{self, SolverOptions, TravelingWave};
use config::{Axis, Depth, EquationConfig, GridConfig, NonlinearityConfig, RunConfig, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "modstab",
    version,
    about = "Modulational stability of periodic traveling waves in generalized Whitham equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in dispersion symbols.
    Catalogue {
        #[arg(long)]
        json: bool,
    },
    /// Compute a periodic traveling wave and write it as JSON.
    Solve(SolveArgs),
    /// Parameter derivatives of a wave with respect to (k, M, P).
    Derivs {
        wave: PathBuf,
        #[arg(long, default_value = "derivs.json")]
        out: PathBuf,
    },
    /// Check the generalized-kernel identities and biorthogonality.
    KernelCheck {
        wave: PathBuf,
        /// Residual tolerance, relative to 1 + sup|φ|.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Assemble the modulation matrix and classify it.
    Modmatrix {
        wave: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues of the Bloch operator nearest the origin.
    Bloch {
        wave: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, value_enum, default_value = "exact")]
        form: FormArg,
        #[arg(long, default_value_t = 6)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full verification report for one wave.
    Verify {
        wave: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol_connection: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol_identities: f64,
        /// Decreasing τ values; default picks a window automatically.
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<f64>>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Stability diagram over a parameter grid from a TOML config.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        resume: bool,
        #[arg(long, value_enum)]
        depth: Option<DepthArg>,
    },
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    /// TOML run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    equation: Option<String>,
    /// Equation parameter, `name=value` (repeatable).
    #[arg(long = "param")]
    params: Vec<String>,
    /// Odd polynomial Ω coefficients for a custom symbol.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    omega: Option<Vec<f64>>,
    #[arg(long)]
    nonlinearity: Option<String>,
    /// Polynomial coefficients of f, lowest degree first.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    f_coeffs: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mass: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mean: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    /// Newton seed wave (JSON).
    #[arg(long)]
    seed: Option<PathBuf>,
    #[arg(long, default_value = "wave.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormArg {
    Exact,
    Taylor2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DepthArg {
    Formal,
    Rigorous,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Lib(Error::InvalidArgument(_)) => EXIT_USAGE,
            Failure::Lib(_) => EXIT_NUMERIC,
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Catalogue { json } => catalogue(json, out),
        Command::Solve(a) => solve(a, out),
        Command::Derivs { wave, out: path } => derivs(wave, path, out),
        Command::KernelCheck { wave, tol } => kernel_check(wave, tol, out),
        Command::Modmatrix { wave, tol, out: path } => modmatrix(wave, tol, path, out),
        Command::Bloch {
            wave,
            tau,
            form,
            count,
            out: path,
        } => bloch_cmd(wave, tau, form, count, path, out),
        Command::Verify {
            wave,
            tol_connection,
            tol,
            tol_identities,
            tau,
            report,
        } => {
            let cfg = VerifyConfig {
                tol_connection,
                tol,
                tol_identities,
                tau_list: tau,
                ..VerifyConfig::default()
            };
            verify(wave, &cfg, report, out)
        }
        Command::Sweep {
            config,
            resume,
            depth,
        } => sweep_cmd(config, resume, depth, out),
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Lib(Error::Io(e))
}

fn load_wave(path: &PathBuf) -> std::result::Result<TravelingWave, Failure> {
    Ok(persist::load(path)?)
}

fn catalogue(json: bool, out: &mut dyn Write) -> CmdResult {
    if json {
        let s = serde_json::to_string_pretty(CATALOGUE).map_err(|e| Failure::Usage(e.to_string()))?;
        writeln!(out, "{s}").map_err(io)?;
        return Ok(EXIT_OK);
    }
    writeln!(
        out,
        "{:<18} {:<36} {:<8} {:<12} smooth at 0",
        "name", "symbol", "params", "assumption1"
    )
    .map_err(io)?;
    for e in CATALOGUE {
        writeln!(
            out,
            "{:<18} {:<36} {:<8} {:<12} {}",
            e.name,
            e.formula,
            if e.params.is_empty() { "-".to_string() } else { e.params.join(",") },
            e.assumption1,
            e.smooth_at_zero
        )
        .map_err(io)?;
    }
    writeln!(out, "{} equations", CATALOGUE.len()).map_err(io)?;
    Ok(EXIT_OK)
}

fn solve_config(a: &SolveArgs) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p).map_err(|e| Failure::Usage(e.to_string()))?,
        None => RunConfig {
            equation: EquationConfig {
                name: a
                    .equation
                    .clone()
                    .ok_or_else(|| Failure::Usage("--equation or --config is required".into()))?,
                params: BTreeMap::new(),
                omega: None,
            },
            nonlinearity: NonlinearityConfig::default(),
            grid: GridConfig {
                k: Axis::Value(a.k.ok_or_else(|| Failure::Usage("--k is required".into()))?),
                amplitude: None,
                mass: None,
                momentum: None,
                mean: 0.0,
            },
            solver: SolverOptions::default(),
            verify: VerifyConfig::default(),
            output: PathBuf::from("."),
            seed_wave: None,
        },
    };
    if let Some(n) = &a.equation {
        cfg.equation.name = n.clone();
    }
    for p in &a.params {
        let (key, val) = p
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--param expects name=value, got `{p}`")))?;
        let v: f64 = val
            .parse()
            .map_err(|_| Failure::Usage(format!("--param {key}: `{val}` is not a number")))?;
        cfg.equation.params.insert(key.to_string(), v);
    }
    if a.omega.is_some() {
        cfg.equation.omega = a.omega.clone();
    }
    if a.nonlinearity.is_some() || a.f_coeffs.is_some() {
        cfg.nonlinearity = NonlinearityConfig {
            name: a.nonlinearity.clone(),
            coeffs: a.f_coeffs.clone(),
        };
    }
    if let Some(k) = a.k {
        cfg.grid.k = Axis::Value(k);
    }
    if let Some(m) = a.mean {
        cfg.grid.mean = m;
    }
    match (a.amplitude, a.mass, a.momentum) {
        (Some(amp), None, None) => {
            cfg.grid.amplitude = Some(Axis::Value(amp));
            cfg.grid.mass = None;
            cfg.grid.momentum = None;
        }
        (None, Some(m), Some(p)) => {
            cfg.grid.amplitude = None;
            cfg.grid.mass = Some(Axis::Value(m));
            cfg.grid.momentum = Some(Axis::Value(p));
        }
        (None, None, None) => {}
        _ => {
            return Err(Failure::Usage(
                "give either --amplitude or both --mass and --momentum".into(),
            ))
        }
    }
    if let Some(n) = a.modes {
        cfg.solver.modes = n;
    }
    if a.seed.is_some() {
        cfg.seed_wave = a.seed.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = solve_config(&a)?;
    let points = cfg.points()?;
    let [p] = points.as_slice() else {
        return Err(Failure::Usage(format!(
            "solve needs a single grid point, the configuration has {}",
            points.len()
        )));
    };
    let spec = cfg.spec()?;
    let seed: Option<TravelingWave> = cfg.seed_wave.as_ref().map(load_wave).transpose()?;
    let w = sweep::solve_point(&spec, &cfg, p, seed.as_ref())?;
    persist::save(&w, &a.out)?;
    let pt = w.point();
    writeln!(
        out,
        "solved {} k={} M={:.12e} P={:.12e}: c={:.15e} b={:.6e} a1={:.6e} ({} modes) -> {}",
        spec.name,
        w.k,
        pt.mass,
        pt.momentum,
        w.c,
        w.b,
        w.amplitude(),
        w.modes(),
        a.out.display()
    )
    .map_err(io)?;
    Ok(EXIT_OK)
}

fn derivs(path: PathBuf, dest: PathBuf, out: &mut dyn Write) -> CmdResult {
    let w = load_wave(&path)?;
    let pj = wave::parameter_derivatives(&w, &SolverOptions::default())?;
    persist::save(&pj, &dest)?;
    writeln!(
        out,
        "c_k={:.12e} c_M={:.12e} c_P={:.12e} b_P={:.12e} cond={:.2e} -> {}",
        pj.c_k,
        pj.c_m,
        pj.c_p,
        pj.b_p,
        pj.cond,
        dest.display()
    )
    .map_err(io)?;
    Ok(EXIT_OK)
}

fn kernel_check(path: PathBuf, tol: f64, out: &mut dyn Write) -> CmdResult {
    let w = load_wave(&path)?;
    let pj = wave::parameter_derivatives(&w, &SolverOptions::default())?;
    let bases = kernel::build_bases(&w, &pj)?;
    let rep = kernel::verify_kernel_identities(&w, &pj, &bases)?;
    let scale = 1.0 + sup_profile(&w);
    for (name, r) in &rep.residuals {
        writeln!(out, "  {name:<36} {r:.3e}").map_err(io)?;
    }
    let simple = kernel::check_simple_kernel(&w, &pj, KernelThresholds::default())?;
    writeln!(
        out,
        "  simple kernel: sigma_min/norm={:.2e} sigma_next/norm={:.2e} ({})",
        simple.sigma_min / simple.norm,
        simple.sigma_next / simple.norm,
        pass_str(simple.pass)
    )
    .map_err(io)?;
    let ok = rep.max_residual() <= tol * scale && bases.gram_error() <= 1e-7;
    writeln!(
        out,
        "kernel: {} (max residual {:.3e}, gram error {:.3e}, remark: {})",
        pass_str(ok),
        rep.max_residual(),
        bases.gram_error(),
        rep.remark_alternative
    )
    .map_err(io)?;
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
}

fn sup_profile(w: &TravelingWave) -> f64 {
    w.profile()
        .to_real_grid(w.grid_len)
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
}

fn pass_str(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn modmatrix(path: PathBuf, tol: f64, dest: Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let w = load_wave(&path)?;
    let pj = wave::parameter_derivatives(&w, &SolverOptions::default())?;
    let mm = modulation::assemble_modulation_matrix(&w, &pj, tol)?;
    for row in &mm.d {
        writeln!(out, "  [{:>22.15e} {:>22.15e} {:>22.15e}]", row[0], row[1], row[2]).map_err(io)?;
    }
    if let Some(p) = &dest {
        persist::save(&mm, p)?;
    }
    let speeds: Vec<String> = mm.speeds.iter().map(|z| format!("{:.9}{:+.3e}i", z.re, z.im)).collect();
    writeln!(out, "{}: speeds {}", mm.classification, speeds.join(", ")).map_err(io)?;
    Ok(if mm.classification == Classification::Marginal {
        EXIT_INDETERMINATE
    } else {
        EXIT_OK
    })
}

#[derive(Serialize)]
struct BlochReport {
    tau: f64,
    form: Form,
    eigenvalues: Vec<num_complex::Complex64>,
}

fn bloch_cmd(
    path: PathBuf,
    tau: f64,
    form: FormArg,
    count: usize,
    dest: Option<PathBuf>,
    out: &mut dyn Write,
) -> CmdResult {
    let w = load_wave(&path)?;
    let form = match form {
        FormArg::Exact => Form::Exact,
        FormArg::Taylor2 => Form::Taylor2,
    };
    let op = bloch::assemble_bloch(&w, tau, form)?;
    let pairs = if tau == 0.0 {
        bloch::spectrum_near_origin(&op, None)?
    } else {
        bloch::nearest_eigenpairs(&op, count)?
    };
    let eigenvalues: Vec<_> = pairs.iter().map(|p| p.lambda).take(count).collect();
    for z in &eigenvalues {
        writeln!(out, "  {:>22.15e} {:+.15e}i", z.re, z.im).map_err(io)?;
    }
    if let Some(p) = &dest {
        persist::save_as("bloch-eigenvalues", &BlochReport { tau, form, eigenvalues: eigenvalues.clone() }, p)?;
    }
    let growth = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    writeln!(out, "tau={tau}: {} eigenvalues, max Re = {growth:.3e}", eigenvalues.len()).map_err(io)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport {
    gram_error: f64,
    identities: kernel::IdentityReport,
    connection: bloch::ConnectionReport,
    taylor_ratio: Option<f64>,
    verdict: bloch::Verdict,
}

fn verify(path: PathBuf, cfg: &VerifyConfig, report: Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let w = load_wave(&path)?;
    let pj = wave::parameter_derivatives(&w, &SolverOptions::default())?;
    let bases = kernel::build_bases(&w, &pj)?;
    let gram_ok = bases.gram_error() <= 1e-7;
    writeln!(out, "gram: {} (max error {:.3e})", pass_str(gram_ok), bases.gram_error()).map_err(io)?;

    let ids = kernel::verify_kernel_identities(&w, &pj, &bases)?;
    let ids_ok = ids.max_residual() <= cfg.tol_identities * (1.0 + sup_profile(&w));
    writeln!(out, "identities: {} (max residual {:.3e})", pass_str(ids_ok), ids.max_residual()).map_err(io)?;

    let conn = bloch::verify_connection(&w, &pj, &bases, cfg.tol_connection)?;
    writeln!(
        out,
        "connection: {} (max entry error {:.3e} at ({}, {}))",
        pass_str(conn.pass),
        conn.max_entry_error,
        conn.worst_entry.0,
        conn.worst_entry.1
    )
    .map_err(io)?;

    let taylor_ratio = match (bloch::taylor_remainder(&w, 1e-2), bloch::taylor_remainder(&w, 5e-3)) {
        (Ok(a), Ok(b)) => Some(a / b),
        _ => None,
    };
    match taylor_ratio {
        Some(r) => writeln!(out, "taylor remainder: ratio {r:.3} between tau = 1e-2 and 5e-3"),
        None => writeln!(out, "taylor remainder: n/a (symbol not smooth)"),
    }
    .map_err(io)?;

    let v = bloch::modulational_verdict(&w, &pj, &bases, &cfg.verdict())?;
    let verdict = match v.consistent {
        Some(true) => "consistent",
        Some(false) => "INCONSISTENT",
        None => "indeterminate",
    };
    writeln!(
        out,
        "verdict: {verdict} ({}, max Re lambda {:.3e}, slopes ambiguous: {})",
        v.class, v.spectral_max_growth, v.slopes.ambiguous
    )
    .map_err(io)?;

    let code = if !(gram_ok && ids_ok && conn.pass) || v.consistent == Some(false) {
        EXIT_VERIFY
    } else if v.consistent.is_none() {
        EXIT_INDETERMINATE
    } else {
        EXIT_OK
    };
    if let Some(p) = &report {
        let rep = VerifyReport {
            gram_error: bases.gram_error(),
            identities: ids,
            connection: conn,
            taylor_ratio,
            verdict: v,
        };
        persist::save_as("verify-report", &rep, p)?;
    }
    Ok(code)
}

fn sweep_cmd(path: PathBuf, resume: bool, depth: Option<DepthArg>, out: &mut dyn Write) -> CmdResult {
    let mut cfg = RunConfig::load(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if let Some(d) = depth {
        cfg.verify.depth = match d {
            DepthArg::Formal => Depth::Formal,
            DepthArg::Rigorous => Depth::Rigorous,
        };
    }
    let res = sweep::run_sweep(&cfg, resume)?;
    writeln!(
        out,
        "sweep: {} -> {}",
        sweep::summarize(&res),
        sweep::sweep_csv_path(&cfg).display()
    )
    .map_err(io)?;
    Ok(if res.inconsistent() > 0 { EXIT_VERIFY } else { EXIT_OK })
}
