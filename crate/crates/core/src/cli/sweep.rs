//! Stability diagrams over `(k, amplitude)` or `(k, M, P)` grids.
//!
//! Points are evaluated in parallel and written in grid order, so a sweep is
//! reproducible byte for byte and can be resumed after interruption.

use std::f64::consts::PI;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Depth, GridPoint, RunConfig};
use crate::bloch::{self, modulational_verdict};
use crate::error::{Error, Result};
use crate::kernel::build_bases;
use crate::modulation;
use crate::persist;
use crate::symbols::EquationSpec;
use crate::wave::{self, TravelingWave};

/// One CSV row. Columns follow field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    pub amplitude: Option<f64>,
    pub mass: Option<f64>,
    pub momentum: Option<f64>,
    pub c: Option<f64>,
    pub speed1_re: Option<f64>,
    pub speed1_im: Option<f64>,
    pub speed2_re: Option<f64>,
    pub speed2_im: Option<f64>,
    pub speed3_re: Option<f64>,
    pub speed3_im: Option<f64>,
    pub discriminant: Option<f64>,
    pub classification: Option<String>,
    pub max_re_lambda: Option<f64>,
    pub consistent: Option<bool>,
    pub connection_error: Option<f64>,
    pub failure: Option<String>,
}

impl SweepRow {
    fn empty(p: &GridPoint) -> Self {
        let (amplitude, mass, momentum) = match *p {
            GridPoint::Amplitude { amplitude, .. } => (Some(amplitude), None, None),
            GridPoint::Conserved { mass, momentum, .. } => (None, Some(mass), Some(momentum)),
        };
        SweepRow {
            k: p.k(),
            amplitude,
            mass,
            momentum,
            c: None,
            speed1_re: None,
            speed1_im: None,
            speed2_re: None,
            speed2_im: None,
            speed3_re: None,
            speed3_im: None,
            discriminant: None,
            classification: None,
            max_re_lambda: None,
            consistent: None,
            connection_error: None,
            failure: None,
        }
    }

    fn matches(&self, p: &GridPoint) -> bool {
        let e = SweepRow::empty(p);
        self.k == e.k
            && match p {
                GridPoint::Amplitude { .. } => self.amplitude == e.amplitude,
                GridPoint::Conserved { .. } => self.mass == e.mass && self.momentum == e.momentum,
            }
    }

    pub fn is_hyperbolic(&self) -> Option<bool> {
        self.discriminant.map(|d| d >= 0.0)
    }
}

/// A classification change between neighbouring `k` at fixed amplitude or `(M, P)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub amplitude: Option<f64>,
    pub mass: Option<f64>,
    pub momentum: Option<f64>,
    pub k_lo: f64,
    pub k_hi: f64,
    /// `hyperbolic` or `elliptic`.
    pub below: String,
    pub above: String,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub boundaries: Vec<Boundary>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }

    pub fn inconsistent(&self) -> usize {
        self.rows.iter().filter(|r| r.consistent == Some(false)).count()
    }
}

/// Converge the wave at a grid point.
pub fn solve_point(
    spec: &EquationSpec,
    cfg: &RunConfig,
    p: &GridPoint,
    seed: Option<&TravelingWave>,
) -> Result<TravelingWave> {
    let opts = &cfg.solver;
    match *p {
        GridPoint::Amplitude { k, amplitude } => {
            Ok(wave::continue_family(spec, k, cfg.grid.mean, &[amplitude], opts)?.remove(0))
        }
        GridPoint::Conserved { k, mass, momentum } => {
            if let Some(s) = seed {
                if let Ok(w) = wave::solve_wave(spec, k, mass, momentum, s, opts) {
                    return Ok(w);
                }
            }
            let u_bar = mass / (2.0 * PI);
            let excess = momentum - mass * mass / (4.0 * PI);
            if excess < 0.0 {
                return wave::solve_wave(spec, k, mass, momentum, &wave::stokes_seed(spec, k, u_bar, 0.0, opts)?, opts);
            }
            let amp = (2.0 * excess / PI).sqrt();
            let start = wave::continue_family(spec, k, u_bar, &[amp], opts)?.remove(0);
            wave::solve_wave(spec, k, mass, momentum, &start, opts)
        }
    }
}

/// Formal stage: the modulation matrix. Returns the wave for the rigorous stage.
fn formal(
    spec: &EquationSpec,
    cfg: &RunConfig,
    p: &GridPoint,
    seed: Option<&TravelingWave>,
    row: &mut SweepRow,
) -> Result<(TravelingWave, wave::ParameterJacobian)> {
    let w = solve_point(spec, cfg, p, seed)?;
    let pt = w.point();
    row.mass = Some(pt.mass);
    row.momentum = Some(pt.momentum);
    row.c = Some(w.c);
    let pj = wave::parameter_derivatives(&w, &cfg.solver)?;
    let mm = modulation::assemble_modulation_matrix(&w, &pj, cfg.verify.tol)?;
    let s = mm.speeds;
    row.speed1_re = Some(s[0].re);
    row.speed1_im = Some(s[0].im);
    row.speed2_re = Some(s[1].re);
    row.speed2_im = Some(s[1].im);
    row.speed3_re = Some(s[2].re);
    row.speed3_im = Some(s[2].im);
    row.discriminant = Some(modulation::discriminant(&mm.d));
    row.classification = Some(mm.classification.as_str().to_string());
    Ok((w, pj))
}

pub fn evaluate_point(
    spec: &EquationSpec,
    cfg: &RunConfig,
    p: &GridPoint,
    seed: Option<&TravelingWave>,
) -> SweepRow {
    let mut row = SweepRow::empty(p);
    let (w, pj) = match formal(spec, cfg, p, seed, &mut row) {
        Ok(x) => x,
        Err(e) => {
            row.failure = Some(failure_text(&e, p));
            return row;
        }
    };
    if cfg.verify.depth == Depth::Rigorous {
        let mut rigorous = || -> Result<()> {
            let bases = build_bases(&w, &pj)?;
            let v = modulational_verdict(&w, &pj, &bases, &cfg.verify.verdict())?;
            row.max_re_lambda = Some(v.spectral_max_growth);
            row.consistent = v.consistent;
            let conn = bloch::verify_connection(&w, &pj, &bases, cfg.verify.tol_connection)?;
            row.connection_error = Some(conn.max_entry_error);
            if !conn.pass {
                row.consistent = Some(false);
            }
            Ok(())
        };
        if let Err(e) = rigorous() {
            row.failure = Some(failure_text(&e, p));
        }
    }
    row
}

fn failure_text(e: &Error, p: &GridPoint) -> String {
    match e.point() {
        Some(_) => e.to_string(),
        None => format!("{e} at k={}", p.k()),
    }
}

fn hyperbolic_at(spec: &EquationSpec, cfg: &RunConfig, p: &GridPoint) -> Option<bool> {
    let mut row = SweepRow::empty(p);
    formal(spec, cfg, p, None, &mut row).ok()?;
    row.is_hyperbolic()
}

fn with_k(p: &GridPoint, k: f64) -> GridPoint {
    match *p {
        GridPoint::Amplitude { amplitude, .. } => GridPoint::Amplitude { k, amplitude },
        GridPoint::Conserved { mass, momentum, .. } => GridPoint::Conserved { k, mass, momentum },
    }
}

fn label(h: bool) -> String {
    if h { "hyperbolic" } else { "elliptic" }.to_string()
}

/// Sign changes of the discriminant along `k`, refined by bisection.
pub fn locate_boundaries(
    spec: &EquationSpec,
    cfg: &RunConfig,
    points: &[GridPoint],
    rows: &[SweepRow],
) -> Vec<Boundary> {
    // group by the non-k coordinates, keeping first-seen order
    type Column = Vec<(f64, GridPoint, Option<bool>)>;
    let mut groups: Vec<(SweepRow, Column)> = Vec::new();
    for (p, r) in points.iter().zip(rows) {
        let key = SweepRow::empty(&with_k(p, 0.0));
        let entry = (r.k, *p, r.is_hyperbolic());
        match groups.iter_mut().find(|(g, _)| *g == key) {
            Some((_, v)) => v.push(entry),
            None => groups.push((key, vec![entry])),
        }
    }
    let brackets: Vec<(SweepRow, GridPoint, f64, f64, bool, bool)> = groups
        .into_iter()
        .flat_map(|(key, mut v)| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v.windows(2)
                .filter_map(|w| match (w[0].2, w[1].2) {
                    (Some(a), Some(b)) if a != b => Some((key.clone(), w[0].1, w[0].0, w[1].0, a, b)),
                    _ => None,
                })
                .collect::<Vec<_>>()
        })
        .collect();
    brackets
        .into_par_iter()
        .map(|(key, p, mut lo, mut hi, below, above)| {
            while hi - lo > cfg.verify.boundary_width {
                let mid = 0.5 * (lo + hi);
                match hyperbolic_at(spec, cfg, &with_k(&p, mid)) {
                    Some(h) if h == below => lo = mid,
                    Some(_) => hi = mid,
                    None => break,
                }
            }
            Boundary {
                amplitude: key.amplitude,
                mass: key.mass,
                momentum: key.momentum,
                k_lo: lo,
                k_hi: hi,
                below: label(below),
                above: label(above),
            }
        })
        .collect()
}

/// Worker count from `MODSTAB_THREADS`, else rayon's default.
pub fn thread_count() -> usize {
    std::env::var("MODSTAB_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Evaluate every grid point in memory.
pub fn sweep_stability_diagram(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let points = cfg.points()?;
    let seed = load_seed(cfg)?;
    pool()?.install(|| {
        let rows: Vec<SweepRow> = points
            .par_iter()
            .map(|p| evaluate_point(&spec, cfg, p, seed.as_ref()))
            .collect();
        let boundaries = locate_boundaries(&spec, cfg, &points, &rows);
        Ok(SweepResult { rows, boundaries })
    })
}

fn load_seed(cfg: &RunConfig) -> Result<Option<TravelingWave>> {
    cfg.seed_wave.as_ref().map(persist::load).transpose()
}

pub fn sweep_csv_path(cfg: &RunConfig) -> PathBuf {
    cfg.output.join("sweep.csv")
}

pub fn boundary_csv_path(cfg: &RunConfig) -> PathBuf {
    cfg.output.join("boundary.csv")
}

/// Rows already on disk that match the grid prefix. A trailing partial row is
/// discarded by truncating the file.
fn completed_rows(path: &Path, points: &[GridPoint]) -> Result<Vec<SweepRow>> {
    if !path.exists() {
        return Ok(vec![]);
    }
    let text = fs::read_to_string(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut good_end = 0usize;
    let mut rec = csv::StringRecord::new();
    let headers = rdr.headers().map_err(csv_error)?.clone();
    good_end = good_end.max(rdr.position().byte() as usize);
    loop {
        let start = rdr.position().byte() as usize;
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {
                let end = rdr.position().byte() as usize;
                let complete = text[..end].ends_with('\n');
                let row: Option<SweepRow> = rec.deserialize(Some(&headers)).ok();
                match row {
                    Some(r) if complete => {
                        let idx = rows.len();
                        if idx >= points.len() || !r.matches(&points[idx]) {
                            return Err(Error::InvalidArgument(format!(
                                "{} does not match the configured grid at row {}",
                                path.display(),
                                idx + 1
                            )));
                        }
                        rows.push(r);
                        good_end = end;
                    }
                    _ => {
                        good_end = start;
                        break;
                    }
                }
            }
            Err(_) => {
                good_end = start;
                break;
            }
        }
    }
    if good_end < text.len() {
        OpenOptions::new().write(true).open(path)?.set_len(good_end as u64)?;
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> Error {
    let (line, column) = e
        .position()
        .map(|p| (p.line() as usize, 1))
        .unwrap_or((0, 0));
    Error::Parse {
        line,
        column,
        message: e.to_string(),
    }
}

/// Run the sweep, streaming rows to `output/sweep.csv` in grid order.
///
/// With `resume`, rows already present are kept and only the rest computed.
pub fn run_sweep(cfg: &RunConfig, resume: bool) -> Result<SweepResult> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let points = cfg.points()?;
    let seed = load_seed(cfg)?;
    fs::create_dir_all(&cfg.output)?;
    let path = sweep_csv_path(cfg);
    let mut rows = if resume { completed_rows(&path, &points)? } else { vec![] };
    let fresh = rows.is_empty();
    let file = if fresh {
        fs::File::create(&path)?
    } else {
        OpenOptions::new().append(true).open(&path)?
    };
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        wtr.write_record(csv_header()).map_err(csv_error)?;
    }
    let threads = thread_count();
    let pool = pool()?;
    let todo = &points[rows.len()..];
    for chunk in todo.chunks(4 * threads) {
        let done: Vec<SweepRow> = pool.install(|| {
            chunk
                .par_iter()
                .map(|p| evaluate_point(&spec, cfg, p, seed.as_ref()))
                .collect()
        });
        for r in &done {
            wtr.serialize(r).map_err(csv_error)?;
        }
        wtr.flush()?;
        rows.extend(done);
    }
    drop(wtr);
    let boundaries = pool.install(|| locate_boundaries(&spec, cfg, &points, &rows));
    let mut bw = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(boundary_csv_path(cfg))
        .map_err(csv_error)?;
    bw.write_record(["amplitude", "mass", "momentum", "k_lo", "k_hi", "below", "above"])
        .map_err(csv_error)?;
    for b in &boundaries {
        bw.serialize(b).map_err(csv_error)?;
    }
    bw.flush()?;
    Ok(SweepResult { rows, boundaries })
}

pub fn csv_header() -> [&'static str; 17] {
    [
        "k",
        "amplitude",
        "mass",
        "momentum",
        "c",
        "speed1_re",
        "speed1_im",
        "speed2_re",
        "speed2_im",
        "speed3_re",
        "speed3_im",
        "discriminant",
        "classification",
        "max_re_lambda",
        "consistent",
        "connection_error",
        "failure",
    ]
}

/// Read a sweep CSV back.
pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_error)?;
    rdr.deserialize().map(|r| r.map_err(csv_error)).collect()
}

pub fn summarize(res: &SweepResult) -> String {
    let mut s = format!(
        "{} points ({} failed, {} inconsistent)",
        res.rows.len(),
        res.failures(),
        res.inconsistent()
    );
    for b in &res.boundaries {
        let at = match (b.amplitude, b.mass, b.momentum) {
            (Some(a), _, _) => format!("a={a}"),
            (_, Some(m), Some(p)) => format!("M={m}, P={p}"),
            _ => String::new(),
        };
        s += &format!(
            "; {}->{} at {at}: k* in [{:.6}, {:.6}]",
            b.below, b.above, b.k_lo, b.k_hi
        );
    }
    s
}
