//! Bloch operators `A_τ`, their spectrum near the origin, the projected matrix
//! `D̂₀`, and the comparison `D(u₀) = D̂₀ − cI`.
//!
//! Small eigenvalues of `A_τ` behave like `λ_j(τ) = ikτ s_j + O(τ²)` where the
//! slopes `s_j` are the eigenvalues of `D̂₀`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelBases;
use crate::linalg::{self, CMat};
use crate::modulation::{self, Classification, Mat3, ModulationMatrix};
use crate::operators::{check_tau, WaveOperators};
use crate::spectral::Fourier;
use crate::wave::{ParameterJacobian, TravelingWave};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    Exact,
    Taylor2,
}

#[derive(Clone, Debug)]
pub struct BlochOperator {
    pub tau: f64,
    pub n: usize,
    pub form: Form,
    pub matrix: CMat,
    pub k: f64,
    pub c: f64,
}

pub fn assemble_bloch(wave: &TravelingWave, tau: f64, form: Form) -> Result<BlochOperator> {
    check_tau(tau)?;
    let ops = WaveOperators::new(wave)?;
    let matrix = match form {
        Form::Exact => ops.bloch_exact(tau)?,
        Form::Taylor2 => ops.bloch_taylor2(tau)?,
    };
    Ok(BlochOperator {
        tau,
        n: ops.n,
        form,
        matrix,
        k: wave.k,
        c: wave.c,
    })
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub lambda: Complex64,
    /// Unit coefficient vector on modes `−N..=N`.
    pub vector: Vec<Complex64>,
}

impl BlochOperator {
    pub fn default_radius(&self) -> f64 {
        let r = 10.0 * self.k * self.tau.abs() * (1.0 + self.c.abs());
        r.max(1e-8 * linalg::max_abs(&self.matrix))
    }
}

/// Eigenvalues with `|λ| ≤ radius` from a full dense eigensolve, sorted by modulus.
pub fn spectrum_near_origin(op: &BlochOperator, radius: Option<f64>) -> Result<Vec<Eigenpair>> {
    let radius = radius.unwrap_or_else(|| op.default_radius());
    let mut out: Vec<Eigenpair> = linalg::eigen(&op.matrix)?
        .into_iter()
        .filter(|(l, _)| l.norm() <= radius)
        .map(|(lambda, vector)| Eigenpair { lambda, vector })
        .collect();
    out.sort_by(|a, b| a.lambda.norm().total_cmp(&b.lambda.norm()));
    Ok(out)
}

/// The `count` eigenvalues nearest the origin, by inverse iteration on the
/// whole spectrum: eigenvalues of `A⁻¹` with the largest modulus.
///
/// Componentwise accurate even when `‖A‖` is dominated by a stiff symbol.
pub fn nearest_eigenpairs(op: &BlochOperator, count: usize) -> Result<Vec<Eigenpair>> {
    let inv = linalg::inverse(&op.matrix);
    if !(0..inv.nrows()).all(|i| (0..inv.ncols()).all(|j| inv[(i, j)].is_finite())) {
        return Err(Error::Eigensolver(format!(
            "A_tau is singular at tau = {} (use spectrum_near_origin at tau = 0)",
            op.tau
        )));
    }
    let mut ev = linalg::eigen(&inv)?;
    ev.sort_by(|a, b| b.0.norm().total_cmp(&a.0.norm()));
    Ok(ev
        .into_iter()
        .take(count)
        .map(|(nu, vector)| Eigenpair {
            lambda: 1.0 / nu,
            vector,
        })
        .collect())
}

/// `‖Exact(τ) − Taylor2(τ)‖₂`.
pub fn taylor_remainder(wave: &TravelingWave, tau: f64) -> Result<f64> {
    let ops = WaveOperators::new(wave)?;
    let d = ops.bloch_exact(tau)? - ops.bloch_taylor2(tau)?;
    linalg::norm2(&d)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DhatMatrix {
    pub dhat: [[Complex64; 3]; 3],
    pub eigs: [Complex64; 3],
    /// `max |Im D̂₀|`.
    pub imag_residue: f64,
}

impl DhatMatrix {
    pub fn real(&self) -> Mat3 {
        self.dhat.map(|r| r.map(|z| z.re))
    }
}

pub fn assemble_dhat0(
    wave: &TravelingWave,
    pjac: &ParameterJacobian,
    bases: &KernelBases,
) -> Result<DhatMatrix> {
    let ops = WaveOperators::new(wave)?;
    let k = wave.k;
    let phi_k = Fourier::from_cosine(&pjac.phi_k);
    let mut dhat = [[Complex64::new(0.0, 0.0); 3]; 3];
    dhat[0] = [-k * pjac.c_k, -k * pjac.c_m, -k * pjac.c_p].map(Complex64::from);
    let col1 = ops.a1(&phi_k).add(&ops.a2(&bases.phi[0]));
    let cols = [col1, ops.a1(&bases.phi[1]), ops.a1(&bases.phi[2])];
    for j in 1..3 {
        for (l, col) in cols.iter().enumerate() {
            dhat[j][l] = bases.psi[j].inner(col);
        }
    }
    let imag_residue = dhat
        .iter()
        .flatten()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    if dhat.iter().flatten().any(|z| !z.is_finite()) {
        return Err(Error::UnsupportedSymbol(format!(
            "`{}` is not smooth where the projected matrix needs it",
            wave.spec.name
        )));
    }
    let re = dhat.map(|r| r.map(|z| z.re));
    Ok(DhatMatrix {
        dhat,
        eigs: modulation::characteristic_speeds(&re),
        imag_residue,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectionReport {
    /// `max |D − (D̂₀ − cI)| / (1 + max|D|)`.
    pub max_entry_error: f64,
    /// 1-based row/column of the worst entry.
    pub worst_entry: (usize, usize),
    pub pass: bool,
    pub d: Mat3,
    pub dhat_minus_c: Mat3,
}

/// Entrywise comparison of `D` against `D̂₀ − cI`.
pub fn compare_connection(d: &Mat3, dhat: &DhatMatrix, c: f64, tol: f64) -> ConnectionReport {
    let mut shifted = dhat.real();
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] -= c;
    }
    let scale = 1.0 + d.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut worst = (0.0, (1, 1));
    for i in 0..3 {
        for j in 0..3 {
            let e = (d[i][j] - shifted[i][j]).abs() / scale;
            if e > worst.0 {
                worst = (e, (i + 1, j + 1));
            }
        }
    }
    ConnectionReport {
        max_entry_error: worst.0,
        worst_entry: worst.1,
        pass: worst.0 <= tol,
        d: *d,
        dhat_minus_c: shifted,
    }
}

pub fn verify_connection(
    wave: &TravelingWave,
    pjac: &ParameterJacobian,
    bases: &KernelBases,
    tol: f64,
) -> Result<ConnectionReport> {
    let mm = modulation::assemble_modulation_matrix(wave, pjac, 1e-6)?;
    let dhat = assemble_dhat0(wave, pjac, bases)?;
    Ok(compare_connection(&mm.d, &dhat, wave.c, tol))
}

/// How slopes are extrapolated to `τ → 0` from the two smallest `τ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    /// Error model `s(τ) = s₀ + Cτ`.
    Linear,
    /// Error model `s(τ) = s₀ + Cτ²`. Slopes are even in `τ` because the
    /// spectrum is symmetric under both `λ ↦ −λ̄` and `τ ↦ −τ, λ ↦ λ̄`.
    #[default]
    Even,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchSlopes {
    pub taus: Vec<f64>,
    /// Eigenvalues per `τ`, in branch order.
    pub lambdas: Vec<[Complex64; 3]>,
    /// `λ_j(τ) / (ikτ)` per `τ`.
    pub slopes: Vec<[Complex64; 3]>,
    /// Richardson extrapolation to `τ → 0` from the two smallest `τ`.
    pub extrapolated: [Complex64; 3],
    pub extrapolation: Extrapolation,
    /// Set when two branch overlaps were within 10% of each other.
    pub ambiguous: bool,
}

impl BranchSlopes {
    /// Restrict to the contiguous window `range` and re-extrapolate.
    pub fn window(&self, range: std::ops::Range<usize>, ex: Extrapolation) -> BranchSlopes {
        let taus = self.taus[range.clone()].to_vec();
        let slopes = self.slopes[range.clone()].to_vec();
        BranchSlopes {
            extrapolated: extrapolate(&taus, &slopes, ex),
            lambdas: self.lambdas[range].to_vec(),
            taus,
            slopes,
            extrapolation: ex,
            ambiguous: self.ambiguous,
        }
    }
}

fn extrapolate(taus: &[f64], slopes: &[[Complex64; 3]], ex: Extrapolation) -> [Complex64; 3] {
    let m = taus.len();
    let (ta, tb) = (taus[m - 2], taus[m - 1]);
    let (sa, sb) = (slopes[m - 2], slopes[m - 1]);
    let (wa, wb) = match ex {
        Extrapolation::Linear => (ta, tb),
        Extrapolation::Even => (ta * ta, tb * tb),
    };
    [0, 1, 2].map(|j| (wa * sb[j] - wb * sa[j]) / (wa - wb))
}

/// Rescaled kernel coordinates `(ikτ⟨Ψ₁,v⟩, ⟨Ψ₂,v⟩, ⟨Ψ₃,v⟩)`, normalized.
fn kernel_coordinates(bases: &KernelBases, v: &[Complex64], k: f64, tau: f64) -> [Complex64; 3] {
    let f = Fourier::from_vec(v.to_vec());
    let mut p = [0, 1, 2].map(|j| bases.psi[j].inner(&f));
    p[0] *= I * k * tau;
    let n = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        p.iter_mut().for_each(|z| *z /= n);
    }
    p
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn overlap(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
}

/// Track the three eigenvalues nearest the origin across `tau_list`.
///
/// Branches are ordered by slope at the first (largest) `τ` and followed by
/// the permutation maximizing overlap of rescaled kernel coordinates.
pub fn branch_slopes(
    wave: &TravelingWave,
    bases: &KernelBases,
    tau_list: &[f64],
    ex: Extrapolation,
) -> Result<BranchSlopes> {
    if tau_list.len() < 3 {
        return Err(Error::InvalidArgument("need at least three tau values".into()));
    }
    if tau_list.iter().any(|t| !(*t > 0.0 && *t <= 0.1)) || tau_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "tau values must be decreasing and lie in (0, 0.1]".into(),
        ));
    }
    let k = wave.k;
    let mut lambdas = Vec::new();
    let mut slopes = Vec::new();
    let mut prev: Option<[[Complex64; 3]; 3]> = None;
    let mut ambiguous = false;
    for &tau in tau_list {
        let op = assemble_bloch(wave, tau, Form::Exact)?;
        let pairs = nearest_eigenpairs(&op, 3)?;
        let coords: Vec<[Complex64; 3]> = pairs
            .iter()
            .map(|p| kernel_coordinates(bases, &p.vector, k, tau))
            .collect();
        let s: Vec<Complex64> = pairs.iter().map(|p| p.lambda / (I * k * tau)).collect();
        let order: [usize; 3] = match &prev {
            None => {
                let mut idx = [0, 1, 2];
                idx.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re).then(s[a].im.total_cmp(&s[b].im)));
                idx
            }
            Some(pc) => {
                for row in pc {
                    let mut ov: Vec<f64> = coords.iter().map(|c| overlap(row, c)).collect();
                    ov.sort_by(|a, b| b.total_cmp(a));
                    if ov[1] >= 0.9 * ov[0] {
                        ambiguous = true;
                    }
                }
                *PERMS
                    .iter()
                    .max_by(|p, q| {
                        let score = |p: &[usize; 3]| (0..3).map(|i| overlap(&pc[i], &coords[p[i]])).sum::<f64>();
                        score(p).total_cmp(&score(q))
                    })
                    .unwrap()
            }
        };
        prev = Some(order.map(|i| coords[i]));
        lambdas.push(order.map(|i| pairs[i].lambda));
        slopes.push(order.map(|i| s[i]));
    }
    Ok(BranchSlopes {
        extrapolated: extrapolate(tau_list, &slopes, ex),
        extrapolation: ex,
        taus: tau_list.to_vec(),
        lambdas,
        slopes,
        ambiguous,
    })
}

/// Halving ladder `τ_j = 10⁻²·2⁻ʲ` used by [`auto_branch_slopes`].
pub fn tau_ladder(levels: usize) -> Vec<f64> {
    (0..levels).map(|j| 1e-2 * 0.5f64.powi(j as i32)).collect()
}

/// Branch slopes on a window of the halving ladder chosen where successive
/// slope changes are smallest.
///
/// Truncation shrinks the changes like `τ²` while rounding in the nearly
/// defective eigenvalue cluster grows them like `τ⁻²`; the window of three
/// `τ` ends one step past the minimum.
pub fn auto_branch_slopes(
    wave: &TravelingWave,
    bases: &KernelBases,
    ex: Extrapolation,
) -> Result<BranchSlopes> {
    let ladder = tau_ladder(13);
    let full = branch_slopes(wave, bases, &ladder, ex)?;
    let diffs: Vec<f64> = full
        .slopes
        .windows(2)
        .map(|w| matched_distance(&w[0], &w[1]))
        .collect();
    let jstar = (1..diffs.len())
        .min_by(|&a, &b| diffs[a].total_cmp(&diffs[b]))
        .unwrap_or(1);
    Ok(full.window(jstar - 1..jstar + 2, ex))
}

/// Smallest total distance between two triples over all pairings.
pub fn matched_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    PERMS
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub tau: f64,
    /// Hausdorff distance between `σ(A_τ)` and `{−λ̄}`.
    pub hamiltonian: f64,
    /// Hausdorff distance between `σ(A_{−τ})` and `conj σ(A_τ)`.
    pub conjugation: f64,
    pub norm: f64,
    pub pass: bool,
}

fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let dir = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    dir(a, b).max(dir(b, a))
}

pub fn symmetry_check(wave: &TravelingWave, tau: f64) -> Result<SymmetryReport> {
    let plus = assemble_bloch(wave, tau, Form::Exact)?;
    let minus = assemble_bloch(wave, -tau, Form::Exact)?;
    let sp = linalg::eigenvalues(&plus.matrix)?;
    let sm = linalg::eigenvalues(&minus.matrix)?;
    let reflected: Vec<Complex64> = sp.iter().map(|z| -z.conj()).collect();
    let conj: Vec<Complex64> = sp.iter().map(|z| z.conj()).collect();
    let norm = linalg::norm2(&plus.matrix)?;
    let hamiltonian = hausdorff(&sp, &reflected);
    let conjugation = hausdorff(&sm, &conj);
    Ok(SymmetryReport {
        tau,
        hamiltonian,
        conjugation,
        norm,
        pass: hamiltonian <= 1e-8 * norm && conjugation <= 1e-8 * norm,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerdictConfig {
    pub tol: f64,
    /// Decreasing `τ` values; `None` selects a window of the halving ladder.
    pub tau_list: Option<Vec<f64>>,
    pub extrapolation: Extrapolation,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        VerdictConfig {
            tol: 1e-6,
            tau_list: None,
            extrapolation: Extrapolation::Even,
        }
    }
}

impl VerdictConfig {
    pub fn slopes(&self, wave: &TravelingWave, bases: &KernelBases) -> Result<BranchSlopes> {
        match &self.tau_list {
            Some(list) => branch_slopes(wave, bases, list, self.extrapolation),
            None => auto_branch_slopes(wave, bases, self.extrapolation),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub modulation: ModulationMatrix,
    pub class: Classification,
    /// `max_j,τ Re λ_j(τ)`.
    pub spectral_max_growth: f64,
    /// `max_j |Re λ_j(τ)|` per `τ`.
    pub growth: Vec<f64>,
    /// `None` when the class is marginal.
    pub consistent: Option<bool>,
    pub slopes: BranchSlopes,
}

/// Does the spectrum near the origin agree with the modulation class?
///
/// Elliptic: some `|Re λ_j(τ)| > 10·tol·kτ`. Strictly hyperbolic:
/// `|Re λ_j(τ)| ≤ Cτ²` with `C` fitted at the largest `τ` (doubled) plus a
/// rounding floor. Weakly hyperbolic points are checked like strict ones.
pub fn modulational_verdict(
    wave: &TravelingWave,
    pjac: &ParameterJacobian,
    bases: &KernelBases,
    cfg: &VerdictConfig,
) -> Result<Verdict> {
    let mm = modulation::assemble_modulation_matrix(wave, pjac, cfg.tol)?;
    let slopes = cfg.slopes(wave, bases)?;
    let growth: Vec<f64> = slopes
        .lambdas
        .iter()
        .map(|l| l.iter().map(|z| z.re.abs()).fold(0.0, f64::max))
        .collect();
    let spectral_max_growth = slopes
        .lambdas
        .iter()
        .flatten()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let k = wave.k;
    let consistent = match mm.classification {
        Classification::Marginal => None,
        Classification::Elliptic => Some(
            slopes
                .taus
                .iter()
                .zip(&growth)
                .any(|(t, g)| *g > 10.0 * cfg.tol * k * t),
        ),
        Classification::StrictlyHyperbolic | Classification::WeaklyHyperbolic => {
            let t0 = slopes.taus[0];
            let floor = 1e-12 * (1.0 + wave.c.abs()) * k;
            let c_fit = 2.0 * growth[0] / (t0 * t0);
            Some(
                slopes
                    .taus
                    .iter()
                    .zip(&growth)
                    .all(|(t, g)| *g <= c_fit * t * t + floor),
            )
        }
    };
    Ok(Verdict {
        class: mm.classification,
        modulation: mm,
        spectral_max_growth,
        growth,
        consistent,
        slopes,
    })
}
