//! Periodic traveling waves of the profile equation
//! `−kcφ + kf(φ) + kK*φ = b`, with `φ` even and 2π-periodic.
//!
//! Unknowns are the cosine coefficients `a₀..a_N`, the speed `c` and the
//! constant `b`. The `N+1` cosine-Galerkin equations are closed by a mass
//! constraint `2πa₀ = M` and either a momentum constraint `P(φ) = P` or, during
//! continuation, an amplitude constraint `a₁ = a`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Point, Result};
use crate::linalg::{self, RMat};
use crate::spectral::{self, Fourier};
use crate::symbols::EquationSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Truncation order `N`.
    pub modes: usize,
    pub tol_newton: f64,
    pub tol_derivs: f64,
    pub cond_max: f64,
    pub max_iter: usize,
    /// Multiple of `2N+2` used for the dealiasing grid; chosen from the flux degree if unset.
    pub padding: Option<usize>,
    /// Largest allowed `|a_N| / max|aₙ|`.
    pub decay_tol: f64,
    /// Smallest amplitude step before continuation gives up.
    pub min_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            modes: 64,
            tol_newton: 1e-11,
            tol_derivs: 1e-8,
            cond_max: 1e12,
            max_iter: 25,
            padding: None,
            decay_tol: 1e-10,
            min_step: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn with_modes(mut self, n: usize) -> Self {
        self.modes = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.modes < 2 {
            return bad("truncation order must be at least 2");
        }
        if !(self.tol_newton > 0.0 && self.tol_derivs > 0.0 && self.cond_max > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.padding == Some(0) {
            return bad("padding must be positive");
        }
        if !(self.min_step > 0.0) {
            return bad("min_step must be positive");
        }
        Ok(())
    }
}

/// Grid length for evaluating a degree-`deg` flux on an `N`-mode profile.
///
/// Exact for the flux modes `|n| ≤ N` and for `f′(φ)` modes `|n| ≤ 2N`.
pub fn grid_len(n: usize, deg: usize, padding: Option<usize>) -> usize {
    let base = 2 * n + 2;
    match padding {
        Some(p) => p * base,
        None => {
            let need = (deg.max(2) + 1) * n;
            let mut p = 2;
            while p * base <= need {
                p += 1;
            }
            p * base
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TravelingWave {
    pub spec: EquationSpec,
    pub k: f64,
    pub c: f64,
    pub b: f64,
    /// Cosine coefficients `a₀..a_N`.
    pub coeffs: Vec<f64>,
    /// `(M, P)` the wave was solved for, if any.
    pub targets: Option<(f64, f64)>,
    pub degenerate: bool,
    /// Dealiasing grid length.
    pub grid_len: usize,
    /// Newton residual sup-norms, one per iteration.
    #[serde(default)]
    pub residual_history: Vec<f64>,
}

impl TravelingWave {
    pub fn modes(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn profile(&self) -> Fourier {
        Fourier::from_cosine(&self.coeffs)
    }

    /// Values on the `2N+2` collocation nodes.
    pub fn grid(&self) -> Vec<f64> {
        self.profile().to_real_grid(2 * self.modes() + 2)
    }

    pub fn omega(&self) -> f64 {
        self.k * self.c
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    /// First cosine coefficient, the continuation amplitude.
    pub fn amplitude(&self) -> f64 {
        self.coeffs.get(1).copied().unwrap_or(0.0)
    }

    pub fn point(&self) -> Point {
        let q = conserved_quantities(self).unwrap_or(ConservedTriple {
            mass: f64::NAN,
            momentum: f64::NAN,
            hamiltonian: f64::NAN,
        });
        Point {
            k: self.k,
            mass: q.mass,
            momentum: q.momentum,
        }
    }

    /// Fails if the wave is a constant state.
    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.degenerate {
            Err(Error::AssumptionViolated(format!(
                "constant state at {} has no simple kernel",
                self.point()
            )))
        } else {
            Ok(())
        }
    }

    /// Fourier coefficients of `f^{(order)}(φ)` on modes `−band..=band`.
    pub fn flux_fourier(&self, order: usize, band: usize) -> Result<Fourier> {
        flux_fourier(&self.spec, &self.coeffs, self.grid_len, order, band)
    }
}

pub(crate) fn flux_fourier(
    spec: &EquationSpec,
    a: &[f64],
    len: usize,
    order: usize,
    band: usize,
) -> Result<Fourier> {
    let phi = Fourier::from_cosine(a).to_real_grid(len);
    let vals = spec.nonlinearity.eval_grid(&phi, order)?;
    Ok(Fourier::from_real_grid(&vals, band))
}

/// Second closing constraint of the Galerkin system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    Momentum(f64),
    Amplitude(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedTriple {
    pub mass: f64,
    pub momentum: f64,
    pub hamiltonian: f64,
}

/// Grid residual of the profile equation and constraint deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileResidual {
    pub grid: Vec<f64>,
    pub sup: f64,
    pub mass_error: f64,
    pub momentum_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterJacobian {
    pub phi_k: Vec<f64>,
    pub phi_m: Vec<f64>,
    pub phi_p: Vec<f64>,
    pub c_k: f64,
    pub c_m: f64,
    pub c_p: f64,
    pub b_k: f64,
    pub b_m: f64,
    pub b_p: f64,
    /// Condition number of the row-equilibrated bordered matrix.
    pub cond: f64,
}

/// Which alternative of `(b_P − kc_M)·c_P = 0` a wave realizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RemarkReport {
    pub b_p_minus_k_c_m: f64,
    pub c_p: f64,
    pub product: f64,
    pub alternative: &'static str,
}

impl ParameterJacobian {
    pub fn remark(&self, k: f64, tol: f64) -> RemarkReport {
        let d = self.b_p - k * self.c_m;
        let scale = 1.0 + self.b_p.abs().max((k * self.c_m).abs()).max(self.c_p.abs());
        let alternative = match (d.abs() <= tol * scale, self.c_p.abs() <= tol * scale) {
            (true, true) => "both",
            (true, false) => "b_P = k c_M",
            (false, true) => "c_P = 0",
            (false, false) => "neither",
        };
        RemarkReport {
            b_p_minus_k_c_m: d,
            c_p: self.c_p,
            product: d * self.c_p,
            alternative,
        }
    }
}

struct System<'a> {
    spec: &'a EquationSpec,
    k: f64,
    n: usize,
    len: usize,
    /// `c(nk)` for `n = 0..=N`.
    cn: Vec<f64>,
}

impl<'a> System<'a> {
    fn new(spec: &'a EquationSpec, k: f64, opts: &SolverOptions) -> Result<Self> {
        spec.require_assumption1()?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        opts.validate()?;
        let n = opts.modes;
        let cn = (0..=n)
            .map(|j| spec.phase_speed(j as f64 * k, 0))
            .collect::<Result<Vec<_>>>()?;
        Ok(System {
            spec,
            k,
            n,
            len: grid_len(n, spec.nonlinearity.degree(), opts.padding),
            cn,
        })
    }

    /// Galerkin residuals `r₀..r_N` plus the flux coefficients used.
    fn galerkin(&self, a: &[f64], c: f64, b: f64) -> Result<Vec<f64>> {
        let f = flux_fourier(self.spec, a, self.len, 0, self.n)?.to_cosine();
        Ok((0..=self.n)
            .map(|j| {
                let mut r = self.k * (self.cn[j] - c) * a[j] + self.k * f[j];
                if j == 0 {
                    r -= b;
                }
                r
            })
            .collect())
    }

    fn residual(&self, x: &[f64], mass: f64, con: Constraint) -> Result<Vec<f64>> {
        let n = self.n;
        let a = &x[..=n];
        let mut r = self.galerkin(a, x[n + 1], x[n + 2])?;
        r.push(2.0 * PI * a[0] - mass);
        r.push(match con {
            Constraint::Momentum(p) => momentum(a) - p,
            Constraint::Amplitude(amp) => a[1] - amp,
        });
        Ok(r)
    }

    fn jacobian(&self, x: &[f64], con: Constraint) -> Result<RMat> {
        let n = self.n;
        let a = &x[..=n];
        let c = x[n + 1];
        let g = flux_fourier(self.spec, a, self.len, 1, 2 * n)?;
        let gr = |m: i64| g.get(m).re;
        let k = self.k;
        let dim = n + 3;
        let mut jac = RMat::zeros(dim, dim);
        for i in 0..=n {
            for m in 0..=n {
                let (ii, mm) = (i as i64, m as i64);
                let df = match (i, m) {
                    (0, 0) => gr(0),
                    (0, _) => gr(mm),
                    (_, 0) => 2.0 * gr(ii),
                    _ => gr(ii - mm) + gr(ii + mm),
                };
                jac[(i, m)] = k * df;
            }
            jac[(i, i)] += k * (self.cn[i] - c);
            jac[(i, n + 1)] = -k * a[i];
        }
        jac[(0, n + 2)] = -1.0;
        jac[(n + 1, 0)] = 2.0 * PI;
        match con {
            Constraint::Momentum(_) => {
                jac[(n + 2, 0)] = 2.0 * PI * a[0];
                for m in 1..=n {
                    jac[(n + 2, m)] = PI * a[m];
                }
            }
            Constraint::Amplitude(_) => jac[(n + 2, 1)] = 1.0,
        }
        Ok(jac)
    }

    /// `−∂E/∂k` for the Galerkin rows; constraints do not depend on `k`.
    fn minus_dk(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let a = &x[..=n];
        let c = x[n + 1];
        let f = flux_fourier(self.spec, a, self.len, 0, n)?.to_cosine();
        let mut out = Vec::with_capacity(n + 3);
        for j in 0..=n {
            let q = j as f64 * self.k;
            let dc = self.spec.phase_speed(q, 1)?;
            out.push(-((self.cn[j] - c) * a[j] + q * dc * a[j] + f[j]));
        }
        out.extend([0.0, 0.0]);
        Ok(out)
    }

    fn point(&self, mass: f64, p: f64) -> Point {
        Point {
            k: self.k,
            mass,
            momentum: p,
        }
    }
}

fn momentum(a: &[f64]) -> f64 {
    PI * a[0] * a[0] + 0.5 * PI * a[1..].iter().map(|v| v * v).sum::<f64>()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Constant state `φ ≡ ū` on the Stokes bifurcation speed `c = f′(ū) + c(k)`.
pub fn constant_state(
    spec: &EquationSpec,
    k: f64,
    u_bar: f64,
    opts: &SolverOptions,
) -> Result<TravelingWave> {
    let sys = System::new(spec, k, opts)?;
    let f = &spec.nonlinearity;
    let c = f.eval(u_bar, 1)? + spec.phase_speed(k, 0)?;
    let b = k * (-c * u_bar + f.eval(u_bar, 0)? + spec.phase_speed(0.0, 0)? * u_bar);
    let mut coeffs = vec![0.0; sys.n + 1];
    coeffs[0] = u_bar;
    let mass = 2.0 * PI * u_bar;
    Ok(TravelingWave {
        spec: spec.clone(),
        k,
        c,
        b,
        coeffs,
        targets: Some((mass, momentum(&[u_bar]))),
        degenerate: true,
        grid_len: sys.len,
        residual_history: vec![],
    })
}

/// Linear Stokes ansatz `φ = ū + a cos θ`, `c = f′(ū) + c(k)`.
pub fn stokes_seed(
    spec: &EquationSpec,
    k: f64,
    u_bar: f64,
    amp: f64,
    opts: &SolverOptions,
) -> Result<TravelingWave> {
    let mut w = constant_state(spec, k, u_bar, opts)?;
    w.coeffs[1] = amp;
    w.degenerate = amp == 0.0;
    w.targets = None;
    Ok(w)
}

/// Solve for the wave with wavenumber `k`, mass `M` and momentum `P`.
pub fn solve_wave(
    spec: &EquationSpec,
    k: f64,
    mass: f64,
    momentum_target: f64,
    seed: &TravelingWave,
    opts: &SolverOptions,
) -> Result<TravelingWave> {
    let excess = momentum_target - mass * mass / (4.0 * PI);
    if !(excess.is_finite()) || excess < -1e-14 * (1.0 + momentum_target.abs()) {
        return Err(Error::InvalidArgument(format!(
            "momentum {momentum_target} is below the constant-state value {} for mass {mass}",
            mass * mass / (4.0 * PI)
        )));
    }
    // ‖φ − mean‖²_{L²} = 2·excess
    if 2.0 * excess < 1e-24 {
        return constant_state(spec, k, mass / (2.0 * PI), opts);
    }
    solve_with(spec, k, mass, Constraint::Momentum(momentum_target), seed, opts)
}

/// Newton solve with an explicit second constraint.
pub fn solve_with(
    spec: &EquationSpec,
    k: f64,
    mass: f64,
    con: Constraint,
    seed: &TravelingWave,
    opts: &SolverOptions,
) -> Result<TravelingWave> {
    let sys = System::new(spec, k, opts)?;
    let n = sys.n;
    let mut x: Vec<f64> = (0..=n)
        .map(|j| seed.coeffs.get(j).copied().unwrap_or(0.0))
        .collect();
    x.push(seed.c);
    x.push(seed.b);
    let p_label = match con {
        Constraint::Momentum(p) => p,
        Constraint::Amplitude(_) => momentum(&x[..=n]),
    };
    let point = sys.point(mass, p_label);

    let mut history = Vec::new();
    for it in 0..=opts.max_iter {
        let r = sys.residual(&x, mass, con)?;
        let norm = sup(&r);
        history.push(norm);
        if !norm.is_finite() {
            return Err(Error::ConvergenceFailure {
                point,
                iterations: it,
                residual: norm,
            });
        }
        if norm <= opts.tol_newton {
            break;
        }
        if it == opts.max_iter {
            return Err(Error::ConvergenceFailure {
                point,
                iterations: it,
                residual: norm,
            });
        }
        let mut j = sys.jacobian(&x, con)?;
        let mut rhs = vec![r.iter().map(|v| -v).collect::<Vec<_>>()];
        linalg::equilibrate_rows(&mut j, &mut rhs);
        let dx = linalg::solve_many(&j, &rhs).map_err(|_| Error::IllConditioned {
            point,
            cond: f64::INFINITY,
        })?;
        for (xi, d) in x.iter_mut().zip(&dx[0]) {
            *xi += d;
        }
    }

    // conditioning at the solution
    let mut j = sys.jacobian(&x, con)?;
    linalg::equilibrate_rows(&mut j, &mut []);
    let cond = linalg::condition_number(&j)?;
    if cond > opts.cond_max {
        return Err(Error::IllConditioned { point, cond });
    }

    let a = x[..=n].to_vec();
    let amax = sup(&a);
    let ratio = if amax > 0.0 { a[n].abs() / amax } else { 0.0 };
    if ratio > opts.decay_tol {
        return Err(Error::UnderResolved { point, ratio });
    }

    let targets = match con {
        Constraint::Momentum(p) => Some((mass, p)),
        Constraint::Amplitude(_) => None,
    };
    Ok(TravelingWave {
        spec: spec.clone(),
        k,
        c: x[n + 1],
        b: x[n + 2],
        coeffs: a,
        targets,
        degenerate: false,
        grid_len: sys.len,
        residual_history: history,
    })
}

/// Re-solve a wave with the momentum constraint at its own `(k, M, P)`.
pub fn reparametrize(wave: &TravelingWave, opts: &SolverOptions) -> Result<TravelingWave> {
    let q = conserved_quantities(wave)?;
    solve_wave(&wave.spec, wave.k, q.mass, q.momentum, wave, opts)
}

/// Continue the Stokes branch from `ū` through the given amplitudes `a₁`.
pub fn continue_family(
    spec: &EquationSpec,
    k: f64,
    u_bar: f64,
    amp_steps: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<TravelingWave>> {
    if amp_steps.is_empty() {
        return Err(Error::InvalidArgument("no amplitudes requested".into()));
    }
    if amp_steps.iter().any(|a| !(a.is_finite() && *a >= 0.0))
        || amp_steps.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidArgument(
            "amplitudes must be non-negative and strictly increasing".into(),
        ));
    }
    let mass = 2.0 * PI * u_bar;
    let mut family = Vec::with_capacity(amp_steps.len());
    // converged (amplitude, wave) pairs on the amplitude-constrained branch
    let mut trail: Vec<(f64, TravelingWave)> = Vec::new();
    let mut a_cur = 0.0;

    for &target in amp_steps {
        if target == 0.0 {
            family.push(constant_state(spec, k, u_bar, opts)?);
            continue;
        }
        let mut step = target - a_cur;
        while a_cur < target {
            let a_try = (a_cur + step).min(target);
            let seed = predict(spec, k, u_bar, a_try, &trail, opts)?;
            match solve_with(spec, k, mass, Constraint::Amplitude(a_try), &seed, opts) {
                Ok(w) => {
                    a_cur = a_try;
                    trail.push((a_try, w));
                    if trail.len() > 2 {
                        trail.remove(0);
                    }
                    step = (2.0 * step).min(target - a_cur).max(step);
                }
                Err(_) => {
                    step *= 0.5;
                    if step < opts.min_step {
                        return Err(Error::ContinuationStalled {
                            amplitude: a_cur,
                            min_step: opts.min_step,
                            partial: family,
                        });
                    }
                }
            }
        }
        let on_branch = &trail.last().expect("branch point converged").1;
        family.push(reparametrize(on_branch, opts)?);
    }
    Ok(family)
}

/// Secant predictor along the amplitude branch, falling back to the Stokes ansatz.
fn predict(
    spec: &EquationSpec,
    k: f64,
    u_bar: f64,
    amp: f64,
    trail: &[(f64, TravelingWave)],
    opts: &SolverOptions,
) -> Result<TravelingWave> {
    match trail {
        [] => stokes_seed(spec, k, u_bar, amp, opts),
        [(_, w)] => {
            let mut s = w.clone();
            s.coeffs[1] = amp;
            Ok(s)
        }
        [.., (a0, w0), (a1, w1)] => {
            let t = (amp - a1) / (a1 - a0);
            let mut s = w1.clone();
            for (si, (p, q)) in s.coeffs.iter_mut().zip(w0.coeffs.iter().zip(&w1.coeffs)) {
                *si = q + t * (q - p);
            }
            s.c = w1.c + t * (w1.c - w0.c);
            s.b = w1.b + t * (w1.b - w0.b);
            Ok(s)
        }
    }
}

/// Derivatives of `(φ, c, b)` with respect to `k`, `M` and `P`.
pub fn parameter_derivatives(
    wave: &TravelingWave,
    opts: &SolverOptions,
) -> Result<ParameterJacobian> {
    wave.require_nondegenerate()?;
    let opts = SolverOptions {
        modes: wave.modes(),
        ..opts.clone()
    };
    let sys = System::new(&wave.spec, wave.k, &opts)?;
    let sys = System {
        len: wave.grid_len,
        ..sys
    };
    let n = sys.n;
    let mut x = wave.coeffs.clone();
    x.push(wave.c);
    x.push(wave.b);
    let point = wave.point();
    let mut j = sys.jacobian(&x, Constraint::Momentum(point.momentum))?;
    let mut e_m = vec![0.0; n + 3];
    e_m[n + 1] = 1.0;
    let mut e_p = vec![0.0; n + 3];
    e_p[n + 2] = 1.0;
    let mut rhs = vec![sys.minus_dk(&x)?, e_m, e_p];
    linalg::equilibrate_rows(&mut j, &mut rhs);
    let cond = linalg::condition_number(&j)?;
    if cond > opts.cond_max {
        return Err(Error::DegenerateParametrization {
            point,
            reason: format!("bordered matrix condition number {cond:.3e}"),
        });
    }
    let sol = linalg::solve_many(&j, &rhs).map_err(|_| Error::DegenerateParametrization {
        point,
        reason: "bordered matrix is singular".into(),
    })?;
    let split = |v: &Vec<f64>| (v[..=n].to_vec(), v[n + 1], v[n + 2]);
    let (phi_k, c_k, b_k) = split(&sol[0]);
    let (phi_m, c_m, b_m) = split(&sol[1]);
    let (phi_p, c_p, b_p) = split(&sol[2]);
    Ok(ParameterJacobian {
        phi_k,
        phi_m,
        phi_p,
        c_k,
        c_m,
        c_p,
        b_k,
        b_m,
        b_p,
        cond,
    })
}

/// `M = ∫φ`, `P = ∫φ²/2`, `H = ∫F(φ) + ½φK*φ`, spectrally.
pub fn conserved_quantities(wave: &TravelingWave) -> Result<ConservedTriple> {
    let a = &wave.coeffs;
    let mass = 2.0 * PI * a[0];
    let p = momentum(a);
    let spec = &wave.spec;
    let mut quad = spec.phase_speed(0.0, 0)? * a[0] * a[0];
    for (j, aj) in a.iter().enumerate().skip(1) {
        if *aj != 0.0 {
            quad += 0.5 * spec.phase_speed(j as f64 * wave.k, 0)? * aj * aj;
        }
    }
    let phi = wave.profile().to_real_grid(wave.grid_len);
    let big_f = phi
        .iter()
        .map(|&u| spec.nonlinearity.antiderivative(u))
        .collect::<Result<Vec<_>>>()?;
    let f0 = Fourier::from_real_grid(&big_f, 0).get(0).re;
    Ok(ConservedTriple {
        mass,
        momentum: p,
        hamiltonian: 2.0 * PI * f0 + PI * quad,
    })
}

/// Same triple by trapezoid quadrature on the dealiasing grid.
pub fn conserved_quadrature(wave: &TravelingWave) -> Result<ConservedTriple> {
    let spec = &wave.spec;
    let prof = wave.profile();
    let kphi = apply_k(wave, &prof)?;
    let len = wave.grid_len.max(4 * wave.modes() + 2);
    let phi = prof.to_real_grid(len);
    let kg = kphi.to_real_grid(len);
    let mut h = Vec::with_capacity(len);
    for (u, ku) in phi.iter().zip(&kg) {
        h.push(spec.nonlinearity.antiderivative(*u)? + 0.5 * u * ku);
    }
    Ok(ConservedTriple {
        mass: spectral::trapezoid(&phi),
        momentum: spectral::trapezoid(&phi.iter().map(|u| 0.5 * u * u).collect::<Vec<_>>()),
        hamiltonian: spectral::trapezoid(&h),
    })
}

fn apply_k(wave: &TravelingWave, v: &Fourier) -> Result<Fourier> {
    let k = wave.k;
    let tab = v
        .modes()
        .map(|m| wave.spec.phase_speed(m as f64 * k, 0))
        .collect::<Result<Vec<_>>>()?;
    let n = v.order() as i64;
    Ok(v.multiplier(|m| tab[(m + n) as usize].into()))
}

/// Residual of `−kcφ + kf(φ) + kK*φ − b` on the `2N+2` collocation nodes.
pub fn profile_residual(wave: &TravelingWave) -> Result<ProfileResidual> {
    let n = wave.modes();
    let len = 2 * n + 2;
    let prof = wave.profile();
    let phi = prof.to_real_grid(len);
    let kphi = apply_k(wave, &prof)?.to_real_grid(len);
    let k = wave.k;
    let mut grid = Vec::with_capacity(len);
    for (u, ku) in phi.iter().zip(&kphi) {
        let f = wave.spec.nonlinearity.eval(*u, 0)?;
        grid.push(-k * wave.c * u + k * f + k * ku - wave.b);
    }
    let (me, pe) = match wave.targets {
        Some((m, p)) => (
            2.0 * PI * wave.coeffs[0] - m,
            momentum(&wave.coeffs) - p,
        ),
        None => (0.0, 0.0),
    };
    Ok(ProfileResidual {
        sup: sup(&grid),
        grid,
        mass_error: me,
        momentum_error: pe,
    })
}
