//! The Whitham modulation matrix `D(u₀)` for the system in `(k, M, P)`,
//! its characteristic speeds and hyperbolicity class.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operators::WaveOperators;
use crate::spectral::{self, Fourier};
use crate::wave::{ParameterJacobian, TravelingWave};

pub type Mat3 = [[f64; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    StrictlyHyperbolic,
    WeaklyHyperbolic,
    Elliptic,
    Marginal,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::StrictlyHyperbolic => "strictly-hyperbolic",
            Classification::WeaklyHyperbolic => "weakly-hyperbolic",
            Classification::Elliptic => "elliptic",
            Classification::Marginal => "marginal",
        }
    }

    pub fn is_hyperbolic(self) -> bool {
        matches!(
            self,
            Classification::StrictlyHyperbolic | Classification::WeaklyHyperbolic
        )
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The five inner products making up `d₃₁`, each against `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct D31Terms {
    /// `⟨φ, f′(φ)φ_k⟩`
    pub flux: f64,
    /// `⟨φ, K*φ_k⟩`
    pub dispersion: f64,
    /// `⟨φ, kK₁*φ_kθ⟩`
    pub k1_phi_k: f64,
    /// `⟨φ, K₁*φ′⟩`
    pub k1_phi: f64,
    /// `⟨φ, ½kK₂*φ″⟩`
    pub k2_phi: f64,
}

impl D31Terms {
    pub fn d31(&self) -> f64 {
        -(self.flux + self.dispersion - self.k1_phi_k - self.k1_phi + self.k2_phi)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulationMatrix {
    pub d: Mat3,
    pub speeds: [Complex64; 3],
    pub classification: Classification,
    pub tol: f64,
    pub d31_terms: D31Terms,
}

impl ModulationMatrix {
    /// Recompute speeds and class for an explicitly given matrix.
    pub fn from_matrix(d: Mat3, tol: f64, d31_terms: D31Terms) -> Self {
        let speeds = characteristic_speeds(&d);
        ModulationMatrix {
            classification: classify_hyperbolicity(&speeds, tol),
            d,
            speeds,
            tol,
            d31_terms,
        }
    }
}

fn re_inner(a: &Fourier, b: &Fourier) -> f64 {
    a.inner(b).re
}

pub fn assemble_modulation_matrix(
    wave: &TravelingWave,
    pjac: &ParameterJacobian,
    tol: f64,
) -> Result<ModulationMatrix> {
    wave.require_nondegenerate()?;
    let ops = WaveOperators::new(wave)?;
    let k = wave.k;
    let one = Fourier::from_cosine(&[1.0]);
    let phi = &ops.phi;
    let derivs = [&pjac.phi_k, &pjac.phi_m, &pjac.phi_p].map(|v| Fourier::from_cosine(v));

    let mut d = [[0.0; 3]; 3];
    d[0] = [-k * pjac.c_k - wave.c, -k * pjac.c_m, -k * pjac.c_p];
    for (l, u) in derivs.iter().enumerate() {
        let flux_and_k = ops.g_mul(u).add(&ops.k_op(u));
        d[1][l] = -re_inner(&one, &flux_and_k);
        if l > 0 {
            let k1 = ops.k1_op(&u.derivative()).scale(k.into());
            d[2][l] = -re_inner(phi, &flux_and_k.sub(&k1));
        }
    }
    let terms = d31_terms(&ops, &derivs[0]);
    d[2][0] = terms.d31();
    Ok(ModulationMatrix::from_matrix(d, tol, terms))
}

/// The inner products entering `d₃₁`.
pub fn d31_terms(ops: &WaveOperators, phi_k: &Fourier) -> D31Terms {
    let k = ops.k;
    let phi = &ops.phi;
    let dphi = phi.derivative();
    D31Terms {
        flux: re_inner(phi, &ops.g_mul(phi_k)),
        dispersion: re_inner(phi, &ops.k_op(phi_k)),
        k1_phi_k: re_inner(phi, &ops.k1_op(&phi_k.derivative()).scale(k.into())),
        k1_phi: re_inner(phi, &ops.k1_op(&dphi)),
        // φ″ has no mean mode, so c″(0) never enters
        k2_phi: re_inner(phi, &ops.k2_op(&dphi.derivative()).scale((0.5 * k).into())),
    }
}

/// Row 2 of `D(u₀)` by pointwise products and trapezoid quadrature.
pub fn row2_quadrature(wave: &TravelingWave, pjac: &ParameterJacobian) -> Result<[f64; 3]> {
    let len = wave.grid_len;
    let phi = wave.profile().to_real_grid(len);
    let fp = wave.spec.nonlinearity.eval_grid(&phi, 1)?;
    let c0 = wave.spec.phase_speed(0.0, 0)?;
    let mut out = [0.0; 3];
    for (l, v) in [&pjac.phi_k, &pjac.phi_m, &pjac.phi_p].into_iter().enumerate() {
        let u = Fourier::from_cosine(v).to_real_grid(len);
        // K* acts on the mean mode by c(0)
        let integrand: Vec<f64> = fp.iter().zip(&u).map(|(a, b)| a * b + c0 * b).collect();
        out[l] = -spectral::trapezoid(&integrand);
    }
    Ok(out)
}

/// Discriminant of the characteristic cubic: positive for three distinct real
/// roots, negative for a complex pair.
pub fn discriminant(d: &Mat3) -> f64 {
    let (a, b, c) = char_poly(d);
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c;
    -(4.0 * p.powi(3) + 27.0 * q * q)
}

/// `λ³ + aλ² + bλ + c` for the characteristic polynomial of `d`.
fn char_poly(d: &Mat3) -> (f64, f64, f64) {
    let tr = d[0][0] + d[1][1] + d[2][2];
    let minors = d[0][0] * d[1][1] - d[0][1] * d[1][0] + d[0][0] * d[2][2]
        - d[0][2] * d[2][0]
        + d[1][1] * d[2][2]
        - d[1][2] * d[2][1];
    (-tr, minors, -det(d))
}

pub fn det(d: &Mat3) -> f64 {
    d[0][0] * (d[1][1] * d[2][2] - d[1][2] * d[2][1]) - d[0][1] * (d[1][0] * d[2][2] - d[1][2] * d[2][0])
        + d[0][2] * (d[1][0] * d[2][1] - d[1][1] * d[2][0])
}

/// Eigenvalues of a real 3×3 matrix from its characteristic cubic, Newton
/// polished, sorted by real then imaginary part.
pub fn characteristic_speeds(d: &Mat3) -> [Complex64; 3] {
    let (a, b, c) = char_poly(d);
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = -(4.0 * p.powi(3) + 27.0 * q * q);
    let mut roots: [Complex64; 3] = if disc > 0.0 && p < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        [0, 1, 2].map(|j| Complex64::from(r * (phi - 2.0 * PI * j as f64 / 3.0).cos() + shift))
    } else {
        let s = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        let r = polish_real(t + shift, a, b, c);
        // deflate: λ² + (a + r)λ + (b + r(a + r))
        let bb = a + r;
        let cc = b + r * bb;
        let dq = Complex64::from(bb * bb - 4.0 * cc).sqrt();
        [
            r.into(),
            (-bb + dq) / 2.0,
            (-bb - dq) / 2.0,
        ]
    };
    for z in roots.iter_mut() {
        *z = polish(*z, a, b, c);
    }
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    roots
}

fn polish_real(mut x: f64, a: f64, b: f64, c: f64) -> f64 {
    for _ in 0..4 {
        let f = ((x + a) * x + b) * x + c;
        let df = (3.0 * x + 2.0 * a) * x + b;
        if df == 0.0 {
            break;
        }
        let nx = x - f / df;
        if !nx.is_finite() {
            break;
        }
        x = nx;
    }
    x
}

fn polish(mut z: Complex64, a: f64, b: f64, c: f64) -> Complex64 {
    let f = |z: Complex64| ((z + a) * z + b) * z + c;
    for _ in 0..3 {
        let fz = f(z);
        let df = (3.0 * z + 2.0 * a) * z + b;
        if df.norm() == 0.0 {
            break;
        }
        let nz = z - fz / df;
        // keep only improving steps; double roots make Newton wander
        if nz.is_finite() && f(nz).norm() < fz.norm() {
            z = nz;
        } else {
            break;
        }
    }
    z
}

/// Class of a set of characteristic speeds at tolerance `tol`.
pub fn classify_hyperbolicity(speeds: &[Complex64; 3], tol: f64) -> Classification {
    let scale = 1.0 + speeds.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let imax = speeds.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imax > 10.0 * tol * scale {
        return Classification::Elliptic;
    }
    if imax > 0.1 * tol * scale {
        return Classification::Marginal;
    }
    let mut re: Vec<f64> = speeds.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    if re.windows(2).all(|w| w[1] - w[0] > tol * scale) {
        Classification::StrictlyHyperbolic
    } else {
        Classification::WeaklyHyperbolic
    }
}
