//! Generalized kernels of `A₀` and `A₀†`.
//!
//! `Φ = (φ′, φ_M, φ_P)` spans the generalized kernel of `A₀` and
//! `Ψ = (−∫₀^θ φ_P, 1, φ)` that of `A₀†`; together they are biorthogonal.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::linalg;
use crate::operators::WaveOperators;
use crate::spectral::Fourier;
use crate::wave::{ParameterJacobian, TravelingWave};

#[derive(Clone, Debug)]
pub struct KernelBases {
    pub phi: [Fourier; 3],
    pub psi: [Fourier; 3],
    /// `gram[j][l] = ⟨Ψ_j, Φ_l⟩` (real part).
    pub gram: [[f64; 3]; 3],
    /// Largest imaginary part seen in the Gram matrix.
    pub gram_imag: f64,
    /// `|∫₀^{2π} φ_P|`, the failure of `Ψ₁` to close up.
    pub psi1_mismatch: f64,
}

impl KernelBases {
    pub fn gram_error(&self) -> f64 {
        let mut e = 0.0f64;
        for (j, row) in self.gram.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                let id = if j == l { 1.0 } else { 0.0 };
                e = e.max((v - id).abs());
            }
        }
        e
    }
}

pub fn build_bases(wave: &TravelingWave, pjac: &ParameterJacobian) -> Result<KernelBases> {
    wave.require_nondegenerate()?;
    let phi = wave.profile();
    let phi_m = Fourier::from_cosine(&pjac.phi_m);
    let phi_p = Fourier::from_cosine(&pjac.phi_p);
    let mut psi1 = phi_p.antiderivative().scale((-1.0).into());
    let at_zero = psi1.eval(0.0);
    psi1.set(0, -at_zero);
    let one = Fourier::from_cosine(&[1.0]);
    let phis = [phi.derivative(), phi_m, phi_p.clone()];
    let psis = [psi1, one, phi];
    let mut gram = [[0.0; 3]; 3];
    let mut gram_imag = 0.0f64;
    for j in 0..3 {
        for l in 0..3 {
            let z = psis[j].inner(&phis[l]);
            gram[j][l] = z.re;
            gram_imag = gram_imag.max(z.im.abs());
        }
    }
    Ok(KernelBases {
        psi1_mismatch: (2.0 * std::f64::consts::PI * phi_p.get(0).re).abs(),
        phi: phis,
        psi: psis,
        gram,
        gram_imag,
    })
}

/// Sup-norm on the `2N+2` collocation nodes.
fn grid_sup(f: &Fourier) -> f64 {
    f.to_grid(2 * f.order() + 2)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    /// Identity name → residual (sup-norm for functions, absolute value for scalars).
    pub residuals: BTreeMap<String, f64>,
    /// `(b_P − kc_M)·c_P`.
    pub remark_product: f64,
    /// Which factor vanishes.
    pub remark_alternative: &'static str,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

/// Residuals of every kernel identity.
pub fn verify_kernel_identities(
    wave: &TravelingWave,
    pjac: &ParameterJacobian,
    bases: &KernelBases,
) -> Result<IdentityReport> {
    let ops = WaveOperators::new(wave)?;
    let k = wave.k;
    let [p1, p2, p3] = &bases.phi;
    let [s1, s2, s3] = &bases.psi;
    let kc = |x: f64| Complex64::from(k * x);
    let mut r = BTreeMap::new();
    let mut put = |name: &str, v: f64| {
        r.insert(name.to_string(), v);
    };
    put("A0 Phi1", grid_sup(&ops.a0(p1)));
    put("A0 Phi2 + k c_M Phi1", grid_sup(&ops.a0(p2).add(&p1.scale(kc(pjac.c_m)))));
    put("A0 Phi3 + k c_P Phi1", grid_sup(&ops.a0(p3).add(&p1.scale(kc(pjac.c_p)))));
    put("A0adj Psi2", grid_sup(&ops.a0_adj(s2)));
    put("A0adj Psi3", grid_sup(&ops.a0_adj(s3)));
    put(
        "A0adj Psi1 + b_P Psi2 + k c_P Psi3",
        grid_sup(
            &ops.a0_adj(s1)
                .add(&s2.scale(pjac.b_p.into()))
                .add(&s3.scale(kc(pjac.c_p))),
        ),
    );
    put("phi_k identity", grid_sup(&phi_k_identity(&ops, pjac)));
    let phi_k = Fourier::from_cosine(&pjac.phi_k);
    put("<Psi2, phi_k>", s2.inner(&phi_k).norm());
    put("<Psi3, phi_k>", s3.inner(&phi_k).norm());
    let rem = pjac.remark(k, 1e-8);
    put(
        "(b_P - k c_M) c_P",
        rem.product.abs()
            / ((1.0 + pjac.b_p.abs() + (k * pjac.c_m).abs()) * (1.0 + pjac.c_p.abs())),
    );
    Ok(IdentityReport {
        residuals: r,
        remark_product: rem.product,
        remark_alternative: rem.alternative,
    })
}

/// `A₀φ_k + (c − f′(φ) − K*)φ′ + kK₁*φ″ + kc_kφ′`.
pub fn phi_k_identity(ops: &WaveOperators, pjac: &ParameterJacobian) -> Fourier {
    let k = ops.k;
    let dphi = ops.phi.derivative();
    let phi_k = Fourier::from_cosine(&pjac.phi_k);
    let mult = dphi
        .scale(ops.c.into())
        .sub(&ops.g_mul(&dphi))
        .sub(&ops.k_op(&dphi));
    ops.a0(&phi_k)
        .add(&mult)
        .add(&ops.k1_op(&dphi.derivative()).scale(k.into()))
        .add(&dphi.scale((k * pjac.c_k).into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SimpleKernelReport {
    pub sigma_min: f64,
    pub sigma_next: f64,
    pub norm: f64,
    pub pass: bool,
    /// `|⟨v_min, φ′⟩| / ‖φ′‖` in coefficient space.
    pub alignment: f64,
    /// `c_M b_P − c_P b_M`.
    pub cb_bracket: f64,
}

/// Relative thresholds for the simple-kernel test.
#[derive(Clone, Copy, Debug)]
pub struct KernelThresholds {
    pub min_rel: f64,
    pub next_rel: f64,
}

impl Default for KernelThresholds {
    fn default() -> Self {
        KernelThresholds {
            min_rel: 1e-8,
            next_rel: 1e-4,
        }
    }
}

/// Two smallest singular values of the discretized `L`.
pub fn check_simple_kernel(
    wave: &TravelingWave,
    pjac: &ParameterJacobian,
    th: KernelThresholds,
) -> Result<SimpleKernelReport> {
    wave.require_nondegenerate()?;
    let ops = WaveOperators::new(wave)?;
    let l = ops.l_matrix();
    let sv = linalg::svd_right(&l)?;
    let norm = sv[0].0;
    let (smin, v) = &sv[sv.len() - 1];
    let snext = sv[sv.len() - 2].0;
    let dphi = ops.phi.derivative();
    let dn = dphi.coeffs().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ov: Complex64 = dphi
        .coeffs()
        .iter()
        .zip(v)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(SimpleKernelReport {
        sigma_min: *smin,
        sigma_next: snext,
        norm,
        pass: *smin <= th.min_rel * norm && snext >= th.next_rel * norm,
        alignment: ov.norm() / dn,
        cb_bracket: pjac.c_m * pjac.b_p - pjac.c_p * pjac.b_m,
    })
}
