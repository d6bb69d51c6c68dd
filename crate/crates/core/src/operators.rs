//! Linearized operators about a wave, in the exponential Fourier basis.
//!
//! With `g = f′(φ)`:
//! `L = k(c − g − K)`, `A₀ = ∂L`, `A₀† = −L∂`,
//! `A₁ = c − Ω′(nk) − g` and `A₂ = (i/2)Ω″(nk)`, the first- and second-order
//! coefficients of `A_τ = e^{−iτθ} A e^{iτθ}` in powers of `ikτ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cmat, CMat};
use crate::spectral::Fourier;
use crate::wave::TravelingWave;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Symbol tables and `f′(φ)` coefficients for one wave.
#[derive(Clone, Debug)]
pub struct WaveOperators {
    pub n: usize,
    pub k: f64,
    pub c: f64,
    /// Coefficients of `f′(φ)` on modes `−2N..=2N`.
    pub g: Fourier,
    pub phi: Fourier,
    /// `[c, c′, c″]` at `q = mk`, modes `−N..=N`; `c″` is NaN where undefined.
    cd: Vec<[f64; 3]>,
    /// `Ω′(mk)`, `Ω″(mk)` (NaN where undefined).
    om: Vec<[f64; 2]>,
    smooth: bool,
    wave: TravelingWave,
}

impl WaveOperators {
    pub fn new(wave: &TravelingWave) -> Result<Self> {
        let n = wave.modes();
        let k = wave.k;
        let spec = &wave.spec;
        spec.require_assumption1()?;
        let mut cd = Vec::with_capacity(2 * n + 1);
        let mut om = Vec::with_capacity(2 * n + 1);
        for m in -(n as i64)..=(n as i64) {
            let q = m as f64 * k;
            let d = spec.c_derivs(q)?;
            cd.push([d[0], d[1], d[2]]);
            let o1 = spec.omega_eval(q, 1)?;
            let o2 = spec.omega_eval(q, 2).unwrap_or(f64::NAN);
            om.push([o1, o2]);
        }
        Ok(WaveOperators {
            n,
            k,
            c: wave.c,
            g: wave.flux_fourier(1, 2 * n)?,
            phi: wave.profile(),
            cd,
            om,
            smooth: spec.smooth_at_zero,
            wave: wave.clone(),
        })
    }

    pub fn wave(&self) -> &TravelingWave {
        &self.wave
    }

    fn idx(&self, m: i64) -> usize {
        (m + self.n as i64) as usize
    }

    fn diag(&self, v: &Fourier, f: impl Fn(usize, i64) -> Complex64) -> Fourier {
        let v = v.resize(self.n);
        v.multiplier(|m| f(self.idx(m), m))
    }

    /// `K*`: multiplier `c(mk)`.
    pub fn k_op(&self, v: &Fourier) -> Fourier {
        self.diag(v, |i, _| self.cd[i][0].into())
    }

    /// `K₁*`: multiplier `i c′(mk)`.
    pub fn k1_op(&self, v: &Fourier) -> Fourier {
        self.diag(v, |i, _| I * self.cd[i][1])
    }

    /// `K₂*`: multiplier `−c″(mk)`.
    pub fn k2_op(&self, v: &Fourier) -> Fourier {
        self.diag(v, |i, _| (-self.cd[i][2]).into())
    }

    /// `f′(φ)·v` truncated to `−N..=N`.
    pub fn g_mul(&self, v: &Fourier) -> Fourier {
        self.g.product_into(&v.resize(self.n), self.n)
    }

    /// `L v = k(c v − f′(φ)v − K*v)`.
    pub fn l_op(&self, v: &Fourier) -> Fourier {
        let v = v.resize(self.n);
        v.scale(self.c.into())
            .sub(&self.g_mul(&v))
            .sub(&self.k_op(&v))
            .scale(self.k.into())
    }

    pub fn a0(&self, v: &Fourier) -> Fourier {
        self.l_op(v).derivative()
    }

    pub fn a0_adj(&self, v: &Fourier) -> Fourier {
        self.l_op(&v.resize(self.n).derivative())
            .scale((-1.0).into())
    }

    /// `A₁ v = (c − Ω′(mk))v − f′(φ)v`.
    pub fn a1(&self, v: &Fourier) -> Fourier {
        self.diag(v, |i, _| (self.c - self.om[i][0]).into())
            .sub(&self.g_mul(v))
    }

    /// `A₂ v = (i/2)Ω″(mk) v`.
    pub fn a2(&self, v: &Fourier) -> Fourier {
        self.diag(v, |i, _| 0.5 * I * self.om[i][1])
    }

    /// The paper-form second-order term `−½k∂K₂*`, without the `K₁*` part.
    pub fn a2_without_k1(&self, v: &Fourier) -> Fourier {
        self.diag(v, |i, m| 0.5 * I * (m as f64 * self.k * self.cd[i][2]))
    }

    fn dense(&self, entry: impl Fn(i64, i64) -> Complex64) -> CMat {
        let n = self.n as i64;
        cmat(2 * self.n + 1, 2 * self.n + 1, |i, j| {
            entry(i as i64 - n, j as i64 - n)
        })
    }

    fn delta(m: i64, j: i64) -> f64 {
        if m == j {
            1.0
        } else {
            0.0
        }
    }

    /// Dense `L` on modes `−N..=N`.
    pub fn l_matrix(&self) -> CMat {
        self.dense(|m, j| {
            let d = Self::delta(m, j);
            self.k * ((self.c - self.cd[self.idx(m)][0]) * d - self.g.get(m - j))
        })
    }

    /// Dense `A₀`.
    pub fn a0_matrix(&self) -> CMat {
        self.bloch_exact(0.0).expect("tau = 0 is admissible")
    }

    /// Dense `A₁`.
    pub fn a1_matrix(&self) -> CMat {
        self.dense(|m, j| {
            Complex64::from((self.c - self.om[self.idx(m)][0]) * Self::delta(m, j)) - self.g.get(m - j)
        })
    }

    /// Dense `A₂`.
    pub fn a2_matrix(&self) -> Result<CMat> {
        self.require_smooth("second-order Bloch term")?;
        Ok(self.dense(|m, j| 0.5 * I * self.om[self.idx(m)][1] * Self::delta(m, j)))
    }

    fn require_smooth(&self, what: &str) -> Result<()> {
        if self.smooth {
            Ok(())
        } else {
            Err(Error::UnsupportedSymbol(format!(
                "`{}` is not smooth at q = 0; {what} needs Ω″(0)",
                self.wave.spec.name
            )))
        }
    }

    /// `A_τ` assembled directly from `Ω(k(m+τ))`.
    pub fn bloch_exact(&self, tau: f64) -> Result<CMat> {
        check_tau(tau)?;
        let spec = &self.wave.spec;
        let n = self.n as i64;
        let om = (-n..=n)
            .map(|m| spec.omega_eval(self.k * (m as f64 + tau), 0))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.dense(|m, j| {
            let d = Self::delta(m, j);
            I * self.k * (m as f64 + tau) * (self.c * d - self.g.get(m - j))
                - I * om[self.idx(m)] * d
        }))
    }

    /// `A₀ + ikτA₁ + (ikτ)²A₂`.
    pub fn bloch_taylor2(&self, tau: f64) -> Result<CMat> {
        check_tau(tau)?;
        let a0 = self.a0_matrix();
        let a1 = self.a1_matrix();
        let a2 = self.a2_matrix()?;
        let z = I * self.k * tau;
        Ok(&a0 + &a1 * faer::Scale(z) + &a2 * faer::Scale(z * z))
    }

    /// Coefficient vector (modes `−N..=N`) as a Fourier series.
    pub fn series(&self, v: &[Complex64]) -> Fourier {
        Fourier::from_vec(v.to_vec())
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau.abs() < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Bloch parameter must satisfy |tau| < 1/2, got {tau}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::EquationSpec;
    use crate::wave::{continue_family, SolverOptions};
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn ops() -> &'static WaveOperators {
        static OPS: OnceLock<WaveOperators> = OnceLock::new();
        OPS.get_or_init(|| {
            let opts = SolverOptions::default().with_modes(24);
            let w = continue_family(&EquationSpec::whitham(), 1.0, 0.1, &[0.08], &opts).unwrap();
            WaveOperators::new(&w[0]).unwrap()
        })
    }

    fn random_poly(seed: &[f64], n: usize) -> Fourier {
        Fourier::from_vec(
            (0..2 * n + 1)
                .map(|i| {
                    Complex64::new(seed[i % seed.len()], seed[(3 * i + 1) % seed.len()])
                        / (1.0 + (i as f64 - n as f64).powi(2))
                })
                .collect(),
        )
    }

    fn apply(m: &CMat, v: &Fourier) -> Fourier {
        let c = v.coeffs();
        Fourier::from_vec(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * c[j]).sum())
                .collect(),
        )
    }

    #[test]
    fn a0_kills_phi_prime() {
        let o = ops();
        let r = o.a0(&o.phi.derivative());
        assert!(r.max_abs() < 1e-11, "{}", r.max_abs());
        let r = apply(&o.a0_matrix(), &o.phi.derivative());
        assert!(r.max_abs() < 1e-11);
    }

    #[test]
    fn matrices_match_functional_forms() {
        let o = ops();
        let v = random_poly(&[0.3, -1.0, 0.7, 0.2, -0.5], o.n);
        assert!(apply(&o.l_matrix(), &v).sub(&o.l_op(&v)).max_abs() < 1e-12);
        assert!(apply(&o.a0_matrix(), &v).sub(&o.a0(&v)).max_abs() < 1e-11);
        assert!(apply(&o.a1_matrix(), &v).sub(&o.a1(&v)).max_abs() < 1e-12);
        assert!(apply(&o.a2_matrix().unwrap(), &v).sub(&o.a2(&v)).max_abs() < 1e-12);
    }

    #[test]
    fn a1_equals_paper_form() {
        // c − f′ − K + k∂K₁ has symbol c − c(mk) − mk c′(mk) = c − Ω′(mk)
        let o = ops();
        let v = random_poly(&[0.1, 0.9, -0.4], o.n);
        let paper = v
            .scale(o.c.into())
            .sub(&o.g_mul(&v))
            .sub(&o.k_op(&v))
            .add(&o.k1_op(&v).derivative().scale(o.k.into()));
        assert!(paper.sub(&o.a1(&v)).max_abs() < 1e-12);
        // A₂ = −½k∂K₂ + K₁
        let a2 = o.a2_without_k1(&v).add(&o.k1_op(&v));
        assert!(a2.sub(&o.a2(&v)).max_abs() < 1e-12);
    }

    #[test]
    fn tau_out_of_range() {
        assert!(matches!(ops().bloch_exact(0.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(ops().bloch_taylor2(-0.7), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bloch_realness_symmetry() {
        let o = ops();
        let n = o.n;
        let p = o.bloch_exact(0.13).unwrap();
        let m = o.bloch_exact(-0.13).unwrap();
        for i in 0..2 * n + 1 {
            for j in 0..2 * n + 1 {
                let d = m[(i, j)] - p[(2 * n - i, 2 * n - j)].conj();
                assert!(d.norm() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn adjoint_consistency(seed in prop::collection::vec(-1.0f64..1.0, 6..12)) {
            let o = ops();
            let u = random_poly(&seed, o.n);
            let v = random_poly(&seed[2..], o.n);
            let lhs = o.a0(&u).inner(&v);
            let rhs = u.inner(&o.a0_adj(&v));
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }
    }
}
