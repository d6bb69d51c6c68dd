//! Dispersion symbols and nonlinearities.
//!
//! A model is described by its phase-speed symbol `c(q) = Ω(q)/q` (the Fourier
//! transform of the convolution kernel) and a polynomial flux `f(u)`. Every
//! catalogue entry ships closed-form derivatives of `c` up to third order; the
//! derivatives of `Ω` follow from `Ω = q c`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|q|` the phase speed is evaluated from its even Taylor series.
pub const Q_MIN: f64 = 1e-3;

/// Dispersion relation, stored through its phase speed `c(q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dispersion {
    /// `c(q) = Σ w_j q^{2j}`, i.e. `Ω(q) = Σ w_j q^{2j+1}`.
    OddPolynomial { coeffs: Vec<f64> },
    /// `c(q) = sqrt(tanh q / q)`.
    WhithamWater,
    /// `c(q) = q coth(δq) − 1/δ`.
    Ilw { delta: f64 },
    /// `c(q) = 1 / (1 + q²)`.
    FornbergWhitham,
    /// `c(q) = |q|`.
    BenjaminOno,
    /// `c(q) = iq`; not a real symbol.
    Burgers,
}

/// Flux `f(u) = Σ b_j u^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub name: String,
    pub coeffs: Vec<f64>,
}

impl Nonlinearity {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Nonlinearity {
            name: "polynomial".into(),
            coeffs,
        }
    }

    /// `f(u) = u²/2`.
    pub fn quadratic() -> Self {
        Nonlinearity {
            name: "quadratic".into(),
            coeffs: vec![0.0, 0.0, 0.5],
        }
    }

    /// `f(u) = u³/3`.
    pub fn cubic() -> Self {
        Nonlinearity {
            name: "cubic".into(),
            coeffs: vec![0.0, 0.0, 0.0, 1.0 / 3.0],
        }
    }

    /// `f(u) = u^p / p` for integer `p ≥ 2`.
    pub fn power(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidArgument(format!(
                "power nonlinearity needs p >= 2, got {p}"
            )));
        }
        let mut coeffs = vec![0.0; p + 1];
        coeffs[p] = 1.0 / p as f64;
        Ok(Nonlinearity {
            name: format!("power-{p}"),
            coeffs,
        })
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "quadratic" => Ok(Self::quadratic()),
            "cubic" => Ok(Self::cubic()),
            _ => match name.strip_prefix("power-").map(str::parse::<usize>) {
                Some(Ok(p)) => Self::power(p),
                _ => Err(Error::InvalidArgument(format!(
                    "unknown nonlinearity `{name}` (expected quadratic, cubic, power-p)"
                ))),
            },
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&b| b != 0.0)
            .unwrap_or(0)
    }

    /// `f`, `f′` or `f″` at a single point.
    pub fn eval(&self, u: f64, order: usize) -> Result<f64> {
        if order > 2 {
            return Err(Error::InvalidArgument(format!(
                "nonlinearity order must be 0..=2, got {order}"
            )));
        }
        let v = horner_derivative(&self.coeffs, u, order);
        finite(v, u)
    }

    /// Antiderivative `F` with `F(0) = 0`.
    pub fn antiderivative(&self, u: f64) -> Result<f64> {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (j, &b)| acc * u + b / (j + 1) as f64)
            * u;
        finite(v, u)
    }

    /// Pointwise `f`, `f′` or `f″` on a grid.
    pub fn eval_grid(&self, u: &[f64], order: usize) -> Result<Vec<f64>> {
        u.iter().map(|&x| self.eval(x, order)).collect()
    }
}

fn finite(v: f64, u: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericRange(format!(
            "nonlinearity overflowed at u = {u:e}"
        )))
    }
}

/// `order`-th derivative of `Σ b_j u^j` by Horner's rule.
fn horner_derivative(coeffs: &[f64], u: f64, order: usize) -> f64 {
    let mut acc = 0.0;
    for (j, &b) in coeffs.iter().enumerate().rev() {
        if j < order {
            break;
        }
        let fall: f64 = (0..order).map(|i| (j - i) as f64).product();
        acc = acc * u + b * fall;
    }
    acc
}

/// Multiplier kinds for the θ-scale convolutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MultiplierKind {
    K,
    K1,
    K2,
}

/// A fully specified model `u_t + f(u)_x + K*u_x = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub name: String,
    pub dispersion: Dispersion,
    pub nonlinearity: Nonlinearity,
    pub params: BTreeMap<String, f64>,
    /// `[c0, c2, c4]` with `c(q) ≈ c0 + c2 q² + c4 q⁴`.
    pub zero_series: Option<[f64; 3]>,
    pub smooth_at_zero: bool,
    pub assumption1: bool,
}

/// Catalogue row for display.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogueEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub params: &'static [&'static str],
    pub assumption1: bool,
    pub smooth_at_zero: bool,
}

pub const CATALOGUE: &[CatalogueEntry] = &[
    CatalogueEntry {
        name: "kdv",
        formula: "c(q) = 1 - q^2/6",
        params: &[],
        assumption1: true,
        smooth_at_zero: true,
    },
    CatalogueEntry {
        name: "whitham",
        formula: "c(q) = sqrt(tanh(q)/q)",
        params: &[],
        assumption1: true,
        smooth_at_zero: true,
    },
    CatalogueEntry {
        name: "ilw",
        formula: "c(q) = q coth(delta q) - 1/delta",
        params: &["delta"],
        assumption1: true,
        smooth_at_zero: true,
    },
    CatalogueEntry {
        name: "kawahara",
        formula: "c(q) = -q^2 + q^4",
        params: &[],
        assumption1: true,
        smooth_at_zero: true,
    },
    CatalogueEntry {
        name: "fornberg-whitham",
        formula: "c(q) = 1/(1 + q^2)",
        params: &[],
        assumption1: true,
        smooth_at_zero: true,
    },
    CatalogueEntry {
        name: "benjamin-ono",
        formula: "c(q) = |q|",
        params: &[],
        assumption1: true,
        smooth_at_zero: false,
    },
    CatalogueEntry {
        name: "burgers",
        formula: "c(q) = i q",
        params: &[],
        assumption1: false,
        smooth_at_zero: true,
    },
];

impl EquationSpec {
    /// Look up a catalogue equation. `params` may carry `delta` for ILW.
    pub fn catalogue(
        name: &str,
        params: &BTreeMap<String, f64>,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        let known: &[&str] = CATALOGUE
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.params)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown equation `{name}`")))?;
        if let Some(extra) = params.keys().find(|p| !known.contains(&p.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "equation `{name}` has no parameter `{extra}`"
            )));
        }
        let mut spec = match name {
            "kdv" => Self::kdv(),
            "whitham" => Self::whitham(),
            "ilw" => Self::ilw(params.get("delta").copied().unwrap_or(1.0))?,
            "kawahara" => Self::kawahara(),
            "fornberg-whitham" => Self::fornberg_whitham(),
            "benjamin-ono" => Self::benjamin_ono(),
            "burgers" => Self::burgers(),
            _ => unreachable!(),
        };
        spec.nonlinearity = nonlinearity;
        Ok(spec)
    }

    fn base(name: &str, dispersion: Dispersion, zero_series: Option<[f64; 3]>) -> Self {
        EquationSpec {
            name: name.into(),
            dispersion,
            nonlinearity: Nonlinearity::quadratic(),
            params: BTreeMap::new(),
            zero_series,
            smooth_at_zero: true,
            assumption1: true,
        }
    }

    pub fn kdv() -> Self {
        Self::base(
            "kdv",
            Dispersion::OddPolynomial {
                coeffs: vec![1.0, -1.0 / 6.0],
            },
            Some([1.0, -1.0 / 6.0, 0.0]),
        )
    }

    pub fn whitham() -> Self {
        Self::base(
            "whitham",
            Dispersion::WhithamWater,
            Some([1.0, -1.0 / 6.0, 19.0 / 360.0]),
        )
    }

    pub fn ilw(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ILW depth must be positive, got {delta}"
            )));
        }
        let mut s = Self::base(
            "ilw",
            Dispersion::Ilw { delta },
            Some([0.0, delta / 3.0, -delta.powi(3) / 45.0]),
        );
        s.params.insert("delta".into(), delta);
        Ok(s)
    }

    pub fn kawahara() -> Self {
        Self::base(
            "kawahara",
            Dispersion::OddPolynomial {
                coeffs: vec![0.0, -1.0, 1.0],
            },
            Some([0.0, -1.0, 1.0]),
        )
    }

    pub fn fornberg_whitham() -> Self {
        Self::base(
            "fornberg-whitham",
            Dispersion::FornbergWhitham,
            Some([1.0, -1.0, 1.0]),
        )
    }

    pub fn benjamin_ono() -> Self {
        let mut s = Self::base("benjamin-ono", Dispersion::BenjaminOno, None);
        s.smooth_at_zero = false;
        s
    }

    pub fn burgers() -> Self {
        let mut s = Self::base("burgers", Dispersion::Burgers, None);
        s.assumption1 = false;
        s
    }

    /// Custom model with `Ω(q) = Σ w_j q^{2j+1}`.
    pub fn custom_polynomial(name: &str, odd_coeffs: Vec<f64>) -> Result<Self> {
        if odd_coeffs.is_empty() || odd_coeffs.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "custom dispersion needs finite odd-power coefficients".into(),
            ));
        }
        let z = |i: usize| odd_coeffs.get(i).copied().unwrap_or(0.0);
        let series = [z(0), z(1), z(2)];
        Ok(Self::base(
            name,
            Dispersion::OddPolynomial { coeffs: odd_coeffs },
            Some(series),
        ))
    }

    pub fn with_nonlinearity(mut self, f: Nonlinearity) -> Self {
        self.nonlinearity = f;
        self
    }

    /// Fails for symbols that are not real and even.
    pub fn require_assumption1(&self) -> Result<()> {
        if self.assumption1 {
            Ok(())
        } else {
            Err(Error::AssumptionViolated(format!(
                "`{}` does not have a real, even phase speed",
                self.name
            )))
        }
    }

    /// `d^order c / dq^order` at `q`, `order ≤ 3`.
    pub fn phase_speed(&self, q: f64, order: usize) -> Result<f64> {
        if order > 3 {
            return Err(Error::InvalidArgument(format!(
                "phase speed order must be 0..=3, got {order}"
            )));
        }
        Ok(self.c_derivs(q)?[order])
    }

    /// `d^order Ω / dq^order` at `q`, `order ≤ 3`.
    pub fn omega_eval(&self, q: f64, order: usize) -> Result<f64> {
        if order > 3 {
            return Err(Error::InvalidArgument(format!(
                "omega order must be 0..=3, got {order}"
            )));
        }
        Ok(self.omega_derivs(q, order)?[order])
    }

    /// `[Ω, Ω′, Ω″, Ω‴]` up to `max_order`; entries past it are zero.
    pub fn omega_derivs(&self, q: f64, max_order: usize) -> Result<[f64; 4]> {
        if let Dispersion::BenjaminOno = self.dispersion {
            // Ω = q|q| is C¹ only.
            let s = q.signum();
            if q == 0.0 && max_order >= 2 {
                return Err(self.not_smooth(max_order));
            }
            return Ok([q * q.abs(), 2.0 * q.abs(), 2.0 * s, 0.0]);
        }
        let [c, c1, c2, c3] = self.c_derivs(q)?;
        Ok([q * c, c + q * c1, 2.0 * c1 + q * c2, 3.0 * c2 + q * c3])
    }

    fn not_smooth(&self, order: usize) -> Error {
        Error::UnsupportedSymbol(format!(
            "`{}` is not smooth at q = 0 (derivative of order {order} requested)",
            self.name
        ))
    }

    /// `[c, c′, c″, c‴]` at `q`.
    pub fn c_derivs(&self, q: f64) -> Result<[f64; 4]> {
        self.require_assumption1()?;
        if !q.is_finite() {
            return Err(Error::NumericRange(format!("non-finite wavenumber {q}")));
        }
        if let Dispersion::BenjaminOno = self.dispersion {
            if q == 0.0 {
                // c′(0) = 0 by evenness; c″(0) does not exist.
                return Ok([0.0, 0.0, f64::NAN, f64::NAN]);
            }
            return Ok([q.abs(), q.signum(), 0.0, 0.0]);
        }
        let a = q.abs();
        let s = if q < 0.0 { -1.0 } else { 1.0 };
        let d = match (&self.dispersion, self.zero_series) {
            (Dispersion::OddPolynomial { coeffs }, _) => poly_even(coeffs, a),
            (_, Some(z)) if a < Q_MIN => series_derivs(z, a),
            (Dispersion::WhithamWater, _) => whitham_derivs(a),
            (Dispersion::Ilw { delta }, _) => ilw_derivs(*delta, a),
            (Dispersion::FornbergWhitham, _) => fornberg_whitham_derivs(a),
            _ => unreachable!("non-smooth symbols handled above"),
        };
        // c even: odd-order derivatives flip sign.
        Ok([d[0], s * d[1], d[2], s * d[3]])
    }

    /// Symbol at θ-mode `n` of the θ-scale convolutions `K`, `K₁`, `K₂`.
    pub fn theta_multiplier(&self, k: f64, n: i64, kind: MultiplierKind) -> Result<Complex64> {
        if !(k > 0.0) {
            return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")));
        }
        let q = n as f64 * k;
        let d = self.c_derivs(q)?;
        let v = match kind {
            MultiplierKind::K => Complex64::new(d[0], 0.0),
            MultiplierKind::K1 => Complex64::new(0.0, d[1]),
            MultiplierKind::K2 => {
                if d[2].is_nan() {
                    return Err(self.not_smooth(2));
                }
                Complex64::new(-d[2], 0.0)
            }
        };
        Ok(v)
    }

    /// `c(0)`, the long-wave phase speed.
    pub fn c0(&self) -> Result<f64> {
        self.phase_speed(0.0, 0)
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        write!(f, " f={}", self.nonlinearity.name)
    }
}

/// Derivatives of `Σ w_j q^{2j}` at `q ≥ 0`.
fn poly_even(w: &[f64], q: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (j, &wj) in w.iter().enumerate() {
        let p = 2 * j;
        for (order, slot) in out.iter_mut().enumerate() {
            if p >= order {
                let fall: f64 = (0..order).map(|i| (p - i) as f64).product();
                *slot += wj * fall * q.powi((p - order) as i32);
            }
        }
    }
    out
}

fn series_derivs(z: [f64; 3], q: f64) -> [f64; 4] {
    let [c0, c2, c4] = z;
    let q2 = q * q;
    [
        c0 + c2 * q2 + c4 * q2 * q2,
        2.0 * c2 * q + 4.0 * c4 * q2 * q,
        2.0 * c2 + 12.0 * c4 * q2,
        24.0 * c4 * q,
    ]
}

/// Bernoulli numbers `B_2 .. B_20`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Langevin function `L(x) = coth x − 1/x` and its first three derivatives.
pub fn langevin(x: f64) -> [f64; 4] {
    if x.abs() < 0.5 {
        // L(x) = Σ 2^{2n} B_{2n} x^{2n−1} / (2n)!
        let mut out = [0.0; 4];
        let mut fact = 1.0;
        for n in 1..=10usize {
            let p = 2 * n - 1;
            fact *= ((2 * n - 1) * (2 * n)) as f64;
            let a = 4f64.powi(n as i32) * BERNOULLI[n - 1] / fact;
            for (order, slot) in out.iter_mut().enumerate() {
                if p >= order {
                    let fall: f64 = (0..order).map(|i| (p - i) as f64).product();
                    *slot += a * fall * x.powi((p - order) as i32);
                }
            }
        }
        return out;
    }
    let coth = 1.0 / x.tanh();
    let csch2 = coth * coth - 1.0;
    [
        coth - 1.0 / x,
        1.0 / (x * x) - csch2,
        -2.0 / x.powi(3) + 2.0 * csch2 * coth,
        6.0 / x.powi(4) - 2.0 * csch2 * (2.0 * coth * coth + csch2),
    ]
}

fn whitham_derivs(q: f64) -> [f64; 4] {
    // h = ln c = ½(ln tanh q − ln q).
    let t = q.tanh();
    let sech2 = 1.0 - t * t;
    let [l, l1, l2, _] = langevin(q);
    // (ln tanh q)′ − 1/q = L(q) − tanh q, free of cancellation near 0.
    let h1 = 0.5 * (l - t);
    let h2 = 0.5 * (l1 - sech2);
    let h3 = 0.5 * (l2 + 2.0 * sech2 * t);
    let c = (t / q).sqrt();
    [
        c,
        c * h1,
        c * (h2 + h1 * h1),
        c * (h3 + 3.0 * h1 * h2 + h1 * h1 * h1),
    ]
}

fn ilw_derivs(delta: f64, q: f64) -> [f64; 4] {
    let x = delta * q;
    let [l, l1, l2, l3] = langevin(x);
    [
        q * l,
        l + x * l1,
        delta * (2.0 * l1 + x * l2),
        delta * delta * (3.0 * l2 + x * l3),
    ]
}

fn fornberg_whitham_derivs(q: f64) -> [f64; 4] {
    let d = 1.0 + q * q;
    [
        1.0 / d,
        -2.0 * q / (d * d),
        (6.0 * q * q - 2.0) / d.powi(3),
        24.0 * q * (1.0 - q * q) / d.powi(4),
    ]
}
