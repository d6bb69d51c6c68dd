//! Truncated Fourier series on modes `−N..=N` and grid transforms.
//!
//! All convolutions act on coefficients. Products of two series are formed by
//! exact discrete convolution and then truncated, so nothing here aliases.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

const I: Complex64 = Complex64::new(0.0, 1.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(len)
        } else {
            p.plan_fft_inverse(len)
        }
    })
}

/// `Σ_{|n|≤N} c_n e^{inθ}` on `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fourier {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl Fourier {
    pub fn zeros(n: usize) -> Self {
        Fourier {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n + 1],
        }
    }

    /// Coefficients ordered from mode `−N` to `N`.
    pub fn from_vec(coeffs: Vec<Complex64>) -> Self {
        assert!(coeffs.len() % 2 == 1, "need an odd number of modes");
        Fourier {
            n: coeffs.len() / 2,
            coeffs,
        }
    }

    /// From the cosine series `a₀ + Σ aₙ cos nθ`.
    pub fn from_cosine(a: &[f64]) -> Self {
        let n = a.len() - 1;
        let mut s = Self::zeros(n);
        s.coeffs[n] = a[0].into();
        for (m, &am) in a.iter().enumerate().skip(1) {
            s.coeffs[n + m] = (0.5 * am).into();
            s.coeffs[n - m] = (0.5 * am).into();
        }
        s
    }

    /// Cosine coefficients `a₀..a_N` (real parts; assumes an even real function).
    pub fn to_cosine(&self) -> Vec<f64> {
        let mut a = Vec::with_capacity(self.n + 1);
        a.push(self.get(0).re);
        for m in 1..=self.n as i64 {
            a.push(self.get(m).re + self.get(-m).re);
        }
        a
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `m`; zero outside the band.
    pub fn get(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(m + self.n as i64) as usize]
        }
    }

    pub fn set(&mut self, m: i64, v: Complex64) {
        let idx = (m + self.n as i64) as usize;
        self.coeffs[idx] = v;
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.n as i64;
        -n..=n
    }

    /// Same function with band `−n..=n` (zero-padded or truncated).
    pub fn resize(&self, n: usize) -> Self {
        let mut out = Self::zeros(n);
        for m in out.modes().collect::<Vec<_>>() {
            out.set(m, self.get(m));
        }
        out
    }

    /// Multiply mode `m` by `sym(m)`.
    pub fn multiplier(&self, sym: impl Fn(i64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (m, c) in self.modes().zip(out.coeffs.iter_mut()) {
            if *c != Complex64::new(0.0, 0.0) {
                *c *= sym(m);
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        self.multiplier(|m| I * m as f64)
    }

    /// Zero-mean antiderivative; the mean mode is discarded.
    pub fn antiderivative(&self) -> Self {
        let mut out = self.multiplier(|m| if m == 0 { 0.0.into() } else { -I / m as f64 });
        out.set(0, 0.0.into());
        out
    }

    /// Value at `θ` by direct summation.
    pub fn eval(&self, theta: f64) -> Complex64 {
        self.modes()
            .zip(&self.coeffs)
            .map(|(m, c)| c * Complex64::from_polar(1.0, m as f64 * theta))
            .sum()
    }

    /// `self · other` truncated to the band of `self`.
    pub fn product(&self, other: &Fourier) -> Self {
        self.product_into(other, self.n)
    }

    /// `self · other` truncated to band `−n..=n`.
    pub fn product_into(&self, other: &Fourier, n: usize) -> Self {
        let mut out = Self::zeros(n);
        let (a, b) = (self.n as i64, other.n as i64);
        for m in -(n as i64)..=(n as i64) {
            let lo = (-a).max(m - b);
            let hi = a.min(m + b);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in lo..=hi {
                acc += self.get(j) * other.get(m - j);
            }
            out.set(m, acc);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Fourier {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Fourier) -> Self {
        let n = self.n.max(other.n);
        let mut out = Self::zeros(n);
        for m in -(n as i64)..=(n as i64) {
            out.set(m, self.get(m) + other.get(m));
        }
        out
    }

    pub fn sub(&self, other: &Fourier) -> Self {
        self.add(&other.scale((-1.0).into()))
    }

    /// `∫₀^{2π} conj(self)·other dθ`.
    pub fn inner(&self, other: &Fourier) -> Complex64 {
        let n = self.n.min(other.n) as i64;
        2.0 * PI
            * (-n..=n)
                .map(|m| self.get(m).conj() * other.get(m))
                .sum::<Complex64>()
    }

    /// `sup |c_m|`.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Values at `θ_j = 2πj/len`; needs `len > 2N` to be exact.
    pub fn to_grid(&self, len: usize) -> Vec<Complex64> {
        assert!(len > 2 * self.n, "grid of {len} points cannot hold {} modes", self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (m, c) in self.modes().zip(&self.coeffs) {
            buf[m.rem_euclid(len as i64) as usize] += c;
        }
        plan(len, false).process(&mut buf);
        buf
    }

    pub fn to_real_grid(&self, len: usize) -> Vec<f64> {
        self.to_grid(len).into_iter().map(|z| z.re).collect()
    }

    /// Interpolating coefficients for modes `−n..=n` from equispaced samples.
    pub fn from_grid(values: &[Complex64], n: usize) -> Self {
        let len = values.len();
        assert!(len > 2 * n, "grid of {len} points cannot resolve {n} modes");
        let mut buf = values.to_vec();
        plan(len, true).process(&mut buf);
        let mut out = Self::zeros(n);
        for m in -(n as i64)..=(n as i64) {
            out.set(m, buf[m.rem_euclid(len as i64) as usize] / len as f64);
        }
        out
    }

    pub fn from_real_grid(values: &[f64], n: usize) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| x.into()).collect();
        Self::from_grid(&v, n)
    }
}

/// Equispaced nodes `2πj/len`.
pub fn nodes(len: usize) -> Vec<f64> {
    (0..len).map(|j| 2.0 * PI * j as f64 / len as f64).collect()
}

/// Trapezoid rule on `[0, 2π)`; exact for trigonometric polynomials of degree `< len`.
pub fn trapezoid(values: &[f64]) -> f64 {
    2.0 * PI * values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(seed: &[f64]) -> Fourier {
        let n = seed.len() / 2;
        Fourier::from_vec(
            (0..2 * n + 1)
                .map(|i| Complex64::new(seed[i % seed.len()], seed[(i * 7 + 3) % seed.len()]))
                .collect(),
        )
    }

    #[test]
    fn cosine_round_trip_and_grid() {
        let a = [0.3, 1.0, -0.25, 0.125];
        let s = Fourier::from_cosine(&a);
        assert_eq!(s.to_cosine(), a.to_vec());
        let g = s.to_real_grid(16);
        for (j, th) in nodes(16).into_iter().enumerate() {
            let direct = a[0] + (1..4).map(|m| a[m] * (m as f64 * th).cos()).sum::<f64>();
            assert!((g[j] - direct).abs() < 1e-14);
        }
        let back = Fourier::from_real_grid(&g, 3);
        assert!(back.sub(&s).max_abs() < 1e-15);
    }

    #[test]
    fn inner_product_has_no_normalization() {
        let one = Fourier::from_cosine(&[1.0]);
        assert!((one.inner(&one).re - 2.0 * PI).abs() < 1e-14);
        let cos = Fourier::from_cosine(&[0.0, 1.0]);
        assert!((cos.inner(&cos).re - PI).abs() < 1e-14);
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let s = Fourier::from_cosine(&[0.0, 1.0, 0.5, -0.2]);
        let back = s.derivative().antiderivative();
        assert!(back.sub(&s).max_abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn product_matches_grid(seed in prop::collection::vec(-1.0f64..1.0, 9..15)) {
            let a = poly(&seed);
            let b = poly(&seed[1..]);
            let n = a.order() + b.order();
            let exact = a.product_into(&b, n);
            let len = 2 * n + 2;
            let ga = a.to_grid(len);
            let gb = b.to_grid(len);
            let prod: Vec<_> = ga.iter().zip(&gb).map(|(x, y)| x * y).collect();
            let via_grid = Fourier::from_grid(&prod, n);
            prop_assert!(exact.sub(&via_grid).max_abs() < 1e-12);
        }

        #[test]
        fn parseval(seed in prop::collection::vec(-1.0f64..1.0, 5..13)) {
            let a = poly(&seed);
            let len = 4 * a.order() + 2;
            let g = a.to_grid(len);
            let quad = 2.0 * PI * g.iter().map(|z| z.norm_sqr()).sum::<f64>() / len as f64;
            prop_assert!((a.inner(&a).re - quad).abs() < 1e-12 * (1.0 + quad));
        }
    }
}
