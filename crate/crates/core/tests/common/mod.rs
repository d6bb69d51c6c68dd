//! Shared fixtures: the acceptance suite and independent oracles.
#![allow(dead_code)]

use modstab::symbols::EquationSpec;
use modstab::wave::{continue_family, SolverOptions, TravelingWave};

pub const KS: [f64; 2] = [0.75, 1.25];
pub const AMPS: [f64; 2] = [0.05, 0.1];

pub fn suite_specs() -> Vec<EquationSpec> {
    vec![
        EquationSpec::kdv(),
        EquationSpec::whitham(),
        EquationSpec::ilw(1.0).unwrap(),
        EquationSpec::kawahara(),
        EquationSpec::fornberg_whitham(),
    ]
}

pub struct SuiteWave {
    pub label: String,
    pub wave: TravelingWave,
}

/// Five equations, two wavenumbers, two amplitudes, zero mean, `f = u²/2`.
pub fn suite(modes: usize) -> Vec<SuiteWave> {
    let opts = SolverOptions::default().with_modes(modes);
    let mut out = Vec::new();
    for spec in suite_specs() {
        for k in KS {
            let fam = continue_family(&spec, k, 0.0, &AMPS, &opts).unwrap();
            for (w, a) in fam.into_iter().zip(AMPS) {
                out.push(SuiteWave {
                    label: format!("{} k={k} a={a}", spec.name),
                    wave: w,
                });
            }
        }
    }
    out
}

/// `Ω(q) = √(q tanh q)` for the water-wave Whitham equation.
pub fn whitham_omega(q: f64) -> f64 {
    (q * q.tanh()).sqrt()
}

/// Small-amplitude modulational index for `f = u²/2`:
/// `Ω″(k)·[k/(2Ω(k) − Ω(2k)) + 1/(Ω′(k) − c(0))]`.
/// Derivatives by central differences.
pub fn whitham_index(k: f64) -> f64 {
    let h = 1e-4;
    let om = whitham_omega;
    let d1 = (om(k + h) - om(k - h)) / (2.0 * h);
    let d2 = (om(k + h) - 2.0 * om(k) + om(k - h)) / (h * h);
    d2 * (k / (2.0 * om(k) - om(2.0 * k)) + 1.0 / (d1 - 1.0))
}

/// Zero of the index by bisection on `[0.9, 1.5]`.
pub fn whitham_kstar() -> f64 {
    let (mut lo, mut hi) = (0.9, 1.5);
    let s_lo = whitham_index(lo).signum();
    assert_ne!(s_lo, whitham_index(hi).signum());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if whitham_index(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Closed-form phase speed `c(q)` for each suite equation, written out
/// independently of the library's symbol code.
pub fn phase_speed_oracle(name: &str, q: f64) -> f64 {
    let q = q.abs();
    match name {
        "kdv" => 1.0 - q * q / 6.0,
        "whitham" if q == 0.0 => 1.0,
        "whitham" => (q.tanh() / q).sqrt(),
        "ilw" if q == 0.0 => 0.0,
        "ilw" => q / q.tanh() - 1.0,
        "kawahara" => -q * q + q.powi(4),
        "fornberg-whitham" => 1.0 / (1.0 + q * q),
        other => panic!("no oracle for {other}"),
    }
}

/// `r_{n+1} ≤ C r_n²` on every Newton step landing above the rounding floor.
pub fn newton_is_quadratic(h: &[f64]) -> bool {
    const C: f64 = 1e3;
    const FLOOR: f64 = 1e-14;
    let ok = h
        .windows(2)
        .filter(|s| s[1] > FLOOR)
        .all(|s| s[1] <= C * s[0] * s[0]);
    let small_start = h.windows(2).any(|s| s[1] > FLOOR && s[0] <= 1e-5) || h.len() < 3 || h[h.len() - 2] <= 1e-5;
    ok && small_start && h.last().is_some_and(|r| *r <= 1e-11)
}
