//! Traveling-wave solver: Stokes oracles, resolution, Newton health and
//! parameter derivatives.

use std::f64::consts::PI;

use modstab::error::Error;
use modstab::operators::WaveOperators;
use modstab::spectral::Fourier;
use modstab::symbols::{EquationSpec, Nonlinearity};
use modstab::wave::*;
use proptest::prelude::*;

fn opts(n: usize) -> SolverOptions {
    SolverOptions::default().with_modes(n)
}

fn wave(spec: &EquationSpec, k: f64, a: f64, n: usize) -> TravelingWave {
    continue_family(spec, k, 0.0, &[a], &opts(n)).unwrap().remove(0)
}

/// Fourth-order Stokes expansion for `f = u²/2`, zero mean, written from the
/// cosine-mode balance with an arbitrary phase speed `cq`.
struct Stokes {
    c2: f64,
    c4: f64,
    a2_2: f64,
    a2_4: f64,
    a3_3: f64,
}

fn stokes(cq: impl Fn(f64) -> f64, k: f64) -> Stokes {
    let c1 = cq(k);
    let e2 = cq(2.0 * k) - c1;
    let e3 = cq(3.0 * k) - c1;
    let a = -1.0 / (4.0 * e2);
    let cc = -a / (2.0 * e3);
    let g2 = a / 2.0;
    let b = a * (2.0 * cc + g2 / e2);
    Stokes {
        c2: g2,
        c4: (b + a * cc) / 2.0,
        a2_2: a,
        a2_4: b,
        a3_3: cc,
    }
}

fn kdv_c(q: f64) -> f64 {
    1.0 - q * q / 6.0
}

fn whitham_c(q: f64) -> f64 {
    (q.tanh() / q).sqrt()
}

/// Speed within 1e−6 relative at `a`, and sixth-order remainders in `c` and
/// `a₂` when `a` is halved.
fn check_stokes(spec: &EquationSpec, cq: impl Fn(f64) -> f64, k: f64, a: f64) {
    let s = stokes(&cq, k);
    let mut errs = vec![];
    for amp in [a, a / 2.0] {
        let w = wave(spec, k, amp, 32);
        let c_pred = cq(k) + s.c2 * amp * amp + s.c4 * amp.powi(4);
        let a2_pred = s.a2_2 * amp * amp + s.a2_4 * amp.powi(4);
        let a3_pred = s.a3_3 * amp.powi(3);
        assert!((w.c - c_pred).abs() <= 1e-6 * w.c.abs(), "c {} vs {c_pred}", w.c);
        assert!((w.coeffs[3] - a3_pred).abs() <= 0.05 * a3_pred.abs());
        errs.push(((w.c - c_pred).abs(), (w.coeffs[2] - a2_pred).abs()));
    }
    for ratio in [errs[0].0 / errs[1].0, errs[0].1 / errs[1].1] {
        assert!((40.0..100.0).contains(&ratio), "sixth-order remainder expected, ratio {ratio}");
    }
}

#[test]
fn kdv_speed_matches_fourth_order_stokes_expansion() {
    // closed form for KdV at k = 1: c = 5/6 + a²/4 + a⁴/64
    let s = stokes(kdv_c, 1.0);
    assert!((s.c2 - 0.25).abs() < 1e-15 && (s.c4 - 1.0 / 64.0).abs() < 1e-15);
    check_stokes(&EquationSpec::kdv(), kdv_c, 1.0, 0.1);
}

#[test]
fn whitham_speed_matches_fourth_order_stokes_expansion() {
    check_stokes(&EquationSpec::whitham(), whitham_c, 1.0, 0.05);
    check_stokes(&EquationSpec::whitham(), whitham_c, 0.7, 0.05);
}

#[test]
fn whitham_bifurcation_speed() {
    for u_bar in [0.0, 0.3] {
        let w = continue_family(&EquationSpec::whitham(), 1.0, u_bar, &[1e-3], &opts(32))
            .unwrap()
            .remove(0);
        let c_lin = u_bar + 1f64.tanh().sqrt();
        assert!((w.c - c_lin).abs() < 1e-5, "{} vs {c_lin}", w.c);
        assert!((1f64.tanh().sqrt() - 0.8726936).abs() < 1e-7);
    }
}

#[test]
fn kdv_family_is_resolved_and_momentum_monotone() {
    let amps: Vec<f64> = (1..=6).map(|i| 0.05 * i as f64).collect();
    let fam = continue_family(&EquationSpec::kdv(), 1.0, 0.0, &amps, &opts(64)).unwrap();
    let mut last_p = 0.0;
    for w in &fam {
        let r = profile_residual(w).unwrap();
        assert!(r.sup <= 1e-10, "{}", r.sup);
        assert!(r.mass_error.abs() < 1e-12 && r.momentum_error.abs() < 1e-12);
        let p = conserved_quantities(w).unwrap().momentum;
        assert!(p > last_p);
        last_p = p;
    }
}

#[test]
fn whitham_k2_decays_at_64_modes() {
    let w = wave(&EquationSpec::whitham(), 2.0, 0.1, 64);
    let amax = w.coeffs.iter().map(|a| a.abs()).fold(0.0, f64::max);
    assert!(w.coeffs[64].abs() <= 1e-10 * amax);
    let fine = wave(&EquationSpec::whitham(), 2.0, 0.1, 128);
    for j in 0..=64 {
        assert!((w.coeffs[j] - fine.coeffs[j]).abs() < 1e-12);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn doubling_resolution_leaves_parameters_unchanged() {
    for spec in [EquationSpec::kdv(), EquationSpec::whitham(), EquationSpec::fornberg_whitham()] {
        for k in [0.75, 1.25] {
            let w = wave(&spec, k, 0.1, 64);
            let p = w.point();
            let w2 = solve_wave(&spec, k, p.mass, p.momentum, &w, &opts(128)).unwrap();
            let p2 = w2.point();
            assert!(rel(w2.c, w.c) <= 1e-9);
            assert!(rel(w2.b, w.b) <= 1e-9);
            assert!((p2.mass - p.mass).abs() <= 1e-9 * (1.0 + p.mass.abs()));
            assert!(rel(p2.momentum, p.momentum) <= 1e-9);
        }
    }
}

#[test]
fn reparametrization_reproduces_the_wave() {
    let w = wave(&EquationSpec::ilw(1.0).unwrap(), 1.0, 0.1, 48);
    let mut seed = w.clone();
    seed.coeffs.iter_mut().for_each(|a| *a *= 1.02);
    seed.c += 1e-3;
    let p = w.point();
    let back = solve_wave(&w.spec, w.k, p.mass, p.momentum, &seed, &opts(48)).unwrap();
    for (a, b) in back.coeffs.iter().zip(&w.coeffs) {
        assert!((a - b).abs() <= 1e-9);
    }
}

/// `r_{n+1} ≤ C r_n²` on every step landing above the rounding floor, with at
/// least one such step starting from a small residual.
fn assert_quadratic(h: &[f64]) {
    const C: f64 = 1e3;
    const FLOOR: f64 = 1e-14;
    let steps: Vec<(f64, f64)> = h.windows(2).map(|w| (w[0], w[1])).filter(|s| s.1 > FLOOR).collect();
    for (r0, r1) in &steps {
        assert!(*r1 <= C * r0 * r0, "history {h:?}");
    }
    assert!(h.last().unwrap() <= &1e-11);
    if h.len() > 2 {
        assert!(steps.iter().any(|s| s.0 <= 1e-5) || h[h.len() - 2] <= 1e-5, "history {h:?}");
    }
}

#[test]
fn newton_converges_quadratically_from_stokes_seed() {
    for spec in [
        EquationSpec::kdv(),
        EquationSpec::whitham(),
        EquationSpec::kawahara(),
        EquationSpec::ilw(1.0).unwrap(),
    ] {
        for k in [0.75, 1.25] {
            let w = wave(&spec, k, 0.1, 48);
            let seed = stokes_seed(&spec, k, 0.0, 0.1, &opts(48)).unwrap();
            let p = w.point();
            let s = solve_wave(&spec, k, p.mass, p.momentum, &seed, &opts(48)).unwrap();
            assert!(s.residual_history.len() >= 3);
            assert_quadratic(&s.residual_history);
        }
    }
}

#[test]
fn derivative_inner_products() {
    for spec in [EquationSpec::kdv(), EquationSpec::whitham(), EquationSpec::kawahara()] {
        let w = wave(&spec, 1.1, 0.1, 48);
        let pj = parameter_derivatives(&w, &opts(48)).unwrap();
        let one = Fourier::from_cosine(&[1.0]);
        let phi = w.profile();
        let ip = |a: &Fourier, b: &[f64]| a.inner(&Fourier::from_cosine(b)).re;
        let tol = 1e-8;
        assert!((ip(&one, &pj.phi_m) - 1.0).abs() < tol);
        assert!((ip(&phi, &pj.phi_p) - 1.0).abs() < tol);
        assert!(ip(&one, &pj.phi_p).abs() < tol);
        assert!(ip(&phi, &pj.phi_m).abs() < tol);
        assert!(ip(&one, &pj.phi_k).abs() < tol);
        assert!(ip(&phi, &pj.phi_k).abs() < tol);
    }
}

#[test]
fn linearized_operator_maps_phi_m_to_affine_profile() {
    let w = wave(&EquationSpec::whitham(), 1.0, 0.1, 48);
    let pj = parameter_derivatives(&w, &opts(48)).unwrap();
    let ops = WaveOperators::new(&w).unwrap();
    for (dphi, db, dc) in [(&pj.phi_m, pj.b_m, pj.c_m), (&pj.phi_p, pj.b_p, pj.c_p)] {
        let r = ops
            .l_op(&Fourier::from_cosine(dphi))
            .add(&Fourier::from_cosine(&[db]))
            .add(&w.profile().scale((w.k * dc).into()));
        let sup = r.to_grid(2 * 48 + 2).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(sup <= 1e-8, "{sup}");
    }
}

/// Central differences of re-solved waves, `(X(p+h) − X(p−h))/2h`, minus the
/// bordered-solve derivative, as a max over coefficients and `(c, b)`.
fn fd_error(w: &TravelingWave, pj: &ParameterJacobian, which: usize, h: f64) -> f64 {
    let (spec, o, p) = (&w.spec, opts(w.modes()), w.point());
    let at = |s: f64| {
        let (k, m, q) = match which {
            0 => (w.k + s, p.mass, p.momentum),
            1 => (w.k, p.mass + s, p.momentum),
            _ => (w.k, p.mass, p.momentum + s),
        };
        solve_wave(spec, k, m, q, w, &o).unwrap()
    };
    let (plus, minus) = (at(h), at(-h));
    let (dphi, dc, db) = match which {
        0 => (&pj.phi_k, pj.c_k, pj.b_k),
        1 => (&pj.phi_m, pj.c_m, pj.b_m),
        _ => (&pj.phi_p, pj.c_p, pj.b_p),
    };
    let fd = |x: f64, y: f64| (x - y) / (2.0 * h);
    let mut err = ((fd(plus.c, minus.c) - dc).abs()).max((fd(plus.b, minus.b) - db).abs());
    for ((a, b), d) in plus.coeffs.iter().zip(&minus.coeffs).zip(dphi.iter()) {
        err = err.max((fd(*a, *b) - d).abs());
    }
    err
}

#[test]
fn derivatives_match_central_differences() {
    let w = wave(&EquationSpec::whitham(), 1.0, 0.1, 32);
    let pj = parameter_derivatives(&w, &opts(32)).unwrap();
    for which in 0..3 {
        let coarse = fd_error(&w, &pj, which, 1e-3);
        let fine = fd_error(&w, &pj, which, 1e-4);
        // second order once above the Newton-tolerance floor
        assert!(fine <= (coarse / 50.0).max(1e-8), "{which}: {coarse:e} -> {fine:e}");
        assert!(fine <= 1e-4, "{which}: {fine:e}");
    }
}

#[test]
fn conserved_quantities_agree_between_routes() {
    for (spec, u_bar) in [
        (EquationSpec::whitham(), 0.0),
        (EquationSpec::kdv().with_nonlinearity(Nonlinearity::cubic()), 0.5),
        (EquationSpec::kawahara(), 0.1),
    ] {
        let w = continue_family(&spec, 1.0, u_bar, &[0.1], &opts(48)).unwrap().remove(0);
        let a = conserved_quantities(&w).unwrap();
        let b = conserved_quadrature(&w).unwrap();
        for (x, y) in [(a.mass, b.mass), (a.momentum, b.momentum), (a.hamiltonian, b.hamiltonian)] {
            assert!((x - y).abs() <= 1e-11 * (1.0 + x.abs()), "{x} vs {y}");
        }
        assert!((a.mass - 2.0 * PI * u_bar).abs() < 1e-12);
    }
}

#[test]
fn low_resolution_large_wave_is_flagged() {
    let r = continue_family(&EquationSpec::whitham(), 1.0, 0.0, &[0.3], &opts(8));
    match r {
        Err(Error::ContinuationStalled { .. }) | Err(Error::UnderResolved { .. }) => {}
        other => panic!("unexpected {:?}", other.map(|f| f.len())),
    }
}

#[test]
fn newton_budget_exhaustion_carries_the_point() {
    let spec = EquationSpec::kdv();
    let w = wave(&spec, 1.0, 0.1, 32);
    let seed = stokes_seed(&spec, 1.0, 0.0, 0.1, &opts(32)).unwrap();
    let o = SolverOptions {
        max_iter: 1,
        ..opts(32)
    };
    let p = w.point();
    match solve_wave(&spec, 1.0, p.mass, p.momentum, &seed, &o) {
        Err(e @ Error::ConvergenceFailure { .. }) => {
            let q = e.point().unwrap();
            assert_eq!((q.k, q.mass, q.momentum), (1.0, p.mass, p.momentum));
        }
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn continuation_waves_solve_the_profile_equation(k in 0.6f64..1.6, a in 0.01f64..0.12) {
        let w = wave(&EquationSpec::whitham(), k, a, 32);
        prop_assert!(profile_residual(&w).unwrap().sup <= 1e-10);
        prop_assert!((w.amplitude() - a).abs() <= 1e-3 * a);
        let x = conserved_quantities(&w).unwrap();
        let y = conserved_quadrature(&w).unwrap();
        prop_assert!((x.hamiltonian - y.hamiltonian).abs() <= 1e-11 * (1.0 + x.hamiltonian.abs()));
    }
}
