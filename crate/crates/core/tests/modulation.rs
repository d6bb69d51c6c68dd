//! Modulation matrix: two routes for row 2, characteristic speeds,
//! classification against the small-amplitude oracle.

mod common;

use modstab::modulation::*;
use modstab::symbols::EquationSpec;
use modstab::wave::*;

fn solved(spec: &EquationSpec, k: f64, a: f64, n: usize) -> (TravelingWave, ParameterJacobian) {
    let o = SolverOptions::default().with_modes(n);
    let w = continue_family(spec, k, 0.0, &[a], &o).unwrap().remove(0);
    let pj = parameter_derivatives(&w, &o).unwrap();
    (w, pj)
}

#[test]
fn first_row_is_the_wavenumber_conservation_law() {
    let (w, pj) = solved(&EquationSpec::whitham(), 1.0, 0.1, 32);
    let mm = assemble_modulation_matrix(&w, &pj, 1e-6).unwrap();
    let k = w.k;
    assert_eq!(mm.d[0], [-k * pj.c_k - w.c, -k * pj.c_m, -k * pj.c_p]);
}

#[test]
fn second_row_by_quadrature_agrees() {
    for spec in common::suite_specs() {
        let (w, pj) = solved(&spec, 1.1, 0.1, 48);
        let mm = assemble_modulation_matrix(&w, &pj, 1e-6).unwrap();
        let q = row2_quadrature(&w, &pj).unwrap();
        for j in 0..3 {
            assert!((mm.d[1][j] - q[j]).abs() <= 1e-10 * (1.0 + q[j].abs()), "{}", spec.name);
        }
    }
}

#[test]
fn d31_terms_sum_to_the_entry() {
    let (w, pj) = solved(&EquationSpec::kawahara(), 0.9, 0.1, 48);
    let mm = assemble_modulation_matrix(&w, &pj, 1e-6).unwrap();
    assert!((mm.d31_terms.d31() - mm.d[2][0]).abs() < 1e-15);
    assert!(mm.d31_terms.k2_phi.abs() > 1e-6);
}

#[test]
fn speeds_reproduce_trace_and_determinant() {
    for spec in common::suite_specs() {
        let (w, pj) = solved(&spec, 1.25, 0.1, 32);
        let mm = assemble_modulation_matrix(&w, &pj, 1e-6).unwrap();
        let s = mm.speeds;
        let tr = mm.d[0][0] + mm.d[1][1] + mm.d[2][2];
        assert!(((s[0] + s[1] + s[2]).re - tr).abs() < 1e-10 * (1.0 + tr.abs()));
        let p = s[0] * s[1] * s[2];
        assert!((p.re - det(&mm.d)).abs() < 1e-10 * (1.0 + p.norm()));
        assert!(p.im.abs() < 1e-10);
    }
}

#[test]
fn kdv_is_strictly_hyperbolic_across_wavenumbers() {
    for k in [0.5, 0.8, 1.2, 1.6, 2.0] {
        for a in [0.05, 0.2] {
            let (w, pj) = solved(&EquationSpec::kdv(), k, a, 48);
            let mm = assemble_modulation_matrix(&w, &pj, 1e-6).unwrap();
            assert_eq!(mm.classification, Classification::StrictlyHyperbolic, "k={k} a={a}");
        }
    }
}

#[test]
fn whitham_class_follows_the_index_oracle() {
    let kstar = common::whitham_kstar();
    assert!((kstar - 1.146).abs() < 1e-3);
    for k in [0.8, 0.95, 1.05, 1.25, 1.4, 1.6] {
        let (w, pj) = solved(&EquationSpec::whitham(), k, 0.01, 32);
        let mm = assemble_modulation_matrix(&w, &pj, 1e-6).unwrap();
        let stable = common::whitham_index(k) > 0.0;
        assert_eq!(mm.classification.is_hyperbolic(), stable, "k={k}: {}", mm.classification);
        assert_eq!(discriminant(&mm.d) >= 0.0, stable);
    }
}

#[test]
fn speeds_are_resolution_independent() {
    for spec in [EquationSpec::whitham(), EquationSpec::kawahara()] {
        let o = SolverOptions::default().with_modes(64);
        let w = continue_family(&spec, 1.25, 0.0, &[0.1], &o).unwrap().remove(0);
        let p = w.point();
        let o2 = SolverOptions::default().with_modes(128);
        let w2 = solve_wave(&spec, w.k, p.mass, p.momentum, &w, &o2).unwrap();
        let s1 = assemble_modulation_matrix(&w, &parameter_derivatives(&w, &o).unwrap(), 1e-6).unwrap().speeds;
        let s2 = assemble_modulation_matrix(&w2, &parameter_derivatives(&w2, &o2).unwrap(), 1e-6).unwrap().speeds;
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()));
        }
    }
}
