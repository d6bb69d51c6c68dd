//! Compare the modulation matrix `D` with the projected matrix `D̂₀ − cI`
//! and with extrapolated branch slopes.

use modstab::bloch::{assemble_dhat0, auto_branch_slopes, matched_distance, verify_connection, Extrapolation};
use modstab::kernel::build_bases;
use modstab::symbols::EquationSpec;
use modstab::wave::{continue_family, parameter_derivatives, SolverOptions};

fn print(name: &str, m: &[[f64; 3]; 3]) {
    println!("{name}");
    for row in m {
        println!("  {:>14.8} {:>14.8} {:>14.8}", row[0], row[1], row[2]);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SolverOptions::default().with_modes(64);
    let w = continue_family(&EquationSpec::kawahara(), 0.9, 0.0, &[0.1], &opts)?.remove(0);
    let pj = parameter_derivatives(&w, &opts)?;
    let bases = build_bases(&w, &pj)?;

    let rep = verify_connection(&w, &pj, &bases, 1e-6)?;
    print("D", &rep.d);
    print("Dhat0 - cI", &rep.dhat_minus_c);
    println!("max entry error {:.2e} at {:?}: {}", rep.max_entry_error, rep.worst_entry, if rep.pass { "pass" } else { "fail" });

    let dh = assemble_dhat0(&w, &pj, &bases)?;
    let slopes = auto_branch_slopes(&w, &bases, Extrapolation::Even)?;
    println!("taus {:?}", slopes.taus);
    println!("eig(Dhat0)     {:?}", dh.eigs);
    println!("extrapolated   {:?}", slopes.extrapolated);
    println!("distance {:.2e}", matched_distance(&slopes.extrapolated, &dh.eigs));
    Ok(())
}
