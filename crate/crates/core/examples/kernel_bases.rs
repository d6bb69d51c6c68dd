//! Biorthogonal kernel bases of an ILW wave and the identity residuals.

use modstab::kernel::{build_bases, check_simple_kernel, verify_kernel_identities, KernelThresholds};
use modstab::symbols::EquationSpec;
use modstab::wave::{continue_family, parameter_derivatives, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SolverOptions::default().with_modes(48);
    let w = continue_family(&EquationSpec::ilw(2.0)?, 1.2, 0.0, &[0.1], &opts)?.remove(0);
    let pj = parameter_derivatives(&w, &opts)?;
    println!("c_k = {:.6}, c_M = {:.6}, c_P = {:.6}", pj.c_k, pj.c_m, pj.c_p);

    let bases = build_bases(&w, &pj)?;
    println!("gram <Psi_j, Phi_l>:");
    for row in bases.gram {
        println!("  {:>12.3e} {:>12.3e} {:>12.3e}", row[0], row[1], row[2]);
    }

    let rep = verify_kernel_identities(&w, &pj, &bases)?;
    for (name, r) in &rep.residuals {
        println!("{name:<36} {r:.2e}");
    }
    let simple = check_simple_kernel(&w, &pj, KernelThresholds::default())?;
    println!(
        "kernel of L: sigma_min/norm = {:.1e}, next = {:.1e}, alignment with phi' = {:.12}",
        simple.sigma_min / simple.norm,
        simple.sigma_next / simple.norm,
        simple.alignment
    );
    Ok(())
}
