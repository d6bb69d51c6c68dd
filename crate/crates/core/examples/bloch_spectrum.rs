//! Eigenvalues of the Bloch operator near the origin for a stable and an
//! unstable Whitham wave.

use modstab::bloch::{assemble_bloch, nearest_eigenpairs, Form};
use modstab::symbols::EquationSpec;
use modstab::wave::{continue_family, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SolverOptions::default().with_modes(32);
    for k in [0.9, 1.4] {
        let w = continue_family(&EquationSpec::whitham(), k, 0.0, &[0.05], &opts)?.remove(0);
        println!("whitham k={k}");
        for tau in [0.005, 0.01, 0.02, 0.04] {
            let op = assemble_bloch(&w, tau, Form::Exact)?;
            let eigs = nearest_eigenpairs(&op, 3)?;
            let text: Vec<String> = eigs
                .iter()
                .map(|p| format!("{:+.3e}{:+.5e}i", p.lambda.re, p.lambda.im))
                .collect();
            println!("  tau={tau:<5} {}", text.join("  "));
        }
    }
    Ok(())
}
