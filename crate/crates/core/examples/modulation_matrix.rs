//! Whitham modulation matrix of KdV and Whitham waves across wavenumbers.

use modstab::modulation::{assemble_modulation_matrix, discriminant};
use modstab::symbols::EquationSpec;
use modstab::wave::{continue_family, parameter_derivatives, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SolverOptions::default().with_modes(48);
    for spec in [EquationSpec::kdv(), EquationSpec::whitham()] {
        println!("{}", spec.name);
        for i in 0..=6 {
            let k = 0.8 + 0.1 * i as f64;
            let w = continue_family(&spec, k, 0.0, &[0.02], &opts)?.remove(0);
            let pj = parameter_derivatives(&w, &opts)?;
            let mm = assemble_modulation_matrix(&w, &pj, 1e-6)?;
            let speeds: Vec<String> = mm.speeds.iter().map(|s| format!("{:.5}{:+.5}i", s.re, s.im)).collect();
            println!(
                "  k={k:.1}  disc={:>11.3e}  {:<20} speeds [{}]",
                discriminant(&mm.d),
                mm.classification.as_str(),
                speeds.join(", ")
            );
        }
    }
    Ok(())
}
