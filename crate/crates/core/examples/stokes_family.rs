//! Continue a Whitham wave family in amplitude and print its invariants.

use modstab::symbols::EquationSpec;
use modstab::wave::{conserved_quantities, continue_family, profile_residual, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = EquationSpec::whitham();
    let opts = SolverOptions::default().with_modes(64);
    let amps: Vec<f64> = (1..=8).map(|i| 0.025 * i as f64).collect();
    let family = continue_family(&spec, 1.0, 0.0, &amps, &opts)?;
    println!("{:>6} {:>12} {:>14} {:>12} {:>10}", "a", "c", "b", "P", "residual");
    for w in &family {
        let q = conserved_quantities(w)?;
        let r = profile_residual(w)?;
        println!(
            "{:>6.3} {:>12.8} {:>14.6e} {:>12.6e} {:>10.1e}",
            w.amplitude(),
            w.c,
            w.b,
            q.momentum,
            r.sup
        );
    }
    Ok(())
}
