//! Dispersion symbols in the catalogue and their phase speeds.

use modstab::symbols::{EquationSpec, CATALOGUE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for entry in CATALOGUE {
        println!("{:<18} {}", entry.name, entry.formula);
    }
    println!();
    println!("{:>6} {:>12} {:>12} {:>12}", "q", "kdv", "whitham", "ilw(1)");
    let specs = [EquationSpec::kdv(), EquationSpec::whitham(), EquationSpec::ilw(1.0)?];
    for i in 0..=8 {
        let q = 0.25 * i as f64;
        let c: Vec<String> = specs
            .iter()
            .map(|s| s.phase_speed(q, 0).map(|v| format!("{v:>12.6}")))
            .collect::<Result<_, _>>()?;
        println!("{q:>6.2} {}", c.join(" "));
    }
    Ok(())
}
