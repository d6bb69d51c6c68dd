//! Small-amplitude Whitham stability diagram in `k`, with the located
//! hyperbolic/elliptic boundary.

use modstab::cli::config::RunConfig;
use modstab::cli::sweep::sweep_stability_diagram;

const CONFIG: &str = r#"
[equation]
name = "whitham"

[grid]
k = { start = 0.8, stop = 1.6, steps = 17 }
amplitude = [0.01, 0.05]

[solver]
modes = 32
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::from_toml(CONFIG)?;
    let res = sweep_stability_diagram(&cfg)?;
    for r in &res.rows {
        println!(
            "a={:<5} k={:<5.2} {:<20} max Re lambda = {:>10.2e}  consistent = {:?}",
            r.amplitude.unwrap_or(f64::NAN),
            r.k,
            r.classification.as_deref().unwrap_or("failed"),
            r.max_re_lambda.unwrap_or(f64::NAN),
            r.consistent
        );
    }
    for b in &res.boundaries {
        println!(
            "a={:?}: {} -> {} in k in [{:.4}, {:.4}]",
            b.amplitude, b.below, b.above, b.k_lo, b.k_hi
        );
    }
    Ok(())
}
