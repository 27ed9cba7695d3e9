//! Solving for the drive strengths that produce a chosen output distribution.
//!
//! ```not_rust
//! cargo run --release --example design_targets
//! ```

use sagnac_qfc::design::{solve_target_amplitudes, TargetDistribution};
use sagnac_qfc::{BranchParams, SystemConfig};

fn show(label: &str, cfg: &SystemConfig, weights: Vec<f64>, delta: f64) -> sagnac_qfc::Result<()> {
    let target = TargetDistribution::new(weights)?;
    match solve_target_amplitudes(cfg, &target, delta) {
        Ok(sol) => println!(
            "{label}: rabi_j/rabi1 = {:.9?}, |T|^2 = {:.9?}, residual = {:.1e}, {} iterations",
            sol.rabi_ratios,
            sol.achieved.probabilities(),
            sol.residual,
            sol.iterations
        ),
        Err(e) => println!("{label}: {e}"),
    }
    Ok(())
}

fn main() -> sagnac_qfc::Result<()> {
    let two = SystemConfig::from_branches(vec![
        BranchParams::lossless(1.0, 1.0),
        BranchParams::lossless(1.0, 0.0),
    ])?;
    show("50/50", &two, vec![0.5, 0.5], 0.0)?;
    show("full conversion", &two, vec![0.0, 1.0], 0.0)?;
    show("25/75 at delta = 0.5", &two, vec![0.25, 0.75], 0.5)?;

    let three = SystemConfig::from_branches(vec![
        BranchParams::lossless(1.0, 1.0),
        BranchParams::lossless(2.0, 0.0),
        BranchParams::lossless(2.0, 0.0),
    ])?;
    show("W", &three, vec![1.0 / 3.0; 3], 0.0)?;
    show("0.2/0.5/0.3", &three, vec![0.2, 0.5, 0.3], 0.0)?;

    let four = SystemConfig::from_branches(
        std::iter::once(BranchParams::lossless(1.0, 1.0))
            .chain((0..3).map(|_| BranchParams::lossless(1.5, 0.0)))
            .collect(),
    )?;
    show("four-mode uniform", &four, vec![0.25; 4], 0.0)?;

    show("over unit flux", &two, vec![0.6, 0.6], 0.0).or_else(|e| {
        println!("over unit flux: {e}");
        Ok(())
    })
}
