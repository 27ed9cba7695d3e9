//! Resonant frequency conversion and its robustness to atomic decay.
//!
//! ```not_rust
//! cargo run --release --example perfect_conversion
//! ```

use sagnac_qfc::design::{check_perfect_conversion, conversion_detunings};
use sagnac_qfc::{transmission_two_branch, SystemConfig};

fn main() -> sagnac_qfc::Result<()> {
    let rabi2 = 2.0 * 2f64.sqrt();
    for decay in [0.0, 0.1, 0.2, 0.5] {
        let cfg = SystemConfig::two_branch(2.0, 2.0, rabi2, decay)?;
        let r = transmission_two_branch(0.0, &cfg)?;
        println!(
            "decay = {decay:.1}: |T1|^2 = {:.6}  |T2|^2 = {:.6}  P_loss = {:.6}",
            r.probability(0),
            r.probability(1),
            r.loss()
        );
    }

    println!("\ndelta    |T1|^2    |T2|^2    P_loss   (decay = 0.2)");
    let cfg = SystemConfig::two_branch(2.0, 2.0, rabi2, 0.2)?;
    for k in -6..=6 {
        let delta = k as f64 * 0.5;
        let r = transmission_two_branch(delta, &cfg)?;
        println!(
            "{delta:5.1}  {:8.5}  {:8.5}  {:8.5}",
            r.probability(0),
            r.probability(1),
            r.loss()
        );
    }

    // Off resonance, the perfect-conversion condition has roots at Δ₁ = ±1 here.
    let cfg = SystemConfig::two_branch(1.0, 1.0, 1.0, 0.0)?;
    let roots = conversion_detunings(&cfg, 1e-12)?;
    println!("\nGamma2 = rabi1 = rabi2 = 1: full conversion at delta = {roots:?}");
    for &d in &roots {
        let res = check_perfect_conversion(d, &cfg)?;
        let t2 = transmission_two_branch(d, &cfg)?.amplitude(1);
        println!(
            "  delta = {d:+.1}: T2 = {t2:.6}, residuals = ({:.1e}, {:.1e})",
            res.residual_a, res.residual_b
        );
    }
    Ok(())
}
