//! Three-mode W state at resonance and its fidelity as the atoms decay.
//!
//! ```not_rust
//! cargo run --release --example w_state_fidelity
//! ```

use sagnac_qfc::design::{fidelity_vs_decay, solve_w_condition, w_state_config};
use sagnac_qfc::transmission_three_branch_resonant;

fn main() -> sagnac_qfc::Result<()> {
    let w = solve_w_condition(1.0, 2.0, 1.0)?;
    println!(
        "W condition (Gamma2 = 2, rabi1 = 1): rabi2 = rabi3 = {:.6}, Gamma3 = {}",
        w.rabi2, w.gamma3
    );
    let r = transmission_three_branch_resonant(&w_state_config(2.0, 1.0, 0.0)?)?;
    println!(
        "  |T|^2 = {:.9?}, F = {:.9}",
        r.probabilities(),
        r.fidelity_w()
    );

    let decays: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
    println!("\ngamma   F(Gamma2=1)  F(Gamma2=2)  F(Gamma2=4)  F(Gamma2=8)");
    let curves = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&g2| fidelity_vs_decay(&w_state_config(g2, 1.0, 0.0)?, &decays))
        .collect::<sagnac_qfc::Result<Vec<_>>>()?;
    for (i, gamma) in decays.iter().enumerate() {
        print!("{gamma:.2}");
        for c in &curves {
            print!("   {:10.6}", c[i].1);
        }
        println!();
    }
    Ok(())
}
