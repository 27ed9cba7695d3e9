//! Integrates the amplitude equations for a narrow Gaussian photon and
//! compares the extracted amplitudes with the steady-state solution.
//!
//! ```not_rust
//! cargo run --release --example oracle_crosscheck
//! ```

use sagnac_qfc::oracle::{extract_transmission, integrate, PulseSpec, TimeGrid};
use sagnac_qfc::{transmission_general, SystemConfig};

fn main() -> sagnac_qfc::Result<()> {
    let cfg = SystemConfig::two_branch(2.0, 2.0, 2.0 * 2f64.sqrt(), 0.2)?;
    let sigma = 0.01;
    println!("delta   |T_oracle - T_analytic|   P_out/P_in   decayed");
    for delta in [-2.0, -1.0, 0.0, 0.5, 1.5] {
        let pulse = PulseSpec::new(delta, sigma)?;
        let grid = TimeGrid::for_pulse(&cfg, &pulse)?;
        let state = integrate(&cfg, &pulse, &grid)?;
        let oracle = extract_transmission(&state, delta)?;
        let analytic = transmission_general(delta, &cfg)?;
        let err = oracle
            .iter()
            .zip(analytic.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let out: f64 = (0..cfg.len()).map(|j| state.output_probability(j)).sum();
        println!(
            "{delta:5.1}   {err:22.3e}   {:10.6}   {:.6}  ({} steps)",
            out / state.injected_probability(),
            state.decayed_probability() / state.injected_probability(),
            grid.steps()
        );
    }
    Ok(())
}
