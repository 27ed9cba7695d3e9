//! Writes the input and output envelopes of one scattering event to CSV, in
//! both the frequency-mode and the even/odd (Sagnac) pictures.
//!
//! ```not_rust
//! cargo run --release --example envelope_dump -- envelopes.csv
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};

use sagnac_qfc::oracle::{integrate, mode_transform_lr_to_eo, PulseSpec, TimeGrid};
use sagnac_qfc::SystemConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "envelopes.csv".into());
    let cfg = SystemConfig::two_branch(2.0, 2.0, 2.0 * 2f64.sqrt(), 0.1)?;
    let pulse = PulseSpec::new(0.0, 0.2)?;
    let grid = TimeGrid::for_pulse(&cfg, &pulse)?;
    let state = integrate(&cfg, &pulse, &grid)?;

    let mut out = BufWriter::new(File::create(&path)?);
    state.write_csv(&mut out, 50)?;
    out.flush()?;
    println!("wrote {} ({} steps, every 50th kept)", path, grid.steps());

    let total = state.injected_probability();
    for j in 0..cfg.len() {
        println!(
            "  P(out {}) = {:.6}",
            j + 1,
            state.output_probability(j) / total
        );
    }
    println!("  P(decay) = {:.6}", state.decayed_probability() / total);
    println!("  balance residual = {:.2e}", state.conservation_residual());

    // a photon entering the left port splits evenly over the two loop modes
    let (even, odd) = mode_transform_lr_to_eo(1.0.into(), 0.0.into());
    println!("  left-port photon -> even {even:.6}, odd {odd:.6}");
    Ok(())
}
