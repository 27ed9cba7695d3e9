//! The rubidium configuration shipped in `configs/rb87.conf`, evaluated at
//! the W condition in physical units.
//!
//! ```not_rust
//! cargo run --release --example rb87
//! ```

use sagnac_qfc::sweep::{execute, BaseParams, Command, KeyValues};

const CONF: &str = include_str!("../configs/rb87.conf");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kv = KeyValues::parse(CONF)?;
    let base = BaseParams::from_kv(&kv)?;
    let (cfg, _) = base.resolve()?;
    let unit_mhz = base.gamma[0];
    println!("Gamma1 = 2pi x {unit_mhz} MHz; normalized rates:");
    for (j, b) in cfg.branches().iter().enumerate() {
        println!(
            "  branch {}: Gamma = {:.3}, gamma = {:.3}, omega_j0 = {:.7e} Hz",
            j + 1,
            b.waveguide_rate,
            b.decay_rate,
            b.transition_frequency.unwrap_or(f64::NAN)
        );
    }

    let report = execute(Command::WState, &kv, 1)?;
    print!("{}", report.csv);
    for line in &report.summary {
        println!("{line}");
    }

    let mut scan = kv.clone();
    for (k, v) in [
        ("axis1", "delta"),
        ("axis1_min", "-48"),
        ("axis1_max", "48"),
        ("axis1_count", "9"),
    ] {
        scan.insert(k, v);
    }
    println!("\ndetuning scan, delta in 2pi MHz:");
    print!("{}", execute(Command::WState, &scan, 1)?.csv);
    Ok(())
}
