//! Spectra of simulated traces at fixed field as the beam power rises:
//! the two manifold lines merge into a single, narrow, strong line.
//!
//! Run with `cargo run --release --example spectrum_waterfall`.

use spinsync::scenario::Scenario;
use spinsync::signal::SignalParams;
use spinsync::sweep::{linspace, spectrum_waterfall};
use spinsync::units::mg_to_gauss;

fn main() -> spinsync::Result<()> {
    let sc = Scenario::cesium_default()?;
    let powers = linspace(0.0, 15.0, 16);
    let spectra = spectrum_waterfall(&sc, mg_to_gauss(0.43), &powers, &SignalParams::default(), 0)?;
    println!("{:>6} {:>10}  peaks (Hz @ relative height)", "P_mW", "max");
    for (p, s) in powers.iter().zip(&spectra) {
        let peaks: Vec<String> = s
            .peaks(0.05, 3.0 * s.bin_width)
            .iter()
            .map(|pk| format!("{:.1} @ {:.2}", pk.frequency, pk.magnitude))
            .collect();
        println!("{p:>6.1} {:>10.3}  {}", s.max_magnitude(), peaks.join(", "));
    }
    Ok(())
}
