//! Vector light-shift cross-sections of the two cesium ground manifolds
//! across the D1 line, and the beam calibrated at 12 GHz detuning.
//!
//! Run with `cargo run --example cross_sections`.

use spinsync::lightshift::{absorption_cross_section, lightshift_cross_sections, BeamParams};
use spinsync::species::cesium_defaults;
use spinsync::units::ghz_to_rad;

fn main() -> spinsync::Result<()> {
    let cs = cesium_defaults();
    println!(
        "{:>8} {:>12} {:>12} {:>12}",
        "nu_GHz", "sigma_a", "sigma_b", "absorption"
    );
    for k in 0..=16 {
        let nu = -4.5 + 2.0 * k as f64;
        let (sa, sb) = lightshift_cross_sections(&cs, ghz_to_rad(nu))?;
        let abs = absorption_cross_section(&cs, ghz_to_rad(nu));
        println!("{nu:>8.2} {sa:>12.5} {sb:>12.5} {abs:>12.3e}");
    }

    let beam = BeamParams::protection_default(&cs)?;
    let (sa, sb) = lightshift_cross_sections(&cs, beam.detuning)?;
    println!("\nprotection beam at +12 GHz: sigma_a/sigma_b = {:.4}", sa / sb);
    println!("the lower manifold is shifted {:.1}x more strongly", (sb / sa).abs());
    Ok(())
}
