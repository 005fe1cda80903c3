//! Synthesize `<S_x(t)>` without and with the protection beam, then fit
//! the traces with decaying sinusoids to read off the relaxation rate.
//!
//! Run with `cargo run --release --example protection_trace`.

use spinsync::lightshift::resonance_power;
use spinsync::scenario::Scenario;
use spinsync::signal::{fit_series, quality_factor, SignalParams};
use spinsync::units::mg_to_gauss;

fn main() -> spinsync::Result<()> {
    let sc = Scenario::cesium_default()?;
    let b = mg_to_gauss(0.43);
    let params = SignalParams {
        noise_sigma: 1e-4,
        ..SignalParams::default()
    };
    let p_star = resonance_power(&sc.species, &sc.beam, b)?;
    for (label, p) in [("beam off", 0.0), ("resonant beam", p_star)] {
        let trace = sc.simulate(b, p, &params, 7)?;
        let fit = fit_series(&trace, params.fit_components)?;
        println!("{label} (P = {p:.2} mW): {} samples", trace.len());
        for c in &fit.components {
            println!(
                "  A = {:.4}  gamma = {:.3} 1/s  omega = {:.2} rad/s",
                c.amplitude, c.gamma, c.omega
            );
        }
        let q = quality_factor(&fit).value().unwrap_or(f64::INFINITY);
        println!(
            "  Gamma = {:.3} 1/s, Q = {q:.2}, residual rms = {:.2e}",
            fit.gamma, fit.residual_rms
        );
    }
    Ok(())
}
