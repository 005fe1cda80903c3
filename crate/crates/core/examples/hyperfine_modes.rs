//! Eigenmodes of the hyperfine-Bloch system with and without the
//! protection beam: two independent precessions become one slow,
//! synchronized mode at resonance.
//!
//! Run with `cargo run --example hyperfine_modes`.

use spinsync::bloch::eigenmodes;
use spinsync::lightshift::resonance_power;
use spinsync::scenario::Scenario;
use spinsync::units::mg_to_gauss;

fn main() -> spinsync::Result<()> {
    let sc = Scenario::cesium_default()?;
    let b = mg_to_gauss(0.43);
    let p_star = resonance_power(&sc.species, &sc.beam, b)?;
    for p in [0.0, 0.5 * p_star, p_star] {
        let phys = sc.physics(b, p)?;
        let modes = eigenmodes(&phys.dynamics);
        println!(
            "P = {p:.2} mW  (omega_a = {:.1}, omega_b = {:.1} rad/s)",
            phys.omega_a, phys.omega_b
        );
        for (k, m) in modes.modes.iter().enumerate() {
            let v = m.vector;
            println!(
                "  mode {k}: rate {:>8.3} 1/s, frequency {:>9.3} rad/s, |v| = ({:.3}, {:.3})",
                m.rate(),
                m.frequency(),
                v[0].norm(),
                v[1].norm()
            );
        }
        println!(
            "  fundamental: Gamma = {:.3} 1/s, Q = {:.2}",
            modes.fundamental_rate,
            modes.fundamental_freq.abs() / modes.fundamental_rate
        );
    }
    Ok(())
}
