//! The resonance power at which the light shift equalizes the two
//! manifold splittings, as a function of the bias field.
//!
//! Run with `cargo run --example resonance`.

use spinsync::lightshift::{resonance_field, resonance_power, zeeman_shifts};
use spinsync::scenario::Scenario;
use spinsync::units::{gauss_to_mg, mg_to_gauss};

fn main() -> spinsync::Result<()> {
    let sc = Scenario::cesium_default()?;
    println!("{:>6} {:>10} {:>12} {:>12}", "B_mG", "P*_mW", "omega_a", "omega_b");
    for k in 1..=10 {
        let b = mg_to_gauss(0.15 * k as f64);
        let p = resonance_power(&sc.species, &sc.beam, b)?;
        let (wa, wb) = sc.effective_frequencies(b, p)?;
        println!("{:>6.2} {p:>10.3} {wa:>12.3} {wb:>12.3}", gauss_to_mg(b));
    }

    let beam = sc.beam_at(9.7);
    let shifts = zeeman_shifts(&sc.species, &beam)?;
    println!(
        "\nat 9.7 mW: delta_a = {:.1} rad/s, delta_b = {:.1} rad/s, R_P = {:.2} 1/s, resonant field {:.3} mG",
        shifts.delta_a,
        shifts.delta_b,
        shifts.scatter_rate,
        gauss_to_mg(resonance_field(&sc.species, &beam)?)
    );
    Ok(())
}
