//! Rapid spin-exchange limit: the synchronized precession slows by 4/11 and
//! a frequency mismatch broadens the line quadratically. Compares the exact
//! slowest eigenvalue with the asymptotic forms as R_se grows.
//!
//! Run with `cargo run --example serf_regime`.

use spinsync::bloch::{
    build_relaxation_matrix, dynamics_matrix, eigenmodes, serf_asymptotics, RelaxationModel, RelaxationRates,
};
use spinsync::species::cesium_defaults;

fn main() -> spinsync::Result<()> {
    let cs = cesium_defaults();
    let model = RelaxationModel::for_species(&cs);
    let n = model.slow_direction();
    println!(
        "slowing factor {:.4}, quadratic coefficient {:.4}",
        n[0] - n[1],
        model.quadratic_coefficient()
    );
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10}",
        "R_se", "Gamma", "Gamma_asym", "omega", "omega_asym"
    );
    for r_se in [170.0, 1.7e3, 1.7e4, 1.7e5] {
        let rates = RelaxationRates::new(r_se, 85.0, 10.0, 0.0);
        let r = build_relaxation_matrix(&rates, &cs)?;
        // bare field: the two manifolds precess in opposite senses
        let w = 0.02 * r_se;
        let exact = eigenmodes(&dynamics_matrix(&r, w, -w));
        let asym = serf_asymptotics(&rates, &model, w, -w)?;
        println!(
            "{r_se:>8.0} {:>10.3} {:>10.3} {:>10.2} {:>10.2}",
            exact.fundamental_rate, asym.gamma, exact.fundamental_freq, asym.omega_bar
        );
    }
    Ok(())
}
