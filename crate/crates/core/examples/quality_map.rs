//! Quality factor by the synthesize-then-fit path on a coarse grid, next to
//! the eigenvalue prediction. Both paths use the same model, so agreement
//! checks the fitting pipeline rather than the physics.
//!
//! Run with `cargo run --release --example quality_map`.

use spinsync::scenario::Scenario;
use spinsync::signal::SignalParams;
use spinsync::sweep::{linspace, run_sweep, SweepGrid, SweepMethod};
use spinsync::units::mg_to_gauss;

fn main() -> spinsync::Result<()> {
    let scenario = Scenario::cesium_default()?;
    let b_values: Vec<f64> = linspace(0.2, 1.0, 5).into_iter().map(mg_to_gauss).collect();
    let p_values = linspace(0.0, 20.0, 5);
    let grid = |method| SweepGrid {
        scenario: scenario.clone(),
        b_values: b_values.clone(),
        p_values: p_values.clone(),
        method,
        seed_base: 3,
    };
    let eigen = run_sweep(&grid(SweepMethod::Eigen))?;
    let fit = run_sweep(&grid(SweepMethod::Fit(SignalParams::default())))?;

    let q = |c: &spinsync::sweep::CellRecord| {
        c.q.and_then(|q| q.value())
            .map_or("-".to_string(), |q| format!("{q:.2}"))
    };
    println!("{:>6} {:>6} {:>10} {:>10}", "B_mG", "P_mW", "Q_eigen", "Q_fit");
    for (e, f) in eigen.cells.iter().zip(&fit.cells) {
        println!("{:>6.2} {:>6.1} {:>10} {:>10}", e.b * 1e3, e.p, q(e), q(f));
    }
    Ok(())
}
