//! Slowest relaxation rate over the default field and power grid from the
//! eigenvalues of the dynamics matrix, with the resonance curve overlaid.
//! Writes `sweep_map.csv` and `sweep_overlay.csv` to the system temp dir.
//!
//! Run with `cargo run --release --example relaxation_map`.

use std::fs::File;
use std::io::BufWriter;

use spinsync::config::RunConfig;
use spinsync::sweep::{run_sweep, write_map_csv, write_overlay_csv, SweepGrid, SweepMethod};

fn main() -> spinsync::Result<()> {
    let cfg = RunConfig::default();
    let grid = SweepGrid {
        scenario: cfg.scenario()?,
        b_values: cfg.sweep.b_values(),
        p_values: cfg.sweep.p_values(),
        method: SweepMethod::Eigen,
        seed_base: cfg.seed_base,
    };
    let result = run_sweep(&grid)?;

    println!("{:>7} {:>10} {:>12} {:>10}", "B_mG", "P*_mW", "argmin_P", "Gamma_min");
    for (ib, &b) in grid.b_values.iter().enumerate().step_by(4) {
        let k = result.row_argmin_gamma(ib).expect("non-empty row");
        let cell = result.cell(ib, k);
        println!(
            "{:>7.3} {:>10.3} {:>12.3} {:>10.3}",
            b * 1e3,
            result.resonance[ib].1,
            cell.p,
            cell.gamma.unwrap_or(f64::NAN)
        );
    }

    let dir = std::env::temp_dir();
    write_map_csv(&result, &mut BufWriter::new(File::create(dir.join("sweep_map.csv"))?))?;
    write_overlay_csv(
        &result,
        &mut BufWriter::new(File::create(dir.join("sweep_overlay.csv"))?),
    )?;
    println!("wrote {}", dir.join("sweep_map.csv").display());
    Ok(())
}
