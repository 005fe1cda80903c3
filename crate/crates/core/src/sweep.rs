//! Evaluation over `(B, P)` grids: relaxation-rate and Q maps by either the
//! eigenvalue path or the synthesize-then-fit path, the overlay curves, and
//! spectrum waterfalls.
//!
//! The fit path runs on synthetic traces, so comparing its maps with the
//! eigenvalue maps is a model-against-model check of the analysis chain.

use std::io::Write;

use rayon::prelude::*;

use crate::bloch::eigenmodes;
use crate::error::{ensure_finite, Error, Result};
use crate::lightshift::{resonance_power, zeeman_shifts};
use crate::scenario::Scenario;
use crate::signal::{fft_spectrum, fit_series, normalize_batch, Quality, SignalParams, Spectrum};
use crate::species::bare_splittings;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMethod {
    /// Γ and ω̄ from the slowest eigenmode of the dynamics matrix.
    Eigen,
    /// Γ and ω̄ from a damped-sinusoid fit to a synthetic trace.
    Fit(SignalParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub scenario: Scenario,
    /// Fields, G; strictly increasing.
    pub b_values: Vec<f64>,
    /// Powers, mW; strictly increasing.
    pub p_values: Vec<f64>,
    pub method: SweepMethod,
    /// Cell `i` uses noise seed `seed_base ^ i`.
    pub seed_base: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub b: f64,
    pub p: f64,
    pub omega_a: Option<f64>,
    pub omega_b: Option<f64>,
    pub gamma: Option<f64>,
    pub omega_bar: Option<f64>,
    pub q: Option<Quality>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub b_values: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Row-major: all powers for the first field, then the next field.
    pub cells: Vec<CellRecord>,
    /// `(B, P*)` where the manifolds synchronize.
    pub resonance: Vec<(f64, f64)>,
    /// `(B, P)` where the lower-manifold frequency crosses zero.
    pub omega_b_zero: Vec<(f64, f64)>,
}

impl SweepResult {
    pub fn cell(&self, ib: usize, ip: usize) -> &CellRecord {
        &self.cells[ib * self.p_values.len() + ip]
    }

    pub fn row(&self, ib: usize) -> &[CellRecord] {
        let n = self.p_values.len();
        &self.cells[ib * n..(ib + 1) * n]
    }

    /// Index of the power with the smallest Γ in row `ib`.
    pub fn row_argmin_gamma(&self, ib: usize) -> Option<usize> {
        self.row(ib)
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.gamma.map(|g| (i, g)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn check_axis(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidInput(format!("{name} axis is empty")));
    }
    for v in values {
        ensure_finite(name, *v)?;
        if *v < 0.0 {
            return Err(Error::InvalidInput(format!("{name} values must be >= 0, got {v}")));
        }
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(format!("{name} axis must be strictly increasing")));
    }
    Ok(())
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        check_axis("field", &self.b_values)?;
        check_axis("power", &self.p_values)?;
        if let SweepMethod::Fit(params) = &self.method {
            params.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.b_values.len() * self.p_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn evaluate(&self, b: f64, p: f64, seed: u64) -> Result<CellRecord> {
        let cell = self.scenario.physics(b, p)?;
        let (gamma, omega_bar, converged) = match &self.method {
            SweepMethod::Eigen => {
                let m = eigenmodes(&cell.dynamics);
                (m.fundamental_rate, m.fundamental_freq, true)
            }
            SweepMethod::Fit(params) => {
                let series = self.scenario.simulate(b, p, params, seed)?;
                let fit = fit_series(&series, params.fit_components)?;
                (fit.gamma, fit.omega_bar, fit.converged)
            }
        };
        Ok(CellRecord {
            b,
            p,
            omega_a: Some(cell.omega_a),
            omega_b: Some(cell.omega_b),
            gamma: Some(gamma),
            omega_bar: Some(omega_bar),
            q: Some(Quality::from_rates(omega_bar, gamma)),
            converged,
            error: None,
        })
    }

    /// Evaluate cell `index` (row-major). Failures become part of the record.
    pub fn evaluate_cell(&self, index: usize) -> CellRecord {
        let n_p = self.p_values.len();
        let (b, p) = (self.b_values[index / n_p], self.p_values[index % n_p]);
        self.evaluate(b, p, self.seed_base ^ index as u64)
            .unwrap_or_else(|e| CellRecord {
                b,
                p,
                omega_a: None,
                omega_b: None,
                gamma: None,
                omega_bar: None,
                q: None,
                converged: false,
                error: Some(e.to_string()),
            })
    }
}

/// Evaluate every cell in parallel. Each cell depends only on its own inputs
/// and seed, so the result is independent of scheduling.
pub fn run_sweep(grid: &SweepGrid) -> Result<SweepResult> {
    grid.validate()?;
    let cells: Vec<CellRecord> = (0..grid.len()).into_par_iter().map(|i| grid.evaluate_cell(i)).collect();
    let sc = &grid.scenario;
    Ok(SweepResult {
        b_values: grid.b_values.clone(),
        p_values: grid.p_values.clone(),
        cells,
        resonance: resonance_curve(sc, &grid.b_values).unwrap_or_default(),
        omega_b_zero: omega_b_zero_curve(sc, &grid.b_values).unwrap_or_default(),
    })
}

/// `(B, P*(B))` for each field.
pub fn resonance_curve(scenario: &Scenario, b_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    b_values
        .iter()
        .map(|&b| Ok((b, resonance_power(&scenario.species, &scenario.beam, b)?)))
        .collect()
}

/// `(B, P)` with `ω_b(B, P) = 0`, for the fields where such a power exists.
pub fn omega_b_zero_curve(scenario: &Scenario, b_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    let slope = zeeman_shifts(&scenario.species, &scenario.beam_at(1.0))?.delta_b;
    let mut out = Vec::new();
    for &b in b_values {
        let (_, wb) = bare_splittings(&scenario.species, b)?;
        if slope != 0.0 {
            let p = -wb / slope;
            if p >= 0.0 && p.is_finite() {
                out.push((b, p));
            }
        }
    }
    Ok(out)
}

/// Spectra of synthetic traces at field `b_gauss` for each power, scaled by
/// one common factor: the largest magnitude in the batch.
pub fn spectrum_waterfall(
    scenario: &Scenario,
    b_gauss: f64,
    p_values: &[f64],
    params: &SignalParams,
    seed_base: u64,
) -> Result<Vec<Spectrum>> {
    params.validate()?;
    if p_values.is_empty() {
        return Err(Error::InvalidInput("power list is empty".into()));
    }
    let mut spectra = p_values
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            fft_spectrum(
                &scenario.simulate(b_gauss, p, params, seed_base ^ i as u64)?,
                params.zero_pad,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    normalize_batch(&mut spectra);
    Ok(spectra)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Map CSV. Failed cells leave the numeric fields empty; an unbounded Q is
/// written as the sentinel `-1`.
pub fn write_map_csv<W: Write + ?Sized>(result: &SweepResult, out: &mut W) -> Result<()> {
    writeln!(
        out,
        "b_gauss,p_mw,omega_a_rad_s,omega_b_rad_s,gamma_s,omega_bar_rad_s,q_angular,converged"
    )?;
    for c in &result.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.b,
            c.p,
            opt(c.omega_a),
            opt(c.omega_b),
            opt(c.gamma),
            opt(c.omega_bar),
            opt(c.q.map(Quality::exported)),
            c.converged
        )?;
    }
    Ok(())
}

pub fn write_overlay_csv<W: Write + ?Sized>(result: &SweepResult, out: &mut W) -> Result<()> {
    writeln!(out, "b_gauss,p_mw,curve")?;
    for (b, p) in &result.resonance {
        writeln!(out, "{b},{p},resonance")?;
    }
    for (b, p) in &result.omega_b_zero {
        writeln!(out, "{b},{p},omega_b_zero")?;
    }
    Ok(())
}

pub fn write_waterfall_csv<W: Write + ?Sized>(p_values: &[f64], spectra: &[Spectrum], out: &mut W) -> Result<()> {
    if p_values.len() != spectra.len() {
        return Err(Error::InvalidInput("one spectrum per power is required".into()));
    }
    writeln!(out, "p_mw,freq_hz,magnitude")?;
    for (p, s) in p_values.iter().zip(spectra) {
        for (f, m) in s.frequencies.iter().zip(&s.magnitudes) {
            writeln!(out, "{p},{f},{m}")?;
        }
    }
    Ok(())
}
