use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bloch::{observable_sx, propagator, DynamicsMatrix, TransverseState};
use crate::error::{ensure_finite, Error, Result};
use crate::rng;
use crate::species::AlkaliSpecies;

pub const MIN_SAMPLES: usize = 16;

/// A uniformly sampled `⟨S_x(tₖ)⟩` trace starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Sample interval, s.
    pub dt: f64,
    pub samples: Vec<f64>,
    /// Noise stream used during synthesis.
    pub seed: u64,
    /// Standard deviation of the added white Gaussian noise.
    pub noise_sigma: f64,
}

impl TimeSeries {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        let s = TimeSeries {
            dt,
            samples,
            seed: 0,
            noise_sigma: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "sample interval must be positive, got {}",
                self.dt
            )));
        }
        if self.samples.len() < MIN_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "a trace needs at least {MIN_SAMPLES} samples, got {}",
                self.samples.len()
            )));
        }
        if let Some(k) = self.samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {k} is not finite")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total span `N·dt`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| self.time(k))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TimeSeries {
            samples: self.samples.iter().map(|x| x * factor).collect(),
            ..self.clone()
        }
    }
}

/// Sampling and noise settings for synthetic traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalParams {
    /// Sample interval, ms.
    #[serde(default = "SignalParams::default_dt_ms")]
    pub dt_ms: f64,
    /// Record length, s.
    #[serde(default = "SignalParams::default_duration_s")]
    pub duration_s: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Zero-padding factor for spectra.
    #[serde(default = "SignalParams::default_zero_pad")]
    pub zero_pad: usize,
    /// Number of decaying sinusoids fitted per trace (1 or 2).
    #[serde(default = "SignalParams::default_fit_components")]
    pub fit_components: usize,
}

impl SignalParams {
    fn default_dt_ms() -> f64 {
        0.2
    }
    fn default_duration_s() -> f64 {
        0.35
    }
    fn default_zero_pad() -> usize {
        4
    }
    fn default_fit_components() -> usize {
        2
    }

    pub fn dt(&self) -> f64 {
        self.dt_ms * 1e-3
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("dt_ms", self.dt_ms)?;
        ensure_finite("duration_s", self.duration_s)?;
        if self.dt_ms.is_nan() || self.dt_ms <= 0.0 {
            return Err(Error::InvalidInput("dt_ms must be positive".into()));
        }
        if self.duration_s < MIN_SAMPLES as f64 * self.dt() {
            return Err(Error::InvalidInput(format!(
                "duration {} s is shorter than {MIN_SAMPLES} samples",
                self.duration_s
            )));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidInput("noise_sigma must be finite and >= 0".into()));
        }
        if self.zero_pad == 0 {
            return Err(Error::InvalidInput("zero_pad must be >= 1".into()));
        }
        if !(1..=2).contains(&self.fit_components) {
            return Err(Error::InvalidInput("fit_components must be 1 or 2".into()));
        }
        Ok(())
    }
}

impl Default for SignalParams {
    fn default() -> Self {
        SignalParams {
            dt_ms: Self::default_dt_ms(),
            duration_s: Self::default_duration_s(),
            noise_sigma: 0.0,
            zero_pad: Self::default_zero_pad(),
            fit_components: Self::default_fit_components(),
        }
    }
}

/// Sample `⟨S_x(k·dt)⟩` for `k = 0 … ⌊duration/dt⌋ − 1` and add seeded noise.
///
/// Each sample is evaluated from the closed-form propagator at its own time,
/// so there is no step-to-step error accumulation. Noise uses
/// [`rng::normal`] with the given seed whenever `noise_sigma > 0`.
pub fn synthesize_signal(
    a: &DynamicsMatrix,
    state0: &TransverseState,
    species: &AlkaliSpecies,
    duration: f64,
    dt: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<TimeSeries> {
    ensure_finite("duration", duration)?;
    ensure_finite("dt", dt)?;
    ensure_finite("noise_sigma", noise_sigma)?;
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if duration < MIN_SAMPLES as f64 * dt {
        return Err(Error::InvalidInput(format!(
            "duration {duration} s must cover at least {MIN_SAMPLES} samples of {dt} s"
        )));
    }
    if noise_sigma < 0.0 {
        return Err(Error::InvalidInput("noise_sigma must be >= 0".into()));
    }
    let n = (duration / dt * (1.0 + 1e-12)).floor() as usize;
    let x0 = state0.as_vector();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let u = propagator(a, k as f64 * dt)?;
        let mut sx = observable_sx(&TransverseState::from_vector(u * x0), species);
        if noise_sigma > 0.0 {
            sx += noise_sigma * rng::normal(seed, k as u64);
        }
        samples.push(sx);
    }
    let series = TimeSeries {
        dt,
        samples,
        seed,
        noise_sigma,
    };
    series.validate()?;
    Ok(series)
}

/// Write the trace as `t_s,sx` rows. Values use shortest round-trip formatting.
pub fn write_trace_csv<W: Write + ?Sized>(series: &TimeSeries, out: &mut W) -> Result<()> {
    writeln!(out, "t_s,sx")?;
    for (t, x) in series.times().zip(&series.samples) {
        writeln!(out, "{t},{x}")?;
    }
    Ok(())
}

/// Read a `t_s,sx` trace. Times must be uniformly spaced and start at zero.
pub fn read_trace_csv<R: BufRead>(input: R) -> Result<TimeSeries> {
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("t_s")) {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.map(str::trim)
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected two columns", lineno + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))
        };
        times.push(parse(cols.next())?);
        samples.push(parse(cols.next())?);
        if cols.next().is_some() {
            return Err(Error::InvalidInput(format!(
                "line {}: expected two columns",
                lineno + 1
            )));
        }
    }
    if times.len() < 2 {
        return Err(Error::InvalidInput("trace has fewer than two rows".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times[0].abs() > 1e-9 * dt.abs().max(1e-300) {
        return Err(Error::InvalidInput("trace must start at t = 0".into()));
    }
    for (k, t) in times.iter().enumerate() {
        if (t - k as f64 * dt).abs() > 1e-6 * dt.abs() {
            return Err(Error::InvalidInput(format!("row {} breaks uniform sampling", k + 1)));
        }
    }
    TimeSeries::new(dt, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{build_relaxation_matrix, dynamics_matrix, eigenmodes, RelaxationModel, RelaxationRates};
    use crate::species::{cesium_defaults, larmor_frequency};
    use num_complex::Complex64;

    #[test]
    fn pure_precession_is_quarter_amplitude_cosine() {
        let cs = cesium_defaults();
        let w = 2.0 * std::f64::consts::PI * 37.0;
        let a = DynamicsMatrix::identity() * Complex64::new(0.0, -w);
        let s = synthesize_signal(&a, &TransverseState::real(1.0, -1.0), &cs, 0.1, 1e-4, 0.0, 0).unwrap();
        assert_eq!(s.len(), 1000);
        for (k, x) in s.samples.iter().enumerate() {
            assert!((x - 0.25 * (w * k as f64 * 1e-4).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn noise_is_seeded() {
        let cs = cesium_defaults();
        let a = DynamicsMatrix::identity() * Complex64::new(-5.0, -100.0);
        let s0 = TransverseState::real(1.0, -1.0);
        let x = synthesize_signal(&a, &s0, &cs, 0.01, 1e-4, 0.1, 9).unwrap();
        let y = synthesize_signal(&a, &s0, &cs, 0.01, 1e-4, 0.1, 9).unwrap();
        let z = synthesize_signal(&a, &s0, &cs, 0.01, 1e-4, 0.1, 10).unwrap();
        assert_eq!(x, y);
        assert_ne!(x.samples, z.samples);
    }

    #[test]
    fn resonant_trace_decays_at_fundamental_rate() {
        let cs = cesium_defaults();
        let model = RelaxationModel::for_species(&cs);
        let r = build_relaxation_matrix(&RelaxationRates::CESIUM_CELL, &cs).unwrap();
        let w = larmor_frequency(&cs, 0.43e-3).unwrap();
        let a = dynamics_matrix(&r, w, w);
        let gamma = eigenmodes(&a).fundamental_rate;
        let s = synthesize_signal(&a, &TransverseState::spin_temperature(&model), &cs, 0.35, 2e-4, 0.0, 0).unwrap();
        // envelope = |F₊ᵃ − F₊ᵇ|/8; compare late-time peak ratios with e^{−Γt}
        let env = |t: f64| {
            let u = propagator(&a, t).unwrap() * TransverseState::spin_temperature(&model).as_vector();
            (u[0] - u[1]).norm()
        };
        let ratio = env(0.3) / env(0.2);
        assert!((ratio.ln() / -0.1 - gamma).abs() < 0.05);
        assert!((gamma - 12.6).abs() < 0.1);
        assert!(s.samples[0] > 0.0);
    }

    #[test]
    fn invalid_durations() {
        let cs = cesium_defaults();
        let a = DynamicsMatrix::identity();
        let s0 = TransverseState::real(1.0, 0.0);
        assert!(synthesize_signal(&a, &s0, &cs, 0.0, 1e-3, 0.0, 0).is_err());
        assert!(synthesize_signal(&a, &s0, &cs, 0.015, 1e-3, 0.0, 0).is_err());
        assert!(synthesize_signal(&a, &s0, &cs, 1.0, 0.0, 0.0, 0).is_err());
        assert!(synthesize_signal(&a, &s0, &cs, 0.016, 1e-3, 0.0, 0).is_ok());
    }

    #[test]
    fn trace_csv_round_trip() {
        let s = TimeSeries::new(2e-4, (0..100).map(|k| (k as f64 * 0.37).sin() / 3.0).collect()).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&s, &mut buf).unwrap();
        let back = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(back.samples, s.samples);
        assert!((back.dt - s.dt).abs() < 1e-15);
        assert!(read_trace_csv("t_s,sx\n0,1\n1,2\n3,4\n".as_bytes()).is_err());
        assert!(read_trace_csv("t_s,sx\n0,1\n".as_bytes()).is_err());
    }
}
