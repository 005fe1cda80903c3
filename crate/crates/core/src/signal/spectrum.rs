use num_complex::Complex64;
use rustfft::FftPlanner;

use super::series::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    /// Symmetric Hann, `0.5 − 0.5 cos(2πn/(N−1))`.
    Hann,
}

impl Window {
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => {
                let denom = (n.max(2) - 1) as f64;
                (0..n)
                    .map(|k| 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / denom).cos())
                    .collect()
            }
        }
    }
}

/// One-sided magnitude spectrum from 0 Hz to Nyquist.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Hz.
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Width of one unpadded bin, `1/(N·dt)` Hz.
    pub bin_width: f64,
}

/// Interpolated local maximum of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Index of the discrete maximum.
    pub index: usize,
    /// Hz, refined by a parabola through the maximum and its neighbours.
    pub frequency: f64,
    pub magnitude: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Spacing of the (possibly padded) frequency grid, Hz.
    pub fn spacing(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            self.bin_width
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }

    fn interpolate(&self, k: usize) -> Peak {
        let m = &self.magnitudes;
        let (mut offset, mut mag) = (0.0, m[k]);
        if k > 0 && k + 1 < m.len() {
            let (l, c, r) = (m[k - 1], m[k], m[k + 1]);
            let denom = l - 2.0 * c + r;
            if denom < 0.0 {
                offset = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
                mag = c - 0.25 * (l - r) * offset;
            }
        }
        Peak {
            index: k,
            frequency: self.frequencies[k] + offset * self.spacing(),
            magnitude: mag,
        }
    }

    /// Global maximum, interpolated.
    pub fn peak(&self) -> Peak {
        let k = self
            .magnitudes
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > self.magnitudes[best] { i } else { best });
        self.interpolate(k)
    }

    /// Local maxima above `rel_threshold·max`, strongest first, separated by at
    /// least `min_separation` Hz from every stronger accepted peak.
    pub fn peaks(&self, rel_threshold: f64, min_separation: f64) -> Vec<Peak> {
        let m = &self.magnitudes;
        let floor = rel_threshold * self.max_magnitude();
        let mut candidates: Vec<Peak> = (0..m.len())
            .filter(|&k| {
                let left = k == 0 || m[k] > m[k - 1];
                let right = k + 1 == m.len() || m[k] >= m[k + 1];
                left && right && m[k] > floor && m[k] > 0.0
            })
            .map(|k| self.interpolate(k))
            .collect();
        candidates.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.index.cmp(&b.index)));
        let mut accepted: Vec<Peak> = Vec::new();
        for c in candidates {
            if accepted
                .iter()
                .all(|p| (p.frequency - c.frequency).abs() >= min_separation)
            {
                accepted.push(c);
            }
        }
        accepted
    }
}

/// Full complex DFT of the windowed, zero-padded trace (no normalization).
pub fn transform(series: &TimeSeries, window: Window, zero_pad: usize) -> Result<Vec<Complex64>> {
    series.validate()?;
    if zero_pad == 0 {
        return Err(Error::InvalidInput("zero-padding factor must be >= 1".into()));
    }
    let n = series.len();
    let n_fft = n * zero_pad;
    let w = window.weights(n);
    let mut buf: Vec<Complex64> = series
        .samples
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex64::new(x * w, 0.0))
        .collect();
    buf.resize(n_fft, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    Ok(buf)
}

/// Magnitude spectrum with an explicit window.
///
/// Magnitudes are scaled by `2/Σw`, so a steady cosine of amplitude `A` at a
/// bin center reads `A`.
pub fn spectrum_with(series: &TimeSeries, window: Window, zero_pad: usize) -> Result<Spectrum> {
    let x = transform(series, window, zero_pad)?;
    let n_fft = x.len();
    let norm = 2.0 / window.weights(series.len()).iter().sum::<f64>();
    let df = 1.0 / (n_fft as f64 * series.dt);
    let half = n_fft / 2;
    Ok(Spectrum {
        frequencies: (0..=half).map(|k| k as f64 * df).collect(),
        magnitudes: x[..=half].iter().map(|z| z.norm() * norm).collect(),
        bin_width: 1.0 / series.duration(),
    })
}

/// Hann-windowed magnitude spectrum with the given zero-padding factor.
pub fn fft_spectrum(series: &TimeSeries, zero_pad: usize) -> Result<Spectrum> {
    spectrum_with(series, Window::Hann, zero_pad)
}

/// Divide every spectrum by the largest magnitude found in the batch.
pub fn normalize_batch(spectra: &mut [Spectrum]) {
    let peak = spectra.iter().map(Spectrum::max_magnitude).fold(0.0, f64::max);
    if peak > 0.0 {
        for s in spectra.iter_mut() {
            s.magnitudes.iter_mut().for_each(|m| *m /= peak);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn tone(n: usize, dt: f64, f: f64, gamma: f64) -> TimeSeries {
        TimeSeries::new(
            dt,
            (0..n)
                .map(|k| {
                    let t = k as f64 * dt;
                    (-gamma * t).exp() * (TAU * f * t + 0.4).cos()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn bin_centered_cosine_fills_one_bin() {
        let n = 256;
        let dt = 1e-3;
        let s = TimeSeries::new(
            dt,
            (0..n).map(|k| 0.7 * (TAU * 20.0 * k as f64 / n as f64).cos()).collect(),
        )
        .unwrap();
        let sp = spectrum_with(&s, Window::Rectangular, 1).unwrap();
        for (k, m) in sp.magnitudes.iter().enumerate() {
            if k == 20 {
                assert!((m - 0.7).abs() < 1e-12);
            } else {
                assert!(*m < 1e-12, "bin {k}: {m}");
            }
        }
    }

    #[test]
    fn parseval_on_unwindowed_transform() {
        let s = tone(300, 1e-3, 47.3, 5.0);
        let x = transform(&s, Window::Rectangular, 1).unwrap();
        let time: f64 = s.samples.iter().map(|v| v * v).sum();
        let freq: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64;
        assert!((time - freq).abs() < 1e-10 * time);
    }

    #[test]
    fn axis_runs_from_zero_to_nyquist() {
        let s = tone(200, 5e-4, 100.0, 0.0);
        let sp = fft_spectrum(&s, 4).unwrap();
        assert_eq!(sp.frequencies[0], 0.0);
        assert!((sp.frequencies.last().unwrap() - 1000.0).abs() < 1e-9);
        assert!(sp.frequencies.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(sp.frequencies.len(), sp.magnitudes.len());
    }

    #[test]
    fn peak_location_accuracy() {
        let (n, dt) = (512, 1e-3);
        let bin = 1.0 / (n as f64 * dt);
        for f in [50.0, 50.3, 121.77, 200.5] {
            let sp = fft_spectrum(&tone(n, dt, f, 0.0), 1).unwrap();
            let p = sp.peak();
            assert!((sp.frequencies[p.index] - f).abs() <= bin);
            assert!((p.frequency - f).abs() <= 0.1 * bin, "f={f} got {}", p.frequency);
        }
    }

    #[test]
    fn batch_normalization_uses_common_factor() {
        let mut v = vec![
            fft_spectrum(&tone(128, 1e-3, 100.0, 0.0), 1).unwrap(),
            fft_spectrum(&tone(128, 1e-3, 100.0, 0.0).scaled(0.5), 1).unwrap(),
        ];
        normalize_batch(&mut v);
        assert!((v[0].max_magnitude() - 1.0).abs() < 1e-15);
        assert!((v[1].max_magnitude() - 0.5).abs() < 1e-12);
    }
}
