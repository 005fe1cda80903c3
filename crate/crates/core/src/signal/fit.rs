use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::series::TimeSeries;
use super::spectrum::{spectrum_with, Window};
use crate::error::{Error, Result};

/// Convergence threshold on the relative decrease of the objective.
pub const REL_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 500;

const GUESS_MIN_SAMPLES: usize = 64;
const GUESS_ZERO_PAD: usize = 8;
/// Half width at half maximum of the Hann main lobe, in unpadded bins.
const HANN_HALF_WIDTH_BINS: f64 = 1.0;
/// Spectral peaks weaker than this fraction of the strongest are ignored.
const PEAK_THRESHOLD: f64 = 0.05;
/// Components whose RMS contribution over the record falls below this
/// fraction of the largest are dropped. Contribution rather than amplitude
/// matters because near ω = 0 a large `A` with `θ ≈ ±π/2` is a small term.
const PRUNE_FRACTION: f64 = 1e-3;
/// Objective small enough, relative to `Σy²`, to count as an exact fit.
const EXACT_FIT: f64 = 1e-24;

/// One term `A e^{−γt} cos(ωt + θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayComponent {
    pub amplitude: f64,
    /// s⁻¹.
    pub gamma: f64,
    /// rad/s.
    pub omega: f64,
    /// rad, in `(−π, π]`.
    pub phase: f64,
}

impl DecayComponent {
    pub fn new(amplitude: f64, gamma: f64, omega: f64, phase: f64) -> Self {
        DecayComponent {
            amplitude,
            gamma,
            omega,
            phase,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-self.gamma * t).exp() * (self.omega * t + self.phase).cos()
    }

    /// Equivalent term with `A ≥ 0`, `ω ≥ 0` and `θ ∈ (−π, π]`.
    pub fn canonical(self) -> Self {
        let (mut a, mut w, mut th) = (self.amplitude, self.omega, self.phase);
        if a < 0.0 {
            a = -a;
            th += PI;
        }
        if w < 0.0 {
            w = -w;
            th = -th;
        }
        th = th.rem_euclid(TAU);
        if th > PI {
            th -= TAU;
        }
        DecayComponent {
            amplitude: a,
            gamma: self.gamma,
            omega: w,
            phase: th,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFitResult {
    /// Sorted by γ ascending; equal γ puts the smaller |ω| first.
    pub components: Vec<DecayComponent>,
    pub residual_rms: f64,
    /// Γ: the smallest fitted decay rate.
    pub gamma: f64,
    /// ω̄: frequency of the component with rate Γ.
    pub omega_bar: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl DecayFitResult {
    pub fn model(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.eval(t)).sum()
    }
}

/// `Q = ω̄/Γ` in the angular convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quality {
    Finite(f64),
    /// Γ = 0: no decay within numerical resolution.
    Unbounded,
}

impl Quality {
    /// Sentinel written to files for an unbounded Q.
    pub const SENTINEL: f64 = -1.0;

    pub fn from_rates(omega_bar: f64, gamma: f64) -> Self {
        if gamma > 0.0 {
            Quality::Finite(omega_bar.abs() / gamma)
        } else {
            Quality::Unbounded
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Quality::Finite(q) => Some(q),
            Quality::Unbounded => None,
        }
    }

    /// Value for export: the angular Q, or [`Quality::SENTINEL`].
    pub fn exported(self) -> f64 {
        self.value().unwrap_or(Self::SENTINEL)
    }

    /// Visible precession cycles `Q/2π`, or the sentinel.
    pub fn cycles_exported(self) -> f64 {
        self.value().map_or(Self::SENTINEL, |q| q / TAU)
    }
}

pub fn quality_factor(fit: &DecayFitResult) -> Quality {
    Quality::from_rates(fit.omega_bar, fit.gamma)
}

/// Half width at half maximum of the peak at `k`, in Hz, from the nearer side
/// that actually falls below half height.
fn half_width(freqs: &[f64], mags: &[f64], k: usize) -> Option<f64> {
    let half = 0.5 * mags[k];
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = k;
        for j in range {
            if mags[j] > mags[prev] {
                return None;
            }
            if mags[j] <= half {
                let frac = (mags[prev] - half) / (mags[prev] - mags[j]);
                return Some((freqs[prev] + frac * (freqs[j] - freqs[prev]) - freqs[k]).abs());
            }
            prev = j;
        }
        None
    };
    let right = crossing(&mut (k + 1..mags.len()));
    let left = crossing(&mut (0..k).rev());
    match (left, right) {
        (Some(l), Some(r)) => Some(l.min(r)),
        (l, r) => l.or(r),
    }
}

/// Spectral initialization: up to two peaks of the Hann-windowed, zero-padded
/// spectrum, each turned into `(A, γ, ω, θ)`.
///
/// ω comes from parabolic interpolation of the peak, γ from its half width
/// after removing the window's own main-lobe width (a Lorentzian magnitude
/// falls to half at `√3·γ`), and A, θ from the windowed projection onto
/// `e^{−γt}e^{iωt}`.
pub fn initial_guess(series: &TimeSeries) -> Result<Vec<DecayComponent>> {
    series.validate()?;
    if series.len() < GUESS_MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "initial guess needs at least {GUESS_MIN_SAMPLES} samples, got {}",
            series.len()
        )));
    }
    if series.samples.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateInput("trace is identically zero".into()));
    }
    let sp = spectrum_with(series, Window::Hann, GUESS_ZERO_PAD)?;
    let bin = sp.bin_width;
    let peaks = sp.peaks(PEAK_THRESHOLD, 3.0 * bin);
    let weights = Window::Hann.weights(series.len());
    let floor = 0.25 * bin;
    let mut out = Vec::new();
    for p in peaks.iter().take(2) {
        let hw = half_width(&sp.frequencies, &sp.magnitudes, p.index).unwrap_or(HANN_HALF_WIDTH_BINS * bin);
        let excess = (hw * hw - (HANN_HALF_WIDTH_BINS * bin).powi(2)).max(floor * floor);
        let gamma = TAU * excess.sqrt() / 3f64.sqrt();
        // ω = 0 is a saddle of the objective (the sin-quadrature and ω gradients
        // both vanish there), so sub-bin peaks start slightly off zero
        let omega = TAU * p.frequency.max(floor);
        let mut proj = Complex64::new(0.0, 0.0);
        let mut norm = 0.0;
        for (k, (&x, &w)) in series.samples.iter().zip(&weights).enumerate() {
            let t = series.time(k);
            proj += Complex64::from_polar(x * w, -omega * t);
            norm += w * (-gamma * t).exp();
        }
        out.push(DecayComponent::new(2.0 * proj.norm() / norm, gamma, omega, proj.arg()).canonical());
    }
    if out.is_empty() {
        return Err(Error::DegenerateInput("no spectral peak found".into()));
    }
    Ok(out)
}

/// Parameter vector layout: `(c, s, γ, ω)` per component with
/// `c = A cos θ`, `s = A sin θ`, so the model is `e^{−γt}(c cos ωt − s sin ωt)`.
struct Problem<'a> {
    series: &'a TimeSeries,
    n: usize,
}

impl Problem<'_> {
    fn objective(&self, p: &[f64]) -> f64 {
        self.series
            .samples
            .iter()
            .enumerate()
            .map(|(k, &y)| {
                let t = self.series.time(k);
                let mut f = 0.0;
                for j in 0..self.n {
                    let (c, s, g, w) = (p[4 * j], p[4 * j + 1], p[4 * j + 2], p[4 * j + 3]);
                    let (sn, cs) = (w * t).sin_cos();
                    f += (-g * t).exp() * (c * cs - s * sn);
                }
                (y - f).powi(2)
            })
            .sum()
    }

    /// Normal equations `JᵀJ` and `Jᵀr` at `p`.
    fn normal_equations(&self, p: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let m = 4 * self.n;
        let mut jtj = DMatrix::zeros(m, m);
        let mut jtr = DVector::zeros(m);
        let mut row = vec![0.0; m];
        for (k, &y) in self.series.samples.iter().enumerate() {
            let t = self.series.time(k);
            let mut f = 0.0;
            for j in 0..self.n {
                let (c, s, g, w) = (p[4 * j], p[4 * j + 1], p[4 * j + 2], p[4 * j + 3]);
                let e = (-g * t).exp();
                let (sn, cs) = (w * t).sin_cos();
                let fj = e * (c * cs - s * sn);
                f += fj;
                row[4 * j] = e * cs;
                row[4 * j + 1] = -e * sn;
                row[4 * j + 2] = -t * fj;
                row[4 * j + 3] = -t * e * (c * sn + s * cs);
            }
            let r = y - f;
            for a in 0..m {
                jtr[a] += row[a] * r;
                for b in a..m {
                    jtj[(a, b)] += row[a] * row[b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                jtj[(a, b)] = jtj[(b, a)];
            }
        }
        (jtj, jtr)
    }

    /// Least-squares `(c, s)` for fixed `(γ, ω)`; `None` when singular.
    fn linear_amplitudes(&self, p: &[f64]) -> Option<Vec<f64>> {
        let m = 2 * self.n;
        let mut a = DMatrix::zeros(m, m);
        let mut b = DVector::zeros(m);
        let mut row = vec![0.0; m];
        for (k, &y) in self.series.samples.iter().enumerate() {
            let t = self.series.time(k);
            for j in 0..self.n {
                let e = (-p[4 * j + 2] * t).exp();
                let (sn, cs) = (p[4 * j + 3] * t).sin_cos();
                row[2 * j] = e * cs;
                row[2 * j + 1] = -e * sn;
            }
            for i in 0..m {
                b[i] += row[i] * y;
                for l in 0..m {
                    a[(i, l)] += row[i] * row[l];
                }
            }
        }
        let x = a.cholesky()?.solve(&b);
        let mut q = p.to_vec();
        for j in 0..self.n {
            q[4 * j] = x[2 * j];
            q[4 * j + 1] = x[2 * j + 1];
        }
        q.iter().all(|v| v.is_finite()).then_some(q)
    }
}

fn project(p: &mut [f64]) {
    for g in p.iter_mut().skip(2).step_by(4) {
        if *g < 0.0 {
            *g = 0.0;
        }
    }
}

/// Fit `n_components` damped sinusoids starting from `guess`.
///
/// Levenberg–Marquardt with Marquardt's diagonal scaling. The objective never
/// increases across accepted steps; decay rates are projected onto `γ ≥ 0`.
/// The fit stops when an accepted step lowers the objective by less than
/// [`REL_TOLERANCE`] relative, when the residual vanishes, when no descent
/// step exists at working precision, or after [`MAX_ITERATIONS`] (then
/// `converged` is false and the best parameters found are returned).
pub fn fit_decaying_sinusoids(
    series: &TimeSeries,
    n_components: usize,
    guess: &[DecayComponent],
) -> Result<DecayFitResult> {
    series.validate()?;
    if !(1..=2).contains(&n_components) {
        return Err(Error::InvalidInput(format!(
            "n_components must be 1 or 2, got {n_components}"
        )));
    }
    if guess.len() != n_components {
        return Err(Error::InvalidInput(format!(
            "guess has {} components, expected {n_components}",
            guess.len()
        )));
    }
    let problem = Problem {
        series,
        n: n_components,
    };
    let mut p: Vec<f64> = guess
        .iter()
        .flat_map(|g| {
            let (sn, cs) = g.phase.sin_cos();
            [g.amplitude * cs, g.amplitude * sn, g.gamma.max(0.0), g.omega]
        })
        .collect();
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("guess contains non-finite values".into()));
    }
    let mut obj = problem.objective(&p);
    if let Some(q) = problem.linear_amplitudes(&p) {
        let o = problem.objective(&q);
        if o < obj {
            p = q;
            obj = o;
        }
    }

    let energy: f64 = series.samples.iter().map(|y| y * y).sum();
    let exact = EXACT_FIT * energy.max(f64::MIN_POSITIVE);
    let dim = p.len();
    let mut lambda = 1e-3;
    let mut converged = obj <= exact;
    let mut iterations = 0;
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = problem.normal_equations(&p);
        let max_diag = (0..dim).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for i in 0..dim {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * max_diag).max(f64::MIN_POSITIVE);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&jtr),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            project(&mut trial);
            let o = problem.objective(&trial);
            if o.is_finite() && o <= obj {
                let rel = (obj - o) / obj.max(f64::MIN_POSITIVE);
                p = trial;
                obj = o;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                converged = rel < REL_TOLERANCE || obj <= exact;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no descent direction at working precision: a stationary point
            converged = true;
        }
    }

    let mut components: Vec<DecayComponent> = (0..n_components)
        .map(|j| {
            let (c, s) = (p[4 * j], p[4 * j + 1]);
            DecayComponent::new(c.hypot(s), p[4 * j + 2], p[4 * j + 3], s.atan2(c)).canonical()
        })
        .collect();
    let rms =
        |c: &DecayComponent| (series.times().map(|t| c.eval(t).powi(2)).sum::<f64>() / series.len() as f64).sqrt();
    let weights: Vec<f64> = components.iter().map(rms).collect();
    let w_max = weights.iter().copied().fold(0.0, f64::max);
    let mut w = weights.iter();
    components.retain(|_| *w.next().unwrap() > PRUNE_FRACTION * w_max);
    if components.is_empty() {
        components.push(DecayComponent::new(0.0, p[2].max(0.0), p[3].abs(), 0.0));
    }
    components.sort_by(|x, y| {
        x.gamma
            .total_cmp(&y.gamma)
            .then(x.omega.abs().total_cmp(&y.omega.abs()))
    });
    Ok(DecayFitResult {
        gamma: components[0].gamma,
        omega_bar: components[0].omega,
        components,
        residual_rms: (obj / series.len() as f64).sqrt(),
        converged,
        iterations,
    })
}

/// Fit with automatic initialization.
///
/// One component starts from the strongest spectral peak. Two components try
/// several starts and keep the best converged fit: the two strongest peaks,
/// the strongest peak split into a slow and a fast part (for modes sharing a
/// frequency), and the strongest peak plus the strongest peak of the
/// one-component residual.
pub fn fit_series(series: &TimeSeries, n_components: usize) -> Result<DecayFitResult> {
    let guess = initial_guess(series)?;
    let first = fit_decaying_sinusoids(series, 1, &guess[..1])?;
    if n_components == 1 {
        return Ok(first);
    }
    if n_components != 2 {
        return Err(Error::InvalidInput(format!(
            "n_components must be 1 or 2, got {n_components}"
        )));
    }
    let g0 = guess[0];
    let mut starts: Vec<[DecayComponent; 2]> = Vec::new();
    if guess.len() > 1 {
        starts.push([g0, guess[1]]);
    }
    let split = |c: DecayComponent| {
        let g = c.gamma.max(1.0 / series.duration());
        [
            DecayComponent {
                gamma: 0.6 * g,
                amplitude: 0.5 * c.amplitude,
                ..c
            },
            DecayComponent {
                gamma: 1.6 * g,
                amplitude: 0.5 * c.amplitude,
                ..c
            },
        ]
    };
    starts.push(split(g0));
    let lead = first.components[0];
    let residual = TimeSeries {
        samples: series
            .samples
            .iter()
            .enumerate()
            .map(|(k, y)| y - first.model(series.time(k)))
            .collect(),
        ..series.clone()
    };
    if let Ok(rg) = initial_guess(&residual) {
        starts.push([lead, rg[0]]);
    }
    starts.push(split(lead));

    let mut best: Option<DecayFitResult> = None;
    for s in starts {
        let fit = fit_decaying_sinusoids(series, 2, &s)?;
        let better = match &best {
            None => true,
            Some(b) => (fit.converged, -fit.residual_rms) > (b.converged, -b.residual_rms),
        };
        if better {
            best = Some(fit);
        }
    }
    let best = best.expect("at least one start");
    Ok(if best.residual_rms <= first.residual_rms || !first.converged {
        best
    } else {
        first
    })
}

/// Write the fit as `key=value` lines.
pub fn write_fit_report<W: Write + ?Sized>(fit: &DecayFitResult, out: &mut W) -> Result<()> {
    for (i, c) in fit.components.iter().enumerate() {
        let j = i + 1;
        writeln!(out, "A{j}={}", c.amplitude)?;
        writeln!(out, "gamma{j}_s={}", c.gamma)?;
        writeln!(out, "omega{j}_rad_s={}", c.omega)?;
        writeln!(out, "theta{j}={}", c.phase)?;
    }
    let q = quality_factor(fit);
    writeln!(out, "residual_rms={}", fit.residual_rms)?;
    writeln!(out, "converged={}", fit.converged)?;
    writeln!(out, "gamma_s={}", fit.gamma)?;
    writeln!(out, "omega_bar_rad_s={}", fit.omega_bar)?;
    writeln!(out, "q_angular={}", q.exported())?;
    writeln!(out, "q_cycles={}", q.cycles_exported())?;
    Ok(())
}
