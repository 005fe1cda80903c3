//! Probe-signal synthesis, spectra and damped-sinusoid regression.
//!
//! The forward model produces `⟨S_x(t)⟩` traces from the hyperfine-Bloch
//! dynamics; the analysis side mirrors what one would do with measured
//! traces: an FFT magnitude spectrum, spectral-peak initialization, and a
//! Levenberg–Marquardt fit to `Σᵢ Aᵢ e^{−γᵢt} cos(ωᵢt + θᵢ)`.

mod fit;
mod series;
mod spectrum;

pub use fit::{
    fit_decaying_sinusoids, fit_series, initial_guess, quality_factor, write_fit_report, DecayComponent,
    DecayFitResult, Quality, MAX_ITERATIONS, REL_TOLERANCE,
};
pub use series::{read_trace_csv, synthesize_signal, write_trace_csv, SignalParams, TimeSeries, MIN_SAMPLES};
pub use spectrum::{fft_spectrum, normalize_batch, spectrum_with, transform, Peak, Spectrum, Window};
