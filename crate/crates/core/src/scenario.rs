//! A complete physical setup: species, relaxation model and rates, and the
//! protection-beam template. Everything that evaluates the model at a
//! `(B, P)` point goes through here.

use crate::bloch::{dynamics_matrix, DynamicsMatrix, RelaxationModel, RelaxationRates, TransverseState};
use crate::error::Result;
use crate::lightshift::{zeeman_shifts, BeamParams, LightShifts};
use crate::signal::{synthesize_signal, SignalParams, TimeSeries};
use crate::species::{bare_splittings, cesium_defaults, AlkaliSpecies};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub species: AlkaliSpecies,
    pub model: RelaxationModel,
    /// Base rates; the light-induced part of `R_P` is added per power.
    pub rates: RelaxationRates,
    /// Beam whose power is replaced at each evaluation.
    pub beam: BeamParams,
}

/// Model quantities at one `(B, P)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPhysics {
    pub omega_a: f64,
    pub omega_b: f64,
    pub shifts: LightShifts,
    /// Base rates with the beam's scattering added to `R_P`.
    pub rates: RelaxationRates,
    pub dynamics: DynamicsMatrix,
}

impl Scenario {
    pub fn new(species: AlkaliSpecies, rates: RelaxationRates, beam: BeamParams) -> Self {
        let model = RelaxationModel::for_species(&species);
        Scenario {
            species,
            model,
            rates,
            beam,
        }
    }

    /// Cesium in a coated cell with the default protection beam.
    pub fn cesium_default() -> Result<Self> {
        let species = cesium_defaults();
        let beam = BeamParams::protection_default(&species)?;
        Ok(Self::new(species, RelaxationRates::CESIUM_CELL, beam))
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        self.rates.validate()?;
        self.beam.validate()
    }

    pub fn beam_at(&self, power: f64) -> BeamParams {
        self.beam.with_power(power)
    }

    /// `(ω_a, ω_b) = (ω_B + δ_a, −ω_B + δ_b)` at field `b_gauss` and power `p_mw`.
    pub fn effective_frequencies(&self, b_gauss: f64, p_mw: f64) -> Result<(f64, f64)> {
        effective_frequencies(&self.species, &self.beam_at(p_mw), b_gauss)
    }

    pub fn physics(&self, b_gauss: f64, p_mw: f64) -> Result<CellPhysics> {
        let beam = self.beam_at(p_mw);
        let shifts = zeeman_shifts(&self.species, &beam)?;
        let (omega_a, omega_b) = effective_frequencies(&self.species, &beam, b_gauss)?;
        let rates = self.rates.with_scatter(self.rates.r_p + shifts.scatter_rate);
        let r = self.model.build(&rates)?;
        Ok(CellPhysics {
            omega_a,
            omega_b,
            shifts,
            rates,
            dynamics: dynamics_matrix(&r, omega_a, omega_b),
        })
    }

    /// Noisy `⟨S_x(t)⟩` trace from a spin-temperature initial state.
    pub fn simulate(&self, b_gauss: f64, p_mw: f64, params: &SignalParams, seed: u64) -> Result<TimeSeries> {
        params.validate()?;
        let cell = self.physics(b_gauss, p_mw)?;
        synthesize_signal(
            &cell.dynamics,
            &TransverseState::spin_temperature(&self.model),
            &self.species,
            params.duration_s,
            params.dt(),
            params.noise_sigma,
            seed,
        )
    }
}

/// Bare splittings plus light shifts for a beam at field `b_gauss`.
pub fn effective_frequencies(species: &AlkaliSpecies, beam: &BeamParams, b_gauss: f64) -> Result<(f64, f64)> {
    let (wa, wb) = bare_splittings(species, b_gauss)?;
    let s = zeeman_shifts(species, beam)?;
    Ok((wa + s.delta_a, wb + s.delta_b))
}
