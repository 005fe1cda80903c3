//! Run configuration: one TOML file covering species, relaxation, beam,
//! signal, grids and output. Every key has an embedded default, and
//! [`RunConfig::default_toml`] writes the complete default file.

use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::bloch::{RelaxationModel, RelaxationRates};
use crate::error::{Error, Result};
use crate::lightshift::{
    absorption_cross_section, calibrate_shift_scale, lightshift_cross_sections, BeamParams, Handedness,
    DEFAULT_CALIBRATION, DEFAULT_DETUNING_GHZ, DEFAULT_SCATTER_RATE, DEFAULT_SCATTER_REFERENCE_MW,
};
use crate::scenario::Scenario;
use crate::signal::SignalParams;
use crate::species::{cesium_defaults, AlkaliSpecies, SpeciesOverride};
use crate::sweep::linspace;
use crate::units::{ghz_to_rad, mg_to_gauss};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "RunConfig::default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub species: SpeciesOverride,
    #[serde(default)]
    pub relaxation: RelaxationConfig,
    #[serde(default)]
    pub beam: BeamConfig,
    #[serde(default)]
    pub signal: SignalParams,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub xsection: XsectionConfig,
    #[serde(default)]
    pub waterfall: WaterfallConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationConfig {
    /// Spin-exchange rate, s⁻¹.
    pub r_se: f64,
    /// Electron-spin destruction rate, s⁻¹.
    pub r_sr: f64,
    /// Uniform spin destruction, s⁻¹.
    pub r_u: f64,
    /// Light-induced relaxation per unit beam power at the configured detuning, s⁻¹ mW⁻¹.
    pub scatter_coefficient: f64,
    /// Row-major override of the spin-exchange matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_se: Option<[[f64; 2]; 2]>,
    /// Row-major override of the electron-destruction matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_sr: Option<[[f64; 2]; 2]>,
}

impl Default for RelaxationConfig {
    fn default() -> Self {
        let r = RelaxationRates::CESIUM_CELL;
        RelaxationConfig {
            r_se: r.r_se,
            r_sr: r.r_sr,
            r_u: r.r_u,
            scatter_coefficient: DEFAULT_SCATTER_RATE / DEFAULT_SCATTER_REFERENCE_MW,
            m_se: None,
            m_sr: None,
        }
    }
}

/// Field and power at which the beam should synchronize the manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub b_mg: f64,
    pub p_mw: f64,
}

/// Beam section. Exactly one of `calibration` or `shift_scale` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    /// Optical offset from the F=4 → F'=3 line, GHz.
    pub detuning_ghz: f64,
    /// `"+1"` or `"-1"`. With a calibration it defaults to the handedness that reaches resonance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handedness: Option<Handedness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    /// Explicit κ, rad s⁻¹ mW⁻¹ per unit light-shift profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift_scale: Option<f64>,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            detuning_ghz: DEFAULT_DETUNING_GHZ,
            handedness: None,
            calibration: Some(Calibration {
                b_mg: DEFAULT_CALIBRATION.0 * 1e3,
                p_mw: DEFAULT_CALIBRATION.1,
            }),
            shift_scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub b_min_mg: f64,
    pub b_max_mg: f64,
    pub b_count: usize,
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    pub p_count: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            b_min_mg: 0.0,
            b_max_mg: 1.5,
            b_count: 40,
            p_min_mw: 0.0,
            p_max_mw: 25.0,
            p_count: 40,
        }
    }
}

impl SweepConfig {
    pub fn b_values(&self) -> Vec<f64> {
        linspace(mg_to_gauss(self.b_min_mg), mg_to_gauss(self.b_max_mg), self.b_count)
    }

    pub fn p_values(&self) -> Vec<f64> {
        linspace(self.p_min_mw, self.p_max_mw, self.p_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XsectionConfig {
    pub start_ghz: f64,
    pub stop_ghz: f64,
    pub count: usize,
}

impl Default for XsectionConfig {
    fn default() -> Self {
        // the odd half-step keeps every sample off the line centers
        XsectionConfig {
            start_ghz: -5.005,
            stop_ghz: 15.005,
            count: 2002,
        }
    }
}

impl XsectionConfig {
    pub fn frequencies_ghz(&self) -> Vec<f64> {
        linspace(self.start_ghz, self.stop_ghz, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterfallConfig {
    pub b_mg: f64,
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    pub p_count: usize,
    /// Spectrum rows above this frequency are not written.
    pub max_freq_hz: f64,
}

impl Default for WaterfallConfig {
    fn default() -> Self {
        WaterfallConfig {
            b_mg: 0.43,
            p_min_mw: 0.0,
            p_max_mw: 15.0,
            p_count: 31,
            max_freq_hz: 400.0,
        }
    }
}

impl WaterfallConfig {
    pub fn p_values(&self) -> Vec<f64> {
        linspace(self.p_min_mw, self.p_max_mw, self.p_count)
    }
}

impl RunConfig {
    fn default_out_dir() -> PathBuf {
        PathBuf::from("out")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The complete default configuration, including the full species record.
    pub fn default_toml() -> String {
        let cfg = RunConfig {
            species: SpeciesOverride::from_species(&cesium_defaults()),
            ..RunConfig::default()
        };
        toml::to_string(&cfg).expect("default config serializes")
    }

    pub fn build_species(&self) -> Result<AlkaliSpecies> {
        self.species.build()
    }

    pub fn build_model(&self, species: &AlkaliSpecies) -> RelaxationModel {
        let mut model = RelaxationModel::for_species(species);
        let m = |a: [[f64; 2]; 2]| Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]);
        if let Some(a) = self.relaxation.m_se {
            model.m_se = m(a);
        }
        if let Some(a) = self.relaxation.m_sr {
            model.m_sr = m(a);
        }
        model
    }

    pub fn rates(&self) -> RelaxationRates {
        let r = &self.relaxation;
        RelaxationRates::new(r.r_se, r.r_sr, r.r_u, 0.0)
    }

    /// Beam template (power 0) from the beam section.
    pub fn build_beam(&self, species: &AlkaliSpecies) -> Result<BeamParams> {
        let b = &self.beam;
        let nu = ghz_to_rad(b.detuning_ghz);
        let coeff = self.relaxation.scatter_coefficient;
        if !coeff.is_finite() || coeff < 0.0 {
            return Err(Error::Config("scatter_coefficient must be finite and >= 0".into()));
        }
        let (shift_scale, auto_hand) = match (b.calibration, b.shift_scale) {
            (Some(c), None) => {
                let kappa = calibrate_shift_scale(species, nu, mg_to_gauss(c.b_mg), c.p_mw)?;
                let (sa, sb) = lightshift_cross_sections(species, nu)?;
                (kappa, Handedness::from_sign((sb - sa) * c.b_mg))
            }
            (None, Some(k)) => (k, Handedness::Plus),
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "beam: give either calibration or shift_scale, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "beam is uncalibrated: give calibration = { b_mg, p_mw } or shift_scale".into(),
                ))
            }
        };
        let beam = BeamParams {
            power: 0.0,
            detuning: nu,
            handedness: b.handedness.unwrap_or(auto_hand),
            shift_scale,
            scatter_scale: coeff / absorption_cross_section(species, nu),
        };
        beam.validate()?;
        Ok(beam)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let species = self.build_species()?;
        let beam = self.build_beam(&species)?;
        let model = self.build_model(&species);
        let sc = Scenario {
            model,
            rates: self.rates(),
            beam,
            species,
        };
        sc.validate()?;
        self.signal.validate()?;
        Ok(sc)
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed_base: 0,
            out_dir: Self::default_out_dir(),
            species: SpeciesOverride::default(),
            relaxation: RelaxationConfig::default(),
            beam: BeamConfig::default(),
            signal: SignalParams::default(),
            sweep: SweepConfig::default(),
            xsection: XsectionConfig::default(),
            waterfall: WaterfallConfig::default(),
        }
    }
}
