//! Alkali ground-state structure: nuclear spin, electron gyromagnetic ratio,
//! ground hyperfine splitting and the four D1 hyperfine lines.
//!
//! Line centers are stored as optical angular-frequency offsets from `ν₁`, the
//! lowest-frequency D1 line (`F = I+½ → F' = I-½`; `F=4 → F'=3` for cesium).

use serde::{Deserialize, Serialize};

use crate::angular::{d1_line_strength, d1_vector_weight};
use crate::error::{ensure_finite, Error, Result};
use crate::units::{ghz_to_rad, hz_to_rad, mhz_to_rad, rad_to_ghz, rad_to_hz, rad_to_mhz};

/// Cs ground-state hyperfine splitting, Hz.
pub const CS_HYPERFINE_HZ: f64 = 9_192_631_770.0;
/// Cs 6P₁/₂ hyperfine splitting, Hz.
pub const CS_EXCITED_SPLIT_HZ: f64 = 1_167_680_000.0;
/// Free-electron gyromagnetic ratio g_e/2π, Hz/G.
pub const ELECTRON_GYRO_HZ_PER_GAUSS: f64 = 2.8025e6;
/// Cs D1 natural linewidth (FWHM), Hz.
pub const CS_D1_LINEWIDTH_HZ: f64 = 4.575e6;

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLine {
    pub lower_f: u32,
    pub upper_f: u32,
    /// Offset of the line center from `ν₁`, rad/s.
    pub center_frequency: f64,
    /// Relative oscillator strength; the four lines sum to one.
    pub strength: f64,
    /// Signed σ⁺ vector light-shift weight `W(F, F')`: linear-in-M part of the
    /// squared coupling. The sign already carries the manifold's g-factor sign.
    pub vector_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlkaliSpecies {
    pub name: String,
    /// Twice the nuclear spin (7 for ¹³³Cs).
    pub nuclear_spin_2i: u32,
    /// Electron gyromagnetic ratio g_e, rad s⁻¹ G⁻¹.
    pub electron_gyro: f64,
    /// Ground hyperfine splitting ω_hpf, rad/s.
    pub hyperfine_split: f64,
    pub d1_lines: Vec<TransitionLine>,
    /// Optical linewidth Γ_e (FWHM), rad/s. Line profiles use the half width Γ_e/2.
    pub linewidth: f64,
    /// Standard deviation of an optional Gaussian (Doppler) convolution of the
    /// optical profiles, rad/s. Zero means homogeneous Lorentzian lines.
    pub doppler_sigma: f64,
    /// Add the second-order Zeeman term to the bare splittings.
    pub second_order_zeeman: bool,
}

impl AlkaliSpecies {
    /// `2I + 1`, the number of nuclear sublevels; also the Larmor slowing denominator.
    pub fn multiplicity(&self) -> f64 {
        (self.nuclear_spin_2i + 1) as f64
    }

    /// Upper manifold quantum number `F = I + ½` (labelled `a`).
    pub fn f_upper_manifold(&self) -> u32 {
        self.nuclear_spin_2i.div_ceil(2)
    }

    /// Lower manifold quantum number `F = I - ½` (labelled `b`).
    pub fn f_lower_manifold(&self) -> u32 {
        (self.nuclear_spin_2i - 1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.nuclear_spin_2i == 0 || self.nuclear_spin_2i.is_multiple_of(2) {
            return bad(format!(
                "nuclear_spin_2I must be a positive odd integer, got {}",
                self.nuclear_spin_2i
            ));
        }
        if !self.electron_gyro.is_finite() || self.electron_gyro <= 0.0 {
            return bad("electron_gyro must be positive".into());
        }
        if !self.linewidth.is_finite() || self.linewidth <= 0.0 {
            return bad("linewidth must be positive".into());
        }
        if !self.hyperfine_split.is_finite() || self.hyperfine_split <= 0.0 {
            return bad("hyperfine_split must be positive".into());
        }
        if !self.doppler_sigma.is_finite() || self.doppler_sigma < 0.0 {
            return bad("doppler width must be non-negative".into());
        }
        if self.d1_lines.len() != 4 {
            return bad(format!("expected exactly 4 D1 lines, got {}", self.d1_lines.len()));
        }
        let (fa, fb) = (self.f_upper_manifold(), self.f_lower_manifold());
        for line in &self.d1_lines {
            if ![fa, fb].contains(&line.lower_f) || ![fa, fb].contains(&line.upper_f) {
                return bad(format!(
                    "line {}→{} is not a D1 hyperfine line",
                    line.lower_f, line.upper_f
                ));
            }
            if line.strength.is_nan()
                || line.strength < 0.0
                || !line.center_frequency.is_finite()
                || !line.vector_weight.is_finite()
            {
                return bad("line strengths must be non-negative and all line data finite".into());
            }
        }
        if self
            .d1_lines
            .windows(2)
            .any(|w| w[1].center_frequency <= w[0].center_frequency)
        {
            return bad("D1 line centers must be strictly increasing".into());
        }
        let total: f64 = self.d1_lines.iter().map(|l| l.strength).sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("line strengths sum to {total}, expected 1"));
        }
        for upper in [fa, fb] {
            let centers: Vec<_> = self.d1_lines.iter().filter(|l| l.upper_f == upper).collect();
            let [first, second] = centers.as_slice() else {
                return bad(format!(
                    "upper level F'={upper} must be reached from both ground manifolds"
                ));
            };
            let gap = (second.center_frequency - first.center_frequency).abs();
            if ((gap - self.hyperfine_split) / self.hyperfine_split).abs() > 1e-6 {
                return bad(format!(
                    "lines into F'={upper} are {:.6} GHz apart, hyperfine split is {:.6} GHz",
                    rad_to_ghz(gap),
                    rad_to_ghz(self.hyperfine_split)
                ));
            }
        }
        Ok(())
    }

    /// Lines whose lower level is `f`.
    pub fn lines_from(&self, f: u32) -> impl Iterator<Item = &TransitionLine> {
        self.d1_lines.iter().filter(move |l| l.lower_f == f)
    }
}

/// Build the four D1 lines for a two-manifold ground state from the ground and
/// excited hyperfine splittings, with strengths and vector weights from angular algebra.
pub fn d1_lines_from_structure(nuclear_spin_2i: u32, hyperfine_split: f64, excited_split: f64) -> Vec<TransitionLine> {
    let i2 = nuclear_spin_2i as i32;
    let fa = nuclear_spin_2i.div_ceil(2);
    let fb = (nuclear_spin_2i - 1) / 2;
    // ν₁ = F=a → F'=b; the upper ground manifold sits highest, so its lines are lowest
    let mut lines: Vec<TransitionLine> = [
        (fa, fb, 0.0),
        (fa, fa, excited_split),
        (fb, fb, hyperfine_split),
        (fb, fa, hyperfine_split + excited_split),
    ]
    .into_iter()
    .map(|(lower_f, upper_f, center_frequency)| TransitionLine {
        lower_f,
        upper_f,
        center_frequency,
        strength: d1_line_strength(i2, lower_f as i32, upper_f as i32),
        vector_weight: d1_vector_weight(i2, lower_f as i32, upper_f as i32),
    })
    .collect();
    lines.sort_by(|a, b| a.center_frequency.total_cmp(&b.center_frequency));
    lines
}

/// Cesium-133 record.
pub fn cesium_defaults() -> AlkaliSpecies {
    let hyperfine_split = hz_to_rad(CS_HYPERFINE_HZ);
    AlkaliSpecies {
        name: "Cs-133".to_string(),
        nuclear_spin_2i: 7,
        electron_gyro: hz_to_rad(ELECTRON_GYRO_HZ_PER_GAUSS),
        hyperfine_split,
        d1_lines: d1_lines_from_structure(7, hyperfine_split, hz_to_rad(CS_EXCITED_SPLIT_HZ)),
        linewidth: hz_to_rad(CS_D1_LINEWIDTH_HZ),
        doppler_sigma: 0.0,
        second_order_zeeman: false,
    }
}

/// Larmor rate `ω_B = g_e B / (2I+1)` in rad/s for a field in gauss.
pub fn larmor_frequency(species: &AlkaliSpecies, b_gauss: f64) -> Result<f64> {
    ensure_finite("magnetic field", b_gauss)?;
    Ok(species.electron_gyro * b_gauss / species.multiplicity())
}

/// Bare Zeeman splittings `(ω_a, ω_b) = (+ω_B, -ω_B)` of the upper and lower manifolds.
///
/// With `second_order_zeeman` set, `±ω_B²(2I+1)/ω_hpf` is added to `(ω_a, ω_b)`.
pub fn bare_splittings(species: &AlkaliSpecies, b_gauss: f64) -> Result<(f64, f64)> {
    let omega_b_larmor = larmor_frequency(species, b_gauss)?;
    let correction = if species.second_order_zeeman {
        omega_b_larmor * omega_b_larmor * species.multiplicity() / species.hyperfine_split
    } else {
        0.0
    };
    Ok((omega_b_larmor + correction, -omega_b_larmor - correction))
}

/// One line of a species override file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineOverride {
    #[serde(rename = "lower_F")]
    pub lower_f: u32,
    #[serde(rename = "upper_F")]
    pub upper_f: u32,
    pub offset_ghz: f64,
    pub strength: f64,
    /// Defaults to the angular-algebra value for the species' nuclear spin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_weight: Option<f64>,
}

/// Species override file. Every key is optional; missing keys keep the cesium value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "nuclear_spin_2I", default, skip_serializing_if = "Option::is_none")]
    pub nuclear_spin_2i: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electron_gyro_hz_per_gauss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperfine_split_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler_sigma_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_order_zeeman: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lines: Option<Vec<LineOverride>>,
}

impl SpeciesOverride {
    /// The complete cesium record written out in override form.
    pub fn from_species(species: &AlkaliSpecies) -> Self {
        SpeciesOverride {
            name: Some(species.name.clone()),
            nuclear_spin_2i: Some(species.nuclear_spin_2i),
            electron_gyro_hz_per_gauss: Some(rad_to_hz(species.electron_gyro)),
            hyperfine_split_ghz: Some(rad_to_ghz(species.hyperfine_split)),
            linewidth_mhz: Some(rad_to_mhz(species.linewidth)),
            doppler_sigma_mhz: Some(rad_to_mhz(species.doppler_sigma)),
            second_order_zeeman: Some(species.second_order_zeeman),
            lines: Some(
                species
                    .d1_lines
                    .iter()
                    .map(|l| LineOverride {
                        lower_f: l.lower_f,
                        upper_f: l.upper_f,
                        offset_ghz: rad_to_ghz(l.center_frequency),
                        strength: l.strength,
                        vector_weight: Some(l.vector_weight),
                    })
                    .collect(),
            ),
        }
    }

    /// Apply the overrides on top of the cesium defaults and validate the result.
    pub fn build(&self) -> Result<AlkaliSpecies> {
        let mut species = cesium_defaults();
        if let Some(name) = &self.name {
            species.name = name.clone();
        }
        if let Some(i2) = self.nuclear_spin_2i {
            species.nuclear_spin_2i = i2;
        }
        if let Some(g) = self.electron_gyro_hz_per_gauss {
            species.electron_gyro = hz_to_rad(g);
        }
        if let Some(split) = self.hyperfine_split_ghz {
            species.hyperfine_split = ghz_to_rad(split);
        }
        if let Some(w) = self.linewidth_mhz {
            species.linewidth = mhz_to_rad(w);
        }
        if let Some(w) = self.doppler_sigma_mhz {
            species.doppler_sigma = mhz_to_rad(w);
        }
        if let Some(flag) = self.second_order_zeeman {
            species.second_order_zeeman = flag;
        }
        match &self.lines {
            Some(lines) => {
                let i2 = species.nuclear_spin_2i as i32;
                species.d1_lines = lines
                    .iter()
                    .map(|l| TransitionLine {
                        lower_f: l.lower_f,
                        upper_f: l.upper_f,
                        center_frequency: ghz_to_rad(l.offset_ghz),
                        strength: l.strength,
                        vector_weight: l
                            .vector_weight
                            .unwrap_or_else(|| d1_vector_weight(i2, l.lower_f as i32, l.upper_f as i32)),
                    })
                    .collect();
            }
            None if (self.nuclear_spin_2i.is_some() || self.hyperfine_split_ghz.is_some())
                && species.nuclear_spin_2i % 2 == 1 =>
            {
                species.d1_lines = d1_lines_from_structure(
                    species.nuclear_spin_2i,
                    species.hyperfine_split,
                    hz_to_rad(CS_EXCITED_SPLIT_HZ),
                );
            }
            None => {}
        }
        species.validate()?;
        Ok(species)
    }
}
