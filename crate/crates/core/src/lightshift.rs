//! Vector (Zeeman-like) light shifts of the two ground manifolds under a
//! circularly polarized off-resonant beam, absorption profile, and the
//! solvers for the synchronization condition `ω_B + δ_a = -ω_B + δ_b`.
//!
//! Profiles are dimensionless numbers obtained with detunings expressed in
//! GHz; the calibration constant `shift_scale` carries the physical units.
//! Both the dispersive and absorptive shapes use the half width `Γ_e/2`.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::species::{larmor_frequency, AlkaliSpecies};
use crate::units::{ghz_to_rad, rad_to_ghz};

/// Scattering rate assigned to the reference beam power by default, s⁻¹.
pub const DEFAULT_SCATTER_RATE: f64 = 3.0;
/// Beam power at which `DEFAULT_SCATTER_RATE` applies, mW.
pub const DEFAULT_SCATTER_REFERENCE_MW: f64 = 9.7;
/// Default protection-beam detuning from ν₁, GHz (blue).
pub const DEFAULT_DETUNING_GHZ: f64 = 12.0;
/// Default calibration point: field (G) and power (mW) at which the manifolds synchronize.
pub const DEFAULT_CALIBRATION: (f64, f64) = (0.43e-3, 9.7);

/// Closer than this to a line center (rad/s) counts as on-resonance.
const LINE_CENTER_TOLERANCE: f64 = 1.0;
const DOPPLER_NODES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Handedness {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Handedness {
    pub fn sign(self) -> f64 {
        match self {
            Handedness::Plus => 1.0,
            Handedness::Minus => -1.0,
        }
    }

    pub fn from_sign(sign: f64) -> Self {
        if sign < 0.0 {
            Handedness::Minus
        } else {
            Handedness::Plus
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Handedness::Plus => Handedness::Minus,
            Handedness::Minus => Handedness::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    /// mW.
    pub power: f64,
    /// Optical offset from ν₁, rad/s; positive is blue.
    pub detuning: f64,
    pub handedness: Handedness,
    /// κ, rad s⁻¹ mW⁻¹ per unit light-shift profile.
    pub shift_scale: f64,
    /// s⁻¹ mW⁻¹ per unit absorption profile.
    pub scatter_scale: f64,
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("beam power", self.power)?;
        ensure_finite("beam detuning", self.detuning)?;
        if self.power < 0.0 {
            return Err(Error::InvalidInput(format!(
                "beam power must be >= 0, got {}",
                self.power
            )));
        }
        if !self.shift_scale.is_finite() || self.shift_scale <= 0.0 {
            return Err(Error::InvalidInput("shift_scale must be positive".into()));
        }
        if !self.scatter_scale.is_finite() || self.scatter_scale < 0.0 {
            return Err(Error::InvalidInput("scatter_scale must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    /// Beam at `detuning` whose shift scale is calibrated so the manifolds
    /// synchronize at `(b_ref, p_ref)`. Handedness is chosen to make that
    /// resonance reachable; the scatter scale gets its default.
    pub fn calibrated(species: &AlkaliSpecies, detuning: f64, b_ref: f64, p_ref: f64) -> Result<Self> {
        let shift_scale = calibrate_shift_scale(species, detuning, b_ref, p_ref)?;
        let (sa, sb) = lightshift_cross_sections(species, detuning)?;
        Ok(BeamParams {
            power: 0.0,
            detuning,
            handedness: Handedness::from_sign((sb - sa) * b_ref),
            shift_scale,
            scatter_scale: default_scatter_scale(species, detuning),
        })
    }

    /// The protection beam used throughout the examples: 12 GHz blue of ν₁,
    /// synchronizing the manifolds at 0.43 mG with 9.7 mW.
    pub fn protection_default(species: &AlkaliSpecies) -> Result<Self> {
        let (b_ref, p_ref) = DEFAULT_CALIBRATION;
        Self::calibrated(species, ghz_to_rad(DEFAULT_DETUNING_GHZ), b_ref, p_ref)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightShifts {
    /// Shift of the upper-manifold splitting, rad/s.
    pub delta_a: f64,
    /// Shift of the lower-manifold splitting, rad/s.
    pub delta_b: f64,
    /// Power-induced relaxation `R_P`, s⁻¹.
    pub scatter_rate: f64,
}

fn half_width_ghz(species: &AlkaliSpecies) -> f64 {
    0.5 * rad_to_ghz(species.linewidth)
}

fn dispersive(detuning_ghz: f64, hw: f64) -> f64 {
    detuning_ghz / (detuning_ghz * detuning_ghz + hw * hw)
}

fn lorentzian(detuning_ghz: f64, hw: f64) -> f64 {
    hw * hw / (detuning_ghz * detuning_ghz + hw * hw)
}

/// Probabilists' Gauss–Hermite rule for `∫ f(x) e^{-x²/2} dx / √(2π)`
/// via Golub–Welsch.
fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k, k - 1)] = off;
        jacobi[(k - 1, k)] = off;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Evaluate a profile, convolved with the species' Gaussian width when set.
fn with_doppler(species: &AlkaliSpecies, nu: f64, profile: impl Fn(f64) -> f64) -> f64 {
    if species.doppler_sigma == 0.0 {
        return profile(nu);
    }
    gauss_hermite(DOPPLER_NODES)
        .into_iter()
        .map(|(x, w)| w * profile(nu + species.doppler_sigma * x))
        .sum()
}

fn check_off_line(species: &AlkaliSpecies, nu: f64) -> Result<()> {
    ensure_finite("optical frequency", nu)?;
    if species
        .d1_lines
        .iter()
        .any(|l| (nu - l.center_frequency).abs() < LINE_CENTER_TOLERANCE)
    {
        return Err(Error::SingularDetuning { nu_ghz: rad_to_ghz(nu) });
    }
    Ok(())
}

fn homogeneous_cross_sections(species: &AlkaliSpecies, nu: f64) -> (f64, f64) {
    let hw = half_width_ghz(species);
    let sigma = |f: u32| -> f64 {
        species
            .lines_from(f)
            .map(|l| l.vector_weight * dispersive(rad_to_ghz(nu - l.center_frequency), hw))
            .sum()
    };
    (sigma(species.f_upper_manifold()), sigma(species.f_lower_manifold()))
}

/// Light-shift profiles `(σ_a, σ_b)` of the upper and lower manifolds at
/// optical offset `nu` (rad/s from ν₁).
///
/// `σ_F = Σ_{F'} W(F,F') Δ/(Δ² + Γ_e²/4)` with `Δ` in GHz. The weights carry
/// each manifold's g-factor sign, so far blue of every line σ_a < 0 < σ_b for
/// the D1 line of an alkali: the light acts on the electron like a magnetic
/// field, which splits the two manifolds with opposite signs.
pub fn lightshift_cross_sections(species: &AlkaliSpecies, nu: f64) -> Result<(f64, f64)> {
    check_off_line(species, nu)?;
    if species.doppler_sigma == 0.0 {
        return Ok(homogeneous_cross_sections(species, nu));
    }
    let sa = with_doppler(species, nu, |x| homogeneous_cross_sections(species, x).0);
    let sb = with_doppler(species, nu, |x| homogeneous_cross_sections(species, x).1);
    Ok((sa, sb))
}

/// Absorption profile `Σ_i s_i (Γ_e/2)²/(Δ_i² + (Γ_e/2)²)`; unity at an isolated line center
/// of unit strength.
pub fn absorption_cross_section(species: &AlkaliSpecies, nu: f64) -> f64 {
    let hw = half_width_ghz(species);
    with_doppler(species, nu, |x| {
        species
            .d1_lines
            .iter()
            .map(|l| l.strength * lorentzian(rad_to_ghz(x - l.center_frequency), hw))
            .sum()
    })
}

/// Manifold light shifts and scattering rate for a beam. Linear in power.
pub fn zeeman_shifts(species: &AlkaliSpecies, beam: &BeamParams) -> Result<LightShifts> {
    beam.validate()?;
    let (sa, sb) = lightshift_cross_sections(species, beam.detuning)?;
    let scale = beam.handedness.sign() * beam.shift_scale * beam.power;
    Ok(LightShifts {
        delta_a: scale * sa,
        delta_b: scale * sb,
        scatter_rate: beam.scatter_scale * beam.power * absorption_cross_section(species, beam.detuning),
    })
}

/// `s·(σ_b − σ_a)` at the beam detuning: the differential profile that
/// closes the gap `2ω_B` between the manifolds.
fn differential_profile(species: &AlkaliSpecies, beam: &BeamParams) -> Result<f64> {
    let (sa, sb) = lightshift_cross_sections(species, beam.detuning)?;
    let diff = beam.handedness.sign() * (sb - sa);
    if diff == 0.0 || !diff.is_finite() {
        return Err(Error::NoResonance);
    }
    Ok(diff)
}

/// Beam power (mW) at which the two manifolds precess synchronously at field `b_gauss`.
pub fn resonance_power(species: &AlkaliSpecies, template: &BeamParams, b_gauss: f64) -> Result<f64> {
    ensure_finite("magnetic field", b_gauss)?;
    if b_gauss < 0.0 {
        return Err(Error::InvalidInput(format!("field must be >= 0, got {b_gauss}")));
    }
    template.with_power(0.0).validate()?;
    let diff = differential_profile(species, template)?;
    let omega_b = larmor_frequency(species, b_gauss)?;
    let power = 2.0 * omega_b / (template.shift_scale * diff);
    if power < 0.0 {
        return Err(Error::UnreachableResonance);
    }
    Ok(power)
}

/// Field (G) at which this beam synchronizes the manifolds: `B* = (δ_b − δ_a)(2I+1)/(2 g_e)`.
pub fn resonance_field(species: &AlkaliSpecies, beam: &BeamParams) -> Result<f64> {
    beam.validate()?;
    differential_profile(species, beam)?;
    let shifts = zeeman_shifts(species, beam)?;
    let field = (shifts.delta_b - shifts.delta_a) * species.multiplicity() / (2.0 * species.electron_gyro);
    if field < 0.0 {
        return Err(Error::UnreachableResonance);
    }
    Ok(field)
}

/// Shift scale κ (rad s⁻¹ mW⁻¹) that places the resonance at `(b_ref, p_ref)`.
///
/// κ is positive; the handedness that realizes it is `sign((σ_b − σ_a)·b_ref)`.
pub fn calibrate_shift_scale(species: &AlkaliSpecies, nu: f64, b_ref: f64, p_ref: f64) -> Result<f64> {
    ensure_finite("reference field", b_ref)?;
    ensure_finite("reference power", p_ref)?;
    if p_ref.is_nan() || p_ref <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "reference power must be positive, got {p_ref}"
        )));
    }
    if b_ref == 0.0 {
        return Err(Error::InvalidInput(
            "reference field of zero gives a degenerate calibration".into(),
        ));
    }
    let (sa, sb) = lightshift_cross_sections(species, nu)?;
    let diff = sb - sa;
    if diff == 0.0 {
        return Err(Error::NoResonance);
    }
    let omega_b = larmor_frequency(species, b_ref)?;
    Ok((2.0 * omega_b / (p_ref * diff)).abs())
}

/// Scatter scale giving `DEFAULT_SCATTER_RATE` at `DEFAULT_SCATTER_REFERENCE_MW`.
pub fn default_scatter_scale(species: &AlkaliSpecies, nu: f64) -> f64 {
    DEFAULT_SCATTER_RATE / (DEFAULT_SCATTER_REFERENCE_MW * absorption_cross_section(species, nu))
}

/// Write `nu_ghz,sigma_a,sigma_b,sigma_abs` rows for the given optical offsets (rad/s).
///
/// Fails before writing anything if a requested frequency sits on a line center.
pub fn write_cross_section_csv<W: Write + ?Sized>(species: &AlkaliSpecies, nus: &[f64], out: &mut W) -> Result<()> {
    let rows = nus
        .iter()
        .map(|&nu| {
            let (sa, sb) = lightshift_cross_sections(species, nu)?;
            Ok((nu, sa, sb, absorption_cross_section(species, nu)))
        })
        .collect::<Result<Vec<_>>>()?;
    writeln!(out, "nu_ghz,sigma_a,sigma_b,sigma_abs")?;
    for (nu, sa, sb, abs) in rows {
        writeln!(out, "{},{},{},{}", rad_to_ghz(nu), sa, sb, abs)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::cesium_defaults;
    use crate::units::ghz_to_rad;
    use approx::assert_relative_eq;

    fn beam() -> (AlkaliSpecies, BeamParams) {
        let cs = cesium_defaults();
        let b = BeamParams::protection_default(&cs).unwrap();
        (cs, b)
    }

    #[test]
    fn twelve_ghz_mostly_shifts_lower_manifold() {
        let cs = cesium_defaults();
        let (sa, sb) = lightshift_cross_sections(&cs, ghz_to_rad(12.0)).unwrap();
        assert!(sb.abs() > sa.abs());
        assert!(sa < 0.0 && sb > 0.0);
    }

    #[test]
    fn profiles_vanish_far_away() {
        let cs = cesium_defaults();
        for nu in [ghz_to_rad(1e6), ghz_to_rad(-1e6)] {
            let (sa, sb) = lightshift_cross_sections(&cs, nu).unwrap();
            assert!(sa.abs() < 1e-6 && sb.abs() < 1e-6);
            assert!(absorption_cross_section(&cs, nu) < 1e-15);
        }
    }

    #[test]
    fn equal_weights_cancel_midway() {
        let mut cs = cesium_defaults();
        for l in cs.d1_lines.iter_mut().filter(|l| l.lower_f == 3) {
            l.vector_weight = 0.1;
        }
        let mid = 0.5 * (cs.d1_lines[2].center_frequency + cs.d1_lines[3].center_frequency);
        let (_, sb) = lightshift_cross_sections(&cs, mid).unwrap();
        assert!(sb.abs() < 1e-12);
    }

    #[test]
    fn line_center_is_an_error() {
        let cs = cesium_defaults();
        for line in &cs.d1_lines {
            assert!(matches!(
                lightshift_cross_sections(&cs, line.center_frequency),
                Err(Error::SingularDetuning { .. })
            ));
        }
    }

    #[test]
    fn absorption_peaks_at_lines() {
        let cs = cesium_defaults();
        let hw = cs.linewidth / 2.0;
        for line in &cs.d1_lines {
            let c = absorption_cross_section(&cs, line.center_frequency);
            assert!(c > absorption_cross_section(&cs, line.center_frequency + 0.1 * hw));
            assert!(c > absorption_cross_section(&cs, line.center_frequency - 0.1 * hw));
            let far = absorption_cross_section(&cs, ghz_to_rad(12.0));
            assert!(far / c < 1e-3);
        }
    }

    #[test]
    fn shifts_are_linear_and_odd_in_handedness() {
        let (cs, b) = beam();
        let zero = zeeman_shifts(&cs, &b).unwrap();
        assert_eq!((zero.delta_a, zero.delta_b, zero.scatter_rate), (0.0, 0.0, 0.0));
        let one = zeeman_shifts(&cs, &b.with_power(5.0)).unwrap();
        let two = zeeman_shifts(&cs, &b.with_power(10.0)).unwrap();
        assert_relative_eq!(two.delta_a, 2.0 * one.delta_a, max_relative = 1e-14);
        assert_relative_eq!(two.delta_b, 2.0 * one.delta_b, max_relative = 1e-14);
        assert_relative_eq!(two.scatter_rate, 2.0 * one.scatter_rate, max_relative = 1e-14);
        let mut flipped = b.with_power(5.0);
        flipped.handedness = flipped.handedness.flipped();
        let f = zeeman_shifts(&cs, &flipped).unwrap();
        assert_eq!(f.delta_a, -one.delta_a);
        assert_eq!(f.delta_b, -one.delta_b);
        assert_eq!(f.scatter_rate, one.scatter_rate);
    }

    #[test]
    fn calibrated_resonance_point() {
        let (cs, b) = beam();
        let s = zeeman_shifts(&cs, &b.with_power(9.7)).unwrap();
        let wb = larmor_frequency(&cs, 0.43e-3).unwrap();
        assert_relative_eq!(s.delta_b - s.delta_a, 2.0 * wb, max_relative = 1e-12);
        assert_relative_eq!(resonance_power(&cs, &b, 0.43e-3).unwrap(), 9.7, max_relative = 1e-12);
        assert_relative_eq!(resonance_power(&cs, &b, 0.86e-3).unwrap(), 19.4, max_relative = 1e-12);
        assert_eq!(resonance_power(&cs, &b, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            resonance_field(&cs, &b.with_power(9.7)).unwrap(),
            0.43e-3,
            max_relative = 1e-12
        );
        assert_eq!(resonance_field(&cs, &b).unwrap(), 0.0);
        assert_relative_eq!(s.scatter_rate, DEFAULT_SCATTER_RATE, max_relative = 1e-12);
    }

    #[test]
    fn wrong_handedness_is_unreachable() {
        let (cs, mut b) = beam();
        b.handedness = b.handedness.flipped();
        assert!(matches!(
            resonance_power(&cs, &b, 0.43e-3),
            Err(Error::UnreachableResonance)
        ));
        assert!(matches!(
            resonance_field(&cs, &b.with_power(1.0)),
            Err(Error::UnreachableResonance)
        ));
        assert!(resonance_power(&cs, &b, -1e-3).is_err());
    }

    #[test]
    fn zero_differential_profile_has_no_resonance() {
        let mut cs = cesium_defaults();
        for l in cs.d1_lines.iter_mut() {
            l.vector_weight = 0.0;
        }
        let nu = ghz_to_rad(12.0);
        assert!(matches!(
            calibrate_shift_scale(&cs, nu, 0.43e-3, 9.7),
            Err(Error::NoResonance)
        ));
        let b = BeamParams {
            power: 1.0,
            detuning: nu,
            handedness: Handedness::Plus,
            shift_scale: 1.0,
            scatter_scale: 0.0,
        };
        assert!(matches!(resonance_power(&cs, &b, 1e-3), Err(Error::NoResonance)));
    }

    #[test]
    fn calibration_scaling() {
        let cs = cesium_defaults();
        let nu = ghz_to_rad(12.0);
        let k1 = calibrate_shift_scale(&cs, nu, 0.43e-3, 9.7).unwrap();
        let k2 = calibrate_shift_scale(&cs, nu, 0.43e-3, 19.4).unwrap();
        assert_relative_eq!(k1, 2.0 * k2, max_relative = 1e-14);
        assert!(calibrate_shift_scale(&cs, nu, 0.0, 9.7).is_err());
        assert!(calibrate_shift_scale(&cs, nu, 0.43e-3, 0.0).is_err());
    }

    #[test]
    fn gauss_hermite_moments() {
        let rule = gauss_hermite(DOPPLER_NODES);
        let m0: f64 = rule.iter().map(|(_, w)| w).sum();
        let m2: f64 = rule.iter().map(|(x, w)| w * x * x).sum();
        let m4: f64 = rule.iter().map(|(x, w)| w * x.powi(4)).sum();
        assert_relative_eq!(m0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(m2, 1.0, epsilon = 1e-10);
        assert_relative_eq!(m4, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn doppler_broadening_matters_only_near_lines() {
        let mut cs = cesium_defaults();
        let nu = ghz_to_rad(12.0);
        let (sa0, sb0) = lightshift_cross_sections(&cs, nu).unwrap();
        cs.doppler_sigma = crate::units::mhz_to_rad(160.0);
        let (sa1, sb1) = lightshift_cross_sections(&cs, nu).unwrap();
        assert_relative_eq!(sa0, sa1, max_relative = 1e-2);
        assert_relative_eq!(sb0, sb1, max_relative = 2e-2);
        let center = cs.d1_lines[0].center_frequency;
        let peak_homogeneous = {
            let mut c = cs.clone();
            c.doppler_sigma = 0.0;
            absorption_cross_section(&c, center)
        };
        assert!(absorption_cross_section(&cs, center) < 0.1 * peak_homogeneous);
    }

    #[test]
    fn csv_export_header_and_errors() {
        let cs = cesium_defaults();
        let mut buf = Vec::new();
        write_cross_section_csv(&cs, &[ghz_to_rad(-2.0), ghz_to_rad(12.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("nu_ghz,sigma_a,sigma_b,sigma_abs\n"));
        assert_eq!(text.lines().count(), 3);
        let mut buf = Vec::new();
        assert!(write_cross_section_csv(&cs, &[0.0], &mut buf).is_err());
        assert!(buf.is_empty());
    }
}
