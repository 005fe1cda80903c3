//! Hyperfine-Bloch dynamics of the transverse moments `(⟨F₊ᵃ⟩, ⟨F₊ᵇ⟩)` in
//! the low-polarization regime:
//!
//! ```text
//! d/dt F₊ᵃ = -(iω_a + R₁₁) F₊ᵃ - R₁₂ F₊ᵇ
//! d/dt F₊ᵇ = -(iω_b + R₂₂) F₊ᵇ - R₂₁ F₊ᵃ
//! ```
//!
//! The relaxation matrix is `R = R_se·M_se + R_sr·M_sr + (R_u + R_P)·1`.
//! `M_se` conserves the total moment (zero column sums), annihilates the
//! spin-temperature direction `(w_a, w_b)` with `w_F = Σ_M M²`, and has unit
//! nonzero eigenvalue. `M_sr` destroys the electron coherence
//! `S₊ = (F₊ᵃ − F₊ᵇ)/(2I+1)` at unit rate while conserving the nuclear coherence.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::species::AlkaliSpecies;

pub type DynamicsMatrix = Matrix2<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationRates {
    /// Spin-exchange rate, s⁻¹.
    pub r_se: f64,
    /// Electron-spin destruction rate, s⁻¹.
    pub r_sr: f64,
    /// Uniform destruction of the total spin, s⁻¹.
    pub r_u: f64,
    /// Light-induced scattering rate, s⁻¹.
    #[serde(default)]
    pub r_p: f64,
}

impl RelaxationRates {
    /// Paraffin-coated cesium cell: `R_se = 170`, `R_sr = 85`, `R_u = 10` s⁻¹, no light.
    pub const CESIUM_CELL: RelaxationRates = RelaxationRates {
        r_se: 170.0,
        r_sr: 85.0,
        r_u: 10.0,
        r_p: 0.0,
    };

    pub fn new(r_se: f64, r_sr: f64, r_u: f64, r_p: f64) -> Self {
        RelaxationRates { r_se, r_sr, r_u, r_p }
    }

    pub fn with_scatter(mut self, r_p: f64) -> Self {
        self.r_p = r_p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("R_se", self.r_se),
            ("R_sr", self.r_sr),
            ("R_u", self.r_u),
            ("R_P", self.r_p),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for RelaxationRates {
    fn default() -> Self {
        Self::CESIUM_CELL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationMatrix {
    pub r11: f64,
    pub r12: f64,
    pub r21: f64,
    pub r22: f64,
}

impl RelaxationMatrix {
    pub fn to_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.r11, self.r12, self.r21, self.r22)
    }
}

/// The two dimensionless building blocks of the relaxation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationModel {
    pub m_se: Matrix2<f64>,
    pub m_sr: Matrix2<f64>,
}

impl RelaxationModel {
    /// Construct `M_se` and `M_sr` for nuclear spin `I = i2/2`.
    ///
    /// For I = 7/2: `M_se = [[7, −15], [−7, 15]]/22`, `M_sr = [[9, −9], [−7, 7]]/16`.
    pub fn for_nuclear_spin(i2: u32) -> Self {
        let fa = (i2 + 1) as f64 / 2.0;
        let fb = (i2 - 1) as f64 / 2.0;
        let w = |f: f64| f * (f + 1.0) * (2.0 * f + 1.0) / 3.0;
        let (wa, wb) = (w(fa), w(fb));
        let m_se = Matrix2::new(wb, -wa, -wb, wa) / (wa + wb);

        // S₊ = (F₊ᵃ − F₊ᵇ)/(2I+1), I₊ = p_a F₊ᵃ + p_b F₊ᵇ with p_a = 2I/(2I+1), p_b = (2I+2)/(2I+1)
        let n = (i2 + 1) as f64;
        let i = i2 as f64 / 2.0;
        let (va, vb) = (i + 1.0, -i);
        let m_sr = Matrix2::new(va, -va, vb, -vb) / n;
        RelaxationModel { m_se, m_sr }
    }

    pub fn for_species(species: &AlkaliSpecies) -> Self {
        Self::for_nuclear_spin(species.nuclear_spin_2i)
    }

    pub fn build(&self, rates: &RelaxationRates) -> Result<RelaxationMatrix> {
        rates.validate()?;
        let r = self.m_se * rates.r_se + self.m_sr * rates.r_sr + Matrix2::identity() * (rates.r_u + rates.r_p);
        Ok(RelaxationMatrix {
            r11: r[(0, 0)],
            r12: r[(0, 1)],
            r21: r[(1, 0)],
            r22: r[(1, 1)],
        })
    }

    /// Right null vector of `M_se` normalized to unit sum: the spin-temperature
    /// direction that exchange leaves untouched.
    pub fn slow_direction(&self) -> Vector2<f64> {
        let m = &self.m_se;
        // kernel of a rank-one 2x2 matrix with zero column sums
        let v = if m[(0, 1)].abs() + m[(0, 0)].abs() > 0.0 {
            Vector2::new(-m[(0, 1)], m[(0, 0)])
        } else {
            Vector2::new(-m[(1, 1)], m[(1, 0)])
        };
        v / (v[0] + v[1])
    }

    /// Nonzero eigenvalue of `M_se` (its trace, since the other is zero).
    pub fn exchange_eigenvalue(&self) -> f64 {
        self.m_se.trace()
    }

    /// Coefficient `c` in `Γ ≈ Γ₀ + c|ω_a − ω_b|²/R_se`; `105/484` for I = 7/2.
    pub fn quadratic_coefficient(&self) -> f64 {
        let n = self.slow_direction();
        n[0] * n[1] / self.exchange_eigenvalue()
    }

    /// Coefficient of `R_sr` in the synchronized slow-mode rate; `1/22` for I = 7/2.
    pub fn destruction_fraction(&self) -> f64 {
        let n = self.slow_direction();
        (self.m_sr * n).sum()
    }
}

/// `R` for the given rates using the species' default matrices.
pub fn build_relaxation_matrix(rates: &RelaxationRates, species: &AlkaliSpecies) -> Result<RelaxationMatrix> {
    RelaxationModel::for_species(species).build(rates)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseState {
    pub f_plus_a: Complex64,
    pub f_plus_b: Complex64,
}

impl TransverseState {
    pub fn new(f_plus_a: Complex64, f_plus_b: Complex64) -> Self {
        TransverseState { f_plus_a, f_plus_b }
    }

    pub fn real(a: f64, b: f64) -> Self {
        Self::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    /// Weakly polarized spin-temperature state tipped into the transverse plane,
    /// normalized so `⟨F₊ᵃ⟩ + ⟨F₊ᵇ⟩ = 1`.
    pub fn spin_temperature(model: &RelaxationModel) -> Self {
        let n = model.slow_direction();
        Self::real(n[0], n[1])
    }

    pub fn as_vector(&self) -> Vector2<Complex64> {
        Vector2::new(self.f_plus_a, self.f_plus_b)
    }

    pub fn from_vector(v: Vector2<Complex64>) -> Self {
        Self::new(v[0], v[1])
    }
}

/// `A = −(i·diag(ω_a, ω_b) + R)`, so that `d/dt (F₊ᵃ, F₊ᵇ) = A (F₊ᵃ, F₊ᵇ)`.
pub fn dynamics_matrix(r: &RelaxationMatrix, omega_a: f64, omega_b: f64) -> DynamicsMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Matrix2::new(c(-r.r11, -omega_a), c(-r.r12, 0.0), c(-r.r21, 0.0), c(-r.r22, -omega_b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Eigenvalue of the dynamics matrix, s⁻¹. The mode evolves as `e^{λt}`.
    pub lambda: Complex64,
    /// Unit-norm eigenvector.
    pub vector: Vector2<Complex64>,
}

impl Mode {
    /// Decay rate `−Re λ`.
    pub fn rate(&self) -> f64 {
        -self.lambda.re
    }

    /// Precession frequency `−Im λ` (the sign convention of `e^{−iωt}`).
    pub fn frequency(&self) -> f64 {
        -self.lambda.im
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenModes {
    /// Sorted by decay rate, slowest first; equal rates put the smaller |ω| first.
    pub modes: [Mode; 2],
    /// Γ: the smallest decay rate.
    pub fundamental_rate: f64,
    /// ω̄: the precession frequency of the slowest mode.
    pub fundamental_freq: f64,
    /// Eigenvalues coincide (to rounding); the eigenvectors may be parallel.
    pub degenerate: bool,
}

fn matrix_scale(a: &DynamicsMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn eigenvector(a: &DynamicsMatrix, lambda: Complex64, fallback: Vector2<Complex64>) -> Vector2<Complex64> {
    let v1 = Vector2::new(a[(0, 1)], lambda - a[(0, 0)]);
    let v2 = Vector2::new(lambda - a[(1, 1)], a[(1, 0)]);
    let (n1, n2) = (v1.norm(), v2.norm());
    let tiny = 1e-300_f64.max(matrix_scale(a) * 1e-14);
    if n1.max(n2) <= tiny {
        return fallback;
    }
    if n1 >= n2 {
        v1 / Complex64::new(n1, 0.0)
    } else {
        v2 / Complex64::new(n2, 0.0)
    }
}

/// Closed-form eigen-decomposition of a complex 2×2 dynamics matrix.
pub fn eigenmodes(a: &DynamicsMatrix) -> EigenModes {
    let half_trace = (a[(0, 0)] + a[(1, 1)]) * 0.5;
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = (half_trace * half_trace - det).sqrt();
    let degenerate = disc.norm() <= 1e-12 * matrix_scale(a).max(1e-300);
    let (l1, l2) = (half_trace + disc, half_trace - disc);

    let e1 = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let e2 = Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let mut m1 = Mode {
        lambda: l1,
        vector: eigenvector(a, l1, e1),
    };
    let mut m2 = Mode {
        lambda: l2,
        vector: eigenvector(a, l2, e2),
    };
    if degenerate && (m1.vector - m2.vector).norm() < 1e-12 && a[(0, 1)].norm() == 0.0 && a[(1, 0)].norm() == 0.0 {
        m1.vector = e1;
        m2.vector = e2;
    }
    let mut modes = [m1, m2];
    modes.sort_by(|x, y| {
        x.rate()
            .total_cmp(&y.rate())
            .then(x.frequency().abs().total_cmp(&y.frequency().abs()))
    });
    EigenModes {
        modes,
        fundamental_rate: modes[0].rate(),
        fundamental_freq: modes[0].frequency(),
        degenerate,
    }
}

/// Propagator `exp(A t)`, written via Sylvester's formula with the divided
/// difference evaluated stably near degenerate eigenvalues.
pub fn propagator(a: &DynamicsMatrix, t: f64) -> Result<DynamicsMatrix> {
    ensure_finite("time", t)?;
    if t < 0.0 {
        return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
    }
    let mu = (a[(0, 0)] + a[(1, 1)]) * 0.5;
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let s = (mu * mu - det).sqrt();
    let st = s * t;
    let emu = (mu * t).exp();
    // exp(At) = e^{μt}[cosh(st)·1 + sinh(st)/s·(A − μ1)]
    let (cosh_part, sinh_over_s) = if st.norm() < 1e-4 {
        let st2 = st * st;
        (
            emu * (Complex64::new(1.0, 0.0) + st2 / 2.0 + st2 * st2 / 24.0),
            emu * t * (Complex64::new(1.0, 0.0) + st2 / 6.0 + st2 * st2 / 120.0),
        )
    } else {
        let (ep, em) = (((mu + s) * t).exp(), ((mu - s) * t).exp());
        ((ep + em) * 0.5, (ep - em) / (s * 2.0))
    };
    let shifted = a - DynamicsMatrix::identity() * mu;
    Ok(DynamicsMatrix::identity() * cosh_part + shifted * sinh_over_s)
}

/// `exp(A t)·state0`.
pub fn evolve(state0: &TransverseState, a: &DynamicsMatrix, t: f64) -> Result<TransverseState> {
    let u = propagator(a, t)?;
    Ok(TransverseState::from_vector(u * state0.as_vector()))
}

/// Mean electron spin along x: `⟨S_x⟩ = Re(F₊ᵃ − F₊ᵇ)/(2I+1)`.
pub fn observable_sx(state: &TransverseState, species: &AlkaliSpecies) -> f64 {
    (state.f_plus_a - state.f_plus_b).re / species.multiplicity()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerfAsymptotics {
    /// Synchronized rate `Γ₀ = R_u + R_P + R_sr/22` (for I = 7/2).
    pub gamma0: f64,
    /// `Γ₀ + c|ω_a − ω_b|²/R_se`.
    pub gamma: f64,
    /// `(15ω_a + 7ω_b)/22` (for I = 7/2).
    pub omega_bar: f64,
}

/// Rapid-exchange expansion of the slowest mode to second order in `1/R_se`.
pub fn serf_asymptotics(
    rates: &RelaxationRates,
    model: &RelaxationModel,
    omega_a: f64,
    omega_b: f64,
) -> Result<SerfAsymptotics> {
    rates.validate()?;
    if rates.r_se == 0.0 {
        return Err(Error::InvalidInput("rapid-exchange expansion needs R_se > 0".into()));
    }
    let n = model.slow_direction();
    let gamma0 = rates.r_u + rates.r_p + rates.r_sr * model.destruction_fraction();
    let dw = omega_a - omega_b;
    Ok(SerfAsymptotics {
        gamma0,
        gamma: gamma0 + model.quadratic_coefficient() * dw * dw / rates.r_se,
        omega_bar: n[0] * omega_a + n[1] * omega_b,
    })
}

/// Half width `√(R_se Γ₀)` (rad/s) of the protected valley in `|ω_a − ω_b|`.
pub fn protected_valley_width(rates: &RelaxationRates, model: &RelaxationModel) -> Result<f64> {
    let asym = serf_asymptotics(rates, model, 0.0, 0.0)?;
    Ok((rates.r_se * asym.gamma0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::cesium_defaults;
    use approx::assert_relative_eq;

    fn cs_model() -> RelaxationModel {
        RelaxationModel::for_nuclear_spin(7)
    }

    #[test]
    fn cesium_matrices() {
        let m = cs_model();
        let se = Matrix2::new(7.0, -15.0, -7.0, 15.0) / 22.0;
        let sr = Matrix2::new(9.0, -9.0, -7.0, 7.0) / 16.0;
        assert!((m.m_se - se).norm() < 1e-15);
        assert!((m.m_sr - sr).norm() < 1e-15);
        assert_relative_eq!(m.quadratic_coefficient(), 105.0 / 484.0, epsilon = 1e-15);
        assert_relative_eq!(m.destruction_fraction(), 1.0 / 22.0, epsilon = 1e-15);
        let n = m.slow_direction();
        assert_relative_eq!(n[0], 15.0 / 22.0, epsilon = 1e-15);
    }

    #[test]
    fn construction_rules_hold_for_other_spins() {
        for i2 in [1u32, 3, 5, 7, 9] {
            let m = RelaxationModel::for_nuclear_spin(i2);
            let ones = Vector2::new(1.0, 1.0);
            assert!((m.m_se.transpose() * ones).norm() < 1e-14, "column sums vanish");
            assert!((m.m_se * m.slow_direction()).norm() < 1e-14);
            assert_relative_eq!(m.exchange_eigenvalue(), 1.0, epsilon = 1e-14);
            // nuclear coherence conserved, electron coherence decays at unit rate
            let n = (i2 + 1) as f64;
            let nuclear = Vector2::new(i2 as f64 / n, (i2 + 2) as f64 / n);
            let electron = Vector2::new(1.0 / n, -1.0 / n);
            assert!((m.m_sr.transpose() * nuclear).norm() < 1e-14);
            assert!((m.m_sr.transpose() * electron - electron).norm() < 1e-14);
        }
    }

    #[test]
    fn default_relaxation_matrix() {
        let cs = cesium_defaults();
        let r = build_relaxation_matrix(&RelaxationRates::CESIUM_CELL, &cs).unwrap();
        assert!((r.r11 - 111.9).abs() < 0.1);
        assert!((r.r12 + 163.7).abs() < 0.1);
        assert!((r.r21 + 91.3).abs() < 0.1);
        assert!((r.r22 - 163.1).abs() < 0.1);

        let se_only = build_relaxation_matrix(&RelaxationRates::new(170.0, 0.0, 0.0, 0.0), &cs).unwrap();
        assert!((se_only.r11 + se_only.r21).abs() < 1e-12);
        assert!((se_only.r12 + se_only.r22).abs() < 1e-12);

        assert!(build_relaxation_matrix(&RelaxationRates::new(-1.0, 0.0, 0.0, 0.0), &cs).is_err());
    }

    #[test]
    fn slow_mode_projection_of_destruction() {
        let cs = cesium_defaults();
        let r = build_relaxation_matrix(&RelaxationRates::new(0.0, 85.0, 0.0, 0.0), &cs).unwrap();
        let proj = (Vector2::new(1.0, 1.0).transpose() * r.to_matrix() * Vector2::new(15.0, 7.0))[0] / 22.0;
        assert_relative_eq!(proj, 85.0 / 22.0, epsilon = 1e-12);
    }

    #[test]
    fn dynamics_matrix_structure() {
        let r = RelaxationMatrix {
            r11: 1.0,
            r12: 2.0,
            r21: 3.0,
            r22: 4.0,
        };
        let a = dynamics_matrix(&r, 5.0, 6.0);
        assert_eq!(a[(0, 1)], Complex64::new(-2.0, 0.0));
        assert_eq!(a[(1, 0)], Complex64::new(-3.0, 0.0));
        assert_eq!(a.trace(), Complex64::new(-5.0, -11.0));
        let zero = RelaxationMatrix {
            r11: 0.0,
            r12: 0.0,
            r21: 0.0,
            r22: 0.0,
        };
        assert_eq!(
            dynamics_matrix(&zero, 2.0, 2.0),
            DynamicsMatrix::identity() * Complex64::new(0.0, -2.0)
        );
    }

    #[test]
    fn pure_precession_modes() {
        let zero = RelaxationMatrix {
            r11: 0.0,
            r12: 0.0,
            r21: 0.0,
            r22: 0.0,
        };
        let em = eigenmodes(&dynamics_matrix(&zero, 7.0, 7.0));
        assert!(em.degenerate);
        for m in em.modes {
            assert_eq!(m.rate(), 0.0);
            assert_eq!(m.frequency(), 7.0);
        }
        assert!((em.modes[0].vector.dot(&em.modes[1].vector.conjugate())).norm() < 1e-15);
    }

    #[test]
    fn modes_at_resonance_and_without_light() {
        let cs = cesium_defaults();
        let r = build_relaxation_matrix(&RelaxationRates::CESIUM_CELL, &cs).unwrap();
        let w = crate::species::larmor_frequency(&cs, 0.43e-3).unwrap();
        let synced = eigenmodes(&dynamics_matrix(&r, w, w));
        assert!((synced.fundamental_rate - 12.6).abs() < 0.5);
        assert!((synced.modes[1].rate() - 262.4).abs() < 0.5);
        assert_relative_eq!(synced.fundamental_freq, w, max_relative = 1e-12);

        let free = eigenmodes(&dynamics_matrix(&r, w, -w));
        assert!((free.fundamental_rate - 111.7).abs() < 1.0);
        assert!((free.modes[1].rate() - 163.3).abs() < 1.0);
    }

    #[test]
    fn defective_matrix_is_flagged() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let a = Matrix2::new(c(-1.0), c(1.0), c(0.0), c(-1.0));
        let em = eigenmodes(&a);
        assert!(em.degenerate);
        assert_eq!(em.fundamental_rate, 1.0);
        let s0 = TransverseState::real(0.0, 1.0);
        let s = evolve(&s0, &a, 2.0).unwrap();
        // Jordan block: [e^{-t}·t, e^{-t}]
        assert_relative_eq!(s.f_plus_a.re, 2.0 * (-2.0f64).exp(), epsilon = 1e-14);
        assert_relative_eq!(s.f_plus_b.re, (-2.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn evolve_basics() {
        let zero = RelaxationMatrix {
            r11: 0.0,
            r12: 0.0,
            r21: 0.0,
            r22: 0.0,
        };
        let a = dynamics_matrix(&zero, 3.0, 3.0);
        let s0 = TransverseState::real(1.0, -0.5);
        assert_eq!(evolve(&s0, &a, 0.0).unwrap(), s0);
        let s = evolve(&s0, &a, 0.7).unwrap();
        let phase = Complex64::new(0.0, -2.1).exp();
        assert!((s.f_plus_a - phase).norm() < 1e-14);
        assert!((s.f_plus_b + phase * 0.5).norm() < 1e-14);
        assert!(evolve(&s0, &a, -1.0).is_err());
    }

    #[test]
    fn sx_projection() {
        let cs = cesium_defaults();
        assert_eq!(observable_sx(&TransverseState::real(1.0, 1.0), &cs), 0.0);
        assert_eq!(observable_sx(&TransverseState::real(1.0, -1.0), &cs), 0.25);
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(observable_sx(&TransverseState::new(i, i), &cs), 0.0);
    }

    #[test]
    fn asymptotic_formulas() {
        let m = cs_model();
        let fast = RelaxationRates::new(1e6, 85.0, 10.0, 0.0);
        let a = serf_asymptotics(&fast, &m, 100.0, 100.0).unwrap();
        assert!((a.gamma - 13.86).abs() < 0.01);
        assert_eq!(a.gamma, a.gamma0);
        assert_relative_eq!(a.omega_bar, 100.0, epsilon = 1e-12);
        let b = serf_asymptotics(&fast, &m, 110.0, -110.0).unwrap();
        assert_relative_eq!(b.omega_bar, 40.0, epsilon = 1e-12);
        assert!(serf_asymptotics(&RelaxationRates::new(0.0, 1.0, 1.0, 0.0), &m, 0.0, 0.0).is_err());
    }

    #[test]
    fn valley_width() {
        let m = cs_model();
        let w = protected_valley_width(&RelaxationRates::CESIUM_CELL, &m).unwrap();
        assert!((w - 48.5).abs() < 0.5);
        let w4 = protected_valley_width(&RelaxationRates::new(680.0, 85.0, 10.0, 0.0), &m).unwrap();
        assert_relative_eq!(w4, 2.0 * w, max_relative = 1e-14);
        assert_eq!(
            protected_valley_width(&RelaxationRates::new(170.0, 0.0, 0.0, 0.0), &m).unwrap(),
            0.0
        );
    }
}
