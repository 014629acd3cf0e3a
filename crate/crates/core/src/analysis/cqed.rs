//! Cavity-QED figures of merit in SI units.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Cs D2 wavelength in metres.
pub const CESIUM_D2_WAVELENGTH: f64 = 852e-9;

/// Cs D2 transverse dipole decay rate, 2π × 2.6 MHz in rad/s.
pub const CESIUM_GAMMA_PERP: f64 = 2.0 * PI * 2.6e6;

/// How the permittivity enters the coupling at the atom position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingWeight {
    /// `g = g₀·ε(r)|E(r)| / max(ε|E|)`.
    #[default]
    Epsilon,
    /// `g = g₀·√ε(r)|E(r)| / max(√ε|E|)`.
    SqrtEpsilon,
}

/// Mode properties needed for the cavity-QED figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqedInput {
    /// Quality factor entering the cavity decay rate.
    pub q: f64,
    /// Mode volume in units of `(λ/2)³`.
    pub v_mode: f64,
    /// Field ratio `w(r)|E(r)| / max(w|E|)` at the atom, with `w` set by the
    /// coupling weight.
    pub field_ratio: f64,
    pub gamma_perp: f64,
    /// Resonance wavelength in metres.
    pub wavelength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqedFigures {
    /// Cavity field decay rate κ = ω₀/4πQ, rad/s.
    pub kappa: f64,
    pub v_mode_half_wavelength: f64,
    pub v_mode_m3: f64,
    /// Reference volume cλ²/8πγ⊥, m³.
    pub v0_m3: f64,
    /// Vacuum Rabi frequency at the field maximum, rad/s.
    pub g0: f64,
    /// Coupling at the atom position, rad/s.
    pub g_atom: f64,
    pub n0: f64,
    pub m0: f64,
    pub gamma_perp: f64,
    pub wavelength: f64,
    /// The field vanishes at the atom, so N₀ and m₀ are unbounded.
    pub unbounded: bool,
}

impl CqedFigures {
    pub fn strong_coupling(&self) -> bool {
        self.n0 < 1.0 && self.m0 < 1.0
    }
}

/// Field ratio at the atom for the chosen weighting.
pub fn field_ratio(
    eps_atom: f64,
    field_atom: f64,
    max_weighted: f64,
    weight: CouplingWeight,
) -> f64 {
    if max_weighted == 0.0 {
        return 0.0;
    }
    match weight {
        CouplingWeight::Epsilon => eps_atom * field_atom / max_weighted,
        CouplingWeight::SqrtEpsilon => eps_atom.sqrt() * field_atom / max_weighted,
    }
}

pub fn cqed_figures(input: &CqedInput) -> CqedFigures {
    let lambda = input.wavelength;
    let gamma = input.gamma_perp;
    let omega = 2.0 * PI * SPEED_OF_LIGHT / lambda;
    let kappa = omega / (4.0 * PI * input.q);
    let v_mode_m3 = input.v_mode * (0.5 * lambda).powi(3);
    let v0_m3 = SPEED_OF_LIGHT * lambda * lambda / (8.0 * PI * gamma);
    let g0 = gamma * (v0_m3 / v_mode_m3).sqrt();
    let g_atom = g0 * input.field_ratio;
    let (n0, m0) = critical_numbers(kappa, gamma, g_atom);
    CqedFigures {
        kappa,
        v_mode_half_wavelength: input.v_mode,
        v_mode_m3,
        v0_m3,
        g0,
        g_atom,
        n0,
        m0,
        gamma_perp: gamma,
        wavelength: lambda,
        unbounded: g_atom == 0.0,
    }
}

/// Critical atom and photon numbers `N₀ = 2κγ⊥/g²`, `m₀ = (γ⊥/2g)²`.
pub fn critical_numbers(kappa: f64, gamma_perp: f64, g: f64) -> (f64, f64) {
    if g == 0.0 {
        return (f64::INFINITY, f64::INFINITY);
    }
    (2.0 * kappa * gamma_perp / (g * g), (gamma_perp / (2.0 * g)).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_identities() {
        let (n0, m0) = critical_numbers(3.0, 3.0, 3.0);
        assert_eq!(n0, 2.0);
        assert_eq!(m0, 0.25);
    }

    #[test]
    fn zero_field_is_flagged() {
        let f = cqed_figures(&CqedInput {
            q: 1000.0,
            v_mode: 0.1,
            field_ratio: 0.0,
            gamma_perp: CESIUM_GAMMA_PERP,
            wavelength: CESIUM_D2_WAVELENGTH,
        });
        assert!(f.unbounded && f.n0.is_infinite() && f.m0.is_infinite());
        assert!(!f.strong_coupling());
    }

    #[test]
    fn n0_falls_with_q_and_m0_does_not_change() {
        let base = CqedInput {
            q: 1000.0,
            v_mode: 0.19,
            field_ratio: 0.3,
            gamma_perp: CESIUM_GAMMA_PERP,
            wavelength: CESIUM_D2_WAVELENGTH,
        };
        let a = cqed_figures(&base);
        let b = cqed_figures(&CqedInput { q: 2000.0, ..base });
        assert!(b.n0 < a.n0);
        assert_eq!(a.m0, b.m0);
        assert!(a.g_atom <= a.g0);
    }

    #[test]
    fn cesium_reference_values() {
        // hand-evaluated for λ = 852 nm, γ⊥ = 2π·2.6 MHz, V_mode = 0.19 (λ/2)³
        let f = cqed_figures(&CqedInput {
            q: 6100.0,
            v_mode: 0.19,
            field_ratio: 1.0,
            gamma_perp: CESIUM_GAMMA_PERP,
            wavelength: CESIUM_D2_WAVELENGTH,
        });
        assert!((f.v0_m3 / 5.300377679505634e-13 - 1.0).abs() < 1e-12);
        assert!((f.g0 / 9.81330790098202e10 - 1.0).abs() < 1e-12);
        assert!((f.v_mode_m3 / 1.468866744e-20 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weighting_variants() {
        assert_eq!(field_ratio(4.0, 1.0, 8.0, CouplingWeight::Epsilon), 0.5);
        assert_eq!(field_ratio(4.0, 1.0, 8.0, CouplingWeight::SqrtEpsilon), 0.25);
    }
}
