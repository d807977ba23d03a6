//! Physical constants for ⁸⁷Rb on the D2 line, and the Hz ↔ rad/s convention.
//!
//! Every angular frequency inside the crate is in rad/s. Anything crossing an
//! external boundary (config files, CSV columns) is a linear frequency in Hz
//! and carries an `_hz` suffix, meaning ω/2π.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Converts a linear frequency (Hz) to an angular one (rad/s).
#[inline]
pub fn from_hz(hz: f64) -> f64 {
    TWO_PI * hz
}

/// Converts an angular frequency (rad/s) to a linear one (Hz).
#[inline]
pub fn to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}

/// s-wave scattering length of ⁸⁷Rb in |F=2, m_F=2⟩ (m).
pub const RB87_SCATTERING_LENGTH: f64 = 5.3e-9;

/// Splitting between the two orthogonal linear-polarization TEM00 modes of
/// the cavity (Hz). Recorded for reports only; not part of any model.
pub const POLARIZATION_MODE_SPLITTING_HZ: f64 = 540e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Speed of light (m/s).
    pub c: f64,
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// ⁸⁷Rb atomic mass (kg).
    pub m_rb87: f64,
    /// Probe (D2) wavelength (m).
    pub lambda_a: f64,
    /// Atomic half-linewidth γ (rad/s). 2γ is the spontaneous emission rate.
    pub gamma: f64,
    /// Ground-state hyperfine splitting (rad/s).
    pub delta_hfs: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::rb87_d2()
    }
}

impl PhysicalConstants {
    /// ⁸⁷Rb D2 values, with γ = 2π × 3.0 MHz rather than the tabulated
    /// linewidth, so that derived cavity numbers line up with the
    /// experiment's quoted ones.
    pub fn rb87_d2() -> Self {
        Self {
            c: 299_792_458.0,
            hbar: 1.054_571_817e-34,
            k_b: 1.380_649e-23,
            m_rb87: 1.443_160_648e-25,
            lambda_a: 780.2e-9,
            gamma: from_hz(3.0e6),
            delta_hfs: from_hz(6.8e9),
        }
    }

    /// Probe wavenumber k = 2π/λ_A (1/m).
    pub fn wavenumber(&self) -> f64 {
        TWO_PI / self.lambda_a
    }

    /// Recoil velocity ħk/m (m/s).
    pub fn v_rec(&self) -> f64 {
        self.hbar * self.wavenumber() / self.m_rb87
    }

    /// Photon momentum ħk (kg·m/s).
    pub fn photon_momentum(&self) -> f64 {
        self.hbar * self.wavenumber()
    }

    /// Recoil energy ħ²k²/2m (J).
    pub fn recoil_energy(&self) -> f64 {
        let p = self.photon_momentum();
        p * p / (2.0 * self.m_rb87)
    }

    pub fn all_positive(&self) -> bool {
        [self.c, self.hbar, self.k_b, self.m_rb87, self.lambda_a, self.gamma, self.delta_hfs]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_positive_and_consistent() {
        let c = PhysicalConstants::default();
        assert!(c.all_positive());
        let v = c.hbar * (TWO_PI / c.lambda_a) / c.m_rb87;
        assert!((c.v_rec() - v).abs() <= 1e-12 * v);
        // ~5.9 mm/s for Rb D2
        assert!((c.v_rec() - 5.885e-3).abs() < 5e-6);
    }

    #[test]
    fn hz_round_trip() {
        let w = from_hz(53e6);
        assert!((to_hz(w) - 53e6).abs() < 1e-6);
    }

    #[test]
    fn recoil_frequency() {
        let c = PhysicalConstants::default();
        let e_rec_hz = to_hz(c.recoil_energy() / c.hbar);
        assert!((e_rec_hz - 3.77e3).abs() < 5.0, "{e_rec_hz}");
    }
}
