//! Derived optical parameters of a two-mirror Fabry-Perot cavity.

use std::f64::consts::PI;

use crate::constants::PhysicalConstants;
use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Mirror separation (m).
    pub d: f64,
    /// Radius of curvature of mirror 1 (m).
    pub r1: f64,
    /// Radius of curvature of mirror 2 (m).
    pub r2: f64,
    /// Operating wavelength (m).
    pub wavelength: f64,
}

impl CavityGeometry {
    /// Checks `d > 0` and the stability condition `0 < g1·g2 < 1`.
    pub fn new(d: f64, r1: f64, r2: f64, wavelength: f64) -> Result<Self> {
        ensure_positive("d", d)?;
        ensure_positive("r1", r1)?;
        ensure_positive("r2", r2)?;
        ensure_positive("wavelength", wavelength)?;
        let geom = Self { d, r1, r2, wavelength };
        let (g1, g2) = geom.stability();
        let p = g1 * g2;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("geometry", format!("unstable resonator: g1·g2 = {p:.6} not in (0, 1)")));
        }
        Ok(geom)
    }

    /// The experiment's asymmetric fiber cavity.
    pub fn baseline() -> Self {
        Self::new(38.6e-6, 450e-6, 150e-6, 780.2e-9).expect("stable default geometry")
    }

    /// Stability parameters `g_i = 1 − d/r_i`.
    pub fn stability(&self) -> (f64, f64) {
        (1.0 - self.d / self.r1, 1.0 - self.d / self.r2)
    }

    /// Gaussian mode of the resonator.
    pub fn mode(&self) -> ModeGeometry {
        let (g1, g2) = self.stability();
        let denom = g1 + g2 - 2.0 * g1 * g2;
        let w0_sq = self.d * self.wavelength / PI * (g1 * g2 * (1.0 - g1 * g2)).sqrt() / denom;
        let w0 = w0_sq.sqrt();
        ModeGeometry {
            w0,
            waist_position: self.d * g2 * (1.0 - g1) / denom,
            rayleigh_length: PI * w0_sq / self.wavelength,
            d: self.d,
        }
    }
}

/// TEM00 mode of a two-mirror resonator; positions are measured from mirror 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeometry {
    pub w0: f64,
    pub waist_position: f64,
    pub rayleigh_length: f64,
    /// Cavity length the mode lives in (m).
    pub d: f64,
}

impl ModeGeometry {
    /// A mode of constant radius `w0` with its waist at the cavity centre
    /// and an effectively infinite Rayleigh length.
    pub fn uniform(w0: f64, d: f64) -> Self {
        Self { w0, waist_position: 0.5 * d, rayleigh_length: f64::INFINITY, d }
    }

    /// Beam radius `w(x)`.
    pub fn radius_at(&self, x: f64) -> f64 {
        let u = (x - self.waist_position) / self.rayleigh_length;
        self.w0 * (1.0 + u * u).sqrt()
    }

    /// `dw/dx` at `x`.
    pub fn radius_slope(&self, x: f64) -> f64 {
        let z = x - self.waist_position;
        let zr = self.rayleigh_length;
        if !zr.is_finite() {
            return 0.0;
        }
        self.w0 * z / (zr * zr * (1.0 + (z / zr).powi(2)).sqrt())
    }

    /// Wavefront radius of curvature `z + z_R²/z`, with `z` the distance from
    /// the waist. Infinite at the waist.
    pub fn wavefront_radius(&self, x: f64) -> f64 {
        let z = x - self.waist_position;
        if z == 0.0 {
            return f64::INFINITY;
        }
        z + self.rayleigh_length * self.rayleigh_length / z
    }

    /// Largest `w(x)/w0 − 1` over the cavity, reached at the mirror farther
    /// from the waist.
    pub fn max_radius_variation(&self) -> f64 {
        self.radius_at(0.0).max(self.radius_at(self.d)) / self.w0 - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorCoating {
    /// Per-mirror intensity transmission.
    pub transmission: f64,
    /// Per-mirror intensity loss (absorption and scatter).
    pub loss: f64,
}

impl MirrorCoating {
    pub fn new(transmission: f64, loss: f64) -> Result<Self> {
        ensure_positive("transmission", transmission)?;
        if !loss.is_finite() || loss < 0.0 {
            return Err(Error::invalid("loss", format!("must be >= 0, got {loss}")));
        }
        if transmission + loss >= 1.0 {
            return Err(Error::invalid("coating", "T + L must be < 1"));
        }
        Ok(Self { transmission, loss })
    }

    /// T = 31 ppm, L = 56 ppm.
    pub fn baseline() -> Self {
        Self { transmission: 31e-6, loss: 56e-6 }
    }

    /// Peak transmission of the empty cavity, `(T/(T+L))²`.
    pub fn resonant_transmission(&self) -> f64 {
        (self.transmission / (self.transmission + self.loss)).powi(2)
    }

    /// Loss outside the cavity (fiber coupling, detection) implied by a
    /// measured on-resonance transmission: `1 − measured/(T/(T+L))²`.
    pub fn infer_external_loss(&self, measured: f64) -> Result<f64> {
        let t = self.resonant_transmission();
        if !measured.is_finite() || measured < 0.0 {
            return Err(Error::invalid("measured transmission", format!("must be >= 0, got {measured}")));
        }
        if measured > t {
            return Err(Error::invalid(
                "measured transmission",
                format!("{measured} exceeds the resonant transmission {t:.6}"),
            ));
        }
        Ok(1.0 - measured / t)
    }
}

/// `F ≈ π/(T+L)`.
pub fn finesse(coating: &MirrorCoating) -> Result<f64> {
    let total = coating.transmission + coating.loss;
    if !(total > 0.0) {
        return Err(Error::invalid("coating", "T + L must be > 0"));
    }
    Ok(PI / total)
}

/// Field decay rate `κ = πc/(2Fd)` (rad/s).
pub fn field_decay_rate(finesse: f64, d: f64, c: f64) -> Result<f64> {
    ensure_positive("finesse", finesse)?;
    ensure_positive("d", d)?;
    Ok(PI * c / (2.0 * finesse * d))
}

/// Peak single-atom coupling `g0 = √(3λ²cγ/(π²w0²d))` (rad/s).
pub fn peak_coupling(constants: &PhysicalConstants, w0: f64, d: f64) -> Result<f64> {
    ensure_positive("w0", w0)?;
    ensure_positive("d", d)?;
    let l = constants.lambda_a;
    Ok((3.0 * l * l * constants.c * constants.gamma / (PI * PI * w0 * w0 * d)).sqrt())
}

/// Symmetric-cavity form `g0 = √(6λcγ/(πd√(2dr − d²)))`.
pub fn peak_coupling_symmetric(constants: &PhysicalConstants, d: f64, r: f64) -> Result<f64> {
    ensure_positive("d", d)?;
    ensure_positive("r", r)?;
    let inner = 2.0 * d * r - d * d;
    if !(inner > 0.0) {
        return Err(Error::invalid("r", "symmetric cavity needs 2r > d"));
    }
    let l = constants.lambda_a;
    Ok((6.0 * l * constants.c * constants.gamma / (PI * d * inner.sqrt())).sqrt())
}

/// `C = g²/(2κγ)`.
pub fn cooperativity(g: f64, kappa: f64, gamma: f64) -> f64 {
    g * g / (2.0 * kappa * gamma)
}

/// `n0 = γ²/(2g0²)`.
pub fn saturation_photon_number(gamma: f64, g0: f64) -> f64 {
    gamma * gamma / (2.0 * g0 * g0)
}

/// Optional replacements for derived quantities, all angular where relevant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CavityOverrides {
    pub finesse: Option<f64>,
    pub kappa: Option<f64>,
    pub g0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub finesse: f64,
    /// rad/s
    pub kappa: f64,
    pub w0: f64,
    pub waist_position: f64,
    pub rayleigh_length: f64,
    /// rad/s
    pub g0: f64,
    pub c0: f64,
    pub n0: f64,
    pub resonant_transmission: f64,
    pub mode: ModeGeometry,
}

impl CavityParams {
    /// Derives every parameter from geometry and coating. Overrides replace
    /// the finesse (and hence κ), κ itself, or g0; C0 and n0 always follow
    /// from the final g0 and κ.
    pub fn derive(
        geom: &CavityGeometry,
        coating: &MirrorCoating,
        constants: &PhysicalConstants,
        overrides: CavityOverrides,
    ) -> Result<Self> {
        let finesse = match overrides.finesse {
            Some(f) => ensure_positive("finesse", f)?,
            None => finesse(coating)?,
        };
        let kappa = match overrides.kappa {
            Some(k) => ensure_positive("kappa", k)?,
            None => field_decay_rate(finesse, geom.d, constants.c)?,
        };
        let mode = geom.mode();
        let g0 = match overrides.g0 {
            Some(g) => ensure_positive("g0", g)?,
            None => peak_coupling(constants, mode.w0, geom.d)?,
        };
        Ok(Self {
            finesse,
            kappa,
            w0: mode.w0,
            waist_position: mode.waist_position,
            rayleigh_length: mode.rayleigh_length,
            g0,
            c0: cooperativity(g0, kappa, constants.gamma),
            n0: saturation_photon_number(constants.gamma, g0),
            resonant_transmission: coating.resonant_transmission(),
            mode,
        })
    }

    /// The experiment's cavity with the measured finesse F = 37000.
    pub fn baseline(constants: &PhysicalConstants) -> Self {
        Self::derive(
            &CavityGeometry::baseline(),
            &MirrorCoating::baseline(),
            constants,
            CavityOverrides { finesse: Some(37_000.0), ..Default::default() },
        )
        .expect("baseline cavity parameters are valid")
    }
}
