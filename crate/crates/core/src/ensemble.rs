//! Atomic samples: trap configurations, thermal and condensed density
//! profiles, and the sizes that follow from trap frequencies.

use std::f64::consts::PI;

use crate::constants::{PhysicalConstants, TWO_PI};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::numerics::{integrate, Axis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrapKind {
    Magnetic,
    Lattice,
    Combined,
}

/// Harmonic trap with linear frequencies (Hz) along x, y, z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    pub nu: [f64; 3],
    pub kind: TrapKind,
    pub center: [f64; 3],
}

impl TrapConfig {
    pub fn new(nu: [f64; 3], kind: TrapKind) -> Result<Self> {
        for v in nu {
            ensure_non_negative("trap frequency", v)?;
        }
        Ok(Self { nu, kind, center: [0.0; 3] })
    }

    pub fn with_center(mut self, center: [f64; 3]) -> Self {
        self.center = center;
        self
    }

    /// Superposes two traps; curvatures add, so frequencies add in quadrature
    /// per axis.
    pub fn combine(&self, other: &TrapConfig) -> TrapConfig {
        let mut nu = [0.0; 3];
        for (i, v) in nu.iter_mut().enumerate() {
            *v = quadrature_sum(self.nu[i], other.nu[i]);
        }
        TrapConfig { nu, kind: TrapKind::Combined, center: self.center }
    }

    /// Geometric-mean frequency (Hz).
    pub fn mean_frequency(&self) -> f64 {
        (self.nu[0] * self.nu[1] * self.nu[2]).cbrt()
    }
}

/// `√(a² + b²)`.
pub fn quadrature_sum(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Thermal rms widths `σ_i = √(k_B·T/m)/(2π·ν_i)`.
pub fn thermal_widths(trap: &TrapConfig, temperature: f64, constants: &PhysicalConstants) -> Result<[f64; 3]> {
    ensure_positive("temperature", temperature)?;
    let v = (constants.k_b * temperature / constants.m_rb87).sqrt();
    let mut out = [0.0; 3];
    for (i, s) in out.iter_mut().enumerate() {
        let nu = ensure_positive("trap frequency", trap.nu[i])?;
        *s = v / (TWO_PI * nu);
    }
    Ok(out)
}

/// Inverse of [`thermal_widths`] along one axis: the temperature at which a
/// trap of frequency `nu` produces rms width `sigma`.
pub fn temperature_from_width(sigma: f64, nu: f64, constants: &PhysicalConstants) -> Result<f64> {
    ensure_positive("sigma", sigma)?;
    ensure_positive("trap frequency", nu)?;
    let v = TWO_PI * nu * sigma;
    Ok(constants.m_rb87 * v * v / constants.k_b)
}

/// Harmonic-oscillator ground-state radius `√(ħ/(m·2π·ν))`.
pub fn oscillator_length(nu: f64, constants: &PhysicalConstants) -> Result<f64> {
    ensure_positive("trap frequency", nu)?;
    Ok((constants.hbar / (constants.m_rb87 * TWO_PI * nu)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThomasFermiRadii {
    pub radii: [f64; 3],
    /// `15·N·a/ā_ho`; the Thomas-Fermi picture needs this ≫ 1.
    pub parameter: f64,
}

impl ThomasFermiRadii {
    pub fn regime_valid(&self) -> bool {
        self.parameter >= 1.0
    }
}

/// 3D Thomas-Fermi radii `R_i = ā·(15Na/ā)^{1/5}·ω̄/ω_i`.
pub fn thomas_fermi_radii(
    n: f64,
    trap: &TrapConfig,
    scattering_length: f64,
    constants: &PhysicalConstants,
) -> Result<ThomasFermiRadii> {
    if !(n >= 1.0) {
        return Err(Error::invalid("N", format!("must be >= 1, got {n}")));
    }
    ensure_positive("scattering length", scattering_length)?;
    for v in trap.nu {
        ensure_positive("trap frequency", v)?;
    }
    let nu_bar = trap.mean_frequency();
    let a_ho = oscillator_length(nu_bar, constants)?;
    let parameter = 15.0 * n * scattering_length / a_ho;
    let r_bar = a_ho * parameter.powf(0.2);
    let mut radii = [0.0; 3];
    for (i, r) in radii.iter_mut().enumerate() {
        *r = r_bar * nu_bar / trap.nu[i];
    }
    Ok(ThomasFermiRadii { radii, parameter })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileShape {
    /// Product of normal densities with rms widths `sigma`.
    Gaussian { sigma: [f64; 3], temperature: Option<f64> },
    /// Inverted parabola vanishing on the ellipsoid with semi-axes `radii`.
    ThomasFermi { radii: [f64; 3] },
    /// All atoms at one point.
    Point,
}

/// Atomic density ρ(r) with total atom number `n` centred at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityProfile {
    pub shape: ProfileShape,
    pub n: f64,
    pub center: [f64; 3],
}

impl DensityProfile {
    pub fn gaussian(n: f64, center: [f64; 3], sigma: [f64; 3]) -> Result<Self> {
        Self::validate_n(n)?;
        for s in sigma {
            ensure_positive("sigma", s)?;
        }
        Ok(Self { shape: ProfileShape::Gaussian { sigma, temperature: None }, n, center })
    }

    /// Gaussian cloud in thermal equilibrium in `trap`.
    pub fn thermal(n: f64, trap: &TrapConfig, temperature: f64, constants: &PhysicalConstants) -> Result<Self> {
        Self::validate_n(n)?;
        let sigma = thermal_widths(trap, temperature, constants)?;
        Ok(Self { shape: ProfileShape::Gaussian { sigma, temperature: Some(temperature) }, n, center: trap.center })
    }

    pub fn thomas_fermi(n: f64, center: [f64; 3], radii: [f64; 3]) -> Result<Self> {
        Self::validate_n(n)?;
        for r in radii {
            ensure_positive("Thomas-Fermi radius", r)?;
        }
        Ok(Self { shape: ProfileShape::ThomasFermi { radii }, n, center })
    }

    pub fn point(n: f64, center: [f64; 3]) -> Result<Self> {
        Self::validate_n(n)?;
        Ok(Self { shape: ProfileShape::Point, n, center })
    }

    fn validate_n(n: f64) -> Result<()> {
        ensure_non_negative("N", n).map(|_| ())
    }

    pub fn with_n(mut self, n: f64) -> Self {
        self.n = n;
        self
    }

    pub fn with_center(mut self, center: [f64; 3]) -> Self {
        self.center = center;
        self
    }

    /// rms width per axis (zero for a point ensemble). For a Thomas-Fermi
    /// profile this is `R_i/√7`.
    pub fn rms_widths(&self) -> [f64; 3] {
        match self.shape {
            ProfileShape::Gaussian { sigma, .. } => sigma,
            ProfileShape::ThomasFermi { radii } => radii.map(|r| r / 7f64.sqrt()),
            ProfileShape::Point => [0.0; 3],
        }
    }

    /// Half-extent per axis beyond which the density is negligible
    /// (6σ for Gaussians, R for Thomas-Fermi).
    pub fn extent(&self) -> [f64; 3] {
        match self.shape {
            ProfileShape::Gaussian { sigma, .. } => sigma.map(|s| 6.0 * s),
            ProfileShape::ThomasFermi { radii } => radii,
            ProfileShape::Point => [0.0; 3],
        }
    }

    /// ρ(r)/N. Zero everywhere for a point ensemble; callers treat the
    /// delta function themselves.
    pub fn normalized_density(&self, r: [f64; 3]) -> f64 {
        let d = [r[0] - self.center[0], r[1] - self.center[1], r[2] - self.center[2]];
        match self.shape {
            ProfileShape::Gaussian { sigma, .. } => {
                let mut q = 0.0;
                for i in 0..3 {
                    q += (d[i] / sigma[i]).powi(2);
                }
                (-0.5 * q).exp() / ((2.0 * PI).powf(1.5) * sigma[0] * sigma[1] * sigma[2])
            }
            ProfileShape::ThomasFermi { radii } => {
                let mut q = 0.0;
                for i in 0..3 {
                    q += (d[i] / radii[i]).powi(2);
                }
                if q >= 1.0 {
                    0.0
                } else {
                    15.0 / (8.0 * PI * radii[0] * radii[1] * radii[2]) * (1.0 - q)
                }
            }
            ProfileShape::Point => 0.0,
        }
    }

    /// ρ(r) in atoms/m³.
    pub fn density_at(&self, r: [f64; 3]) -> f64 {
        self.n * self.normalized_density(r)
    }

    /// `∫ ρ(r)/N · f(r) dr` with x restricted to `[x_lo, x_hi]`.
    ///
    /// Gaussian profiles use Gauss-Hermite transversally; Thomas-Fermi
    /// profiles are integrated over the ellipsoid with nested 1D integrals so
    /// that no range ends inside a kink of the density.
    pub fn expectation<F>(&self, f: F, x_lo: f64, x_hi: f64, rel_tol: f64) -> Result<f64>
    where
        F: Fn([f64; 3]) -> f64,
    {
        let c = self.center;
        match self.shape {
            ProfileShape::Point => {
                let inside = c[0] >= x_lo && c[0] <= x_hi;
                Ok(if inside { f(c) } else { 0.0 })
            }
            ProfileShape::Gaussian { sigma, .. } => {
                let lo = x_lo.max(c[0] - 6.0 * sigma[0]);
                let hi = x_hi.min(c[0] + 6.0 * sigma[0]);
                if lo >= hi {
                    return Ok(0.0);
                }
                let x_density = |x: f64| {
                    let u = (x - c[0]) / sigma[0];
                    (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * sigma[0])
                };
                let axes = [
                    Axis::Interval { lo, hi },
                    Axis::Gaussian { mean: c[1], sigma: sigma[1] },
                    Axis::Gaussian { mean: c[2], sigma: sigma[2] },
                ];
                integrate(|r| x_density(r[0]) * f([r[0], r[1], r[2]]), &axes, rel_tol)
            }
            ProfileShape::ThomasFermi { radii } => {
                let lo = x_lo.max(c[0] - radii[0]);
                let hi = x_hi.min(c[0] + radii[0]);
                if lo >= hi {
                    return Ok(0.0);
                }
                let norm = 15.0 / (8.0 * PI * radii[0] * radii[1] * radii[2]);
                // each level is tightened so that its noise stays below the
                // refinement threshold of the level outside it
                let tol_y = 0.1 * rel_tol;
                let tol_z = 0.01 * rel_tol;
                let failed = std::cell::Cell::new(None);
                let outer = integrate(
                    |px| {
                        let x = px[0];
                        let qx = 1.0 - ((x - c[0]) / radii[0]).powi(2);
                        if qx <= 0.0 {
                            return 0.0;
                        }
                        let hy = radii[1] * qx.sqrt();
                        let middle = integrate(
                            |py| {
                                let y = py[0];
                                let qxy = qx - ((y - c[1]) / radii[1]).powi(2);
                                if qxy <= 0.0 {
                                    return 0.0;
                                }
                                let hz = radii[2] * qxy.sqrt();
                                let inner = integrate(
                                    |pz| {
                                        let z = pz[0];
                                        let q = qxy - ((z - c[2]) / radii[2]).powi(2);
                                        if q <= 0.0 {
                                            0.0
                                        } else {
                                            q * f([x, y, z])
                                        }
                                    },
                                    &[Axis::Interval { lo: c[2] - hz, hi: c[2] + hz }],
                                    tol_z,
                                );
                                inner.unwrap_or_else(|e| {
                                    failed.set(Some(e));
                                    0.0
                                })
                            },
                            &[Axis::Interval { lo: c[1] - hy, hi: c[1] + hy }],
                            tol_y,
                        );
                        middle.unwrap_or_else(|e| {
                            failed.set(Some(e));
                            0.0
                        })
                    },
                    &[Axis::Interval { lo, hi }],
                    rel_tol,
                )?;
                if let Some(e) = failed.take() {
                    return Err(e);
                }
                Ok(norm * outer)
            }
        }
    }
}
