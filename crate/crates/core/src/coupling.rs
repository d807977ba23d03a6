//! Single-atom mode function, collective coupling of density profiles,
//! lattice-site loading and the dispersive cavity shift.
//!
//! Both standing waves (probe and lattice) have field nodes on the mirror
//! surfaces, with positions measured from mirror 1. The probe mode is
//! therefore `g1 ∝ sin(k·x)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::cavity::ModeGeometry;
use crate::ensemble::{DensityProfile, ProfileShape};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::numerics::{fit_least_squares, integrate, Axis, FitResult};

/// Relative tolerance of the quadrature path of [`collective_coupling`].
pub const COUPLING_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFunction {
    /// Peak single-atom coupling (rad/s).
    pub g0: f64,
    /// Probe wavelength (m).
    pub lambda_c: f64,
    pub geometry: ModeGeometry,
    /// Scale the amplitude by `w0/w(x)` and use the local radius `w(x)`.
    pub use_local_radius: bool,
    /// Extra standing-wave phase; 0 puts a node on mirror 1.
    pub phase: f64,
}

impl ModeFunction {
    pub fn new(g0: f64, lambda_c: f64, geometry: ModeGeometry) -> Result<Self> {
        ensure_positive("g0", g0)?;
        ensure_positive("lambda_c", lambda_c)?;
        ensure_positive("w0", geometry.w0)?;
        Ok(Self { g0, lambda_c, geometry, use_local_radius: true, phase: 0.0 })
    }

    pub fn with_local_radius(mut self, on: bool) -> Self {
        self.use_local_radius = on;
        self
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda_c
    }

    /// The same field seen from mirror 2: `g'(x) = ±g(d − x)`.
    pub fn reflected(&self) -> Self {
        let d = self.geometry.d;
        let mut m = *self;
        m.geometry.waist_position = d - self.geometry.waist_position;
        m.phase = -self.wavenumber() * d - self.phase;
        m
    }

    /// Beam radius used at axial position `x`.
    pub fn radius(&self, x: f64) -> f64 {
        if self.use_local_radius {
            self.geometry.radius_at(x)
        } else {
            self.geometry.w0
        }
    }

    fn amplitude(&self, x: f64) -> f64 {
        if self.use_local_radius {
            self.geometry.w0 / self.geometry.radius_at(x)
        } else {
            1.0
        }
    }

    /// `g1(r)` for `r = (x, y, z)`; y and z are offsets from the cavity axis.
    pub fn coupling_at(&self, r: [f64; 3]) -> f64 {
        let [x, y, z] = r;
        let w = self.radius(x);
        self.g0 * self.amplitude(x) * (self.wavenumber() * x + self.phase).sin() * (-(y * y + z * z) / (w * w)).exp()
    }

    /// `∇g1(r)`.
    pub fn gradient(&self, r: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = r;
        let k = self.wavenumber();
        let w = self.radius(x);
        let rho_sq = y * y + z * z;
        let arg = k * x + self.phase;
        let e = (-rho_sq / (w * w)).exp();
        let amp = self.amplitude(x);
        let (s, c) = arg.sin_cos();
        let g = self.g0 * amp * s * e;
        let (dw, damp) = if self.use_local_radius {
            let dw = self.geometry.radius_slope(x);
            (dw, -self.geometry.w0 * dw / (w * w))
        } else {
            (0.0, 0.0)
        };
        let gx = self.g0 * e * (damp * s + amp * k * c) + g * 2.0 * rho_sq * dw / (w * w * w);
        [gx, -2.0 * y / (w * w) * g, -2.0 * z / (w * w) * g]
    }
}

/// Which path produced a [`CouplingResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMethod {
    /// Exact point evaluation.
    Point,
    /// Fully analytic Gaussian average.
    ClosedForm,
    /// Analytic transverse average, numerical axial integral (Gaussian cloud
    /// in a mode with varying radius).
    SemiAnalytic,
    /// Numerical integration over the whole profile.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult {
    /// Collective coupling `√N·ḡ1` (rad/s).
    pub g_n: f64,
    /// rms single-atom coupling (rad/s).
    pub g_bar_1: f64,
    /// Density-weighted `⟨sin²(kx)⟩`.
    pub axial_factor: f64,
    /// Remainder, so that `ḡ1² = g0²·axial·transverse`.
    pub transverse_factor: f64,
    pub method: CouplingMethod,
    /// The profile reaches past a mirror; those atoms are dropped.
    pub clipped: bool,
}

impl CouplingResult {
    fn from_mean_square(n: f64, g0: f64, mean_sq: f64, axial: f64, method: CouplingMethod, clipped: bool) -> Self {
        let g_bar_1 = mean_sq.max(0.0).sqrt();
        let transverse = if axial > 0.0 { mean_sq / (g0 * g0 * axial) } else { 0.0 };
        Self { g_n: n.sqrt() * g_bar_1, g_bar_1, axial_factor: axial, transverse_factor: transverse, method, clipped }
    }
}

/// `½(1 − cos(2(k·x_c + φ))·e^{−2k²σ²})`: `⟨sin²(kx + φ)⟩` over a normal
/// distribution centred at `x_c`.
pub fn gaussian_axial_factor(k: f64, phase: f64, x_c: f64, sigma: f64) -> f64 {
    0.5 * (1.0 - (2.0 * (k * x_c + phase)).cos() * (-2.0 * k * k * sigma * sigma).exp())
}

/// `⟨exp(−2u²/w²)⟩` over a normal distribution in `u` with mean `c`, rms `sigma`.
pub fn gaussian_transverse_factor(w: f64, c: f64, sigma: f64) -> f64 {
    let s4 = 4.0 * sigma * sigma;
    (1.0 + s4 / (w * w)).powf(-0.5) * (-2.0 * c * c / (w * w + s4)).exp()
}

/// `g_N = √N·ḡ1` with `ḡ1² = ∫ ρ(r)/N |g1(r)|² dr`.
pub fn collective_coupling(profile: &DensityProfile, mode: &ModeFunction) -> Result<CouplingResult> {
    ensure_finite("N", profile.n)?;
    let d = mode.geometry.d;
    let e = profile.extent();
    let c = profile.center;
    let clipped = c[0] - e[0] < 0.0 || c[0] + e[0] > d;
    let k = mode.wavenumber();
    match profile.shape {
        ProfileShape::Point => {
            let g = mode.coupling_at(c);
            let axial = (k * c[0] + mode.phase).sin().powi(2);
            Ok(CouplingResult::from_mean_square(profile.n, mode.g0, g * g, axial, CouplingMethod::Point, clipped))
        }
        ProfileShape::Gaussian { sigma, .. } if !clipped => {
            let axial = gaussian_axial_factor(k, mode.phase, c[0], sigma[0]);
            if mode.use_local_radius {
                let mean_sq = semi_analytic_gaussian(mode, c, sigma)?;
                Ok(CouplingResult::from_mean_square(profile.n, mode.g0, mean_sq, axial, CouplingMethod::SemiAnalytic, false))
            } else {
                let w = mode.geometry.w0;
                let transverse = gaussian_transverse_factor(w, c[1], sigma[1]) * gaussian_transverse_factor(w, c[2], sigma[2]);
                let g_bar_1 = mode.g0 * (axial * transverse).sqrt();
                Ok(CouplingResult {
                    g_n: profile.n.sqrt() * g_bar_1,
                    g_bar_1,
                    axial_factor: axial,
                    transverse_factor: transverse,
                    method: CouplingMethod::ClosedForm,
                    clipped: false,
                })
            }
        }
        _ => collective_coupling_quadrature(profile, mode),
    }
}

/// Gaussian cloud in a mode of varying radius: the transverse average is
/// analytic at every x, the axial one is integrated.
fn semi_analytic_gaussian(mode: &ModeFunction, c: [f64; 3], sigma: [f64; 3]) -> Result<f64> {
    let k = mode.wavenumber();
    let g0_sq = mode.g0 * mode.g0;
    let f = |x: f64| {
        let w = mode.radius(x);
        let amp = mode.amplitude(x);
        let t = gaussian_transverse_factor(w, c[1], sigma[1]) * gaussian_transverse_factor(w, c[2], sigma[2]);
        let u = (x - c[0]) / sigma[0];
        let rho = (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * sigma[0]);
        rho * amp * amp * t * (k * x + mode.phase).sin().powi(2)
    };
    let half = 8.0 * sigma[0];
    let v = integrate(|p| f(p[0]), &[Axis::Interval { lo: c[0] - half, hi: c[0] + half }], COUPLING_REL_TOL)?;
    Ok(g0_sq * v)
}

/// Numerical `ḡ1²` integral for any extended profile, restricted to the
/// space between the mirrors.
pub fn collective_coupling_quadrature(profile: &DensityProfile, mode: &ModeFunction) -> Result<CouplingResult> {
    let d = mode.geometry.d;
    let c = profile.center;
    let e = profile.extent();
    let clipped = c[0] - e[0] < 0.0 || c[0] + e[0] > d;
    let x_lo = (c[0] - e[0]).max(0.0);
    let x_hi = (c[0] + e[0]).min(d);
    if x_lo >= x_hi {
        return Ok(CouplingResult::from_mean_square(profile.n, mode.g0, 0.0, 0.0, CouplingMethod::Quadrature, true));
    }
    if let ProfileShape::Point = profile.shape {
        return collective_coupling(profile, mode);
    }
    let k = mode.wavenumber();
    let mean_sq = profile.expectation(|r| mode.coupling_at(r).powi(2), x_lo, x_hi, COUPLING_REL_TOL)?;
    let axial = profile.expectation(|r| (k * r[0] + mode.phase).sin().powi(2), x_lo, x_hi, COUPLING_REL_TOL)?;
    Ok(CouplingResult::from_mean_square(profile.n, mode.g0, mean_sq, axial, CouplingMethod::Quadrature, clipped))
}

/// One-dimensional optical lattice along the cavity axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    /// Lattice wavelength (m).
    pub lambda_d: f64,
    /// Trap frequencies per site (Hz): axial x, transverse y, z.
    pub nu: [f64; 3],
}

impl LatticeConfig {
    pub fn new(lambda_d: f64, nu: [f64; 3], lambda_c: f64) -> Result<Self> {
        ensure_positive("lambda_d", lambda_d)?;
        if lambda_d <= lambda_c {
            return Err(Error::invalid("lambda_d", "lattice wavelength must exceed the probe wavelength"));
        }
        Ok(Self { lambda_d, nu })
    }

    /// Centre of site `m`, `(2m+1)·λ_D/4`.
    pub fn site_center(&self, m: usize) -> f64 {
        (2 * m + 1) as f64 * self.lambda_d / 4.0
    }
}

/// Beat period of the lattice and probe standing waves,
/// `λ_D·λ_L/(2|λ_D − λ_L|)`. Infinite for equal wavelengths.
pub fn lattice_overlap_period(lambda_d: f64, lambda_l: f64) -> f64 {
    if lambda_d == lambda_l {
        return f64::INFINITY;
    }
    lambda_d * lambda_l / (2.0 * (lambda_d - lambda_l).abs())
}

/// The lattice site nearest to `x_a`; exact midpoints go to the lower index.
pub fn load_to_nearest_site(x_a: f64, lattice: &LatticeConfig, cavity_d: f64) -> Result<(usize, f64)> {
    ensure_finite("x_a", x_a)?;
    if x_a < 0.0 || x_a > cavity_d {
        return Err(Error::invalid("x_a", format!("{x_a} lies outside [0, {cavity_d}]")));
    }
    let first = lattice.site_center(0);
    if first > cavity_d {
        return Err(Error::NoSolution("no lattice site between the mirrors".into()));
    }
    let last = ((cavity_d / lattice.lambda_d * 4.0 - 1.0) / 2.0).floor() as usize;
    let t = (x_a - first) / (lattice.lambda_d / 2.0);
    let lower = t.floor().clamp(0.0, last as f64) as usize;
    let m = if lower < last {
        let dl = (x_a - lattice.site_center(lower)).abs();
        let du = (lattice.site_center(lower + 1) - x_a).abs();
        if du < dl { lower + 1 } else { lower }
    } else {
        lower
    };
    Ok((m, lattice.site_center(m)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub x_a: f64,
    pub site: usize,
    pub site_center: f64,
    pub coupling: CouplingResult,
}

/// Loads an on-axis Gaussian cloud of rms widths `sigma` into the site
/// nearest each position and evaluates its collective coupling. Output order
/// follows `positions`.
pub fn coupling_scan(
    positions: &[f64],
    sigma: [f64; 3],
    n: f64,
    mode: &ModeFunction,
    lattice: &LatticeConfig,
) -> Result<Vec<ScanPoint>> {
    let d = mode.geometry.d;
    positions
        .par_iter()
        .map(|&x_a| {
            let (site, site_center) = load_to_nearest_site(x_a, lattice, d)?;
            let profile = DensityProfile::gaussian(n, [site_center, 0.0, 0.0], sigma)?;
            let coupling = collective_coupling(&profile, mode)?;
            Ok(ScanPoint { x_a, site, site_center, coupling })
        })
        .collect()
}

/// Fits the axial rms width of the loaded cloud to a measured `g_N(x_a)`
/// curve. Transverse widths and `N` are held fixed.
pub fn fit_axial_width(
    positions: &[f64],
    measured_g_n: &[f64],
    sigma_guess: [f64; 3],
    n: f64,
    mode: &ModeFunction,
    lattice: &LatticeConfig,
) -> Result<FitResult> {
    if positions.len() != measured_g_n.len() || positions.is_empty() {
        return Err(Error::invalid("measured_g_n", "one value per scan position required"));
    }
    let scale = mode.g0;
    let objective = |p: &[f64]| -> Result<Vec<f64>> {
        let sigma = [p[0], sigma_guess[1], sigma_guess[2]];
        let scan = coupling_scan(positions, sigma, n, mode, lattice)?;
        Ok(scan.iter().zip(measured_g_n).map(|(s, m)| (s.coupling.g_n - m) / scale).collect())
    };
    let lambda = mode.lambda_c;
    fit_least_squares(objective, &[sigma_guess[0]], &[(1e-3 * lambda, lambda)])
}

/// Atom-induced cavity shift `δω_C = g_N²/Δ_L` (rad/s).
pub fn dispersive_shift(g_n: f64, delta_l: f64) -> Result<f64> {
    ensure_finite("g_N", g_n)?;
    ensure_finite("delta_L", delta_l)?;
    if delta_l == 0.0 {
        return Err(Error::invalid("delta_L", "dispersive shift undefined at zero detuning"));
    }
    Ok(g_n * g_n / delta_l)
}
