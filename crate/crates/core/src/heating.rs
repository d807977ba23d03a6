//! Momentum-diffusion heating of an ensemble by the intracavity probe,
//! time-of-flight sizes and the spontaneous-emission budget.

use rayon::prelude::*;

use crate::constants::{from_hz, PhysicalConstants};
use crate::coupling::ModeFunction;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::spectrum::{transmission, DetuningPoint};

/// Fraction of spontaneous emissions that leave the atom in an untrapped state.
pub const LOSS_BRANCHING: f64 = 0.15;

/// `broad_line_check` ratios above this break the fixed-position picture.
pub const BROAD_LINE_WARNING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    /// Resonant empty-cavity intracavity photon number.
    pub n_res: f64,
    /// Interaction time (s).
    pub t_int: f64,
    /// Time of flight (s).
    pub t_tof: f64,
    /// rms cloud size after TOF without probe light, along x and z (m).
    pub sigma_ref: [f64; 2],
}

impl ProbeSettings {
    /// Values of the heating measurement. The z reference is taken equal to
    /// the x one.
    pub fn baseline() -> Self {
        Self { n_res: 3.9e-3, t_int: 10e-3, t_tof: 2.8e-3, sigma_ref: [7e-6, 7e-6] }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("n_res", self.n_res)?;
        ensure_non_negative("t_int", self.t_int)?;
        ensure_non_negative("t_tof", self.t_tof)?;
        ensure_non_negative("sigma_ref_x", self.sigma_ref[0])?;
        ensure_non_negative("sigma_ref_z", self.sigma_ref[1])?;
        Ok(())
    }
}

/// `C_N = ½·N·C0·exp(−2z²/w²)` for an ensemble small compared to `w`,
/// displaced by `z_a` from the axis.
pub fn cooperativity_radial(n: f64, c0: f64, z_a: f64, w: f64) -> Result<f64> {
    ensure_positive("w", w)?;
    Ok(0.5 * n * c0 * (-2.0 * z_a * z_a / (w * w)).exp())
}

/// Ensemble-averaged diffusion per atom,
/// `D_p = (2·n_res·(ħk)²·κ/N)·2C_N/(1 + 2C_N)²`.
pub fn diffusion_average(n_res: f64, kappa: f64, n: f64, c_n: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::invalid("N", format!("must be >= 1, got {n}")));
    }
    ensure_non_negative("n_res", n_res)?;
    ensure_non_negative("C_N", c_n)?;
    let p = constants.photon_momentum();
    let x = 2.0 * c_n;
    Ok(2.0 * n_res * p * p * kappa / n * x / ((1.0 + x) * (1.0 + x)))
}

/// Spontaneous emission rate per atom, `Γ_sp = D_p/(ħk)²`.
pub fn gamma_sp(d_p: f64, constants: &PhysicalConstants) -> f64 {
    d_p / constants.photon_momentum().powi(2)
}

/// The two terms of the single-atom diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleAtomDiffusion {
    /// Spontaneous emission: `n(ħk)²g1²/γ`.
    pub spontaneous: f64,
    /// Fluctuating dipole force: `nħ²|∇g1|²/γ`.
    pub dipole: f64,
}

impl SingleAtomDiffusion {
    pub fn total(&self) -> f64 {
        self.spontaneous + self.dipole
    }
}

/// Diffusion of one atom at `r` with `n_photons` in the mode.
pub fn diffusion_single(
    r: [f64; 3],
    n_photons: f64,
    mode: &ModeFunction,
    constants: &PhysicalConstants,
) -> Result<SingleAtomDiffusion> {
    ensure_non_negative("n", n_photons)?;
    let g = mode.coupling_at(r);
    let grad = mode.gradient(r);
    let hbar = constants.hbar;
    let p = constants.photon_momentum();
    let grad_sq: f64 = grad.iter().map(|v| v * v).sum();
    Ok(SingleAtomDiffusion {
        spontaneous: n_photons * p * p * g * g / constants.gamma,
        dipole: n_photons * hbar * hbar * grad_sq / constants.gamma,
    })
}

/// Off-axis distance where `C_N = ½` (maximum diffusion):
/// `z = w·√(ln(N·C0)/2)`. Fails when the on-axis cooperativity is already
/// at or below ½.
pub fn heating_peak_positions(n: f64, c0: f64, w: f64) -> Result<f64> {
    ensure_positive("w", w)?;
    let nc = n * c0;
    if !(0.5 * nc >= 0.5) {
        return Err(Error::NoSolution(format!("½·N·C0 = {} ≤ 0.5: diffusion peaks on axis", 0.5 * nc)));
    }
    Ok(w * (nc.ln() / 2.0).sqrt())
}

/// rms size after time of flight, `√(σ_ref² + D_p·t_int·t_tof²/(3m²))`.
/// The deposited energy is shared equally by six degrees of freedom.
pub fn tof_size(d_p: f64, sigma_ref: f64, settings: &ProbeSettings, constants: &PhysicalConstants) -> Result<f64> {
    ensure_non_negative("D_p", d_p)?;
    ensure_non_negative("sigma_ref", sigma_ref)?;
    let m = constants.m_rb87;
    Ok((sigma_ref * sigma_ref + d_p * settings.t_int * settings.t_tof.powi(2) / (3.0 * m * m)).sqrt())
}

/// Closed form of the size at a heating peak with no reference size,
/// `v_rec·t_tof·√(n_res·κ·t_int/(6N))`.
pub fn sigma_peak(settings: &ProbeSettings, kappa: f64, n: f64, constants: &PhysicalConstants) -> f64 {
    constants.v_rec() * settings.t_tof * (settings.n_res * kappa * settings.t_int / (6.0 * n)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringBudget {
    /// Spontaneous emissions per atom at a heating peak.
    pub n_sp: f64,
    /// Excited-state population at a heating peak.
    pub p_exc: f64,
    /// Fraction of atoms left in the trapped state.
    pub survival: f64,
}

pub fn scattering_budget(n_res: f64, kappa: f64, t_int: f64, n: f64, gamma: f64) -> Result<ScatteringBudget> {
    ensure_positive("n_res", n_res)?;
    ensure_positive("kappa", kappa)?;
    ensure_positive("t_int", t_int)?;
    ensure_positive("N", n)?;
    ensure_positive("gamma", gamma)?;
    let n_sp = n_res * kappa * t_int / (2.0 * n);
    Ok(ScatteringBudget {
        n_sp,
        p_exc: n_sp / t_int / (2.0 * gamma),
        survival: (1.0 - LOSS_BRANCHING).powf(n_sp),
    })
}

/// `E_rec/(ħ·2γ)`.
pub fn broad_line_check(constants: &PhysicalConstants) -> f64 {
    constants.recoil_energy() / (constants.hbar * 2.0 * constants.gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingScenario {
    pub n: f64,
    pub c0: f64,
    /// Mode radius at the ensemble (m).
    pub w: f64,
    /// rad/s
    pub kappa: f64,
    pub probe: ProbeSettings,
    pub constants: PhysicalConstants,
}

impl HeatingScenario {
    /// N = 800, C0 = 145, w = 3.9 μm, κ = 2π × 53 MHz.
    pub fn baseline() -> Self {
        Self {
            n: 800.0,
            c0: 145.0,
            w: 3.9e-6,
            kappa: from_hz(53e6),
            probe: ProbeSettings::baseline(),
            constants: PhysicalConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 1.0) {
            return Err(Error::invalid("N", format!("must be >= 1, got {}", self.n)));
        }
        ensure_non_negative("C0", self.c0)?;
        ensure_positive("w", self.w)?;
        ensure_positive("kappa", self.kappa)?;
        self.probe.validate()
    }

    pub fn evaluate(&self, z_a: f64) -> Result<HeatingPoint> {
        let k = &self.constants;
        let c_n = cooperativity_radial(self.n, self.c0, z_a, self.w)?;
        let g_n = (2.0 * self.kappa * k.gamma * c_n).sqrt();
        let t = transmission(DetuningPoint { delta_l: 0.0, delta_c: 0.0 }, g_n, self.kappa, k.gamma);
        let d_p = diffusion_average(self.probe.n_res, self.kappa, self.n, c_n, k)?;
        Ok(HeatingPoint {
            z_a,
            c_n,
            g_n,
            transmission: t,
            d_p,
            gamma_sp: gamma_sp(d_p, k),
            sigma_x: tof_size(d_p, self.probe.sigma_ref[0], &self.probe, k)?,
            sigma_z: tof_size(d_p, self.probe.sigma_ref[1], &self.probe, k)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingPoint {
    pub z_a: f64,
    pub c_n: f64,
    /// rad/s
    pub g_n: f64,
    pub transmission: f64,
    pub d_p: f64,
    pub gamma_sp: f64,
    pub sigma_x: f64,
    pub sigma_z: f64,
}

/// Evaluates the scenario at every height in `z_values`, in order.
pub fn heating_scan(z_values: &[f64], scenario: &HeatingScenario) -> Result<Vec<HeatingPoint>> {
    scenario.validate()?;
    z_values.par_iter().map(|&z| scenario.evaluate(z)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::ModeGeometry;
    use crate::numerics::{integrate, Axis};

    fn k() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn radial_cooperativity() {
        assert!((cooperativity_radial(800.0, 145.0, 0.0, 3.9e-6).unwrap() - 58_000.0).abs() < 1e-9);
        let w = 3.9e-6;
        let c = cooperativity_radial(800.0, 145.0, w, w).unwrap();
        assert!((c - 58_000.0 * (-2f64).exp()).abs() < 1e-9);
        assert_eq!(cooperativity_radial(800.0, 145.0, 1.0, w).unwrap(), 0.0);
    }

    #[test]
    fn diffusion_maximum_and_symmetry() {
        let kk = k();
        let d = |c: f64| diffusion_average(3.9e-3, 1.0, 800.0, c, &kk).unwrap();
        assert!(d(0.5) > d(0.499) && d(0.5) > d(0.501));
        assert_eq!(d(0.0), 0.0);
        for &c in &[0.01, 0.3, 2.0, 1e4] {
            assert!((d(c) / d(1.0 / (4.0 * c)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_peak_is_special_case() {
        let kk = k();
        let s = ProbeSettings { sigma_ref: [0.0; 2], ..ProbeSettings::baseline() };
        let kappa = from_hz(53e6);
        let d = diffusion_average(s.n_res, kappa, 800.0, 0.5, &kk).unwrap();
        let a = tof_size(d, 0.0, &s, &kk).unwrap();
        let b = sigma_peak(&s, kappa, 800.0, &kk);
        assert!((a / b - 1.0).abs() < 1e-12);
        assert_eq!(tof_size(0.0, 7e-6, &s, &kk).unwrap(), 7e-6);
    }

    #[test]
    fn peak_position_scaling() {
        let z = heating_peak_positions(800.0, 145.0, 3.9e-6).unwrap();
        let z2 = heating_peak_positions(800.0, 145.0, 7.8e-6).unwrap();
        assert!((z2 / z - 2.0).abs() < 1e-12);
        assert_eq!(heating_peak_positions(1.0, 1.0, 3.9e-6).unwrap(), 0.0);
        assert!(heating_peak_positions(0.5, 1.0, 3.9e-6).is_err());
    }

    #[test]
    fn single_atom_terms() {
        let kk = k();
        let mode = ModeFunction::new(from_hz(215e6), 780.2e-9, ModeGeometry::uniform(3.9e-6, 38.6e-6))
            .unwrap()
            .with_local_radius(false);
        let node = [780.2e-9 * 20.0, 0.0, 0.0];
        let d = diffusion_single(node, 1e-3, &mode, &kk).unwrap();
        assert!(d.spontaneous < 1e-20 * d.dipole);
        let anti = [780.2e-9 * 20.25, 0.0, 0.0];
        let d_anti = diffusion_single(anti, 1e-3, &mode, &kk).unwrap();
        assert!((d_anti.spontaneous / d.dipole - 1.0).abs() < 1e-9);
        assert_eq!(diffusion_single(anti, 0.0, &mode, &kk).unwrap().total(), 0.0);

        // averaged over many wavelengths on axis the two terms agree
        let lo = 10e-6;
        let hi = lo + 8.0 * 780.2e-9;
        let avg = |f: fn(&SingleAtomDiffusion) -> f64| {
            integrate(|x| f(&diffusion_single([x[0], 0.0, 0.0], 1e-3, &mode, &kk).unwrap()), &[Axis::Interval { lo, hi }], 1e-9)
                .unwrap()
        };
        let a = avg(|d| d.spontaneous);
        let b = avg(|d| d.dipole);
        assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
    }

    #[test]
    fn budget() {
        let b = scattering_budget(3.9e-3, from_hz(53e6), 10e-3, 800.0, k().gamma).unwrap();
        assert!((b.n_sp - 8.1).abs() < 0.05);
        assert!((b.p_exc - 2.2e-5).abs() < 0.1e-5);
        assert!((b.survival - 0.27).abs() < 0.01);
    }

    #[test]
    fn broad_line() {
        let kk = k();
        let r = broad_line_check(&kk);
        assert!((r - 6.3e-4).abs() < 0.1e-4, "{r}");
        let narrow = PhysicalConstants { gamma: kk.gamma / 1000.0, ..kk };
        assert!(broad_line_check(&narrow) > BROAD_LINE_WARNING);
    }

    #[test]
    fn scan_is_symmetric() {
        let s = HeatingScenario::baseline();
        let zs: Vec<f64> = (-20..=20).map(|i| i as f64 * 1e-6).collect();
        let scan = heating_scan(&zs, &s).unwrap();
        for i in 0..zs.len() {
            let j = zs.len() - 1 - i;
            assert_eq!(scan[i].sigma_x, scan[j].sigma_x);
            assert_eq!(scan[i].transmission, scan[j].transmission);
        }
        assert!(scan[20].transmission < 1e-6);
        assert!((scan[20].sigma_x - 7e-6).abs() < 1e-8);
    }
}
