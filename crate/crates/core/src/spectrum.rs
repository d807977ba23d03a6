//! Dressed states, weak-probe transmission and spectrum maps.
//!
//! All detunings are angular and measured from the atomic resonance:
//! `Δ_L = ω_L − ω_A`, `Δ_C = ω_C − ω_A`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};
use crate::numerics::{eigh, find_peaks, Peak, SymMatrix};

/// Largest ensemble accepted by [`tavis_cummings_exact`].
pub const TAVIS_CUMMINGS_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningPoint {
    pub delta_l: f64,
    pub delta_c: f64,
}

/// `(Δ_C ± √(Δ_C² + 4g_N²))/2`, returned as `(E₊, E₋)`.
pub fn dressed_energies(delta_c: f64, g_n: f64) -> (f64, f64) {
    let root = (delta_c * delta_c + 4.0 * g_n * g_n).sqrt();
    // the smaller root by Vieta, to avoid cancellation for |Δ_C| ≫ g_N
    if delta_c >= 0.0 {
        let plus = 0.5 * (delta_c + root);
        let minus = if plus == 0.0 { 0.0 } else { -g_n * g_n / plus };
        (plus, minus)
    } else {
        let minus = 0.5 * (delta_c - root);
        (-g_n * g_n / minus, minus)
    }
}

/// `(+√N·ḡ1, −√N·ḡ1)`.
pub fn sqrt_n_resonances(n: f64, g_bar_1: f64) -> (f64, f64) {
    let g = n.max(0.0).sqrt() * g_bar_1;
    (g, -g)
}

/// Transmission relative to the empty resonant cavity,
/// `|κ / (κ − i(Δ_L − Δ_C) + g_N²/(γ − iΔ_L))|²`.
pub fn transmission(point: DetuningPoint, g_n: f64, kappa: f64, gamma: f64) -> f64 {
    let denom = Complex64::new(kappa, -(point.delta_l - point.delta_c))
        + g_n * g_n / Complex64::new(gamma, -point.delta_l);
    let t = kappa / denom;
    t.norm_sqr().min(1.0)
}

/// Empty-cavity Lorentzian pulled by the dispersive shift `shift`:
/// `1/(1 + ((Δ_L − Δ_C − shift)/κ)²)`.
pub fn shifted_lorentzian(point: DetuningPoint, shift: f64, kappa: f64) -> f64 {
    let u = (point.delta_l - point.delta_c - shift) / kappa;
    1.0 / (1.0 + u * u)
}

/// Transmission on a rectangular grid. `rows[i][j]` belongs to
/// `(axis2[i], axis1[j])`, with `axis1` the probe detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl SpectrumGrid {
    /// Resonances of every row. `min_prominence` is a fraction of each
    /// row's range.
    pub fn peak_loci(&self, min_prominence: f64) -> Result<Vec<Vec<Peak>>> {
        self.rows.iter().map(|row| find_peaks(&self.axis1, row, min_prominence)).collect()
    }
}

fn check_axis(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(name, "grid must not be empty"));
    }
    for &v in values {
        ensure_finite(name, v)?;
    }
    Ok(())
}

/// Fig. 3a-style map: rows over atom number at fixed `delta_c`.
pub fn spectrum_map_vs_n(
    n_values: &[f64],
    delta_l_values: &[f64],
    g_bar_1: f64,
    kappa: f64,
    gamma: f64,
    delta_c: f64,
) -> Result<SpectrumGrid> {
    check_axis("N values", n_values)?;
    check_axis("delta_L values", delta_l_values)?;
    ensure_positive("kappa", kappa)?;
    ensure_positive("gamma", gamma)?;
    for &n in n_values {
        ensure_non_negative("N", n)?;
    }
    let rows = n_values
        .par_iter()
        .map(|&n| {
            let g_n = n.sqrt() * g_bar_1;
            delta_l_values
                .iter()
                .map(|&delta_l| transmission(DetuningPoint { delta_l, delta_c }, g_n, kappa, gamma))
                .collect()
        })
        .collect();
    Ok(SpectrumGrid { axis1: delta_l_values.to_vec(), axis2: n_values.to_vec(), rows })
}

/// Fig. 3b-style map: rows over cavity detuning at fixed `n`.
pub fn spectrum_map_vs_detuning(
    delta_c_values: &[f64],
    delta_l_values: &[f64],
    n: f64,
    g_bar_1: f64,
    kappa: f64,
    gamma: f64,
) -> Result<SpectrumGrid> {
    check_axis("delta_C values", delta_c_values)?;
    check_axis("delta_L values", delta_l_values)?;
    ensure_positive("kappa", kappa)?;
    ensure_positive("gamma", gamma)?;
    ensure_non_negative("N", n)?;
    let g_n = n.sqrt() * g_bar_1;
    let rows = delta_c_values
        .par_iter()
        .map(|&delta_c| {
            delta_l_values
                .iter()
                .map(|&delta_l| transmission(DetuningPoint { delta_l, delta_c }, g_n, kappa, gamma))
                .collect()
        })
        .collect();
    Ok(SpectrumGrid { axis1: delta_l_values.to_vec(), axis2: delta_c_values.to_vec(), rows })
}

/// Exact single-excitation spectrum of `n` identical two-level atoms coupled
/// with strength `g1` to one mode detuned by `delta_c`. Returns the `n + 1`
/// eigenvalues in ascending order.
pub fn tavis_cummings_exact(n: usize, g1: f64, delta_c: f64) -> Result<Vec<f64>> {
    if n == 0 || n > TAVIS_CUMMINGS_MAX_N {
        return Err(Error::invalid("N", format!("must lie in 1..={TAVIS_CUMMINGS_MAX_N}, got {n}")));
    }
    ensure_finite("g1", g1)?;
    ensure_finite("delta_C", delta_c)?;
    // index 0: one photon; index i ≥ 1: atom i excited
    let m = SymMatrix::from_upper(n + 1, |i, j| match (i, j) {
        (0, 0) => delta_c,
        (0, _) => g1,
        _ => 0.0,
    })?;
    Ok(eigh(&m)?.eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::from_hz;
    use crate::numerics::linspace;

    #[test]
    fn dressed_limits() {
        let g = from_hz(5e9);
        let (p, m) = dressed_energies(0.0, g);
        assert!((p - g).abs() < 1e-6 && (m + g).abs() < 1e-6);
        assert_eq!(dressed_energies(3.0, 0.0), (3.0, 0.0));
        assert_eq!(dressed_energies(-3.0, 0.0), (0.0, -3.0));
        let (p, m) = dressed_energies(-7.0, 2.0);
        assert!((p * m + 4.0).abs() < 1e-14 && (p + m + 7.0).abs() < 1e-14);
    }

    #[test]
    fn empty_cavity_is_unity() {
        let t = transmission(DetuningPoint { delta_l: 1.3, delta_c: 1.3 }, 0.0, 2.0, 1.0);
        assert_eq!(t, 1.0);
    }

    #[test]
    fn split_peaks() {
        let (kappa, gamma) = (from_hz(53e6), from_hz(3e6));
        let g = from_hz(5e9);
        let xs = linspace(from_hz(-13e9), from_hz(13e9), 2001);
        let ys: Vec<f64> = xs.iter().map(|&d| transmission(DetuningPoint { delta_l: d, delta_c: 0.0 }, g, kappa, gamma)).collect();
        let p = find_peaks(&xs, &ys, 0.01).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[0].x + g).abs() < from_hz(50e6));
        assert!((p[1].x - g).abs() < from_hz(50e6));
    }

    #[test]
    fn tavis_cummings_small() {
        let e = tavis_cummings_exact(4, 1.5, 0.0).unwrap();
        assert!((e[0] + 3.0).abs() < 1e-12 * 3.0 && (e[4] - 3.0).abs() < 1e-12 * 3.0);
        assert!(e[1..4].iter().all(|v| v.abs() < 1e-12));
        assert!(tavis_cummings_exact(13, 1.0, 0.0).is_err());
        assert!(tavis_cummings_exact(0, 1.0, 0.0).is_err());
    }

    #[test]
    fn empty_map_rejected() {
        assert!(spectrum_map_vs_n(&[], &[0.0], 1.0, 1.0, 1.0, 0.0).is_err());
    }
}
