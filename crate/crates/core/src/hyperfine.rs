//! Multilevel collective model with two ground hyperfine levels.
//!
//! States carry one excitation and are labelled by the number `k` of atoms
//! transferred from ground level 1 to ground level 2, in three families per
//! `k`: one photon (`cavity`), one atom excited from level 2 (`e1`), one atom
//! excited from level 1 into the second excited manifold (`e2`).
//!
//! ```text
//! cavity(k) = |N1−k, N2+k,   0, 0, 1⟩
//! e1(k)     = |N1−k, N2+k−1, 1, 0, 0⟩
//! e2(k)     = |N1−k, N2+k−1, 0, 1, 0⟩
//! ```
//!
//! Couplings: `cavity(k)–e1(k)` with `g1·√(N2+k)`, `cavity(k)–e1(k+1)` with
//! `α·g1·√(N1−k)` and `cavity(k)–e2(k+1)` with `β·g1·√(N1−k)`.

use rayon::prelude::*;

use crate::constants::from_hz;
use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};
use crate::numerics::{eigh, fit_least_squares, golden_min, linspace, SymMatrix};

/// States below this weight are invisible in transmission and are ignored
/// when locating the anticrossing.
pub const WEIGHT_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineParams {
    /// Ground-state hyperfine splitting (rad/s).
    pub delta_hfs: f64,
    /// Single-atom coupling (rad/s).
    pub g1: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Population of ground level 1 (the one the probe is not tuned to).
    pub n1: f64,
    /// Population of ground level 2.
    pub n2: f64,
    /// Cavity detuning (rad/s).
    pub delta_c: f64,
    pub k_max: usize,
}

impl HyperfineParams {
    /// Parameters of the model figure: Δ_C = 0, α = 0, β = 1,
    /// g1 = 2π × 200 MHz, N1 = 0.25 % of N2.
    pub fn model_figure(n2: f64) -> Self {
        Self {
            delta_hfs: from_hz(6.8e9),
            g1: from_hz(200e6),
            alpha: 0.0,
            beta: 1.0,
            n1: 0.0025 * n2,
            n2,
            delta_c: 0.0,
            k_max: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("delta_hfs", self.delta_hfs)?;
        ensure_non_negative("g1", self.g1)?;
        ensure_non_negative("alpha", self.alpha)?;
        ensure_non_negative("beta", self.beta)?;
        ensure_non_negative("N1", self.n1)?;
        ensure_non_negative("N2", self.n2)?;
        ensure_finite("delta_C", self.delta_c)?;
        if self.k_max < 1 {
            return Err(Error::invalid("k_max", "must be >= 1"));
        }
        Ok(())
    }

    pub fn with_n2_fraction(mut self, n2: f64, fraction: f64) -> Self {
        self.n2 = n2;
        self.n1 = fraction * n2;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    Cavity,
    E1,
    E2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CollectiveState {
    pub k: i32,
    pub species: Species,
}

impl CollectiveState {
    /// `(N_g1, N_g2, N_e1, N_e2, n)`.
    pub fn occupations(&self, n1: f64, n2: f64) -> [f64; 5] {
        let k = self.k as f64;
        match self.species {
            Species::Cavity => [n1 - k, n2 + k, 0.0, 0.0, 1.0],
            Species::E1 => [n1 - k, n2 + k - 1.0, 1.0, 0.0, 0.0],
            Species::E2 => [n1 - k, n2 + k - 1.0, 0.0, 1.0, 0.0],
        }
    }
}

/// All states for `k ∈ [−k_max, k_max]` with non-negative occupations,
/// ordered by `k`, then cavity, e1, e2.
pub fn build_basis(params: &HyperfineParams) -> Vec<CollectiveState> {
    let k_max = params.k_max as i32;
    let mut basis = Vec::with_capacity(3 * (2 * params.k_max + 1));
    for k in -k_max..=k_max {
        for species in [Species::Cavity, Species::E1, Species::E2] {
            let s = CollectiveState { k, species };
            if s.occupations(params.n1, params.n2).iter().all(|&v| v >= 0.0) {
                basis.push(s);
            }
        }
    }
    basis
}

/// Index of `|Ψ₀⟩ = cavity(0)` in `basis`.
pub fn initial_index(basis: &[CollectiveState]) -> Option<usize> {
    basis.iter().position(|s| s.k == 0 && s.species == Species::Cavity)
}

fn bare_energy(s: &CollectiveState, params: &HyperfineParams) -> f64 {
    let e = s.k as f64 * params.delta_hfs;
    match s.species {
        Species::Cavity => e,
        Species::E1 | Species::E2 => e - params.delta_c,
    }
}

fn coupling(a: &CollectiveState, b: &CollectiveState, params: &HyperfineParams) -> f64 {
    let (cav, other) = match (a.species, b.species) {
        (Species::Cavity, Species::E1 | Species::E2) => (a, b),
        (Species::E1 | Species::E2, Species::Cavity) => (b, a),
        _ => return 0.0,
    };
    let k = cav.k as f64;
    let g = params.g1;
    match (other.species, other.k - cav.k) {
        (Species::E1, 0) => g * (params.n2 + k).max(0.0).sqrt(),
        (Species::E1, 1) => params.alpha * g * (params.n1 - k).max(0.0).sqrt(),
        (Species::E2, 1) => params.beta * g * (params.n1 - k).max(0.0).sqrt(),
        _ => 0.0,
    }
}

/// Hamiltonian (rad/s) relative to the bare energy of `|Ψ₀⟩`.
pub fn build_hamiltonian(params: &HyperfineParams) -> Result<(Vec<CollectiveState>, SymMatrix)> {
    params.validate()?;
    let basis = build_basis(params);
    let m = SymMatrix::from_upper(basis.len(), |i, j| {
        if i == j {
            bare_energy(&basis[i], params)
        } else {
            coupling(&basis[i], &basis[j], params)
        }
    })?;
    Ok((basis, m))
}

/// Eigenfrequencies `δ` with weights `|⟨Ψ|Ψ₀⟩|²`, ascending in `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpectrum {
    pub deltas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ModelSpectrum {
    /// `(δ, weight)` pairs with weight at least `floor`.
    pub fn visible(&self, floor: f64) -> Vec<(f64, f64)> {
        self.deltas.iter().zip(&self.weights).filter(|(_, &w)| w >= floor).map(|(&d, &w)| (d, w)).collect()
    }
}

pub fn eigenmodes(params: &HyperfineParams) -> Result<ModelSpectrum> {
    let (basis, m) = build_hamiltonian(params)?;
    let psi0 = initial_index(&basis).ok_or_else(|| Error::invalid("N2", "initial state has negative occupation"))?;
    let e = eigh(&m)?;
    let weights = (0..e.order()).map(|j| e.component(psi0, j).powi(2)).collect();
    Ok(ModelSpectrum { deltas: e.eigenvalues, weights })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anticrossing {
    /// `N2` at minimum separation.
    pub n2: f64,
    /// Midpoint of the two levels there (rad/s).
    pub delta_center: f64,
    /// Minimum separation (rad/s).
    pub gap: f64,
}

/// Separation of the two levels nearest `target`, or `None` when fewer than
/// two qualify. Only levels with weight ≥ `floor` are considered.
fn pair_near(spec: &ModelSpectrum, target: f64, floor: f64) -> Option<(f64, f64)> {
    let mut levels: Vec<f64> = spec.visible(floor).into_iter().map(|(d, _)| d).collect();
    if levels.len() < 2 {
        return None;
    }
    levels.sort_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()).then(a.total_cmp(b)));
    let (a, b) = (levels[0].min(levels[1]), levels[0].max(levels[1]));
    Some((b - a, 0.5 * (a + b)))
}

/// Minimum over `N2 ∈ [lo, hi]` of the separation between the two levels
/// nearest `target`, with `N1 = fraction·N2` throughout. A coarse scan
/// brackets the minimum, golden-section search refines it.
pub fn min_separation_near(
    base: &HyperfineParams,
    fraction: f64,
    n2_range: (f64, f64),
    target: f64,
    floor: f64,
) -> Result<Anticrossing> {
    let (lo, hi) = n2_range;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid("N2 range", format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
    }
    ensure_non_negative("fraction", fraction)?;
    let sep = |n2: f64| -> Result<Option<(f64, f64)>> {
        let spec = eigenmodes(&base.with_n2_fraction(n2, fraction))?;
        Ok(pair_near(&spec, target, floor))
    };
    let grid = linspace(lo, hi, 201);
    let coarse: Vec<Option<(f64, f64)>> = grid.par_iter().map(|&n2| sep(n2)).collect::<Result<_>>()?;
    let (best, _) = coarse
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|(g, _)| (i, g)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::NotBracketed("fewer than two visible levels near the target".into()))?;
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let objective = |n2: f64| match sep(n2) {
        Ok(Some((g, _))) => g,
        _ => f64::INFINITY,
    };
    let (n2, gap) = golden_min(objective, a, b, 1e-9 * hi.max(1.0));
    let (_, center) = sep(n2)?.ok_or_else(|| Error::NotBracketed("levels vanished at the minimum".into()))?;
    if best == 0 || best == grid.len() - 1 {
        return Err(Error::NotBracketed(format!(
            "minimum separation at the edge of N2 range [{lo}, {hi}]"
        )));
    }
    Ok(Anticrossing { n2, delta_center: center, gap })
}

/// The avoided crossing between the upper dressed state and the
/// hyperfine-shifted manifold near `δ = Δ_HFS`, following the two visible
/// levels nearest `Δ_HFS` while `N2` sweeps `n2_range` with `N1 = fraction·N2`.
pub fn anticrossing(base: &HyperfineParams, fraction: f64, n2_range: (f64, f64)) -> Result<Anticrossing> {
    min_separation_near(base, fraction, n2_range, base.delta_hfs, WEIGHT_FLOOR)
}

/// Double-resonance population `(Δ_HFS/g1)²`.
pub fn resonant_n2(params: &HyperfineParams) -> f64 {
    (params.delta_hfs / params.g1).powi(2)
}

/// Fits `N1/N2` so that the model gap equals `target_gap`.
pub fn fit_population_fraction(base: &HyperfineParams, target_gap: f64, n2_range: (f64, f64)) -> Result<f64> {
    ensure_positive("target gap", target_gap)?;
    const MAX_FRACTION: f64 = 0.1;
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let ac = anticrossing(base, p[0], n2_range)?;
        Ok(vec![(ac.gap - target_gap) / target_gap])
    };
    // initial guess from the two-level estimate gap ≈ √2·β·g1·√(f·N2)
    let n2_res = resonant_n2(base);
    let guess = if base.beta > 0.0 {
        (target_gap / (2f64.sqrt() * base.beta * base.g1)).powi(2) / n2_res
    } else {
        1e-3
    };
    let fit = fit_least_squares(residual, &[guess.clamp(1e-6, MAX_FRACTION)], &[(0.0, MAX_FRACTION)])?;
    if fit.parameters[0] >= MAX_FRACTION || fit.residual_sum_sq > 1e-8 {
        return Err(Error::NoSolution(format!(
            "no population fraction in (0, {MAX_FRACTION}] reproduces a gap of {target_gap:e} rad/s"
        )));
    }
    Ok(fit.parameters[0])
}
