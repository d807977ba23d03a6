//! Transmission spectra versus atom number on resonance, with the
//! extracted peaks against the sqrt(N) law.

use cqed_lab::constants::{from_hz, to_hz, PhysicalConstants};
use cqed_lab::numerics::linspace;
use cqed_lab::spectrum::{spectrum_map_vs_n, sqrt_n_resonances};

fn main() -> cqed_lab::error::Result<()> {
    let k = PhysicalConstants::default();
    let (kappa, g_bar_1) = (from_hz(53e6), from_hz(200e6));
    let ns: Vec<f64> = (1..=10).map(|i| 100.0 * i as f64).collect();
    let probe = linspace(from_hz(-13e9), from_hz(13e9), 2001);
    let grid = spectrum_map_vs_n(&ns, &probe, g_bar_1, kappa, k.gamma, 0.0)?;
    for (n, peaks) in ns.iter().zip(grid.peak_loci(0.01)?) {
        let (expected, _) = sqrt_n_resonances(*n, g_bar_1);
        let found: Vec<String> = peaks.iter().map(|p| format!("{:+.3}", to_hz(p.x) / 1e9)).collect();
        println!("N = {n:5}: peaks at [{}] GHz, expected +/-{:.3} GHz", found.join(", "), to_hz(expected) / 1e9);
    }
    Ok(())
}
