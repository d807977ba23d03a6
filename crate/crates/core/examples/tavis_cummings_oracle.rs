//! Exact diagonalization of the single-excitation manifold against the
//! collective dressed-state formula.

use cqed_lab::spectrum::{dressed_energies, tavis_cummings_exact, TAVIS_CUMMINGS_MAX_N};

fn main() -> cqed_lab::error::Result<()> {
    let g1 = 1.0;
    for delta_c in [0.0, 0.7, -2.5] {
        println!("delta_C = {delta_c}");
        for n in 1..=TAVIS_CUMMINGS_MAX_N {
            let e = tavis_cummings_exact(n, g1, delta_c)?;
            let (plus, minus) = dressed_energies(delta_c, (n as f64).sqrt() * g1);
            let err = (e[0] - minus).abs().max((e[n] - plus).abs());
            println!("  N = {n:2}: E- = {:+.12}  E+ = {:+.12}  |diff| = {err:.1e}", e[0], e[n]);
        }
    }
    Ok(())
}
