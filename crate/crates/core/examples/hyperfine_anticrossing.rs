//! Multilevel model: the avoided crossing with the other hyperfine
//! manifold and a fit of the population fraction to a target gap.

use cqed_lab::constants::{from_hz, to_hz};
use cqed_lab::hyperfine::{anticrossing, eigenmodes, fit_population_fraction, resonant_n2, HyperfineParams, WEIGHT_FLOOR};

fn main() -> cqed_lab::error::Result<()> {
    let base = HyperfineParams::model_figure(0.0);
    let fraction = 0.0025;
    println!("double resonance at N2 = {:.1}", resonant_n2(&base));

    for n2 in [800.0, 1100.0, 1150.0, 1200.0, 1500.0] {
        let spec = eigenmodes(&base.with_n2_fraction(n2, fraction))?;
        let levels: Vec<String> = spec
            .visible(WEIGHT_FLOOR)
            .iter()
            .filter(|(_, w)| *w > 0.01)
            .map(|(d, w)| format!("{:+.2} GHz ({w:.2})", to_hz(*d) / 1e9))
            .collect();
        println!("N2 = {n2:6}: {}", levels.join(", "));
    }

    let ac = anticrossing(&base, fraction, (800.0, 1500.0))?;
    println!(
        "minimum gap {:.0} MHz at N2 = {:.1}, centre {:.3} GHz",
        to_hz(ac.gap) / 1e6,
        ac.n2,
        to_hz(ac.delta_center) / 1e9
    );
    let f = fit_population_fraction(&base, from_hz(500e6), (800.0, 1500.0))?;
    println!("N1/N2 reproducing a 500 MHz gap: {:.3} %", 100.0 * f);
    Ok(())
}
