//! Loads a thermal cloud into successive lattice sites and prints the
//! collective coupling along one lattice/probe beat period.

use cqed_lab::cavity::CavityParams;
use cqed_lab::constants::{to_hz, PhysicalConstants};
use cqed_lab::coupling::{coupling_scan, lattice_overlap_period, LatticeConfig, ModeFunction};
use cqed_lab::ensemble::{temperature_from_width, thermal_widths, TrapConfig, TrapKind};
use cqed_lab::numerics::arange;

fn main() -> cqed_lab::error::Result<()> {
    let k = PhysicalConstants::default();
    let cavity = CavityParams::baseline(&k);

    // lattice plus magnetic trap, frequencies added in quadrature
    let lattice_trap = TrapConfig::new([50e3, 2.4e3, 2.4e3], TrapKind::Lattice)?;
    let magnetic = TrapConfig::new([2.7e3, 230.0, 2.7e3], TrapKind::Magnetic)?;
    let combined = lattice_trap.combine(&magnetic);
    let t = temperature_from_width(65e-9, combined.nu[0], &k)?;
    let sigma = thermal_widths(&combined, t, &k)?;
    println!(
        "T = {:.2} uK, 2 sigma = ({:.0} nm, {:.2} um, {:.2} um)",
        t * 1e6,
        2e9 * sigma[0],
        2e6 * sigma[1],
        2e6 * sigma[2]
    );

    let lattice = LatticeConfig::new(830.6e-9, lattice_trap.nu, k.lambda_a)?;
    let period = lattice_overlap_period(lattice.lambda_d, k.lambda_a);
    println!("overlap period = {:.3} um", period * 1e6);

    let mode = ModeFunction::new(cavity.g0, k.lambda_a, cavity.mode)?;
    let start = cavity.waist_position;
    let xs = arange(start, start + period, 0.2e-6);
    for p in coupling_scan(&xs, sigma, 1000.0, &mode, &lattice)? {
        println!(
            "x_a = {:6.3} um  site {:3}  g_N/2pi = {:5.2} GHz  axial = {:.3}",
            p.x_a * 1e6,
            p.site,
            to_hz(p.coupling.g_n) / 1e9,
            p.coupling.axial_factor
        );
    }
    Ok(())
}
