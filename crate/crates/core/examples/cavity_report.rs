//! Derives the cavity parameters from mirror geometry and coatings.

use cqed_lab::cavity::{finesse, CavityGeometry, CavityOverrides, CavityParams, MirrorCoating};
use cqed_lab::constants::{to_hz, PhysicalConstants};

fn main() -> cqed_lab::error::Result<()> {
    let k = PhysicalConstants::default();
    let geom = CavityGeometry::baseline();
    let coating = MirrorCoating::baseline();
    let (g1, g2) = geom.stability();
    println!("stability g1 = {g1:.4}, g2 = {g2:.4}, g1*g2 = {:.4}", g1 * g2);
    println!("finesse from coatings: {:.0}", finesse(&coating)?);

    let p = CavityParams::derive(&geom, &coating, &k, CavityOverrides { finesse: Some(37_000.0), ..Default::default() })?;
    println!("measured finesse used: {:.0}", p.finesse);
    println!("kappa/2pi  = {:.2} MHz", to_hz(p.kappa) / 1e6);
    println!("w0         = {:.3} um (waist {:.2} um from mirror 1)", p.w0 * 1e6, p.waist_position * 1e6);
    println!("z_R        = {:.1} um", p.rayleigh_length * 1e6);
    println!("w(x) spread = {:.1} %", 100.0 * p.mode.max_radius_variation());
    println!("g0/2pi     = {:.1} MHz", to_hz(p.g0) / 1e6);
    println!("C0         = {:.1}", p.c0);
    println!("n0         = {:.2e}", p.n0);
    println!("(T/(T+L))^2 = {:.4}", p.resonant_transmission);
    println!("external loss for 0.094 measured: {:.4}", coating.infer_external_loss(0.094)?);
    Ok(())
}
