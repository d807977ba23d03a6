//! Probe-induced heating of a condensate moved off the cavity axis.

use cqed_lab::constants::to_hz;
use cqed_lab::heating::{
    broad_line_check, heating_peak_positions, heating_scan, scattering_budget, sigma_peak, HeatingScenario,
};
use cqed_lab::numerics::arange;

fn main() -> cqed_lab::error::Result<()> {
    let s = HeatingScenario::baseline();
    let z_peak = heating_peak_positions(s.n, s.c0, s.w)?;
    println!("heating peaks at +/-{:.2} um", z_peak * 1e6);
    println!("sigma at the peak (no reference size): {:.1} um", sigma_peak(&s.probe, s.kappa, s.n, &s.constants) * 1e6);

    let b = scattering_budget(s.probe.n_res, s.kappa, s.probe.t_int, s.n, s.constants.gamma)?;
    println!("n_sp = {:.2}, P_exc = {:.2e}, survival = {:.1} %", b.n_sp, b.p_exc, 100.0 * b.survival);
    println!("E_rec/(hbar 2 gamma) = {:.1e}", broad_line_check(&s.constants));

    let zs = arange(-16e-6, 16e-6, 1e-6);
    for p in heating_scan(&zs, &s)? {
        println!(
            "z = {:+5.1} um  C_N = {:9.3e}  g_N/2pi = {:8.2} MHz  T = {:.3}  sigma_x = {:5.2} um",
            p.z_a * 1e6,
            p.c_n,
            to_hz(p.g_n) / 1e6,
            p.transmission,
            p.sigma_x * 1e6
        );
    }
    Ok(())
}
