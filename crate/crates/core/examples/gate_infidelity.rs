//! Geometric-phase-gate loop and its thermal infidelity from mode cross-couplings.
use std::f64::consts::PI;

use ionchain::anharmonic::ChiMatrix;
use ionchain::dynamics::{gate_fidelity, gate_trajectory, thermal_gate_infidelity, GateParams, ThermalEnvironment};
use nalgebra::DMatrix;

fn main() -> ionchain::Result<()> {
    let p = GateParams::nominal(2.0 * PI * 1e4, 1)?;
    let tau = p.duration()?;
    for frac in [0.25, 0.5, 1.0] {
        let (a, phi) = gate_trajectory(&p, frac * tau)?;
        println!("t = {frac:.2} tau: |alpha| = {:.3}, Phi = {:+.3}, F = {:.4}", a.norm(), phi, gate_fidelity(a, phi));
    }

    #[rustfmt::skip]
    let chi = DMatrix::from_row_slice(6, 6, &[
        -1.4, -3.2, -1.3, -1.6, 0.03, 0.03,
        -3.2, -0.4, -2.2, -2.1, -9.4, 0.03,
        -1.3, -2.2, -0.4, -1.1, 0.2, 0.1,
        -1.6, -2.1, -1.1, 1.6, -13.5, 0.3,
        0.03, -9.4, 0.2, -13.5, 6.5, -0.4,
        0.03, 0.03, 0.1, 0.3, -0.4, -0.1,
    ]);
    let chi = ChiMatrix::from_table(chi, vec![7e6, 6.8e6, 5e6, 4.67e6, 3.12e6, 1.8e6])?;
    let env = ThermalEnvironment::Temperature(0.7e-3);
    for khz in [1.0, 5.0, 20.0] {
        let inf = thermal_gate_infidelity(&chi, 1, 2.0 * PI * khz * 1e3, &env)?;
        println!("delta = 2pi x {khz} kHz: 1 - F = {inf:.2e}");
    }
    Ok(())
}
