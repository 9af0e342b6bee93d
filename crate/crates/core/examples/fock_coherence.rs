//! Dephasing of a (|0> + |n>) superposition by thermal spectator modes.
use ionchain::anharmonic::ChiMatrix;
use ionchain::dynamics::{coherence_half_time, fock_coherence, FockSuperposition, ThermalEnvironment};
use nalgebra::DMatrix;

fn main() -> ionchain::Result<()> {
    let chi = DMatrix::from_row_slice(3, 3, &[-2.9, -2.7, 0.04, -2.7, -0.9, 0.2, 0.04, 0.2, -0.1]);
    let chi = ChiMatrix::from_table(chi, vec![7e6, 5e6, 1.8e6])?;
    let env = ThermalEnvironment::Temperature(0.7e-3);
    for n in [1, 10] {
        let sup = FockSuperposition::new(0, n)?;
        let half = coherence_half_time(&chi, sup, &env, 0.2)?.unwrap_or(f64::NAN);
        println!("n = {n}: C falls to 1/2 after {:.2} ms", half * 1e3);
    }
    let sup = FockSuperposition::new(0, 1)?;
    for t in [0.0, 0.02, 0.1, 0.2, 0.37] {
        println!("  C({t:.2} s) = {:.3}", fock_coherence(&chi, sup, &env, t)?);
    }
    Ok(())
}
