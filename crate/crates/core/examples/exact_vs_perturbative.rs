//! Second-order frequency shifts compared with truncated Fock-space diagonalization.
use ionchain::anharmonic::{exact_diagonalization, frequency_shift_raw, perturbation_parameter, ModeTensors};
use ionchain::constants::HBAR;

fn main() -> ionchain::Result<()> {
    let w = [2.0 * std::f64::consts::PI * 2.1e6, 2.0 * std::f64::consts::PI * 1.3e6];
    let mut g = ModeTensors::zeros(2);
    let c3 = 3e-4 * HBAR * w[1];
    for idx in [[0, 1, 1], [1, 0, 1], [1, 1, 0]] {
        g.g3.set(&idx, c3);
    }
    g.g4.set(&[1, 1, 1, 1], 1e-5 * HBAR * w[1]);
    println!("epsilon = {:.2e}", perturbation_parameter(&g, &w, &[0, 1], 12, 2));
    let exact = exact_diagonalization(&g, &w, &[0, 1], 12)?;
    for occ in [[0usize, 0], [1, 0], [0, 1], [1, 1]] {
        let n = [occ[0] as u32, occ[1] as u32];
        for z in 0..2 {
            println!(
                "occ {occ:?} mode {z}: perturbative {:+.4} Hz, exact {:+.4} Hz",
                frequency_shift_raw(&g, &w, &n, z)?,
                exact.shift(z, &occ)?
            );
        }
    }
    Ok(())
}
