//! Equilibrium positions and length scales of small chains.
use ionchain::{characteristic_length, chain_length, solve_equilibrium, AxialPotential, IonSpecies, Potential};

fn main() -> ionchain::Result<()> {
    let be = IonSpecies::beryllium9();
    let k2 = 1.3e7;
    println!("l = {:.3} um", characteristic_length(&be, k2)? * 1e6);

    let pot: Potential = AxialPotential::harmonic(k2)?.into();
    for n in [2, 3, 5, 8] {
        let cfg = solve_equilibrium(&vec![be.clone(); n], &pot, None)?;
        let z: Vec<String> = cfg.axial_positions().iter().map(|z| format!("{:+.3}", z * 1e6)).collect();
        println!("N = {n}: L = {:.3} um, z = [{}] um", chain_length(&cfg)? * 1e6, z.join(", "));
    }
    Ok(())
}
