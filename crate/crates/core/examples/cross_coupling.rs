//! Coulomb-induced cross-coupling matrix for two MgH+ ions in a surface trap.
use ionchain::anharmonic::chi_for_config;
use ionchain::potential::{curvature_for_frequency, trap3d_from_frequencies};
use ionchain::{solve_equilibrium, AxialPotential, IonSpecies};

fn main() -> ionchain::Result<()> {
    let ion = IonSpecies::magnesium_hydride();
    let axial = AxialPotential::harmonic(curvature_for_frequency(&ion, 1.8e6))?;
    let pot = trap3d_from_frequencies(&ion, (7e6, 5e6), axial, None, None)?.into();
    let cfg = solve_equilibrium(&[ion.clone(), ion], &pot, None)?;
    let (spectrum, _, chi) = chi_for_config(&cfg)?;
    let f: Vec<String> = spectrum.frequencies.iter().map(|f| format!("{:.3}", f / 1e6)).collect();
    println!("modes (MHz): {}", f.join(" "));
    for i in 0..chi.n_modes() {
        let row: Vec<String> = (0..chi.n_modes()).map(|j| format!("{:8.3}", chi.chi[(i, j)])).collect();
        println!("{}", row.join(""));
    }
    Ok(())
}
