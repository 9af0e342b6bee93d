//! Axial modes of a mixed Be-Mg-Mg-Be chain with and without a cubic term.
use std::collections::BTreeMap;

use ionchain::modes::{amplitude_ratio, mode_spectrum};
use ionchain::{axial_from_lambdas, solve_equilibrium, IonSpecies};

fn main() -> ionchain::Result<()> {
    let (be, mg) = (IonSpecies::beryllium9(), IonSpecies::magnesium24());
    let chain = [be.clone(), mg.clone(), mg, be];
    for lambda3 in [None, Some(-230e-6)] {
        let terms: BTreeMap<u32, f64> = lambda3.map(|l| (3, l)).into_iter().collect();
        let pot = axial_from_lambdas(1.3e7, &terms)?.into();
        let s = mode_spectrum(&solve_equilibrium(&chain, &pot, None)?)?;
        println!("lambda3 = {lambda3:?}");
        for k in 0..s.n_modes() {
            let e: Vec<String> = s.eigenvector(k).iter().map(|v| format!("{v:+.3}")).collect();
            println!("  {:.4} MHz  [{}]", s.frequencies[k] / 1e6, e.join(", "));
        }
        println!("  |e1/e4| mode index 1: {:.3}", amplitude_ratio(&s, 1, 0, 3)?);
    }
    Ok(())
}
