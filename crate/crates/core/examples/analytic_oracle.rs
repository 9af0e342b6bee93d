//! Two-ion closed forms against the numerical spectrum over a sweep of l / lambda3.
use std::collections::BTreeMap;

use ionchain::analytic::cubic_unequal;
use ionchain::modes::mode_spectrum;
use ionchain::{axial_from_lambdas, characteristic_length, solve_equilibrium, IonSpecies};

fn main() -> ionchain::Result<()> {
    let (be, mg) = (IonSpecies::beryllium9(), IonSpecies::magnesium24());
    let k2 = 1.3e7;
    let l = characteristic_length(&be, k2)?;
    println!("{:>10} {:>14} {:>14}", "l/lambda3", "rel err high", "rel err low");
    for e in [0.003, 0.01, 0.03, 0.1] {
        let lam = -l / e;
        let pot = axial_from_lambdas(k2, &BTreeMap::from([(3, lam)]))?.into();
        let s = mode_spectrum(&solve_equilibrium(&[be.clone(), mg.clone()], &pot, None)?)?;
        let a = cubic_unequal(k2, lam, &be, &mg)?;
        let rel = |num: f64, ana: f64| (num - ana).abs() / num;
        println!("{e:>10} {:>14.3e} {:>14.3e}", rel(s.omega(0), a.omega_high), rel(s.omega(1), a.omega_low));
    }
    Ok(())
}
