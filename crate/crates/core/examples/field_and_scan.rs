//! Stray-field sensitivity of one ion and the centre-of-mass frequency versus ion number.
use std::collections::BTreeMap;

use ionchain::calibration::{com_frequency_scan, field_sensitivity};
use ionchain::{axial_from_lambdas, IonSpecies, Potential};

fn main() -> ionchain::Result<()> {
    let be = IonSpecies::beryllium9();
    let cubic: Potential = axial_from_lambdas(1.3e7, &BTreeMap::from([(3, -230e-6)]))?.into();
    for e in [0.5, 1.0, 2.0] {
        let s = field_sensitivity(&cubic, &[be.clone()], e, 0)?;
        println!("E = {e} V/m: df/f = {:.3e}, curvature change {:.3e}", s.fractional, s.curvature_fractional);
    }
    let pot: Potential = axial_from_lambdas(1.3e7, &BTreeMap::from([(3, -230e-6), (4, 250e-6)]))?.into();
    let scan = com_frequency_scan(&pot, &be, &(1..=8).collect::<Vec<_>>())?;
    for (n, f) in &scan.points {
        println!("N = {n}: f_COM = {:.4} MHz", f / 1e6);
    }
    println!("slope {:.1} Hz/ion, R^2 {:.4}", scan.slope, scan.r_squared);
    Ok(())
}
