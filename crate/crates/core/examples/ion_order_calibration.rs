//! Ion-order frequency shift of a Be-Mg pair, nulling it, and inferring a
//! pseudopotential gradient from the residual out-of-phase shift.
use std::collections::BTreeMap;

use ionchain::calibration::{gradient_order_shift, infer_pseudo_gradient, null_parameter, order_shift, ModeLabel, PotentialFamily};
use ionchain::{axial_from_lambdas, IonSpecies, Potential};

fn main() -> ionchain::Result<()> {
    let (be, mg) = (IonSpecies::beryllium9(), IonSpecies::magnesium24());
    let pot: Potential = axial_from_lambdas(1.3e7, &BTreeMap::from([(3, -230e-6)]))?.into();
    for label in [ModeLabel::InPhase, ModeLabel::OutOfPhase] {
        let r = order_shift(&pot, &be, &mg, label)?;
        println!("{label}: f(BeMg) = {:.1} Hz, f(MgBe) = {:.1} Hz, delta = {:.1} Hz", r.f_ab, r.f_ba, r.delta);
    }

    let family = PotentialFamily::scaling_kappa(pot, 3);
    let null = null_parameter(&family, &be, &mg, ModeLabel::InPhase, (0.0, 2.0))?;
    println!("null at p = {:.6} after {} iterations", null.parameter, null.iterations);

    let quartic: Potential = axial_from_lambdas(1.3e7, &BTreeMap::from([(4, 250e-6)]))?.into();
    let measured = gradient_order_shift(&quartic, &be, &mg, &be, 0.2)?;
    let g = infer_pseudo_gradient(&quartic, &be, &mg, &be, measured, (-1.0, 1.0))?;
    println!("out-of-phase shift {measured:.2} Hz <- gradient {g:.4} eV/m");
    Ok(())
}
