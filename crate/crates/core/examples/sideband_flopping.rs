//! Blue-sideband flopping of two ions with unequal Lamb-Dicke parameters.
use ionchain::dynamics::{sideband_flop, ModeState, SidebandParams};

fn main() -> ionchain::Result<()> {
    let p = SidebandParams { eta1: 0.16, eta2: 0.1, omega0: 2.0 * std::f64::consts::PI * 250e3, decay_time: 150e-6 };
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 5e-6).collect();
    for s in sideband_flop(&p, ModeState::Fock(0), &times)? {
        let bar = "#".repeat((s.a * 50.0).round() as usize);
        println!("{:6.1} us  {:.3} {bar}", s.t * 1e6, s.a);
    }
    Ok(())
}
