//! Thermal occupations, Fock-superposition dephasing, geometric-phase-gate
//! trajectories and fidelities, and blue-sideband flopping of two ions on one mode.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::anharmonic::ChiMatrix;
use crate::constants::{BOLTZMANN, PLANCK};
use crate::error::{Error, Result};
use crate::roots::first_crossing;

/// Largest Fock state a thermal initial distribution may need before giving up.
pub const MAX_THERMAL_FOCK: usize = 100_000;
/// Thermal probability allowed beyond the Fock cutoff.
pub const THERMAL_TAIL: f64 = 1e-6;

/// Mean thermal occupation `1 / (exp(h f / k T) - 1)`; zero at `T = 0`.
pub fn thermal_occupation(frequency: f64, temperature: f64) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(Error::invalid("frequency", "must be positive"));
    }
    if !(temperature >= 0.0) {
        return Err(Error::invalid("temperature", "must be non-negative"));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (PLANCK * frequency / (BOLTZMANN * temperature)).exp_m1())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThermalEnvironment {
    /// single Doppler temperature for every mode, K
    Temperature(f64),
    /// explicit mean occupation per mode
    Occupations(Vec<f64>),
}

impl ThermalEnvironment {
    pub fn occupations(&self, frequencies: &[f64]) -> Result<Vec<f64>> {
        match self {
            ThermalEnvironment::Temperature(t) => frequencies.iter().map(|&f| thermal_occupation(f, *t)).collect(),
            ThermalEnvironment::Occupations(n) => {
                if n.len() != frequencies.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} occupations for {} modes",
                        n.len(),
                        frequencies.len()
                    )));
                }
                if let Some(bad) = n.iter().find(|v| !(**v >= 0.0)) {
                    return Err(Error::invalid("occupations", format!("{bad} is negative")));
                }
                Ok(n.clone())
            }
        }
    }

    /// Ratio of successive thermal probabilities, `nbar / (nbar + 1)`, per mode.
    fn ratios(&self, frequencies: &[f64]) -> Result<Vec<f64>> {
        Ok(self.occupations(frequencies)?.into_iter().map(|n| n / (n + 1.0)).collect())
    }
}

/// `(|0> + |n_upper>) / sqrt(2)` in one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSuperposition {
    pub mode: usize,
    pub n_upper: u32,
}

impl FockSuperposition {
    pub fn new(mode: usize, n_upper: u32) -> Result<Self> {
        if n_upper == 0 {
            return Err(Error::invalid("n_upper", "must be at least 1"));
        }
        Ok(FockSuperposition { mode, n_upper })
    }
}

fn check_mode(chi: &ChiMatrix, mode: usize) -> Result<()> {
    if mode >= chi.n_modes() {
        return Err(Error::IndexOutOfRange { what: "mode", index: mode, len: chi.n_modes() });
    }
    Ok(())
}

/// Magnitude of the off-diagonal density-matrix element of the superposition,
/// normalized to 1 at `t = 0`, with every other mode in a thermal state.
pub fn fock_coherence(chi: &ChiMatrix, sup: FockSuperposition, env: &ThermalEnvironment, t: f64) -> Result<f64> {
    check_mode(chi, sup.mode)?;
    let x = env.ratios(&chi.mode_frequencies)?;
    let z = sup.mode;
    let mut c = 1.0;
    for (a, &xa) in x.iter().enumerate() {
        if a == z || xa == 0.0 {
            continue;
        }
        let phase = 2.0 * PI * chi.chi[(z, a)] * sup.n_upper as f64 * t;
        let den = (Complex64::new(1.0, 0.0) - Complex64::from_polar(xa, -phase)).norm();
        c *= (1.0 - xa) / den;
    }
    Ok(c)
}

/// First time at which the coherence drops to 1/2, searched on `[0, t_max]`.
pub fn coherence_half_time(
    chi: &ChiMatrix,
    sup: FockSuperposition,
    env: &ThermalEnvironment,
    t_max: f64,
) -> Result<Option<f64>> {
    let root = first_crossing(|t| Ok(fock_coherence(chi, sup, env, t)? - 0.5), 0.0, t_max, 4000, 1e-9 * t_max)?;
    Ok(root.map(|r| r.x))
}

/// Constant-drive state-dependent-force gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    /// drive strength, rad/s (the Lamb-Dicke factor is absorbed)
    pub omega: f64,
    /// drive detuning from the gate mode, rad/s
    pub delta: f64,
    /// s; `None` means `2 pi / |delta|`
    pub duration: Option<f64>,
    pub mode: usize,
}

impl GateParams {
    /// The nominal gate: `Omega = delta`, one loop.
    pub fn nominal(delta: f64, mode: usize) -> Result<Self> {
        if delta == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        Ok(GateParams { omega: delta, delta, duration: None, mode })
    }

    pub fn duration(&self) -> Result<f64> {
        if self.delta == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        let tau = self.duration.unwrap_or(2.0 * PI / self.delta.abs());
        if !(tau > 0.0) {
            return Err(Error::invalid("duration", "must be positive"));
        }
        Ok(tau)
    }
}

/// Phase-space displacement `alpha(t)` and geometric phase `Phi(t)`.
pub fn gate_trajectory(p: &GateParams, t: f64) -> Result<(Complex64, f64)> {
    let d = p.delta;
    if d == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let alpha = Complex64::from_polar(-(p.omega / d) * (0.5 * d * t).sin(), -0.5 * d * t);
    let phi = p.omega * p.omega / (4.0 * d * d) * ((d * t).sin() - d * t);
    Ok((alpha, phi))
}

/// Fidelity of the Bell state produced in a spin-echo sequence. `|Phi|` enters, so
/// either sign convention for the accumulated phase gives `F = 1` at `|Phi| = pi/2`.
pub fn gate_fidelity(alpha: Complex64, phi: f64) -> f64 {
    let a2 = alpha.norm_sqr();
    0.375 + 0.125 * (-2.0 * a2).exp() + 0.5 * (-0.5 * a2).exp() * phi.abs().sin()
}

/// Leading-order gate infidelity from thermal spread of the gate-mode frequency.
/// Sums run over every mode, including the gate mode itself.
pub fn thermal_gate_infidelity(chi: &ChiMatrix, mode: usize, delta: f64, env: &ThermalEnvironment) -> Result<f64> {
    check_mode(chi, mode)?;
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let n = env.occupations(&chi.mode_frequencies)?;
    let row: Vec<f64> = (0..n.len()).map(|a| chi.chi[(mode, a)]).collect();
    let mean: f64 = row.iter().zip(&n).map(|(c, n)| c * n).sum();
    // sum_{a != b} c_a c_b n_a n_b = mean^2 - sum_a c_a^2 n_a^2
    let diag: f64 = row.iter().zip(&n).map(|(c, n)| c * c * n * n).sum();
    let var: f64 = row.iter().zip(&n).map(|(c, n)| c * c * n * (2.0 * n + 1.0)).sum();
    Ok(3.0 * PI.powi(4) / (delta * delta) * (mean * mean - diag + var))
}

/// Initial motional state for [`sideband_flop`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeState {
    Fock(usize),
    Thermal(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandParams {
    pub eta1: f64,
    pub eta2: f64,
    /// carrier Rabi frequency, rad/s
    pub omega0: f64,
    /// s; `f64::INFINITY` disables the decay
    pub decay_time: f64,
}

/// Spin populations at one time; `a = P(uu) + (P(ud) + P(du)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandSample {
    pub t: f64,
    pub p_dd: f64,
    pub p_ud: f64,
    pub p_du: f64,
    pub p_uu: f64,
    pub a: f64,
}

impl SidebandSample {
    pub fn total(&self) -> f64 {
        self.p_dd + self.p_ud + self.p_du + self.p_uu
    }
}

/// Fock weights of the initial state, with the thermal tail below [`THERMAL_TAIL`].
fn initial_weights(state: ModeState) -> Result<Vec<(usize, f64)>> {
    match state {
        ModeState::Fock(n) => Ok(vec![(n, 1.0)]),
        ModeState::Thermal(nbar) => {
            if !(nbar >= 0.0) {
                return Err(Error::invalid("nbar", "must be non-negative"));
            }
            if nbar == 0.0 {
                return Ok(vec![(0, 1.0)]);
            }
            let r = nbar / (nbar + 1.0);
            let mut n_max = (10.0 * nbar + 10.0).ceil() as usize;
            while r.powi(n_max as i32 + 1) > THERMAL_TAIL {
                if n_max >= MAX_THERMAL_FOCK {
                    return Err(Error::CutoffTooSmall { population: r.powi(n_max as i32 + 1) });
                }
                n_max = (n_max * 2).min(MAX_THERMAL_FOCK);
            }
            let mut w: Vec<(usize, f64)> = (0..=n_max).map(|n| (n, r.powi(n as i32) / (nbar + 1.0))).collect();
            let total: f64 = w.iter().map(|x| x.1).sum();
            w.iter_mut().for_each(|x| x.1 /= total);
            Ok(w)
        }
    }
}

/// Populations in the block `{|dd,n>, |ud,n+1>, |du,n+1>, |uu,n+2>}` reached from
/// `|dd,n>`: coherent values at each time plus the infinite-time (dephased) average.
fn block_populations(p: &SidebandParams, n: usize, times: &[f64]) -> (Vec<[f64; 4]>, [f64; 4]) {
    let s1 = ((n + 1) as f64).sqrt();
    let s2 = ((n + 2) as f64).sqrt();
    let (g1, g2) = (0.5 * p.omega0 * p.eta1, 0.5 * p.omega0 * p.eta2);
    // ion 1 is the first spin label
    let mut h = DMatrix::<f64>::zeros(4, 4);
    h[(0, 1)] = g1 * s1;
    h[(0, 2)] = g2 * s1;
    h[(1, 3)] = g2 * s2;
    h[(2, 3)] = g1 * s2;
    let h = &h + h.transpose();
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let c: DVector<f64> = v.row(0).transpose();

    let coherent = times
        .iter()
        .map(|&t| {
            let mut pop = [0.0; 4];
            for (s, slot) in pop.iter_mut().enumerate() {
                let amp: Complex64 =
                    (0..4).map(|k| Complex64::from_polar(v[(s, k)] * c[k], -eig.eigenvalues[k] * t)).sum();
                *slot = amp.norm_sqr();
            }
            pop
        })
        .collect();

    // time average keeps cross terms only within degenerate eigenspaces
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let mut steady = [0.0; 4];
    for (s, slot) in steady.iter_mut().enumerate() {
        for j in 0..4 {
            for k in 0..4 {
                if (eig.eigenvalues[j] - eig.eigenvalues[k]).abs() <= 1e-9 * scale {
                    *slot += v[(s, j)] * c[j] * v[(s, k)] * c[k];
                }
            }
        }
    }
    (coherent, steady)
}

/// Blue-sideband flopping of two ions, both starting in `|down>`, sharing one mode.
/// Ion `j` couples `|down, n> <-> |up, n+1>` at Rabi rate `omega0 eta_j sqrt(n+1)`.
/// Oscillations decay as `exp(-t / decay_time)` toward the dephased populations.
pub fn sideband_flop(p: &SidebandParams, state: ModeState, times: &[f64]) -> Result<Vec<SidebandSample>> {
    if !(p.eta1 >= 0.0 && p.eta2 >= 0.0) {
        return Err(Error::invalid("eta", "Lamb-Dicke parameters must be non-negative"));
    }
    if !(p.decay_time > 0.0) {
        return Err(Error::invalid("decay_time", "must be positive"));
    }
    let weights = initial_weights(state)?;
    let mut coh = vec![[0.0; 4]; times.len()];
    let mut steady = [0.0; 4];
    for (n, w) in weights {
        let (c, s) = block_populations(p, n, times);
        for (acc, pop) in coh.iter_mut().zip(c) {
            for k in 0..4 {
                acc[k] += w * pop[k];
            }
        }
        for k in 0..4 {
            steady[k] += w * s[k];
        }
    }
    Ok(times
        .iter()
        .zip(coh)
        .map(|(&t, pop)| {
            let damp = if p.decay_time.is_infinite() { 1.0 } else { (-t / p.decay_time).exp() };
            let q: Vec<f64> = (0..4).map(|k| steady[k] + (pop[k] - steady[k]) * damp).collect();
            SidebandSample { t, p_dd: q[0], p_ud: q[1], p_du: q[2], p_uu: q[3], a: q[3] + 0.5 * (q[1] + q[2]) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_ion_chi() -> ChiMatrix {
        let chi = DMatrix::from_row_slice(3, 3, &[-2.9, -2.7, 0.04, -2.7, -0.9, 0.2, 0.04, 0.2, -0.1]);
        ChiMatrix::from_table(chi, vec![7e6, 5e6, 1.8e6]).unwrap()
    }

    #[test]
    fn occupations() {
        assert!((thermal_occupation(5e6, 0.7e-3).unwrap() - 2.44).abs() < 0.01);
        assert!((thermal_occupation(1.8e6, 0.7e-3).unwrap() - 7.62).abs() < 0.01);
        assert_eq!(thermal_occupation(1e6, 0.0).unwrap(), 0.0);
        assert!(thermal_occupation(1e6, 1e-9).unwrap() < 1e-20);
        assert!(thermal_occupation(0.0, 1.0).is_err());
        let env = ThermalEnvironment::Occupations(vec![1.0]);
        assert!(env.occupations(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn coherence_decay_and_revival() {
        let chi = single_ion_chi();
        let env = ThermalEnvironment::Temperature(0.7e-3);
        let sup = FockSuperposition::new(0, 1).unwrap();
        assert_eq!(fock_coherence(&chi, sup, &env, 0.0).unwrap(), 1.0);
        let half = coherence_half_time(&chi, sup, &env, 0.2).unwrap().unwrap();
        assert!((half - 0.040).abs() < 0.15 * 0.040, "t_half = {half}");
        let revival = fock_coherence(&chi, sup, &env, 1.0 / 2.7).unwrap();
        assert!(revival >= 0.75, "revival {revival}");
        let ten = coherence_half_time(&chi, FockSuperposition::new(0, 10).unwrap(), &env, 0.05).unwrap().unwrap();
        assert!((3e-3..=5e-3).contains(&ten), "t_half(10) = {ten}");
        assert!(FockSuperposition::new(0, 0).is_err());
    }

    #[test]
    fn coherence_is_one_without_cross_terms() {
        let chi = ChiMatrix::from_table(DMatrix::from_diagonal_element(3, 3, 5.0), vec![3.0e6, 2.0e6, 1.0e6]).unwrap();
        let env = ThermalEnvironment::Temperature(1e-3);
        let c = fock_coherence(&chi, FockSuperposition::new(1, 3).unwrap(), &env, 0.7).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn gate_loop_closes() {
        let d = 2.0 * PI * 1e4;
        let p = GateParams::nominal(d, 0).unwrap();
        let tau = p.duration().unwrap();
        let (a, phi) = gate_trajectory(&p, tau).unwrap();
        assert!(a.norm() < 1e-12);
        assert!((phi.abs() - PI / 2.0).abs() < 1e-12);
        assert!((gate_fidelity(a, phi) - 1.0).abs() < 1e-12);
        let (a, _) = gate_trajectory(&p, tau / 2.0).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-12);
        let zero = GateParams { omega: 0.0, ..p };
        let (a, phi) = gate_trajectory(&zero, 0.3).unwrap();
        assert!(a.norm() == 0.0 && phi == 0.0);
        assert!(matches!(GateParams::nominal(0.0, 0), Err(Error::ZeroDetuning)));
    }

    #[test]
    fn fidelity_error_model() {
        let e: f64 = 0.01;
        let f = gate_fidelity(Complex64::new(PI * e, 0.0), PI / 2.0);
        let a2 = (PI * e).powi(2);
        assert!((f - (0.375 + 0.125 * (-2.0 * a2).exp() + 0.5 * (-0.5 * a2).exp())).abs() < 1e-15);
        let f = gate_fidelity(Complex64::new(0.0, 0.0), PI / 2.0 * (1.0 - 2.0 * e));
        assert!((1.0 - f - 0.5 * (1.0 - (PI * e).cos())).abs() < 1e-15);
    }

    /// Averages the exact single-loop fidelity over a thermal product distribution,
    /// with each Fock configuration shifting the gate mode by `sum chi n`.
    fn sampled_infidelity(chi: &ChiMatrix, z: usize, delta: f64, nbar: &[f64]) -> f64 {
        let cut = 60usize;
        let p = GateParams::nominal(delta, z).unwrap();
        let tau = p.duration().unwrap();
        let probs: Vec<Vec<f64>> =
            nbar.iter().map(|&n| (0..cut).map(|k| (n / (n + 1.0)).powi(k as i32) / (n + 1.0)).collect()).collect();
        let mut acc = 0.0;
        for i in 0..cut {
            for j in 0..cut {
                let shift = chi.chi[(z, 0)] * i as f64 + chi.chi[(z, 1)] * j as f64;
                let q = GateParams { delta: delta - 2.0 * PI * shift, ..p };
                let (a, phi) = gate_trajectory(&q, tau).unwrap();
                acc += probs[0][i] * probs[1][j] * (1.0 - gate_fidelity(a, phi));
            }
        }
        acc
    }

    #[test]
    fn thermal_infidelity_matches_sampled_average() {
        let chi = ChiMatrix::from_table(DMatrix::from_row_slice(2, 2, &[3.0, -8.0, -8.0, 1.0]), vec![2e6, 1e6]).unwrap();
        let nbar = vec![1.5, 2.5];
        let delta = 2.0 * PI * 20e3;
        let formula = thermal_gate_infidelity(&chi, 0, delta, &ThermalEnvironment::Occupations(nbar.clone())).unwrap();
        let sampled = sampled_infidelity(&chi, 0, delta, &nbar);
        assert!((formula - sampled).abs() < 0.02 * sampled, "{formula} vs {sampled}");
        let zero = ThermalEnvironment::Occupations(vec![0.0, 0.0]);
        assert_eq!(thermal_gate_infidelity(&chi, 0, delta, &zero).unwrap(), 0.0);
        assert!(thermal_gate_infidelity(&chi, 2, delta, &zero).is_err());
    }

    #[test]
    fn infidelity_scalings() {
        let chi = single_ion_chi();
        let at = |n: f64, d: f64| {
            thermal_gate_infidelity(&chi, 1, d, &ThermalEnvironment::Occupations(vec![n; 3])).unwrap()
        };
        let d = 2.0 * PI * 1e3;
        assert!((at(0.1, d) / at(0.1, 2.0 * d) - 4.0).abs() < 1e-12);
        // small occupations: quadratic for the mean-square term, linear for the variance
        let r = at(1e-6, d) / at(1e-7, d);
        assert!((r - 10.0).abs() < 1e-4);
    }

    #[test]
    fn sideband_symmetric_pair() {
        let p = SidebandParams { eta1: 0.1, eta2: 0.1, omega0: 2.0 * PI * 1e5, decay_time: f64::INFINITY };
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 2e-6).collect();
        let s = sideband_flop(&p, ModeState::Fock(0), &times).unwrap();
        for x in &s {
            assert!((x.p_ud - x.p_du).abs() < 1e-12);
            assert!((x.total() - 1.0).abs() < 1e-10);
        }
        assert_eq!(s[0].a, 0.0);
    }

    #[test]
    fn sideband_single_ion_limit() {
        // eta2 = 0: ion 1 flops at omega0 eta1 alone
        let p = SidebandParams { eta1: 0.2, eta2: 0.0, omega0: 1e5, decay_time: f64::INFINITY };
        let times = [0.0, 1e-5, 3e-5, 7e-5];
        let s = sideband_flop(&p, ModeState::Fock(2), &times).unwrap();
        for x in &s {
            let rate = 1e5 * 0.2 * 3f64.sqrt();
            assert!((x.p_ud - (0.5 * rate * x.t).sin().powi(2)).abs() < 1e-12);
            assert!((x.a - 0.5 * x.p_ud).abs() < 1e-12);
        }
    }

    #[test]
    fn sideband_decay_and_trivial_drive() {
        let p = SidebandParams { eta1: 0.1, eta2: 0.0625, omega0: 1e6, decay_time: 1e-4 };
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 1e-4).collect();
        let s = sideband_flop(&p, ModeState::Thermal(0.8), &times).unwrap();
        assert!((s[0].a).abs() < 1e-12);
        let late = s.last().unwrap();
        let steady = sideband_flop(&SidebandParams { decay_time: 1e-12, ..p }, ModeState::Thermal(0.8), &[1.0]).unwrap();
        assert!((late.a - steady[0].a).abs() < 1e-6);
        let off = SidebandParams { omega0: 0.0, ..p };
        for x in sideband_flop(&off, ModeState::Thermal(0.8), &times).unwrap() {
            assert!(x.a.abs() < 1e-15 && (x.total() - 1.0).abs() < 1e-10);
        }
        assert!(sideband_flop(&SidebandParams { eta1: -1.0, ..p }, ModeState::Fock(0), &times).is_err());
    }

    #[test]
    fn thermal_weights_reach_tail() {
        let w = initial_weights(ModeState::Thermal(50.0)).unwrap();
        let r: f64 = 50.0 / 51.0;
        assert!(r.powi(w.len() as i32) <= THERMAL_TAIL);
        assert!((w.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(matches!(initial_weights(ModeState::Thermal(1e7)), Err(Error::CutoffTooSmall { .. })));
    }

    proptest! {
        #[test]
        fn coherence_bounded_and_periodic(
            c01 in -20.0f64..20.0, c02 in -20.0f64..20.0, n in 1u32..6,
            t in 0.0f64..2.0, temp in 1e-5f64..1e-2,
        ) {
            let chi = DMatrix::from_row_slice(3, 3, &[0.0, c01, c02, c01, 0.0, 0.0, c02, 0.0, 0.0]);
            let chi = ChiMatrix::from_table(chi, vec![7e6, 5e6, 1.8e6]).unwrap();
            let env = ThermalEnvironment::Temperature(temp);
            let sup = FockSuperposition::new(0, n).unwrap();
            let c = fock_coherence(&chi, sup, &env, t).unwrap();
            prop_assert!((0.0..=1.0 + 1e-15).contains(&c));
            // single spectator: period 1 / |chi n|
            let one = ChiMatrix::from_table(
                DMatrix::from_row_slice(2, 2, &[0.0, c01, c01, 0.0]), vec![7e6, 5e6]).unwrap();
            prop_assume!(c01.abs() > 1e-3);
            let period = 1.0 / (c01.abs() * n as f64);
            let a = fock_coherence(&one, sup, &env, t).unwrap();
            let b = fock_coherence(&one, sup, &env, t + period).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a);
        }

        #[test]
        fn gate_closes_after_whole_loops(k in 1u32..6, d in 1e3f64..1e6, w in 1e2f64..1e6) {
            let p = GateParams { omega: w, delta: d, duration: None, mode: 0 };
            let (a, phi) = gate_trajectory(&p, 2.0 * PI * k as f64 / d).unwrap();
            prop_assert!(a.norm() < 1e-9 * (w / d).max(1.0));
            let want = -PI * k as f64 * w * w / (2.0 * d * d);
            prop_assert!((phi - want).abs() < 1e-9 * want.abs());
        }

        #[test]
        fn sideband_conserves_probability(e1 in 0.0f64..0.3, e2 in 0.0f64..0.3, n in 0usize..20, t in 0.0f64..1e-3) {
            let p = SidebandParams { eta1: e1, eta2: e2, omega0: 2e5, decay_time: f64::INFINITY };
            let s = sideband_flop(&p, ModeState::Fock(n), &[t]).unwrap();
            prop_assert!((s[0].total() - 1.0).abs() < 1e-10);
        }
    }
}
