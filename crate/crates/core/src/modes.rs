//! Normal modes of a solved chain.
//!
//! Modes are indexed from 0 in descending frequency order. Per-ion quantities are
//! indexed by degree of freedom: the ion index for axial-only chains, `3 * ion + axis`
//! (x = 0, y = 1, z = 2) for 3D traps.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::statics::{energy_hessian, ChainConfiguration};

const SIGN_TIE: f64 = 1e-12;
const RATIO_MIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    /// Hz, descending
    pub frequencies: Vec<f64>,
    /// columns are modes; rows are degrees of freedom
    pub eigenvectors: DMatrix<f64>,
    /// sqrt(hbar / 2 omega) per mode, kg^(1/2) m
    pub sigma_prime: Vec<f64>,
    /// rows are degrees of freedom, columns modes; m
    pub sigma_ion: DMatrix<f64>,
    pub config: ChainConfiguration,
}

impl ModeSpectrum {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    /// rad/s
    pub fn omega(&self, mode: usize) -> f64 {
        2.0 * PI * self.frequencies[mode]
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.frequencies.iter().map(|f| 2.0 * PI * f).collect()
    }

    pub fn eigenvector(&self, mode: usize) -> Vec<f64> {
        self.eigenvectors.column(mode).iter().copied().collect()
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::IndexOutOfRange { what: "mode", index: mode, len: self.n_modes() });
        }
        Ok(())
    }

    pub(crate) fn check_dof(&self, dof: usize) -> Result<()> {
        if dof >= self.eigenvectors.nrows() {
            return Err(Error::IndexOutOfRange { what: "ion", index: dof, len: self.eigenvectors.nrows() });
        }
        Ok(())
    }
}

/// `H'_ij = d^2U/dx_i dx_j / sqrt(m_i m_j)` at the equilibrium, s^-2.
pub fn hessian(cfg: &ChainConfiguration) -> Result<DMatrix<f64>> {
    cfg.ensure_equilibrium()?;
    let mut h = energy_hessian(&cfg.positions, &cfg.species, &cfg.potential)?;
    let m = cfg.dof_masses();
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            h[(i, j)] /= (m[i] * m[j]).sqrt();
        }
    }
    // exact symmetry for the eigensolver
    let ht = h.transpose();
    Ok((h + ht) * 0.5)
}

fn orthonormalize(e: &mut DMatrix<f64>) {
    let n = e.ncols();
    for k in 0..n {
        for j in 0..k {
            let proj = e.column(j).dot(&e.column(k));
            let cj = e.column(j).clone_owned();
            e.column_mut(k).axpy(-proj, &cj, 1.0);
        }
        let norm = e.column(k).norm();
        e.column_mut(k).scale_mut(1.0 / norm);
    }
}

fn fix_signs(e: &mut DMatrix<f64>) {
    for k in 0..e.ncols() {
        if let Some(first) = e.column(k).iter().find(|v| v.abs() > SIGN_TIE).copied() {
            if first < 0.0 {
                e.column_mut(k).neg_mut();
            }
        }
    }
}

pub fn mode_spectrum(cfg: &ChainConfiguration) -> Result<ModeSpectrum> {
    let h = hessian(cfg)?;
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if let Some((pos, &k)) = order.iter().enumerate().find(|(_, &k)| eig.eigenvalues[k] <= 0.0) {
        return Err(Error::Unconfined { mode: pos, eigenvalue: eig.eigenvalues[k] });
    }
    let mut e = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    orthonormalize(&mut e);
    fix_signs(&mut e);
    let omegas: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].sqrt()).collect();
    let sigma_prime: Vec<f64> = omegas.iter().map(|w| (HBAR / (2.0 * w)).sqrt()).collect();
    let m = cfg.dof_masses();
    let sigma_ion = DMatrix::from_fn(n, n, |i, a| e[(i, a)] * sigma_prime[a] / m[i].sqrt());
    Ok(ModeSpectrum {
        frequencies: omegas.iter().map(|w| w / (2.0 * PI)).collect(),
        eigenvectors: e,
        sigma_prime,
        sigma_ion,
        config: cfg.clone(),
    })
}

/// `sigma_i = e'_i sqrt(hbar / 2 omega) / sqrt(m_i)` (signed), m.
pub fn ground_state_size(spectrum: &ModeSpectrum, ion: usize, mode: usize) -> Result<f64> {
    spectrum.check_dof(ion)?;
    spectrum.check_mode(mode)?;
    Ok(spectrum.sigma_ion[(ion, mode)])
}

/// `eta = delta_k |sigma_i|`.
pub fn lamb_dicke(spectrum: &ModeSpectrum, delta_k: f64, ion: usize, mode: usize) -> Result<f64> {
    if !(delta_k > 0.0) {
        return Err(Error::invalid("delta_k", "must be positive"));
    }
    Ok(delta_k * ground_state_size(spectrum, ion, mode)?.abs())
}

/// `|e'_a / e'_b|` within one mode.
pub fn amplitude_ratio(spectrum: &ModeSpectrum, mode: usize, a: usize, b: usize) -> Result<f64> {
    spectrum.check_mode(mode)?;
    spectrum.check_dof(a)?;
    spectrum.check_dof(b)?;
    let eb = spectrum.eigenvectors[(b, mode)];
    if eb.abs() < RATIO_MIN {
        return Err(Error::NearZeroComponent { mode, ion: b, value: eb });
    }
    Ok((spectrum.eigenvectors[(a, mode)] / eb).abs())
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * cur / (k + 1) as f64 - k as f64 * prev / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// `<n| exp(i eta (a + a^dag)) |n> = exp(-eta^2 / 2) L_n(eta^2)`.
pub fn carrier_matrix_element(eta: f64, n: usize) -> f64 {
    (-eta * eta / 2.0).exp() * laguerre(n, eta * eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::COULOMB;
    use crate::potential::{axial_from_lambdas, curvature_for_frequency, AxialPotential, Potential};
    use crate::species::IonSpecies;
    use crate::statics::solve_equilibrium;
    use nalgebra::DVector;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn be() -> IonSpecies {
        IonSpecies::beryllium9()
    }

    fn mg() -> IonSpecies {
        IonSpecies::magnesium24()
    }

    fn spectrum(species: &[IonSpecies], pot: Potential) -> ModeSpectrum {
        mode_spectrum(&solve_equilibrium(species, &pot, None).unwrap()).unwrap()
    }

    fn harmonic(k2: f64) -> Potential {
        AxialPotential::harmonic(k2).unwrap().into()
    }

    fn bmmb(lambda3: Option<f64>) -> ModeSpectrum {
        let lams = lambda3.map(|l| BTreeMap::from([(3, l)])).unwrap_or_default();
        spectrum(&[be(), mg(), mg(), be()], axial_from_lambdas(1.3e7, &lams).unwrap().into())
    }

    fn assert_vec(got: &[f64], want: &[f64], tol: f64) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn single_ion() {
        let s = spectrum(&[be()], harmonic(1.3e7));
        assert!((s.frequencies[0] - 2.655e6).abs() < 1e3);
        let h = hessian(&s.config).unwrap();
        assert!((h[(0, 0)] - 2.0 * be().q() * 1.3e7 / be().mass).abs() < 1e-12 * h[(0, 0)]);

        let s = spectrum(&[be()], harmonic(curvature_for_frequency(&be(), 1e6)));
        let sigma = ground_state_size(&s, 0, 0).unwrap();
        assert!((sigma - 23.7e-9).abs() < 0.05e-9);
        assert!(ground_state_size(&s, 1, 0).is_err());
    }

    #[test]
    fn equal_pair_harmonic() {
        let k2 = 1.3e7;
        let s = spectrum(&[be(), be()], harmonic(k2));
        let w2: Vec<f64> = s.omegas().iter().map(|w| w * w).collect();
        let base = 2.0 * be().q() * k2 / be().mass;
        assert!((w2[0] / base - 3.0).abs() < 1e-10);
        assert!((w2[1] / base - 1.0).abs() < 1e-10);
        assert!((s.frequencies[0] / s.frequencies[1] - 3f64.sqrt()).abs() < 1e-10);
        let r = 0.5f64.sqrt();
        assert_vec(&s.eigenvector(1), &[r, r], 1e-10);
        assert_vec(&s.eigenvector(0), &[r, -r], 1e-10);
        let single = spectrum(&[be()], harmonic(k2));
        let sig = ground_state_size(&s, 0, 1).unwrap();
        assert!((sig - r * single.sigma_ion[(0, 0)]).abs() < 1e-10 * sig);
        assert!((amplitude_ratio(&s, 1, 0, 1).unwrap() - 1.0).abs() < 1e-10);

        let h = hessian(&s.config).unwrap();
        let d = s.config.positions[1][2] - s.config.positions[0][2];
        let off = -be().q().powi(2) * 2.0 * COULOMB / (d.powi(3) * be().mass);
        assert!((h[(0, 1)] - off).abs() < 1e-10 * off.abs());
    }

    #[test]
    fn bmmb_harmonic_eigenvectors() {
        let s = bmmb(None);
        assert_vec(&s.eigenvector(1), &[0.629, -0.322, -0.322, 0.629], 0.01);
        assert_vec(&s.eigenvector(0), &[0.532, -0.465, 0.465, -0.532], 0.01);
        assert!((amplitude_ratio(&s, 0, 0, 3).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bmmb_cubic_eigenvectors_and_ratios() {
        let s = bmmb(Some(-230e-6));
        assert_vec(&s.eigenvector(1), &[0.474, -0.167, -0.452, 0.736], 0.01);
        assert_vec(&s.eigenvector(0), &[0.686, -0.531, 0.359, -0.342], 0.01);
        assert!((amplitude_ratio(&s, 1, 0, 3).unwrap() - 0.644).abs() < 0.01);
        // the quoted R4 compares the right-hand Be to the left-hand one
        assert!((amplitude_ratio(&s, 0, 3, 0).unwrap() - 0.499).abs() < 0.01);
    }

    #[test]
    fn lamb_dicke_of_be_mg_in_phase_mode() {
        let s = spectrum(&[be(), mg()], harmonic(1.3e7));
        let dk = 2.0 * PI * 2f64.sqrt() / 313e-9;
        let eta = lamb_dicke(&s, dk, 0, 1).unwrap();
        assert!((eta - 0.18).abs() < 0.01, "eta {eta}");
        let eta2 = lamb_dicke(&s, 2.0 * dk, 0, 1).unwrap();
        assert!((eta2 - 2.0 * eta).abs() < 1e-15);
        assert!(lamb_dicke(&s, 0.0, 0, 1).is_err());
    }

    #[test]
    fn unequal_pair_matches_closed_form() {
        let k2 = 1.3e7;
        let s = spectrum(&[be(), mg()], harmonic(k2));
        let mu = be().mass / mg().mass;
        let w0 = (2.0 * be().q() * k2 / be().mass).sqrt();
        let root = (mu * mu - mu + 1.0).sqrt();
        let hi = w0 * (1.0 + mu + root).sqrt();
        let lo = w0 * (1.0 + mu - root).sqrt();
        assert!((s.omega(0) / hi - 1.0).abs() < 1e-10);
        assert!((s.omega(1) / lo - 1.0).abs() < 1e-10);
    }

    #[test]
    fn com_equals_single_ion_in_harmonic_trap() {
        let k2 = 1.3e7;
        let f1 = spectrum(&[be()], harmonic(k2)).frequencies[0];
        for n in 1..=8 {
            let s = spectrum(&vec![be(); n], harmonic(k2));
            assert!((s.frequencies[n - 1] / f1 - 1.0).abs() < 1e-10, "N = {n}");
        }
    }

    #[test]
    fn orthonormal_and_reconstructs_hessian() {
        let s = spectrum(&[be(), mg(), be(), mg(), mg()], axial_from_lambdas(1.3e7, &BTreeMap::from([(3, -230e-6)])).unwrap().into());
        let e = &s.eigenvectors;
        let id = e.transpose() * e;
        for i in 0..id.nrows() {
            for j in 0..id.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).abs() < 1e-10);
            }
        }
        let w2 = DVector::from_iterator(s.n_modes(), s.omegas().iter().map(|w| w * w));
        let rebuilt = e * DMatrix::from_diagonal(&w2) * e.transpose();
        let h = hessian(&s.config).unwrap();
        assert!((rebuilt - &h).amax() < 1e-10 * h.amax());
        assert!((w2.sum() / h.trace() - 1.0).abs() < 1e-10);
        for k in 0..s.n_modes() {
            let first = *e.column(k).iter().find(|v| v.abs() > SIGN_TIE).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn cubic_corrections_enter_at_expected_orders() {
        // eigenvectors change at first order in l/lambda3, frequencies at second
        let k2 = 1.3e7;
        let base = spectrum(&[be(), be()], harmonic(k2));
        let l = crate::statics::characteristic_length(&be(), k2).unwrap();
        let mut pts_v = vec![];
        let mut pts_f = vec![];
        for r in [1e-3, 3e-3, 1e-2, 3e-2] {
            let s = spectrum(&[be(), be()], axial_from_lambdas(k2, &BTreeMap::from([(3, l / r)])).unwrap().into());
            let dv = (s.eigenvectors[(0, 1)] - base.eigenvectors[(0, 1)]).abs();
            let df = (s.frequencies[1] / base.frequencies[1] - 1.0).abs();
            pts_v.push((r.ln(), dv.ln()));
            pts_f.push((r.ln(), df.ln()));
        }
        let slope = |p: &[(f64, f64)]| (p[p.len() - 1].1 - p[0].1) / (p[p.len() - 1].0 - p[0].0);
        assert!((slope(&pts_v) - 1.0).abs() < 0.1);
        assert!((slope(&pts_f) - 2.0).abs() < 0.1);
    }

    #[test]
    fn carrier_element_examples() {
        assert!((carrier_matrix_element(0.3, 0) - (-0.045f64).exp()).abs() < 1e-15);
        assert!((carrier_matrix_element(0.0, 12) - 1.0).abs() < 1e-14);
        let half = carrier_matrix_element(0.18, 17);
        assert!((half - 0.5).abs() < 0.1, "{half}");
    }

    /// `<n| exp(i eta (a + a^dag)) |n>` by exponentiating the truncated generator.
    fn fock_carrier(eta: f64, n: usize, cutoff: usize) -> f64 {
        let x = DMatrix::from_fn(cutoff, cutoff, |i, j| {
            if i + 1 == j {
                (j as f64).sqrt()
            } else if j + 1 == i {
                (i as f64).sqrt()
            } else {
                0.0
            }
        });
        // x is symmetric: exp(i eta x) = V exp(i eta D) V^T
        let eig = x.symmetric_eigen();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..cutoff {
            let v = eig.eigenvectors[(n, k)];
            acc += Complex64::from_polar(v * v, eta * eig.eigenvalues[k]);
        }
        acc.re
    }

    proptest! {
        #[test]
        fn carrier_element_matches_fock_exponential(eta in 0.0..0.6f64, n in 0usize..25) {
            let exact = fock_carrier(eta, n, 80);
            prop_assert!((carrier_matrix_element(eta, n) - exact).abs() < 1e-10);
        }
    }
}
