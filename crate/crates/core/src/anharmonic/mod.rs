//! Cubic and quartic anharmonicity in the normal-mode basis: derivative tensors,
//! the perturbative frequency shift of the `n_Z -> n_Z + 1` transition, the
//! cross-coupling matrix, resonance screening, and an exact-diagonalization oracle.

mod exact;

pub use exact::{exact_diagonalization, perturbation_parameter, ExactSpectrum};

use nalgebra::DMatrix;

use crate::constants::{HBAR, PLANCK};
use crate::error::{Error, Result};
use crate::modes::ModeSpectrum;
use crate::statics::{energy_fourth_derivatives, energy_third_derivatives, ChainConfiguration};
use crate::tensor::DenseTensor;

/// Denominators below this fraction of `max(omega)^2` are a hard error.
pub const RESONANCE_ERROR: f64 = 1e-3;
/// Denominators below this fraction are reported as warnings.
pub const RESONANCE_WARNING: f64 = 1e-2;
/// Couplings smaller than this fraction of the largest cubic coupling cannot drive a resonance.
const COUPLING_FLOOR: f64 = 1e-9;

/// Mass-weighted, factorial-normalized third and fourth derivatives of the energy.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTensors {
    /// kg^-3/2 J m^-3, includes 1/3!
    pub a3: DenseTensor,
    /// kg^-2 J m^-4, includes 1/4!
    pub a4: DenseTensor,
}

/// Anharmonic couplings in the mode basis, J. Potential is
/// `U3 = sum G3_abc x_a x_b x_c`, `U4 = sum G4_abcd x_a x_b x_c x_d` with `x = a + a^dag`,
/// summed over all ordered index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTensors {
    pub g3: DenseTensor,
    pub g4: DenseTensor,
}

impl ModeTensors {
    pub fn zeros(n_modes: usize) -> Self {
        ModeTensors { g3: DenseTensor::zeros(n_modes, 3), g4: DenseTensor::zeros(n_modes, 4) }
    }

    pub fn n_modes(&self) -> usize {
        self.g3.dim()
    }

    /// Sub-tensors over the listed modes, in the listed order.
    pub fn restrict(&self, modes: &[usize]) -> ModeTensors {
        let n = modes.len();
        let mut out = ModeTensors::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out.g3.set(&[a, b, c], self.g3.get(&[modes[a], modes[b], modes[c]]));
                    for d in 0..n {
                        out.g4.set(&[a, b, c, d], self.g4.get(&[modes[a], modes[b], modes[c], modes[d]]));
                    }
                }
            }
        }
        out
    }
}

/// Which anharmonic sources contributed to a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Provenance {
    pub coulomb: bool,
    pub trap_cubic: bool,
    pub trap_quartic: bool,
}

/// One near-resonant denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceFlag {
    pub kind: &'static str,
    /// mode indices (0-based): probed mode first
    pub modes: Vec<usize>,
    /// |denominator| / max(omega)^2
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix {
    /// Hz per quantum; row Z is the probed mode, column alpha the spectator
    pub chi: DMatrix<f64>,
    /// Hz, descending
    pub mode_frequencies: Vec<f64>,
    pub provenance: Provenance,
    /// denominators between the warning and error thresholds
    pub warnings: Vec<ResonanceFlag>,
}

impl ChiMatrix {
    /// Wraps an externally supplied matrix (Hz) and its mode frequencies (Hz).
    pub fn from_table(chi: DMatrix<f64>, mode_frequencies: Vec<f64>) -> Result<Self> {
        let n = mode_frequencies.len();
        if chi.nrows() != n || chi.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {n} mode frequencies",
                chi.nrows(),
                chi.ncols()
            )));
        }
        if let Some(f) = mode_frequencies.iter().find(|f| !(**f > 0.0)) {
            return Err(Error::invalid("mode_frequencies", format!("{f} is not positive")));
        }
        Ok(ChiMatrix { chi, mode_frequencies, provenance: Provenance::default(), warnings: vec![] })
    }

    pub fn n_modes(&self) -> usize {
        self.mode_frequencies.len()
    }
}

pub fn derivative_tensors(cfg: &ChainConfiguration) -> Result<DerivativeTensors> {
    cfg.ensure_equilibrium()?;
    let mut a3 = energy_third_derivatives(&cfg.positions, &cfg.species, &cfg.potential)?;
    let mut a4 = energy_fourth_derivatives(&cfg.positions, &cfg.species, &cfg.potential)?;
    let inv_sqrt_m: Vec<f64> = cfg.dof_masses().iter().map(|m| 1.0 / m.sqrt()).collect();
    let n = inv_sqrt_m.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let w3 = inv_sqrt_m[i] * inv_sqrt_m[j] * inv_sqrt_m[k];
                a3.set(&[i, j, k], a3.get(&[i, j, k]) * w3 / 6.0);
                for l in 0..n {
                    a4.set(&[i, j, k, l], a4.get(&[i, j, k, l]) * w3 * inv_sqrt_m[l] / 24.0);
                }
            }
        }
    }
    Ok(DerivativeTensors { a3, a4 })
}

/// `G_abc = s'_a s'_b s'_c sum_ijk e_ia e_jb e_kc A_ijk`, and the rank-4 analogue.
pub fn mode_tensors(a: &DerivativeTensors, spectrum: &ModeSpectrum) -> Result<ModeTensors> {
    let n = spectrum.eigenvectors.nrows();
    if a.a3.dim() != n || a.a4.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "tensors of dimension {} for a spectrum with {n} degrees of freedom",
            a.a3.dim()
        )));
    }
    let mut m = spectrum.eigenvectors.clone();
    for (k, s) in spectrum.sigma_prime.iter().enumerate() {
        m.column_mut(k).scale_mut(*s);
    }
    Ok(ModeTensors { g3: a.a3.transform(&m), g4: a.a4.transform(&m) })
}

/// Convenience: derivative tensors and mode tensors for a spectrum's configuration.
pub fn mode_tensors_for(spectrum: &ModeSpectrum) -> Result<ModeTensors> {
    mode_tensors(&derivative_tensors(&spectrum.config)?, spectrum)
}

pub fn provenance(cfg: &ChainConfiguration) -> Provenance {
    Provenance {
        coulomb: cfg.n_ions() > 1,
        trap_cubic: cfg.potential.has_trap_cubic(),
        trap_quartic: cfg.potential.has_trap_quartic(),
    }
}

fn max_sq(omegas: &[f64]) -> f64 {
    omegas.iter().fold(0.0f64, |m, w| m.max(w * w))
}

/// Every second-order denominator of the shift formula whose size relative to
/// `max(omega)^2` is below `rel_tol`.
pub fn detect_resonances(spectrum: &ModeSpectrum, rel_tol: f64) -> Vec<ResonanceFlag> {
    resonances_in(&spectrum.omegas(), rel_tol, None)
}

fn resonances_in(omegas: &[f64], rel_tol: f64, g3: Option<&DenseTensor>) -> Vec<ResonanceFlag> {
    let n = omegas.len();
    let scale = max_sq(omegas);
    let floor = g3.map(|g| COUPLING_FLOOR * g.max_abs());
    let coupled = |idx: [usize; 3]| match (g3, floor) {
        (Some(g), Some(f)) => g.get(&idx).abs() > f,
        _ => true,
    };
    let mut out = vec![];
    let mut push = |kind: &'static str, modes: Vec<usize>, den: f64| {
        let relative = den.abs() / scale;
        if relative < rel_tol {
            out.push(ResonanceFlag { kind, modes, relative });
        }
    };
    for z in 0..n {
        let wz = omegas[z];
        for a in 0..n {
            if a == z {
                continue;
            }
            let wa = omegas[a];
            if coupled([a, a, z]) {
                push("2w_a = w_Z", vec![z, a], 4.0 * wa * wa - wz * wz);
            }
            if coupled([z, z, a]) {
                push("2w_Z = w_a", vec![z, a], 4.0 * wz * wz - wa * wa);
            }
            for b in a + 1..n {
                if b == z || !coupled([a, b, z]) {
                    continue;
                }
                let wb = omegas[b];
                push("w_b - w_a = w_Z", vec![z, a, b], (wb - wa).powi(2) - wz * wz);
                push("w_b + w_a = w_Z", vec![z, a, b], (wb + wa).powi(2) - wz * wz);
            }
        }
    }
    out
}

fn check_resonances(omegas: &[f64], g: &ModeTensors, z: Option<usize>) -> Result<Vec<ResonanceFlag>> {
    let flags: Vec<ResonanceFlag> = resonances_in(omegas, RESONANCE_WARNING, Some(&g.g3))
        .into_iter()
        .filter(|f| z.is_none_or(|z| f.modes.contains(&z)))
        .collect();
    if let Some(hard) = flags.iter().find(|f| f.relative < RESONANCE_ERROR) {
        return Err(Error::Resonance { kind: hard.kind.to_string(), modes: hard.modes.clone(), relative: hard.relative });
    }
    Ok(flags)
}

/// Perturbative shift (Hz) of the `n_Z -> n_Z + 1` transition of mode `z` given
/// occupations `occ`, from first-order quartic and second-order cubic terms.
pub fn frequency_shift(g: &ModeTensors, spectrum: &ModeSpectrum, occ: &[u32], z: usize) -> Result<f64> {
    let omegas = spectrum.omegas();
    frequency_shift_raw(g, &omegas, occ, z)
}

/// As [`frequency_shift`], with angular mode frequencies given directly.
pub fn frequency_shift_raw(g: &ModeTensors, omegas: &[f64], occ: &[u32], z: usize) -> Result<f64> {
    let n = omegas.len();
    if g.n_modes() != n || occ.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} modes, {} tensor modes, {} occupations",
            n,
            g.n_modes(),
            occ.len()
        )));
    }
    if z >= n {
        return Err(Error::IndexOutOfRange { what: "mode", index: z, len: n });
    }
    check_resonances(omegas, g, Some(z))?;
    Ok(shift_unchecked(g, omegas, occ, z))
}

fn shift_unchecked(g: &ModeTensors, w: &[f64], occ: &[u32], z: usize) -> f64 {
    let n = w.len();
    let nn: Vec<f64> = occ.iter().map(|&k| k as f64).collect();
    let g3 = |a: usize, b: usize, c: usize| g.g3.get(&[a, b, c]);
    let g4 = |a: usize, b: usize, c: usize, d: usize| g.g4.get(&[a, b, c, d]);
    let (wz, nz) = (w[z], nn[z]);
    let others = || (0..n).filter(move |&a| a != z);

    // first order, quartic
    let mut quartic = (nz + 1.0) * g4(z, z, z, z);
    for a in others() {
        quartic += g4(a, a, z, z) * (1.0 + 2.0 * nn[a]);
    }
    let mut e = 12.0 * quartic;

    // second order, cubic
    let mut s1 = 0.0;
    for a in others() {
        let wa = w[a];
        s1 += (2.0 * nn[a] + 1.0)
            * (2.0 * wa * g3(a, a, z).powi(2) / (4.0 * wa * wa - wz * wz)
                + 2.0 * wz * g3(z, z, a).powi(2) / (4.0 * wz * wz - wa * wa)
                + g3(z, z, z) * g3(a, a, z) / wz
                + g3(a, z, z) * g3(a, a, a) / wa);
    }
    e -= 36.0 / HBAR * s1;

    let mut s2 = 10.0 * g3(z, z, z).powi(2) / wz;
    for a in others() {
        let wa = w[a];
        s2 -= 6.0 * g3(z, z, a).powi(2) * wa / (4.0 * wz * wz - wa * wa);
        s2 += 12.0 * g3(a, z, z).powi(2) / wa;
    }
    e -= 6.0 / HBAR * (nz + 1.0) * s2;

    let mut s3 = 0.0;
    for a in others() {
        for b in others().filter(|&b| b != a) {
            let (wa, wb) = (w[a], w[b]);
            s3 += g3(a, b, z).powi(2)
                * ((nn[a] - nn[b]) * (wb - wa) / ((wb - wa).powi(2) - wz * wz)
                    + (nn[a] + nn[b] + 1.0) * (wb + wa) / ((wb + wa).powi(2) - wz * wz));
        }
    }
    e -= 72.0 / HBAR * s3;

    let mut s4 = 0.0;
    for a in others() {
        let inner: f64 = others().filter(|&b| b != a).map(|b| g3(a, b, b) * (2.0 * nn[b] + 1.0)).sum();
        s4 += g3(a, z, z) / w[a] * inner;
    }
    e -= 36.0 / HBAR * s4;

    e / PLANCK
}

/// `chi_Za = shift(n_a = 1) - shift(all zero)`; the diagonal increments `n_Z`.
pub fn chi_matrix(g: &ModeTensors, spectrum: &ModeSpectrum) -> Result<ChiMatrix> {
    let mut chi = chi_matrix_raw(g, &spectrum.omegas())?;
    chi.provenance = provenance(&spectrum.config);
    Ok(chi)
}

/// As [`chi_matrix`] from bare tensors and angular frequencies.
pub fn chi_matrix_raw(g: &ModeTensors, omegas: &[f64]) -> Result<ChiMatrix> {
    let n = omegas.len();
    if g.n_modes() != n {
        return Err(Error::DimensionMismatch(format!("{} tensor modes for {n} frequencies", g.n_modes())));
    }
    let warnings = check_resonances(omegas, g, None)?;
    let zero = vec![0u32; n];
    let mut chi = DMatrix::zeros(n, n);
    for z in 0..n {
        let base = shift_unchecked(g, omegas, &zero, z);
        for a in 0..n {
            let mut occ = zero.clone();
            occ[a] = 1;
            chi[(z, a)] = shift_unchecked(g, omegas, &occ, z) - base;
        }
    }
    Ok(ChiMatrix {
        chi,
        mode_frequencies: omegas.iter().map(|w| w / (2.0 * std::f64::consts::PI)).collect(),
        provenance: Provenance::default(),
        warnings,
    })
}

/// Full pipeline for a solved configuration: spectrum, tensors, chi.
pub fn chi_for_config(cfg: &ChainConfiguration) -> Result<(ModeSpectrum, ModeTensors, ChiMatrix)> {
    let spectrum = crate::modes::mode_spectrum(cfg)?;
    let g = mode_tensors_for(&spectrum)?;
    let chi = chi_matrix(&g, &spectrum)?;
    Ok((spectrum, g, chi))
}

#[cfg(test)]
mod tests;
