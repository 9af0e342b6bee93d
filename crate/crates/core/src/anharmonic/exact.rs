//! Exact diagonalization of `H = sum hbar w (n + 1/2) + U3 + U4` in a truncated
//! product Fock space of at most three modes.

use nalgebra::DMatrix;

use super::ModeTensors;
use crate::constants::HBAR;
use crate::error::{Error, Result};

const MAX_MODES: usize = 3;
const MAX_CUTOFF: usize = 16;
const BOUNDARY_POPULATION: f64 = 1e-6;
const MIN_OVERLAP: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    cutoff: usize,
    omegas: Vec<f64>,
    /// rad/s
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

fn index(occ: &[usize], cutoff: usize) -> usize {
    occ.iter().rev().fold(0, |acc, &n| acc * cutoff + n)
}

fn occupations(mut idx: usize, modes: usize, cutoff: usize) -> Vec<usize> {
    (0..modes)
        .map(|_| {
            let n = idx % cutoff;
            idx /= cutoff;
            n
        })
        .collect()
}

/// `x = a + a^dag` on a list of (occupations, amplitude), truncated at the cutoff.
fn apply_x(terms: &[(Vec<usize>, f64)], mode: usize, cutoff: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    for (occ, amp) in terms {
        let n = occ[mode];
        if n > 0 {
            let mut down = occ.clone();
            down[mode] -= 1;
            out.push((down, amp * (n as f64).sqrt()));
        }
        if n + 1 < cutoff {
            let mut up = occ.clone();
            up[mode] += 1;
            out.push((up, amp * ((n + 1) as f64).sqrt()));
        }
    }
    out
}

/// Unperturbed energies and the anharmonic coupling matrix, both in rad/s.
fn build(g: &ModeTensors, omegas: &[f64], modes: &[usize], cutoff: usize) -> (Vec<f64>, DMatrix<f64>) {
    let sub = g.restrict(modes);
    let w: Vec<f64> = modes.iter().map(|&m| omegas[m]).collect();
    let m = modes.len();
    let dim = cutoff.pow(m as u32);
    let mut h = DMatrix::zeros(dim, dim);
    let mut diag = vec![0.0; dim];

    let mut terms: Vec<(Vec<usize>, f64)> = vec![];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let v = sub.g3.get(&[a, b, c]) / HBAR;
                if v != 0.0 {
                    terms.push((vec![a, b, c], v));
                }
                for d in 0..m {
                    let v = sub.g4.get(&[a, b, c, d]) / HBAR;
                    if v != 0.0 {
                        terms.push((vec![a, b, c, d], v));
                    }
                }
            }
        }
    }

    for (col, e) in diag.iter_mut().enumerate() {
        let occ = occupations(col, m, cutoff);
        *e = occ.iter().zip(&w).map(|(&n, wk)| wk * (n as f64 + 0.5)).sum::<f64>();
        let start = vec![(occ, 1.0)];
        for (idx, v) in &terms {
            let mut t = start.clone();
            for &k in idx.iter().rev() {
                t = apply_x(&t, k, cutoff);
            }
            for (o, amp) in t {
                h[(index(&o, cutoff), col)] += v * amp;
            }
        }
    }
    let ht = h.transpose();
    (diag, (h + ht) * 0.5)
}

/// Largest `|<m|V|n>| / |E_m - E_n|` over states `n` with every occupation at most
/// `max_occupation` — the expansion parameter of perturbation theory for those states.
pub fn perturbation_parameter(
    g: &ModeTensors,
    omegas: &[f64],
    modes: &[usize],
    cutoff: usize,
    max_occupation: usize,
) -> f64 {
    let (diag, v) = build(g, omegas, modes, cutoff);
    let mut eps = 0.0f64;
    for n in 0..diag.len() {
        if occupations(n, modes.len(), cutoff).iter().any(|&k| k > max_occupation) {
            continue;
        }
        for m in 0..diag.len() {
            if m == n || v[(m, n)] == 0.0 {
                continue;
            }
            eps = eps.max(v[(m, n)].abs() / (diag[m] - diag[n]).abs());
        }
    }
    eps
}

/// Diagonalizes the anharmonic Hamiltonian over the listed modes of `g`.
/// `omegas` are the angular frequencies of all modes of `g`.
pub fn exact_diagonalization(g: &ModeTensors, omegas: &[f64], modes: &[usize], cutoff: usize) -> Result<ExactSpectrum> {
    if modes.is_empty() || modes.len() > MAX_MODES {
        return Err(Error::invalid("modes", format!("between 1 and {MAX_MODES} modes required")));
    }
    if !(2..=MAX_CUTOFF).contains(&cutoff) {
        return Err(Error::invalid("cutoff", format!("must be in 2..={MAX_CUTOFF}")));
    }
    if g.n_modes() != omegas.len() {
        return Err(Error::DimensionMismatch(format!("{} tensor modes for {} frequencies", g.n_modes(), omegas.len())));
    }
    if let Some(&bad) = modes.iter().find(|&&m| m >= omegas.len()) {
        return Err(Error::IndexOutOfRange { what: "mode", index: bad, len: omegas.len() });
    }
    let (diag, v) = build(g, omegas, modes, cutoff);
    let w: Vec<f64> = modes.iter().map(|&m| omegas[m]).collect();
    let h = v + DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
    let eig = h.symmetric_eigen();
    Ok(ExactSpectrum {
        cutoff,
        omegas: w,
        eigenvalues: eig.eigenvalues.iter().copied().collect(),
        eigenvectors: eig.eigenvectors,
    })
}

impl ExactSpectrum {
    pub fn n_modes(&self) -> usize {
        self.omegas.len()
    }

    /// Energy (rad/s) of the eigenstate continuously connected to the unperturbed
    /// state `occ`, identified by maximal overlap.
    pub fn energy(&self, occ: &[usize]) -> Result<f64> {
        if occ.len() != self.n_modes() {
            return Err(Error::DimensionMismatch(format!("{} occupations for {} modes", occ.len(), self.n_modes())));
        }
        if occ.iter().any(|&n| n + 1 >= self.cutoff) {
            return Err(Error::invalid("occupation", "state lies on or beyond the truncation boundary"));
        }
        let row = index(occ, self.cutoff);
        let (best, overlap) = (0..self.eigenvalues.len())
            .map(|k| (k, self.eigenvectors[(row, k)].powi(2)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if overlap < MIN_OVERLAP {
            return Err(Error::AmbiguousOverlap { state: occ.to_vec(), overlap });
        }
        let boundary: f64 = (0..self.eigenvalues.len())
            .filter(|&r| occupations(r, self.n_modes(), self.cutoff).iter().any(|&n| n + 1 == self.cutoff))
            .map(|r| self.eigenvectors[(r, best)].powi(2))
            .sum();
        if boundary > BOUNDARY_POPULATION {
            return Err(Error::CutoffTooSmall { population: boundary });
        }
        Ok(self.eigenvalues[best])
    }

    /// Frequency (Hz) of the `n_z -> n_z + 1` transition with the other modes in `occ`;
    /// `z` indexes the restricted mode list.
    pub fn transition_frequency(&self, z: usize, occ: &[usize]) -> Result<f64> {
        if z >= self.n_modes() {
            return Err(Error::IndexOutOfRange { what: "mode", index: z, len: self.n_modes() });
        }
        let mut up = occ.to_vec();
        up[z] += 1;
        Ok((self.energy(&up)? - self.energy(occ)?) / (2.0 * std::f64::consts::PI))
    }

    /// Transition frequency minus the harmonic `w_z / 2 pi`, Hz.
    pub fn shift(&self, z: usize, occ: &[usize]) -> Result<f64> {
        Ok(self.transition_frequency(z, occ)? - self.omegas[z] / (2.0 * std::f64::consts::PI))
    }
}
