//! Total energy of a chain (trap + Coulomb), its derivatives, and the
//! equilibrium solver.
//!
//! Coordinates are flattened per ion: axial-only potentials use one degree of
//! freedom per ion (z), 3D traps use three (x, y, z).

use nalgebra::{DMatrix, DVector};

use crate::constants::COULOMB;
use crate::error::{Error, Result};
use crate::potential::{LocalDerivatives, Potential};
use crate::species::IonSpecies;
use crate::tensor::DenseTensor;

const MIN_SEPARATION: f64 = 1e-12;
const MAX_NEWTON: usize = 200;
const GRADIENT_TOL: f64 = 1e-10;

/// Solved equilibrium of an ordered chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfiguration {
    pub species: Vec<IonSpecies>,
    /// m; radial components are zero for axial-only potentials
    pub positions: Vec<[f64; 3]>,
    pub potential: Potential,
    /// J/m, largest gradient component at the solution
    pub residual_gradient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicScales {
    pub l: f64,
    pub length: f64,
}

impl ChainConfiguration {
    pub fn n_ions(&self) -> usize {
        self.species.len()
    }

    pub fn dims(&self) -> usize {
        self.potential.dims()
    }

    /// Number of motional degrees of freedom.
    pub fn n_dof(&self) -> usize {
        self.n_ions() * self.dims()
    }

    pub fn axial_positions(&self) -> Vec<f64> {
        self.positions.iter().map(|r| r[2]).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.species.iter().map(|s| s.mass).collect()
    }

    /// Mass of the ion owning each degree of freedom.
    pub fn dof_masses(&self) -> Vec<f64> {
        let d = self.dims();
        self.species.iter().flat_map(|s| std::iter::repeat_n(s.mass, d)).collect()
    }

    /// Convergence threshold used by the solver, `1e-10 * 2 q kappa2 l`.
    pub fn tolerance(&self) -> f64 {
        gradient_tolerance(&self.species, &self.potential)
    }

    pub fn ensure_equilibrium(&self) -> Result<()> {
        let tol = self.tolerance();
        if self.residual_gradient <= tol {
            return Ok(());
        }
        Err(Error::NotAtEquilibrium { residual: self.residual_gradient, tolerance: tol })
    }

    pub fn energy(&self) -> Result<f64> {
        total_energy(&self.positions, &self.species, &self.potential)
    }

    pub fn gradient(&self) -> Result<Vec<f64>> {
        energy_gradient(&self.positions, &self.species, &self.potential)
    }

    pub fn scales(&self) -> Result<CharacteristicScales> {
        Ok(CharacteristicScales {
            l: characteristic_length(&self.species[0], self.potential.axial().kappa2())?,
            length: chain_length(self)?,
        })
    }
}

/// `l = (q / (8 pi eps0 kappa2))^(1/3)`
pub fn characteristic_length(species: &IonSpecies, kappa2: f64) -> Result<f64> {
    if !(kappa2 > 0.0) {
        return Err(Error::invalid("kappa2", "must be positive"));
    }
    Ok((species.q() * COULOMB / (2.0 * kappa2)).cbrt())
}

/// Outermost axial separation.
pub fn chain_length(cfg: &ChainConfiguration) -> Result<f64> {
    let n = cfg.n_ions();
    if n < 2 {
        return Err(Error::invalid("chain", "chain length needs at least two ions"));
    }
    Ok(cfg.positions[n - 1][2] - cfg.positions[0][2])
}

fn gradient_tolerance(species: &[IonSpecies], potential: &Potential) -> f64 {
    let k2 = potential.axial().kappa2();
    let q = species[0].q().abs();
    let l = characteristic_length(&species[0], k2).unwrap_or(1e-6);
    GRADIENT_TOL * 2.0 * q * k2 * l
}

/// Maps (ion, cartesian axis) to the flattened coordinate index, if that axis is modelled.
#[inline]
fn dof_index(dims: usize, ion: usize, axis: usize) -> Option<usize> {
    match dims {
        1 if axis == 2 => Some(ion),
        1 => None,
        _ => Some(ion * 3 + axis),
    }
}

fn axes(dims: usize) -> &'static [usize] {
    if dims == 1 {
        &[2]
    } else {
        &[0, 1, 2]
    }
}

fn check_inputs(positions: &[[f64; 3]], species: &[IonSpecies]) -> Result<()> {
    if positions.len() != species.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} positions for {} species",
            positions.len(),
            species.len()
        )));
    }
    if species.is_empty() {
        return Err(Error::invalid("species", "chain is empty"));
    }
    Ok(())
}

fn separation(ri: &[f64; 3], rj: &[f64; 3], i: usize, j: usize) -> Result<([f64; 3], f64)> {
    let r = [ri[0] - rj[0], ri[1] - rj[1], ri[2] - rj[2]];
    let d = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if !(d >= MIN_SEPARATION) {
        return Err(Error::CoincidentIons { i, j, distance: d });
    }
    Ok((r, d))
}

#[inline]
fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Cartesian derivatives of `1/|r|`.
pub(crate) fn inv_r_d1(r: &[f64; 3], d: f64, a: usize) -> f64 {
    -r[a] / d.powi(3)
}

pub(crate) fn inv_r_d2(r: &[f64; 3], d: f64, a: usize, b: usize) -> f64 {
    3.0 * r[a] * r[b] / d.powi(5) - kd(a, b) / d.powi(3)
}

pub(crate) fn inv_r_d3(r: &[f64; 3], d: f64, a: usize, b: usize, c: usize) -> f64 {
    -15.0 * r[a] * r[b] * r[c] / d.powi(7)
        + 3.0 * (kd(a, b) * r[c] + kd(a, c) * r[b] + kd(b, c) * r[a]) / d.powi(5)
}

pub(crate) fn inv_r_d4(r: &[f64; 3], d: f64, a: usize, b: usize, c: usize, e: usize) -> f64 {
    105.0 * r[a] * r[b] * r[c] * r[e] / d.powi(9)
        - 15.0
            * (kd(a, b) * r[c] * r[e]
                + kd(a, c) * r[b] * r[e]
                + kd(a, e) * r[b] * r[c]
                + kd(b, c) * r[a] * r[e]
                + kd(b, e) * r[a] * r[c]
                + kd(c, e) * r[a] * r[b])
            / d.powi(7)
        + 3.0 * (kd(a, b) * kd(c, e) + kd(a, c) * kd(b, e) + kd(a, e) * kd(b, c)) / d.powi(5)
}

fn locals(positions: &[[f64; 3]], species: &[IonSpecies], potential: &Potential) -> Vec<LocalDerivatives> {
    positions.iter().zip(species).map(|(r, s)| potential.local(s, *r)).collect()
}

/// `U = sum_i q_i V(r_i) + sum_{i<j} q_i q_j / (4 pi eps0 r_ij)`, in J.
pub fn total_energy(positions: &[[f64; 3]], species: &[IonSpecies], potential: &Potential) -> Result<f64> {
    check_inputs(positions, species)?;
    let mut u: f64 = positions.iter().zip(species).map(|(r, s)| potential.local(s, *r).value).sum();
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let (_, d) = separation(&positions[i], &positions[j], i, j)?;
            u += COULOMB * species[i].q() * species[j].q() / d;
        }
    }
    Ok(u)
}

/// Analytic gradient over the modelled degrees of freedom, J/m.
pub fn energy_gradient(positions: &[[f64; 3]], species: &[IonSpecies], potential: &Potential) -> Result<Vec<f64>> {
    check_inputs(positions, species)?;
    let dims = potential.dims();
    let n = positions.len();
    let mut g = vec![0.0; n * dims];
    for (i, loc) in locals(positions, species, potential).iter().enumerate() {
        for &a in axes(dims) {
            g[dof_index(dims, i, a).unwrap()] += loc.grad[a];
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (r, d) = separation(&positions[i], &positions[j], i, j)?;
            let c = COULOMB * species[i].q() * species[j].q();
            for &a in axes(dims) {
                let v = c * inv_r_d1(&r, d, a);
                g[dof_index(dims, i, a).unwrap()] += v;
                g[dof_index(dims, j, a).unwrap()] -= v;
            }
        }
    }
    Ok(g)
}

/// Analytic (not mass-weighted) Hessian, J/m^2.
pub fn energy_hessian(positions: &[[f64; 3]], species: &[IonSpecies], potential: &Potential) -> Result<DMatrix<f64>> {
    check_inputs(positions, species)?;
    let dims = potential.dims();
    let n = positions.len();
    let mut h = DMatrix::zeros(n * dims, n * dims);
    for (i, loc) in locals(positions, species, potential).iter().enumerate() {
        for &a in axes(dims) {
            for &b in axes(dims) {
                h[(dof_index(dims, i, a).unwrap(), dof_index(dims, i, b).unwrap())] += loc.hess[a][b];
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (r, d) = separation(&positions[i], &positions[j], i, j)?;
            let c = COULOMB * species[i].q() * species[j].q();
            let ions = [(i, 1.0), (j, -1.0)];
            for &a in axes(dims) {
                for &b in axes(dims) {
                    let v = c * inv_r_d2(&r, d, a, b);
                    for &(p, sp) in &ions {
                        for &(s, ss) in &ions {
                            h[(dof_index(dims, p, a).unwrap(), dof_index(dims, s, b).unwrap())] += sp * ss * v;
                        }
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Raw third partial derivatives of the energy, J/m^3.
pub fn energy_third_derivatives(
    positions: &[[f64; 3]],
    species: &[IonSpecies],
    potential: &Potential,
) -> Result<DenseTensor> {
    check_inputs(positions, species)?;
    let dims = potential.dims();
    let n = positions.len();
    let mut t = DenseTensor::zeros(n * dims, 3);
    let ax = axes(dims);
    for (i, loc) in locals(positions, species, potential).iter().enumerate() {
        for &a in ax {
            for &b in ax {
                for &c in ax {
                    let v = loc.d3[a][b][c];
                    if v != 0.0 {
                        let idx = [a, b, c].map(|x| dof_index(dims, i, x).unwrap());
                        t.add(&idx, v);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (r, d) = separation(&positions[i], &positions[j], i, j)?;
            let c0 = COULOMB * species[i].q() * species[j].q();
            let ions = [(i, 1.0), (j, -1.0)];
            for &a in ax {
                for &b in ax {
                    for &c in ax {
                        let v = c0 * inv_r_d3(&r, d, a, b, c);
                        for &(p1, s1) in &ions {
                            for &(p2, s2) in &ions {
                                for &(p3, s3) in &ions {
                                    let idx = [
                                        dof_index(dims, p1, a).unwrap(),
                                        dof_index(dims, p2, b).unwrap(),
                                        dof_index(dims, p3, c).unwrap(),
                                    ];
                                    t.add(&idx, s1 * s2 * s3 * v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

/// Raw fourth partial derivatives of the energy, J/m^4.
pub fn energy_fourth_derivatives(
    positions: &[[f64; 3]],
    species: &[IonSpecies],
    potential: &Potential,
) -> Result<DenseTensor> {
    check_inputs(positions, species)?;
    let dims = potential.dims();
    let n = positions.len();
    let mut t = DenseTensor::zeros(n * dims, 4);
    let ax = axes(dims);
    for (i, loc) in locals(positions, species, potential).iter().enumerate() {
        for &a in ax {
            for &b in ax {
                for &c in ax {
                    for &e in ax {
                        let v = loc.d4[a][b][c][e];
                        if v != 0.0 {
                            let idx = [a, b, c, e].map(|x| dof_index(dims, i, x).unwrap());
                            t.add(&idx, v);
                        }
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (r, d) = separation(&positions[i], &positions[j], i, j)?;
            let c0 = COULOMB * species[i].q() * species[j].q();
            let ions = [(i, 1.0), (j, -1.0)];
            for &a in ax {
                for &b in ax {
                    for &c in ax {
                        for &e in ax {
                            let v = c0 * inv_r_d4(&r, d, a, b, c, e);
                            for &(p1, s1) in &ions {
                                for &(p2, s2) in &ions {
                                    for &(p3, s3) in &ions {
                                        for &(p4, s4) in &ions {
                                            let idx = [
                                                dof_index(dims, p1, a).unwrap(),
                                                dof_index(dims, p2, b).unwrap(),
                                                dof_index(dims, p3, c).unwrap(),
                                                dof_index(dims, p4, e).unwrap(),
                                            ];
                                            t.add(&idx, s1 * s2 * s3 * s4 * v);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

/// Equilibrium of N equal charges in `sum u^2 + 2 sum 1/|u_i - u_j|` (positions in units of l).
pub fn harmonic_chain_scaled(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let spacing = 2f64.cbrt() * (n as f64 / 2.0).powf(-0.3);
    let mut u: Vec<f64> = (0..n).map(|i| (i as f64 - (n as f64 - 1.0) / 2.0) * spacing).collect();
    for _ in 0..100 {
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            g[i] += 2.0 * u[i];
            h[(i, i)] += 2.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = u[i] - u[j];
                g[i] -= 2.0 * d.signum() / (d * d);
                let k = 4.0 / d.abs().powi(3);
                h[(i, i)] += k;
                h[(i, j)] -= k;
            }
        }
        if g.amax() < 1e-14 {
            break;
        }
        let step = h.cholesky().map(|c| c.solve(&(-&g))).unwrap_or(-&g * 0.1);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            if trial.windows(2).all(|w| w[1] > w[0]) {
                u = trial;
                break;
            }
            t *= 0.5;
        }
    }
    u
}

fn flatten(positions: &[[f64; 3]], dims: usize) -> Vec<f64> {
    positions
        .iter()
        .flat_map(|r| if dims == 1 { vec![r[2]] } else { r.to_vec() })
        .collect()
}

fn unflatten(x: &[f64], dims: usize) -> Vec<[f64; 3]> {
    if dims == 1 {
        x.iter().map(|z| [0.0, 0.0, *z]).collect()
    } else {
        x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
    }
}

fn first_crossing(positions: &[[f64; 3]]) -> Option<(usize, usize)> {
    positions.windows(2).position(|w| !(w[1][2] > w[0][2])).map(|k| (k, k + 1))
}

/// Default initial guess: the equal-charge harmonic chain at scale `l`, centred on the
/// single-ion minimum of the first species.
pub fn default_guess(species: &[IonSpecies], potential: &Potential) -> Result<Vec<f64>> {
    let ax = potential.axial();
    let l = characteristic_length(&species[0], ax.kappa2())?;
    let d = ax.axial_derivatives(&species[0], ax.expansion_origin);
    let centre = ax.expansion_origin - d[1] / d[2];
    Ok(harmonic_chain_scaled(species.len()).into_iter().map(|u| centre + l * u).collect())
}

/// Newton iteration with backtracking line search. `initial_guess` holds axial coordinates (m).
pub fn solve_equilibrium(
    species: &[IonSpecies],
    potential: &Potential,
    initial_guess: Option<&[f64]>,
) -> Result<ChainConfiguration> {
    if species.is_empty() {
        return Err(Error::invalid("species", "chain is empty"));
    }
    let dims = potential.dims();
    let guess = match initial_guess {
        Some(g) if g.len() != species.len() => {
            return Err(Error::DimensionMismatch(format!("{} guesses for {} ions", g.len(), species.len())))
        }
        Some(g) => g.to_vec(),
        None => default_guess(species, potential)?,
    };
    let mut positions: Vec<[f64; 3]> = guess.iter().map(|z| [0.0, 0.0, *z]).collect();
    if let Some((i, j)) = first_crossing(&positions) {
        return Err(Error::IonCrossing { i, j, iteration: 0 });
    }
    let tol = gradient_tolerance(species, potential);
    let mut x = flatten(&positions, dims);
    let mut energy = total_energy(&positions, species, potential)?;
    let mut grad = energy_gradient(&positions, species, potential)?;
    let mut residual = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    for iteration in 1..=MAX_NEWTON {
        if residual < tol {
            break;
        }
        let h = energy_hessian(&positions, species, potential)?;
        let g = DVector::from_column_slice(&grad);
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            // Away from the basin: shift the spectrum until positive definite.
            None => {
                let eig = h.clone().symmetric_eigen();
                let shift = -eig.eigenvalues.min() + 1e-3 * eig.eigenvalues.amax();
                let hs = h + DMatrix::identity(g.len(), g.len()) * shift;
                hs.cholesky().map(|c| c.solve(&(-&g))).unwrap_or(-&g)
            }
        };
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        let mut crossed = None;
        for _ in 0..60 {
            let trial_x: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let trial = unflatten(&trial_x, dims);
            if let Some(c) = first_crossing(&trial) {
                crossed = Some(c);
                t *= 0.5;
                continue;
            }
            let e = match total_energy(&trial, species, potential) {
                Ok(e) => e,
                Err(_) => {
                    t *= 0.5;
                    continue;
                }
            };
            let tg = energy_gradient(&trial, species, potential)?;
            let tr = tg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // Armijo on energy, with a round-off allowance; near convergence the
            // gradient norm is the more reliable merit.
            let slack = 1e-13 * energy.abs();
            if e <= energy + 1e-4 * t * slope + slack || tr < 0.5 * residual {
                x = trial_x;
                positions = trial;
                energy = e;
                grad = tg;
                residual = tr;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            if let Some((i, j)) = crossed {
                return Err(Error::IonCrossing { i, j, iteration });
            }
            return Err(Error::NotConverged { iterations: iteration, residual });
        }
    }
    if residual >= tol {
        return Err(Error::NotConverged { iterations: MAX_NEWTON, residual });
    }
    let h = energy_hessian(&positions, species, potential)?;
    let eig = h.symmetric_eigen();
    if let Some((mode, ev)) = eig.eigenvalues.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::Unconfined { mode, eigenvalue: *ev });
    }
    Ok(ChainConfiguration {
        species: species.to_vec(),
        positions,
        potential: potential.clone(),
        residual_gradient: residual,
    })
}
