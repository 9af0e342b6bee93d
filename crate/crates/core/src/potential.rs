//! Trap potentials: the 1D polynomial axial well and the 3D harmonic-plus-tensor
//! trap built around it.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::species::IonSpecies;

pub type Tensor3x3 = [[[f64; 3]; 3]; 3];
pub type Tensor3x4 = [[[[f64; 3]; 3]; 3]; 3];

/// Axial potential `V(z) = sum_n kappa_n (z - z0)^n - E z` plus a
/// species-dependent pseudopotential gradient that scales as `m_ref / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialPotential {
    kappa: BTreeMap<u32, f64>,
    /// V/m
    pub uniform_field: f64,
    /// eV/m for a singly charged ion of the reference mass
    pub pseudo_gradient: f64,
    /// kg; zero when no gradient is configured
    pub pseudo_reference_mass: f64,
    /// m
    pub expansion_origin: f64,
}

impl AxialPotential {
    pub fn harmonic(kappa2: f64) -> Result<Self> {
        Self::from_kappas([(2, kappa2)])
    }

    /// Builds from `(n, kappa_n)` pairs. Requires a positive `kappa_2`.
    pub fn from_kappas(terms: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut kappa = BTreeMap::new();
        for (n, k) in terms {
            if n < 2 {
                return Err(Error::invalid("kappa", format!("order {n} below 2; use the uniform field for linear terms")));
            }
            if !k.is_finite() {
                return Err(Error::invalid("kappa", format!("kappa_{n} is not finite")));
            }
            if k != 0.0 {
                kappa.insert(n, k);
            }
        }
        match kappa.get(&2) {
            Some(k2) if *k2 > 0.0 => {}
            _ => return Err(Error::invalid("kappa2", "harmonic coefficient must be positive")),
        }
        Ok(AxialPotential {
            kappa,
            uniform_field: 0.0,
            pseudo_gradient: 0.0,
            pseudo_reference_mass: 0.0,
            expansion_origin: 0.0,
        })
    }

    pub fn with_field(mut self, field: f64) -> Self {
        self.uniform_field = field;
        self
    }

    pub fn with_origin(mut self, z0: f64) -> Self {
        self.expansion_origin = z0;
        self
    }

    pub fn with_pseudo_gradient(mut self, gradient_ev_per_m: f64, reference: &IonSpecies) -> Self {
        self.pseudo_gradient = gradient_ev_per_m;
        self.pseudo_reference_mass = reference.mass;
        self
    }

    pub fn kappa(&self, n: u32) -> f64 {
        self.kappa.get(&n).copied().unwrap_or(0.0)
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa(2)
    }

    pub fn kappas(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.kappa.iter().map(|(n, k)| (*n, *k))
    }

    pub fn max_order(&self) -> u32 {
        self.kappa.keys().next_back().copied().unwrap_or(2)
    }

    /// Sets one coefficient. Setting `kappa_2` non-positive is rejected.
    pub fn set_kappa(&mut self, n: u32, value: f64) -> Result<()> {
        if n < 2 {
            return Err(Error::invalid("kappa", format!("order {n} below 2")));
        }
        if n == 2 && !(value > 0.0) {
            return Err(Error::invalid("kappa2", "harmonic coefficient must be positive"));
        }
        if value == 0.0 {
            self.kappa.remove(&n);
        } else {
            self.kappa.insert(n, value);
        }
        Ok(())
    }

    /// Anharmonicity length `lambda_n`, signed so that `kappa_n = kappa_2 sgn(lambda) |lambda|^(2-n)`.
    /// `None` when the term is absent.
    pub fn lambda(&self, n: u32) -> Option<f64> {
        let k = self.kappa.get(&n).copied()?;
        if n <= 2 {
            return None;
        }
        let ratio = k / self.kappa2();
        Some(ratio.signum() * ratio.abs().powf(1.0 / (2.0 - n as f64)))
    }

    /// Pseudopotential strength factor `m_ref / m` for this species.
    fn pseudo_scale(&self, species: &IonSpecies) -> f64 {
        if self.pseudo_gradient == 0.0 {
            0.0
        } else {
            self.pseudo_reference_mass / species.mass
        }
    }

    /// Linear (field plus pseudopotential) coefficient of the energy, J/m.
    fn linear_force_coefficient(&self, species: &IonSpecies) -> f64 {
        species.q() * (-self.uniform_field + self.pseudo_gradient * self.pseudo_scale(species))
    }

    /// k-th derivative of `sum_n kappa_n s^n` at `s`.
    fn polynomial_derivative(&self, s: f64, k: u32) -> f64 {
        // Horner over the dense coefficient list of the k-th derivative.
        let top = self.max_order();
        if k > top {
            return 0.0;
        }
        let mut acc = 0.0;
        for n in (k..=top).rev() {
            acc = acc * s + self.kappa(n) * falling_factorial(n, k);
        }
        acc
    }

    /// Energy derivatives `d^k U / dz^k` for k = 0..=4 of one ion at `z`.
    pub(crate) fn axial_derivatives(&self, species: &IonSpecies, z: f64) -> [f64; 5] {
        let q = species.q();
        let s = z - self.expansion_origin;
        let lin = self.linear_force_coefficient(species);
        let mut d = [0.0; 5];
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = q * self.polynomial_derivative(s, k as u32);
        }
        d[0] += lin * z;
        d[1] += lin;
        d
    }
}

fn falling_factorial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// `kappa_n = kappa_2 sgn(lambda_n) |lambda_n|^(2-n)`; for odd n this is exactly
/// `kappa_2 lambda_n^(2-n)`.
pub fn axial_from_lambdas(kappa2: f64, lambdas: &BTreeMap<u32, f64>) -> Result<AxialPotential> {
    let mut terms = vec![(2u32, kappa2)];
    for (&n, &lam) in lambdas {
        if n < 3 {
            return Err(Error::invalid("lambda", format!("order {n} must be at least 3")));
        }
        if lam == 0.0 || !lam.is_finite() {
            return Err(Error::invalid("lambda", format!("lambda_{n} must be finite and nonzero")));
        }
        let kappa = kappa2 * lam.signum() * lam.abs().powi(2 - n as i32);
        terms.push((n, kappa));
    }
    AxialPotential::from_kappas(terms)
}

/// Potential energy (J) of one ion at axial position `z`.
pub fn evaluate_axial(pot: &AxialPotential, species: &IonSpecies, z: f64) -> f64 {
    pot.axial_derivatives(species, z)[0]
}

/// Curvature giving a single-ion frequency `f` for `species`: `m (2 pi f)^2 / (2 q)`.
pub fn curvature_for_frequency(species: &IonSpecies, f: f64) -> f64 {
    species.mass * (2.0 * PI * f).powi(2) / (2.0 * species.q())
}

/// Three-dimensional trap: the axial potential along z, harmonic radial
/// confinement along x and y, and optional cubic/quartic coefficient tensors
/// (V/m^3, V/m^4) in displacement from `(0, 0, z0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapModel3D {
    pub axial: AxialPotential,
    /// V/m^2 along x and y for the reference species
    pub radial_curvatures: [f64; 2],
    pub reference_mass: f64,
    /// Radial confinement is a pseudopotential: curvature for species i scales as m_ref / m_i.
    pub radial_mass_scaling: bool,
    pub trap_cubic: Tensor3x3,
    pub trap_quartic: Tensor3x4,
}

impl TrapModel3D {
    pub fn new(axial: AxialPotential, radial_curvatures: [f64; 2], reference: &IonSpecies) -> Result<Self> {
        if radial_curvatures.iter().any(|k| !(*k > 0.0)) {
            return Err(Error::invalid("radial_curvatures", "both radial curvatures must be positive"));
        }
        Ok(TrapModel3D {
            axial,
            radial_curvatures,
            reference_mass: reference.mass,
            radial_mass_scaling: true,
            trap_cubic: [[[0.0; 3]; 3]; 3],
            trap_quartic: [[[[0.0; 3]; 3]; 3]; 3],
        })
    }

    pub fn with_cubic(mut self, t: Tensor3x3) -> Result<Self> {
        if !cubic_is_symmetric(&t, 1e-12) {
            return Err(Error::invalid("trap_cubic", "tensor must be symmetric under index permutation"));
        }
        self.trap_cubic = t;
        Ok(self)
    }

    pub fn with_quartic(mut self, t: Tensor3x4) -> Result<Self> {
        if !quartic_is_symmetric(&t, 1e-12) {
            return Err(Error::invalid("trap_quartic", "tensor must be symmetric under index permutation"));
        }
        self.trap_quartic = t;
        Ok(self)
    }

    pub fn with_mass_scaling(mut self, on: bool) -> Self {
        self.radial_mass_scaling = on;
        self
    }

    pub fn has_cubic(&self) -> bool {
        self.trap_cubic.iter().flatten().flatten().any(|v| *v != 0.0)
    }

    pub fn has_quartic(&self) -> bool {
        self.trap_quartic.iter().flatten().flatten().flatten().any(|v| *v != 0.0)
    }

    fn radial_scale(&self, species: &IonSpecies) -> f64 {
        if self.radial_mass_scaling {
            self.reference_mass / species.mass
        } else {
            1.0
        }
    }
}

/// Builds a 3D trap from single-ion radial secular frequencies of `reference`.
pub fn trap3d_from_frequencies(
    reference: &IonSpecies,
    f_radial: (f64, f64),
    axial: AxialPotential,
    cubic: Option<Tensor3x3>,
    quartic: Option<Tensor3x4>,
) -> Result<TrapModel3D> {
    if !(f_radial.0 > 0.0) || !(f_radial.1 > 0.0) {
        return Err(Error::invalid("f_radial", "radial frequencies must be positive"));
    }
    let curv = [curvature_for_frequency(reference, f_radial.0), curvature_for_frequency(reference, f_radial.1)];
    let mut trap = TrapModel3D::new(axial, curv, reference)?;
    if let Some(t) = cubic {
        trap = trap.with_cubic(t)?;
    }
    if let Some(t) = quartic {
        trap = trap.with_quartic(t)?;
    }
    Ok(trap)
}

fn permutations3() -> [[usize; 3]; 6] {
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

pub fn cubic_is_symmetric(t: &Tensor3x3, tol: f64) -> bool {
    let scale = t.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let idx = [a, b, c];
                for p in permutations3() {
                    let v = t[idx[p[0]]][idx[p[1]]][idx[p[2]]];
                    if (v - t[a][b][c]).abs() > tol * scale {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn quartic_is_symmetric(t: &Tensor3x4, tol: f64) -> bool {
    let scale = t.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let v = t[a][b][c][d];
                    // adjacent transpositions generate the symmetric group
                    let swaps = [t[b][a][c][d], t[a][c][b][d], t[a][b][d][c]];
                    if swaps.iter().any(|s| (s - v).abs() > tol * scale) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Fills a symmetric cubic tensor from its value on sorted index triples.
pub fn symmetric_cubic(entries: &[([usize; 3], f64)]) -> Tensor3x3 {
    let mut t = [[[0.0; 3]; 3]; 3];
    for (idx, v) in entries {
        for p in permutations3() {
            t[idx[p[0]]][idx[p[1]]][idx[p[2]]] = *v;
        }
    }
    t
}

/// Fills a symmetric quartic tensor from its value on index quadruples.
pub fn symmetric_quartic(entries: &[([usize; 4], f64)]) -> Tensor3x4 {
    let mut t = [[[[0.0; 3]; 3]; 3]; 3];
    for (idx, v) in entries {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut seen = [a, b, c, d];
                        seen.sort_unstable();
                        if seen == [0, 1, 2, 3] {
                            t[idx[a]][idx[b]][idx[c]][idx[d]] = *v;
                        }
                    }
                }
            }
        }
    }
    t
}

/// Energy and its first four Cartesian derivatives for one ion at one point.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LocalDerivatives {
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
    pub d3: Tensor3x3,
    pub d4: Tensor3x4,
}

/// Trap potential seen by the chain: either axial-only (1D chains) or full 3D.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Axial(AxialPotential),
    Trap3D(TrapModel3D),
}

impl From<AxialPotential> for Potential {
    fn from(p: AxialPotential) -> Self {
        Potential::Axial(p)
    }
}

impl From<TrapModel3D> for Potential {
    fn from(p: TrapModel3D) -> Self {
        Potential::Trap3D(p)
    }
}

impl Potential {
    pub fn axial(&self) -> &AxialPotential {
        match self {
            Potential::Axial(a) => a,
            Potential::Trap3D(t) => &t.axial,
        }
    }

    pub fn axial_mut(&mut self) -> &mut AxialPotential {
        match self {
            Potential::Axial(a) => a,
            Potential::Trap3D(t) => &mut t.axial,
        }
    }

    /// Number of motional dimensions per ion.
    pub fn dims(&self) -> usize {
        match self {
            Potential::Axial(_) => 1,
            Potential::Trap3D(_) => 3,
        }
    }

    pub fn has_trap_cubic(&self) -> bool {
        match self {
            Potential::Axial(a) => a.kappa(3) != 0.0,
            Potential::Trap3D(t) => t.axial.kappa(3) != 0.0 || t.has_cubic(),
        }
    }

    pub fn has_trap_quartic(&self) -> bool {
        match self {
            Potential::Axial(a) => a.kappa(4) != 0.0,
            Potential::Trap3D(t) => t.axial.kappa(4) != 0.0 || t.has_quartic(),
        }
    }

    pub(crate) fn local(&self, species: &IonSpecies, r: [f64; 3]) -> LocalDerivatives {
        let mut out = LocalDerivatives::default();
        let ax = self.axial().axial_derivatives(species, r[2]);
        out.value = ax[0];
        out.grad[2] = ax[1];
        out.hess[2][2] = ax[2];
        out.d3[2][2][2] = ax[3];
        out.d4[2][2][2][2] = ax[4];
        if let Potential::Trap3D(trap) = self {
            let q = species.q();
            let s = trap.radial_scale(species);
            for a in 0..2 {
                let k = s * q * trap.radial_curvatures[a];
                out.value += k * r[a] * r[a];
                out.grad[a] += 2.0 * k * r[a];
                out.hess[a][a] += 2.0 * k;
            }
            let d = [r[0], r[1], r[2] - trap.axial.expansion_origin];
            if trap.has_cubic() {
                let t = &trap.trap_cubic;
                for a in 0..3 {
                    for b in 0..3 {
                        for c in 0..3 {
                            let v = q * t[a][b][c];
                            out.value += v * d[a] * d[b] * d[c];
                            out.grad[a] += 3.0 * v * d[b] * d[c];
                            out.hess[a][b] += 6.0 * v * d[c];
                            out.d3[a][b][c] += 6.0 * v;
                        }
                    }
                }
            }
            if trap.has_quartic() {
                let t = &trap.trap_quartic;
                for a in 0..3 {
                    for b in 0..3 {
                        for c in 0..3 {
                            for e in 0..3 {
                                let v = q * t[a][b][c][e];
                                out.value += v * d[a] * d[b] * d[c] * d[e];
                                out.grad[a] += 4.0 * v * d[b] * d[c] * d[e];
                                out.hess[a][b] += 12.0 * v * d[c] * d[e];
                                out.d3[a][b][c] += 24.0 * v * d[e];
                                out.d4[a][b][c][e] += 24.0 * v;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
