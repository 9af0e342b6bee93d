//! Ion-order frequency shifts, nulling odd anharmonicity with a control parameter,
//! pseudopotential-gradient inference, field sensitivity and centre-of-mass scans.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::modes::{mode_spectrum, ModeSpectrum};
use crate::potential::Potential;
use crate::roots::find_root;
use crate::species::IonSpecies;
use crate::statics::solve_equilibrium;

/// Order shifts below this are treated as numerically zero when checking brackets, Hz.
pub const SHIFT_NOISE: f64 = 1e-6;
/// Target residual for nulling roots, Hz.
pub const NULL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeLabel {
    /// both ions move with the same sign
    InPhase,
    /// opposite signs
    OutOfPhase,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeLabel::InPhase => "in-phase",
            ModeLabel::OutOfPhase => "out-of-phase",
        })
    }
}

impl std::str::FromStr for ModeLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in-phase" | "in_phase" | "inphase" => Ok(ModeLabel::InPhase),
            "out-of-phase" | "out_of_phase" | "outofphase" => Ok(ModeLabel::OutOfPhase),
            _ => Err(Error::invalid("mode_label", format!("`{s}` is neither in-phase nor out-of-phase"))),
        }
    }
}

/// Modes whose motion is mostly axial, in spectrum order.
pub fn axial_modes(spectrum: &ModeSpectrum) -> Vec<usize> {
    let d = spectrum.config.dims();
    (0..spectrum.n_modes())
        .filter(|&k| {
            let e = spectrum.eigenvector(k);
            let z: f64 = e.iter().skip(d - 1).step_by(d).map(|v| v * v).sum();
            z > 0.5
        })
        .collect()
}

/// The axial mode of a two-ion chain with the given label, chosen by the sign
/// product of the two axial components.
pub fn pair_mode(spectrum: &ModeSpectrum, label: ModeLabel) -> Result<usize> {
    if spectrum.config.n_ions() != 2 {
        return Err(Error::invalid("species", "ion-order analysis needs exactly two ions"));
    }
    let d = spectrum.config.dims();
    let found = axial_modes(spectrum).into_iter().find(|&k| {
        let e = spectrum.eigenvector(k);
        let same = e[d - 1] * e[2 * d - 1] > 0.0;
        same == (label == ModeLabel::InPhase)
    });
    found.ok_or_else(|| Error::invalid("mode_label", format!("no axial {label} mode found")))
}

fn pair_frequency(pot: &Potential, chain: [&IonSpecies; 2], label: ModeLabel) -> Result<f64> {
    let cfg = solve_equilibrium(&[chain[0].clone(), chain[1].clone()], pot, None)?;
    let s = mode_spectrum(&cfg)?;
    Ok(s.frequencies[pair_mode(&s, label)?])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderShiftReport {
    pub label: ModeLabel,
    /// Hz, species A at lower z
    pub f_ab: f64,
    /// Hz, order reversed
    pub f_ba: f64,
    /// `f_ab - f_ba`, Hz
    pub delta: f64,
}

pub fn order_shift(pot: &Potential, a: &IonSpecies, b: &IonSpecies, label: ModeLabel) -> Result<OrderShiftReport> {
    let f_ab = pair_frequency(pot, [a, b], label)?;
    let f_ba = pair_frequency(pot, [b, a], label)?;
    Ok(OrderShiftReport { label, f_ab, f_ba, delta: f_ab - f_ba })
}

/// A one-parameter affine family: `kappa_n(p) = kappa_n(0) + p * rate_n` and
/// `E(p) = E(0) + p * field_rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFamily {
    pub base: Potential,
    pub kappa_rates: BTreeMap<u32, f64>,
    /// V/m per unit parameter
    pub field_rate: f64,
}

impl PotentialFamily {
    pub fn new(base: Potential) -> Self {
        PotentialFamily { base, kappa_rates: BTreeMap::new(), field_rate: 0.0 }
    }

    pub fn with_kappa_rate(mut self, order: u32, rate: f64) -> Self {
        self.kappa_rates.insert(order, rate);
        self
    }

    pub fn with_field_rate(mut self, rate: f64) -> Self {
        self.field_rate = rate;
        self
    }

    /// `kappa_n(p) = kappa_n(0) (1 - p)`: the base coefficient is removed at `p = 1`.
    pub fn scaling_kappa(base: Potential, order: u32) -> Self {
        let k = base.axial().kappa(order);
        PotentialFamily::new(base).with_kappa_rate(order, -k)
    }

    pub fn at(&self, p: f64) -> Result<Potential> {
        let mut pot = self.base.clone();
        let ax = pot.axial_mut();
        for (&n, &rate) in &self.kappa_rates {
            let k = ax.kappa(n) + p * rate;
            ax.set_kappa(n, k)?;
        }
        ax.uniform_field += p * self.field_rate;
        Ok(pot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullReport {
    pub parameter: f64,
    /// residual order shift of the nulled mode, Hz
    pub residual: f64,
    /// order shift of the other axial mode at the null, Hz
    pub other_mode_shift: f64,
    pub iterations: usize,
}

fn bracket_values<F: FnMut(f64) -> Result<f64>>(f: &mut F, lo: f64, hi: f64) -> Result<()> {
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    let zero = |v: f64| v.abs() < SHIFT_NOISE;
    if (zero(f_lo) && zero(f_hi)) || (!zero(f_lo) && !zero(f_hi) && f_lo.signum() == f_hi.signum()) {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    Ok(())
}

/// Finds the family parameter at which the order shift of `label` vanishes.
pub fn null_parameter(
    family: &PotentialFamily,
    a: &IonSpecies,
    b: &IonSpecies,
    label: ModeLabel,
    bracket: (f64, f64),
) -> Result<NullReport> {
    let mut f = |p: f64| Ok(order_shift(&family.at(p)?, a, b, label)?.delta);
    bracket_values(&mut f, bracket.0, bracket.1)?;
    let x_tol = 1e-12 * (bracket.1 - bracket.0).abs().max(1.0);
    let root = find_root(&mut f, bracket.0, bracket.1, x_tol, NULL_TOLERANCE)?;
    let other = match label {
        ModeLabel::InPhase => ModeLabel::OutOfPhase,
        ModeLabel::OutOfPhase => ModeLabel::InPhase,
    };
    let other_mode_shift = order_shift(&family.at(root.x)?, a, b, other)?.delta;
    Ok(NullReport { parameter: root.x, residual: root.f, other_mode_shift, iterations: root.iterations })
}

/// Out-of-phase order shift produced by a pseudopotential gradient `g` (eV/m for a
/// singly charged ion of the `reference` mass) added to `pot`.
pub fn gradient_order_shift(pot: &Potential, a: &IonSpecies, b: &IonSpecies, reference: &IonSpecies, g: f64) -> Result<f64> {
    let mut p = pot.clone();
    let ax = p.axial_mut();
    ax.pseudo_gradient = g;
    ax.pseudo_reference_mass = reference.mass;
    Ok(order_shift(&p, a, b, ModeLabel::OutOfPhase)?.delta)
}

/// Gradient (eV/m) whose forward-model out-of-phase order shift equals `measured` (Hz).
pub fn infer_pseudo_gradient(
    pot: &Potential,
    a: &IonSpecies,
    b: &IonSpecies,
    reference: &IonSpecies,
    measured: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    let mut f = |g: f64| Ok(gradient_order_shift(pot, a, b, reference, g)? - measured);
    bracket_values(&mut f, bracket.0, bracket.1)?;
    let x_tol = 1e-10 * bracket.0.abs().max(bracket.1.abs());
    Ok(find_root(&mut f, bracket.0, bracket.1, x_tol, 0.0)?.x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSensitivity {
    /// Hz at zero added field
    pub f0: f64,
    /// Hz with the field
    pub f: f64,
    /// `(f - f0) / f0`
    pub fractional: f64,
    /// `(f / f0)^2 - 1`, the fractional change of the local curvature
    pub curvature_fractional: f64,
}

/// Adds a uniform field `e` (V/m) to `pot`, re-solves and compares mode `mode`.
pub fn field_sensitivity(pot: &Potential, species: &[IonSpecies], e: f64, mode: usize) -> Result<FieldSensitivity> {
    let freq = |field: f64| -> Result<f64> {
        let mut p = pot.clone();
        p.axial_mut().uniform_field += field;
        let s = mode_spectrum(&solve_equilibrium(species, &p, None)?)?;
        if mode >= s.n_modes() {
            return Err(Error::IndexOutOfRange { what: "mode", index: mode, len: s.n_modes() });
        }
        Ok(s.frequencies[mode])
    };
    let f0 = freq(0.0)?;
    let f = freq(e)?;
    let r = f / f0;
    Ok(FieldSensitivity { f0, f, fractional: r - 1.0, curvature_fractional: (r - 1.0) * (r + 1.0) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComScan {
    /// (N, f_COM in Hz)
    pub points: Vec<(usize, f64)>,
    /// Hz per ion
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Hz
    pub residuals: Vec<f64>,
}

/// Axial mode with every ion moving in the same direction.
pub fn com_mode(spectrum: &ModeSpectrum) -> Result<usize> {
    let d = spectrum.config.dims();
    axial_modes(spectrum)
        .into_iter()
        .find(|&k| {
            let e = spectrum.eigenvector(k);
            let z: Vec<f64> = e.iter().skip(d - 1).step_by(d).copied().collect();
            z.iter().all(|v| *v > 0.0) || z.iter().all(|v| *v < 0.0)
        })
        .ok_or_else(|| Error::invalid("species", "no axial centre-of-mass mode"))
}

/// Least-squares line through `(x, y)`: (slope, intercept, R^2).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Centre-of-mass frequency of `N` identical ions for each `N` in `counts`.
pub fn com_frequency_scan(pot: &Potential, species: &IonSpecies, counts: &[usize]) -> Result<ComScan> {
    if counts.len() < 2 {
        return Err(Error::invalid("counts", "at least two chain sizes are needed for a fit"));
    }
    let mut points = Vec::with_capacity(counts.len());
    for &n in counts {
        if n == 0 {
            return Err(Error::invalid("counts", "chain size must be positive"));
        }
        let cfg = solve_equilibrium(&vec![species.clone(); n], pot, None)?;
        let s = mode_spectrum(&cfg)?;
        points.push((n, s.frequencies[com_mode(&s)?]));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, intercept, r_squared) = linear_fit(&x, &y);
    let residuals = x.iter().zip(&y).map(|(a, b)| b - (intercept + slope * a)).collect();
    Ok(ComScan { points, slope, intercept, r_squared, residuals })
}
