//! Closed-form two-ion results for weak cubic or quartic anharmonicity, used as
//! independent checks on the numerical pipeline.
//!
//! The expansions are in `l / lambda_n` and implemented as published, radical
//! coefficients included. The published eigenvectors list the ion at higher z
//! first; here components are stored in increasing-z order (matching the numeric
//! spectra) and normalized.

use crate::error::{Error, Result};
use crate::species::IonSpecies;
use crate::statics::characteristic_length;

/// Upper bound on `|l / lambda_3|` for the cubic expansions.
pub const CUBIC_REGIME: f64 = 0.2;
/// Upper bound on `(l / lambda_4)^2` for the quartic expansions.
pub const QUARTIC_REGIME: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoIonAnalytics {
    /// m
    pub z_plus: f64,
    pub z_minus: f64,
    /// rad/s
    pub omega_high: f64,
    pub omega_low: f64,
    pub eigvec_high: [f64; 2],
    pub eigvec_low: [f64; 2],
    /// label of the species at lower z
    pub order_tag: String,
    /// false when the expansion parameter is outside the validity regime
    pub in_regime: bool,
}

fn normalized(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda == 0.0 || lambda.is_nan() {
        return Err(Error::invalid("lambda", "must be nonzero"));
    }
    Ok(())
}

/// Harmonic two-ion frequency factor `(1 + mu +/- sqrt(mu^2 - mu + 1))^(1/2)`.
fn harmonic_factors(mu: f64) -> (f64, f64, f64) {
    let root = (mu * mu - mu + 1.0).sqrt();
    ((1.0 + mu + root).sqrt(), (1.0 + mu - root).sqrt(), root)
}

fn r_pm(mu: f64, root: f64) -> (f64, f64) {
    (((mu - 1.0) + root) / mu.sqrt(), (-(mu - 1.0) + root) / mu.sqrt())
}

fn cubic_positions(l: f64, b: f64) -> (f64, f64) {
    let c1 = 3.0 / 2f64.powf(5.0 / 3.0);
    let c2 = 3.0 / 2f64.powf(7.0 / 3.0);
    let s = l / 2f64.powf(2.0 / 3.0);
    (s * (1.0 - c1 * b + c2 * b * b), -s * (1.0 + c1 * b + c2 * b * b))
}

fn quartic_positions(l: f64, b2: f64) -> (f64, f64) {
    let s = l / 2f64.powf(2.0 / 3.0) * (1.0 - b2 / (3.0 * 2f64.cbrt()) + 2f64.powf(4.0 / 3.0) / 9.0 * b2 * b2);
    (s, -s)
}

/// Equal masses, `V = kappa2 z^2 (1 + z / lambda3)`.
pub fn cubic_equal(kappa2: f64, lambda3: f64, species: &IonSpecies) -> Result<TwoIonAnalytics> {
    check_lambda(lambda3)?;
    let l = characteristic_length(species, kappa2)?;
    let b = l / lambda3;
    let w = (2.0 * species.q() * kappa2 / species.mass).sqrt();
    let (z_plus, z_minus) = cubic_positions(l, b);
    let c = 3.0 / 2f64.powf(5.0 / 3.0) * b;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(TwoIonAnalytics {
        z_plus,
        z_minus,
        omega_high: 3f64.sqrt() * w * (1.0 - 3.0 / 2f64.powf(7.0 / 3.0) * b * b),
        omega_low: w * (1.0 - 9.0 / 2f64.powf(7.0 / 3.0) * b * b),
        // printed with the z+ ion first; stored in increasing-z order
        eigvec_high: normalized([s * (1.0 - c), s * (-1.0 - c)]),
        eigvec_low: normalized([s * (1.0 + c), s * (1.0 - c)]),
        order_tag: species.label.clone(),
        in_regime: b.abs() < CUBIC_REGIME,
    })
}

/// Equal masses, `V = kappa2 z^2 (1 + (z / lambda4)^2)`.
pub fn quartic_equal(kappa2: f64, lambda4: f64, species: &IonSpecies) -> Result<TwoIonAnalytics> {
    check_lambda(lambda4)?;
    let l = characteristic_length(species, kappa2)?;
    let b2 = (l / lambda4).powi(2);
    let w = (2.0 * species.q() * kappa2 / species.mass).sqrt();
    let (z_plus, z_minus) = quartic_positions(l, b2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(TwoIonAnalytics {
        z_plus,
        z_minus,
        omega_high: 3f64.sqrt() * w * (1.0 + 5.0 / (3.0 * 2f64.powf(4.0 / 3.0)) * b2),
        omega_low: w * (1.0 + 3.0 / 2f64.powf(4.0 / 3.0) * b2),
        eigvec_high: [-s, s],
        eigvec_low: [s, s],
        order_tag: species.label.clone(),
        in_regime: b2 < QUARTIC_REGIME,
    })
}

/// Unequal masses `mu = m1 / m2` with species 1 at lower z, cubic perturbation.
pub fn cubic_unequal(kappa2: f64, lambda3: f64, species1: &IonSpecies, species2: &IonSpecies) -> Result<TwoIonAnalytics> {
    check_lambda(lambda3)?;
    if species1.charge != species2.charge {
        return Err(Error::invalid("species", "closed forms assume equal charges"));
    }
    let l = characteristic_length(species1, kappa2)?;
    let b = l / lambda3;
    let mu = species1.mass / species2.mass;
    let w = (2.0 * species1.q() * kappa2 / species1.mass).sqrt();
    let (fp, fm, root) = harmonic_factors(mu);
    let shift = 3.0 / 2f64.powf(8.0 / 3.0) * (1.0 - mu) / root * b;
    let (rp, rm) = r_pm(mu, root);
    let k = 3.0 / 2f64.powf(5.0 / 3.0) * (1.0 + mu) / root * b;
    let vec = |r: f64, sign: f64| {
        let d = 1.0 + r * r;
        normalized([1.0 - sign * k * r * r / d, r * (-sign - k / d)])
    };
    let (z_plus, z_minus) = cubic_positions(l, b);
    Ok(TwoIonAnalytics {
        z_plus,
        z_minus,
        omega_high: w * fp * (1.0 - shift),
        omega_low: w * fm * (1.0 + shift),
        eigvec_high: vec(rp, 1.0),
        eigvec_low: vec(rm, -1.0),
        order_tag: species1.label.clone(),
        in_regime: b.abs() < CUBIC_REGIME,
    })
}

/// Unequal masses, quartic perturbation; frequencies are independent of ion order.
pub fn quartic_unequal(
    kappa2: f64,
    lambda4: f64,
    species1: &IonSpecies,
    species2: &IonSpecies,
) -> Result<TwoIonAnalytics> {
    check_lambda(lambda4)?;
    if species1.charge != species2.charge {
        return Err(Error::invalid("species", "closed forms assume equal charges"));
    }
    let l = characteristic_length(species1, kappa2)?;
    let b2 = (l / lambda4).powi(2);
    let mu = species1.mass / species2.mass;
    let w = (2.0 * species1.q() * kappa2 / species1.mass).sqrt();
    let (fp, fm, root) = harmonic_factors(mu);
    let c = 1.0 / (3.0 * 2f64.powf(4.0 / 3.0));
    let corr = |sign: f64| 1.0 + c * (-sign * (1.0 + mu) + 7.0 * root) / root * b2;
    let (rp, rm) = r_pm(mu, root);
    let k = (1.0 - mu) / (2f64.cbrt() * root) * b2;
    let vec = |r: f64, sign: f64| {
        let d = 1.0 + r * r;
        normalized([1.0 + sign * k * r * r / d, r * (-sign - k / d)])
    };
    let (z_plus, z_minus) = quartic_positions(l, b2);
    Ok(TwoIonAnalytics {
        z_plus,
        z_minus,
        omega_high: w * fp * corr(1.0),
        omega_low: w * fm * corr(-1.0),
        eigvec_high: vec(rp, 1.0),
        eigvec_low: vec(rm, -1.0),
        order_tag: species1.label.clone(),
        in_regime: b2 < QUARTIC_REGIME,
    })
}
