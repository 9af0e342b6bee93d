use crate::constants::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};

/// One ion type: mass and charge. Chains are ordered lists of these.
#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub label: String,
    /// kg
    pub mass: f64,
    /// multiples of the elementary charge
    pub charge: i32,
}

impl IonSpecies {
    pub fn new(label: &str, mass_u: f64, charge_e: i32) -> Result<Self> {
        if !(mass_u > 0.0) || !mass_u.is_finite() {
            return Err(Error::invalid("mass_u", format!("mass must be positive, got {mass_u}")));
        }
        if charge_e == 0 {
            return Err(Error::invalid("charge_e", "charge must be nonzero"));
        }
        Ok(IonSpecies { label: label.to_string(), mass: mass_u * ATOMIC_MASS_UNIT, charge: charge_e })
    }

    pub fn mass_u(&self) -> f64 {
        self.mass / ATOMIC_MASS_UNIT
    }

    /// Charge in coulombs.
    pub fn q(&self) -> f64 {
        self.charge as f64 * ELEMENTARY_CHARGE
    }

    pub fn beryllium9() -> Self {
        IonSpecies::new("Be9", 9.0122, 1).unwrap()
    }

    pub fn magnesium24() -> Self {
        IonSpecies::new("Mg24", 23.9850, 1).unwrap()
    }

    /// 25MgH+, the molecular ion used for the surface-trap estimates.
    pub fn magnesium_hydride() -> Self {
        IonSpecies::new("MgH", 25.994, 1).unwrap()
    }
}

pub fn make_species(label: &str, mass_u: f64, charge_e: i32) -> Result<IonSpecies> {
    IonSpecies::new(label, mass_u, charge_e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converts_mass_to_kg() {
        let be = make_species("Be9", 9.0122, 1).unwrap();
        assert!((be.mass - 1.4965e-26).abs() / 1.4965e-26 < 1e-4);
        let mg = make_species("Mg24", 23.9850, 1).unwrap();
        assert!((mg.mass - 3.9829e-26).abs() / 3.9829e-26 < 1e-4);
        assert!((mg.mass_u() - 23.985).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_species("X", -1.0, 1).is_err());
        assert!(make_species("X", 0.0, 1).is_err());
        assert!(make_species("X", 1.0, 0).is_err());
        assert!(make_species("X", f64::NAN, 1).is_err());
    }
}
