//! Physical constants (CODATA 2018).
//!
//! Every conversion in the crate goes through this table so that results are
//! reproducible bit-for-bit across builds.

/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Coulomb constant 1/(4 pi eps0), N m^2 / C^2.
pub const COULOMB: f64 = 1.0 / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY);

/// One electron-volt per metre expressed in J/m.
pub const EV_PER_M: f64 = ELEMENTARY_CHARGE;

pub const MICRON: f64 = 1e-6;
pub const MHZ: f64 = 1e6;
