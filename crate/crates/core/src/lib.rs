//! Linear ion chains in anharmonic traps: equilibria, normal modes,
//! perturbative frequency shifts and cross-couplings, coherence and gate
//! error estimates, and calibration helpers.

pub mod analytic;
pub mod calibration;
pub mod cli;
pub mod anharmonic;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod modes;
pub mod potential;
pub mod roots;
pub mod species;
pub mod statics;
pub mod tensor;

pub use error::{Error, Result};
pub use potential::{axial_from_lambdas, evaluate_axial, trap3d_from_frequencies, AxialPotential, Potential, TrapModel3D};
pub use species::{make_species, IonSpecies};
pub use statics::{characteristic_length, chain_length, solve_equilibrium, ChainConfiguration};
