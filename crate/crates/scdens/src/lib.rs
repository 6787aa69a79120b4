//! Spatial density oscillations of cold trapped fermion gases.
//!
//! The crate computes, for a family of model potentials (1D box, harmonic
//! traps, spherical billiards, a 2D coupled quartic oscillator):
//!
//! * exact single-particle spectra and wavefunctions ([`spectra`]),
//! * quantum-mechanical particle and kinetic-energy densities at zero
//!   temperature, at finite temperature, and with BCS pairing occupations
//!   ([`qm_densities`]),
//! * Thomas-Fermi smooth densities and smooth Fermi energies ([`smooth_tf`]),
//! * semiclassical density oscillations built from closed classical orbits,
//!   including the Friedel oscillation near a hard wall ([`closed_orbits`]),
//! * folded (temperature- or pairing-smeared) level densities, free energies
//!   and pairing energies, together with the damped trace formulas that
//!   describe them semiclassically ([`correlations`]).
//!
//! Everything is plain `f64`; units are set by the model parameters
//! (`hbar`, `mass`, trap geometry). The [`cli`] module drives the whole
//! pipeline from a declarative TOML config and writes CSV/JSON artifacts;
//! the `examples/` directory exercises each capability as a runnable
//! program.

pub mod cli;
pub mod closed_orbits;
pub mod correlations;
pub mod grid;
pub mod qm_densities;
pub mod smooth_tf;
pub mod specfun;
pub mod spectra;

mod error;

pub use error::{Error, Result};
