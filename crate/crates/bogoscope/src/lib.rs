//! Numerical toolkit for the excitation spectrum of homogeneous Bose and
//! Fermi gases.
//!
//! The crate computes quasiparticle dispersion relations in the Bogoliubov,
//! improved-Bogoliubov and Hartree-Fock-Bogoliubov approximations, builds the
//! multi-quasiparticle excitation spectrum (subadditive hulls, energy gap,
//! critical velocity, two-sector bottoms), minimizes quartic Hamiltonians
//! over pure Gaussian states certifying that the linear and pairing
//! coefficients of the Wick-reordered Hamiltonian vanish at stationary
//! points, and cross-checks the mean-field Bogoliubov prediction against
//! exact diagonalization on small momentum lattices.
//!
//! Modules:
//! - [`model`]: momentum lattices, two-body potentials, config parsing
//! - [`bogoliubov`]: elementary dispersion, Bogoliubov energy, diagonalization
//!   coefficients, infinite-volume energy density
//! - [`spectrum`]: multi-quasiparticle enumeration, subadditive hulls, gaps,
//!   critical velocities, fermionic-parity sector bottoms
//! - [`improved`]: grand-canonical variational fixed point for the Bose gas
//! - [`hfb`]: spin-1/2 BCS/HFB gap equation
//! - [`gaussian`]: Gaussian-state minimization of polynomial Hamiltonians
//!   and the stationarity certificate
//! - [`exact_diag`]: sector bases, sparse Hamiltonians, low spectra
//! - [`cli`]: the `bogoscope` command-line front end

pub mod bogoliubov;
pub mod cli;
pub mod error;
pub mod exact_diag;
pub mod gaussian;
pub mod hfb;
pub mod improved;
pub mod model;
pub mod quad;
pub mod spectrum;

pub use error::{Error, Result};
