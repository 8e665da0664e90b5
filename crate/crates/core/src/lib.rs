//! Time-block QAOA / QAMPA workbench for Sherrington-Kirkpatrick spin glasses.
//!
//! The crate is organised bottom-up:
//!
//! - [`ising`]: SK instances, exact energies, brute-force spectra and bitflip transforms.
//! - [`circuit`]: the native gate set (RZ, RX90, CPHASE, XY) and compiled circuits.
//! - [`ansatz`]: SWAP-network schedules and time-block circuit construction.
//! - [`sim`]: statevector execution, shot sampling and trajectory noise.
//! - [`metrics`]: approximation ratios, tail estimators, baselines and spreads.
//! - [`optimizer`]: random search, TPE and study orchestration.

pub mod ansatz;
pub mod circuit;
pub mod error;
pub mod ising;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
