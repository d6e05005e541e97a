//! Simulation and asymptotic key-rate analysis for BB84-based simplified
//! trusted relay chains.
//!
//! Intermediate nodes only run the quantum phase and announce the parity of
//! the two raw keys they hold; Alice and Bob do all post-processing.
//!
//! - [`qubit`]: exact single-node state algebra, Pauli twirling and a
//!   numerical Holevo oracle.
//! - [`relay`]: Monte Carlo execution of the relay protocol.
//! - [`keyrate`]: asymptotic key rates for qubit signals.
//! - [`decoy`]: weak-coherent physical model with tagged-signal rates and
//!   intensity optimisation.
//! - [`verify`]: invariant suites used by the command-line `verify` mode.

pub mod decoy;
pub mod error;
mod info;
pub mod keyrate;
pub mod numeric;
pub mod qubit;
pub mod relay;
pub mod verify;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use info::binary_entropy;
