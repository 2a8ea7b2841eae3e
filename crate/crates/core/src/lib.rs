//! Performance model of a two-node entanglement buffer with one long-lived
//! ("good") memory and one generation ("bad") memory per node.
//!
//! The crate is organised bottom-up:
//!
//! - [`states`]: Bell-diagonal / Werner states, depolarising decay, twirling
//!   and the partial-transpose entanglement test.
//! - [`protocols`]: jump functions, the 2-to-1 bilocal Clifford catalogue,
//!   fixed points and linear bounds, a density-matrix circuit engine, and the
//!   named protocol registry.
//! - [`analytics`]: exact steady state of the buffer CTMC, availability and
//!   average consumed fidelity, derivatives and the noise threshold.
//! - [`simulator`]: discrete-event Monte Carlo with seeded per-replication
//!   streams.
//! - [`regimes`]: availability/fidelity bound bands and reference points.
//! - [`verify`]: the cross-checking oracle suite used by `entbuffer verify`.

pub mod analytics;
pub mod error;
pub mod protocols;
pub mod regimes;
pub mod simulator;
pub mod states;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
