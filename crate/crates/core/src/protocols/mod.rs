//! Pumping protocols: jump functions, the bilocal Clifford catalogue and its
//! bounds, the circuit engine used as an oracle, and the name registry.

pub mod bounds;
pub mod catalogue;
pub mod clifford;
pub mod jump;
pub mod registry;

pub use bounds::{clifford_bounds, f_intersection, f_star, CliffordBounds};
pub use catalogue::{table3_jump, ProtocolId};
pub use clifford::{
    apply_bilocal_clifford, fit_bilocal_clifford, BilocalEngine, CliffordCircuit2Pair, CliffordOutcome,
    FittedJump, Gate, SuccessParity,
};
pub use jump::{JumpFunction, LinearJump, RationalJump};
pub use registry::{
    CatalogueProtocol, CircuitProtocol, LinearProtocol, ProtocolArgs, ProtocolFactory, ProtocolRegistry,
    PumpingProtocol,
};
