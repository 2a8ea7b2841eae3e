//! Named pumping protocols, selectable at runtime.
//!
//! Every protocol reduces to a [`JumpFunction`]; the registry maps a name to
//! a factory that builds the protocol from [`ProtocolArgs`].

use std::collections::BTreeMap;
use std::fmt;

use super::catalogue::{table3_jump, ProtocolId};
use super::clifford::{fit_bilocal_clifford, CliffordCircuit2Pair};
use super::jump::{JumpFunction, LinearJump, RationalJump};
use crate::error::{Error, Result};
use crate::states::BellDiagonalState;

pub trait PumpingProtocol: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn jump(&self) -> JumpFunction;

    /// The fresh-link state the protocol was built for, if it depends on one.
    fn fresh_state(&self) -> Option<&BellDiagonalState> {
        None
    }
}

/// Inputs a factory may draw on. Unused fields are ignored.
#[derive(Debug, Clone, Default)]
pub struct ProtocolArgs {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub rho: Option<BellDiagonalState>,
    pub f_new: Option<f64>,
}

pub type ProtocolFactory = fn(&str, &ProtocolArgs) -> Result<Box<dyn PumpingProtocol>>;

#[derive(Debug, Clone)]
pub struct LinearProtocol {
    name: String,
    jump: JumpFunction,
}

impl PumpingProtocol for LinearProtocol {
    fn name(&self) -> &str {
        &self.name
    }

    fn jump(&self) -> JumpFunction {
        self.jump
    }
}

#[derive(Debug, Clone)]
pub struct CatalogueProtocol {
    name: String,
    id: ProtocolId,
    rho: BellDiagonalState,
}

impl CatalogueProtocol {
    pub fn new(id: ProtocolId, rho: BellDiagonalState) -> Self {
        Self {
            name: format!("catalogue-{id}"),
            id,
            rho,
        }
    }

    pub fn id(&self) -> ProtocolId {
        self.id
    }
}

impl PumpingProtocol for CatalogueProtocol {
    fn name(&self) -> &str {
        &self.name
    }

    fn jump(&self) -> JumpFunction {
        table3_jump(self.id, &self.rho).into()
    }

    fn fresh_state(&self) -> Option<&BellDiagonalState> {
        Some(&self.rho)
    }
}

/// A circuit whose jump is obtained from the density-matrix engine.
#[derive(Debug, Clone)]
pub struct CircuitProtocol {
    name: String,
    circuit: CliffordCircuit2Pair,
    rho: BellDiagonalState,
    jump: RationalJump,
}

impl CircuitProtocol {
    pub fn new(name: impl Into<String>, circuit: CliffordCircuit2Pair, rho: BellDiagonalState) -> Result<Self> {
        let fitted = fit_bilocal_clifford(&circuit, &rho)?;
        Ok(Self {
            name: name.into(),
            circuit,
            rho,
            jump: fitted.jump,
        })
    }

    pub fn circuit(&self) -> &CliffordCircuit2Pair {
        &self.circuit
    }
}

impl PumpingProtocol for CircuitProtocol {
    fn name(&self) -> &str {
        &self.name
    }

    fn jump(&self) -> JumpFunction {
        self.jump.into()
    }

    fn fresh_state(&self) -> Option<&BellDiagonalState> {
        Some(&self.rho)
    }
}

fn missing(name: &str, field: &str) -> Error {
    Error::ProtocolArgs {
        name: name.to_string(),
        reason: format!("missing `{field}`"),
    }
}

fn need_rho(name: &str, args: &ProtocolArgs) -> Result<BellDiagonalState> {
    args.rho.ok_or_else(|| missing(name, "rho"))
}

fn fresh_fidelity(name: &str, args: &ProtocolArgs) -> Result<f64> {
    args.f_new
        .or(args.rho.map(|r| r.f()))
        .ok_or_else(|| missing(name, "f_new"))
}

fn build_linear(name: &str, args: &ProtocolArgs) -> Result<Box<dyn PumpingProtocol>> {
    let a = args.a.ok_or_else(|| missing(name, "a"))?;
    let b = args.b.ok_or_else(|| missing(name, "b"))?;
    Ok(Box::new(LinearProtocol {
        name: name.to_string(),
        jump: LinearJump::new(a, b)?.into(),
    }))
}

/// Discard the stored link and keep the fresh one; always succeeds.
fn build_replacement(name: &str, args: &ProtocolArgs) -> Result<Box<dyn PumpingProtocol>> {
    let f_new = fresh_fidelity(name, args)?;
    Ok(Box::new(LinearProtocol {
        name: name.to_string(),
        jump: RationalJump::from_linear(LinearJump::new(0.0, f_new)?, 1.0)?.into(),
    }))
}

/// Hypothetical `J = 1`, `p = 1`; dominates every real protocol.
fn build_universal_cap(name: &str, _args: &ProtocolArgs) -> Result<Box<dyn PumpingProtocol>> {
    Ok(Box::new(LinearProtocol {
        name: name.to_string(),
        jump: RationalJump::from_linear(LinearJump::new(0.0, 1.0)?, 1.0)?.into(),
    }))
}

fn build_table_row(name: &str, args: &ProtocolArgs) -> Result<Box<dyn PumpingProtocol>> {
    let index: u8 = name
        .strip_prefix("catalogue-")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::UnknownProtocol(name.to_string()))?;
    Ok(Box::new(CatalogueProtocol::new(ProtocolId::new(index)?, need_rho(name, args)?)))
}

fn build_dejmps(name: &str, args: &ProtocolArgs) -> Result<Box<dyn PumpingProtocol>> {
    Ok(Box::new(CircuitProtocol::new(name, CliffordCircuit2Pair::dejmps(), need_rho(name, args)?)?))
}

fn build_bilateral_cnot(name: &str, args: &ProtocolArgs) -> Result<Box<dyn PumpingProtocol>> {
    Ok(Box::new(CircuitProtocol::new(
        name,
        CliffordCircuit2Pair::bilateral_cnot(),
        need_rho(name, args)?,
    )?))
}

#[derive(Clone)]
pub struct ProtocolRegistry {
    factories: BTreeMap<String, ProtocolFactory>,
}

impl fmt::Debug for ProtocolRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl Default for ProtocolRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl ProtocolRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("linear", build_linear);
        r.register("replacement", build_replacement);
        r.register("universal-cap", build_universal_cap);
        for id in ProtocolId::ALL {
            r.register(format!("catalogue-{id}"), build_table_row);
        }
        r.register("dejmps", build_dejmps);
        r.register("bilateral-cnot", build_bilateral_cnot);
        r
    }

    /// Registers (or replaces) a factory under `name`.
    pub fn register(&mut self, name: impl Into<String>, factory: ProtocolFactory) {
        self.factories.insert(name.into(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn build(&self, name: &str, args: &ProtocolArgs) -> Result<Box<dyn PumpingProtocol>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::UnknownProtocol(name.to_string()))?;
        factory(name, args)
    }
}
