//! JSON run configuration.
//!
//! ```json
//! {
//!   "system": { "lambda": 1.0, "mu": 0.1, "gamma": 0.025, "q": 1.0, "p": 0.75, "f_new": 0.8 },
//!   "protocol": { "jump": { "a": 0.3333333333333333, "b": 0.6 } },
//!   "simulation": { "t_sim": 50, "samples": 10000, "seed": 1, "mode": "constant" }
//! }
//! ```
//!
//! The protocol is chosen by `name` (any registered protocol), or by `id`
//! (catalogue row 1–7, needs `rho`), or by `jump` (a linear jump). `rho` is
//! the fresh-link Bell-diagonal state `[F, λ1, λ2, λ3]`; when present,
//! `f_new` defaults to its fidelity.

use std::path::Path;

use entbuffer_core::analytics::SystemParams;
use entbuffer_core::protocols::{ProtocolArgs, ProtocolRegistry, PumpingProtocol};
use entbuffer_core::regimes::Rates;
use entbuffer_core::simulator::SuccessMode;
use entbuffer_core::states::{BellDiagonalState, ALGEBRAIC_TOL};
use serde::Deserialize;

use crate::error::{config, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub q: f64,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub f_new: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub jump: Option<JumpSection>,
    #[serde(default)]
    pub id: Option<u8>,
    #[serde(default)]
    pub rho: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSection {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default)]
    pub t_sim: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Constant,
    Linear,
}

impl From<Mode> for SuccessMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Constant => SuccessMode::ConstantP,
            Mode::Linear => SuccessMode::LinearP,
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| config(format!("{}: {}", path.display(), strip_prefix(&e.to_string()))))
    }

    pub fn rho(&self) -> Result<Option<BellDiagonalState>> {
        self.protocol
            .rho
            .map(|w| BellDiagonalState::from_weights(w).map_err(|e| config(format!("protocol.rho: {e}"))))
            .transpose()
    }

    pub fn require_rho(&self) -> Result<BellDiagonalState> {
        self.rho()?.ok_or_else(|| config("missing field `protocol.rho`"))
    }

    pub fn f_new(&self) -> Result<f64> {
        let from_rho = self.rho()?.map(|r| r.f());
        match (self.system.f_new, from_rho) {
            (Some(f), Some(r)) if (f - r).abs() > ALGEBRAIC_TOL => Err(config(format!(
                "system.f_new = {f} conflicts with protocol.rho fidelity {r}"
            ))),
            (Some(f), _) | (None, Some(f)) => Ok(f),
            (None, None) => Err(config("missing field `system.f_new` (or `protocol.rho`)")),
        }
    }

    pub fn rates(&self) -> Result<Rates> {
        let s = &self.system;
        Ok(Rates::new(s.lambda, s.mu, s.gamma)?)
    }

    /// Registry name the protocol section selects.
    pub fn protocol_name(&self) -> Result<String> {
        let p = &self.protocol;
        match (&p.name, p.id, &p.jump) {
            (Some(name), None, _) => Ok(name.clone()),
            (None, Some(id), None) => Ok(format!("catalogue-{id}")),
            (None, None, Some(_)) => Ok("linear".into()),
            (None, None, None) => Err(config("protocol section needs one of `name`, `id` or `jump`")),
            _ => Err(config("protocol section: give only one of `name`, `id` and `jump`")),
        }
    }

    pub fn build_protocol(&self, registry: &ProtocolRegistry) -> Result<Box<dyn PumpingProtocol>> {
        let name = self.protocol_name()?;
        let args = ProtocolArgs {
            a: self.protocol.jump.as_ref().map(|j| j.a),
            b: self.protocol.jump.as_ref().map(|j| j.b),
            rho: self.rho()?,
            f_new: Some(self.f_new()?),
        };
        Ok(registry.build(&name, &args)?)
    }

    /// Constant success probability: the configured `p`, or the one the
    /// protocol carries. Both given and different is an error.
    pub fn success_probability(&self, protocol: &dyn PumpingProtocol) -> Result<Option<f64>> {
        match (self.system.p, protocol.jump().constant_success()) {
            (Some(p), Some(own)) if (p - own).abs() > ALGEBRAIC_TOL => Err(config(format!(
                "system.p = {p} conflicts with protocol `{}` success probability {own}",
                protocol.name()
            ))),
            (Some(p), _) | (None, Some(p)) => Ok(Some(p)),
            (None, None) => Ok(None),
        }
    }

    pub fn params(&self, p: f64) -> Result<SystemParams> {
        let s = &self.system;
        Ok(SystemParams::new(s.lambda, s.mu, s.gamma, s.q, p)?)
    }
}

fn strip_prefix(msg: &str) -> &str {
    msg.strip_prefix("config error: ").unwrap_or(msg)
}
