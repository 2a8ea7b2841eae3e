//! Availability–fidelity operating regimes.
//!
//! For a fresh state `rho`, every non-trivial bilocal Clifford pumping
//! protocol has average consumed fidelity between two curves obtained by
//! plugging the linear bounds on its jump function (and the bounds on its
//! success probability) into the closed-form average fidelity. Two reference
//! points complete the picture: the replacement protocol and a hypothetical
//! protocol that always outputs a perfect link.

use crate::analytics::{availability, SystemParams};
use crate::error::{domain, Error, Result};
use crate::protocols::{clifford_bounds, CliffordBounds};
use crate::states::BellDiagonalState;

/// The `q`- and `p`-free part of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
}

impl Rates {
    pub fn new(lambda: f64, mu: f64, gamma: f64) -> Result<Self> {
        SystemParams::new(lambda, mu, gamma, 0.0, 0.0)?;
        Ok(Self { lambda, mu, gamma })
    }

    pub fn with(&self, q: f64, p: f64) -> Result<SystemParams> {
        SystemParams::new(self.lambda, self.mu, self.gamma, q, p)
    }
}

impl From<&SystemParams> for Rates {
    fn from(p: &SystemParams) -> Self {
        Self {
            lambda: p.lambda(),
            mu: p.mu(),
            gamma: p.gamma(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimePoint {
    pub q: f64,
    /// Availability with the lower-bound success probability `p_l`.
    pub availability_lower: f64,
    pub f_lower: f64,
    /// Availability with the upper-bound success probability `p_u`.
    pub availability_upper: f64,
    pub f_upper: f64,
}

/// Average fidelity of a protocol with jump `aF + b` and success
/// probability `p`, without range checks on `(a, b)`.
fn linear_fidelity(rates: &Rates, q: f64, p: f64, a: f64, b: f64, f_new: f64) -> Result<f64> {
    let Rates { lambda, mu, gamma } = *rates;
    let den = gamma + mu + lambda * q * (1.0 - p * a);
    if den <= 0.0 {
        return Err(Error::DegenerateSystem(
            "Γ + μ + λq(1 − pa) = 0: the stored fidelity is never refreshed or consumed".into(),
        ));
    }
    Ok((gamma / 4.0 + b * lambda * q * p + f_new * (mu + lambda * q * (1.0 - p))) / den)
}

fn lower_at(rates: &Rates, b: &CliffordBounds, q: f64, f_new: f64) -> Result<f64> {
    linear_fidelity(rates, q, b.p_l, b.a_l, b.b_l, f_new)
}

fn upper_at(rates: &Rates, b: &CliffordBounds, q: f64, f_new: f64) -> Result<f64> {
    linear_fidelity(rates, q, b.p_u, b.a_u, b.b_u, f_new)
}

pub fn default_q_grid() -> Vec<f64> {
    q_grid(101)
}

/// `n` evenly spaced points covering `[0, 1]`.
pub fn q_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

/// Bound band over a grid of pumping probabilities. The fresh-link fidelity
/// is `rho.f()`.
pub fn clifford_band(rates: &Rates, rho: &BellDiagonalState, q_grid: &[f64]) -> Result<Vec<RegimePoint>> {
    let bounds = clifford_bounds(rho)?;
    let f_new = rho.f();
    q_grid
        .iter()
        .map(|&q| {
            Ok(RegimePoint {
                q,
                availability_lower: availability(&rates.with(q, bounds.p_l)?),
                f_lower: lower_at(rates, &bounds, q, f_new)?,
                availability_upper: availability(&rates.with(q, bounds.p_u)?),
                f_upper: upper_at(rates, &bounds, q, f_new)?,
            })
        })
        .collect()
}

/// Pumping probability at which a protocol with success probability `p`
/// reaches `target` availability, clamped to `[0, 1]`; `None` when `p = 1`
/// (availability does not depend on `q`).
fn q_for_availability(rates: &Rates, p: f64, target: f64) -> Option<f64> {
    if p >= 1.0 {
        return None;
    }
    let Rates { lambda, mu, .. } = *rates;
    let q = (lambda / target - lambda - mu) / (lambda * (1.0 - p));
    Some(if q.is_nan() { 0.0 } else { q.clamp(0.0, 1.0) })
}

/// Lower and upper band fidelities at a given availability.
///
/// Each bound curve is traced by its own success probability, so the two
/// curves reach the same availability at different `q`. Availabilities
/// outside a curve's range map to its nearest end point.
pub fn band_at_availability(rates: &Rates, rho: &BellDiagonalState, target: f64) -> Result<(f64, f64)> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(domain(format!("availability {target} outside (0, 1]")));
    }
    let bounds = clifford_bounds(rho)?;
    let f_new = rho.f();
    let lower = match q_for_availability(rates, bounds.p_l, target) {
        Some(q) => lower_at(rates, &bounds, q, f_new)?,
        None => lower_at(rates, &bounds, 0.0, f_new)?.min(lower_at(rates, &bounds, 1.0, f_new)?),
    };
    let upper = match q_for_availability(rates, bounds.p_u, target) {
        Some(q) => upper_at(rates, &bounds, q, f_new)?,
        None => upper_at(rates, &bounds, 0.0, f_new)?.max(upper_at(rates, &bounds, 1.0, f_new)?),
    };
    Ok((lower, upper))
}

/// Fidelity of a hypothetical protocol with `J = 1`, `p = 1`, `q = 1`; no
/// pumping protocol exceeds it.
pub fn universal_cap(rates: &Rates, f_new: f64) -> Result<f64> {
    linear_fidelity(rates, 1.0, 1.0, 0.0, 1.0, f_new)
}

/// Average fidelity without pumping, `(Γ/4 + F_new μ)/(Γ + μ)`.
pub fn no_pumping_fidelity(rates: &Rates, f_new: f64) -> Result<f64> {
    linear_fidelity(rates, 0.0, 0.0, 0.0, 0.0, f_new)
}

/// Always replace the stored link with the fresh one: maximal availability
/// `λ/(λ+μ)` and fidelity `1/4 + (F_new − 1/4)(λ+μ)/(Γ+λ+μ)`.
pub fn replacement_point(rates: &Rates, f_new: f64) -> Result<RegimePoint> {
    let a = availability(&rates.with(1.0, 1.0)?);
    let f = linear_fidelity(rates, 1.0, 1.0, 0.0, f_new, f_new)?;
    Ok(RegimePoint {
        q: 1.0,
        availability_lower: a,
        f_lower: f,
        availability_upper: a,
        f_upper: f,
    })
}
