//! Exact steady-state analysis of the buffer.
//!
//! The buffered link moves through levels 0, 1, 2, … (number of successful
//! pumps) or is absent (∅). Generation fills ∅ at rate λ; a generation event
//! on an occupied buffer triggers a pump with probability `q`, which succeeds
//! with probability `p`; consumption at rate μ empties the buffer.
//!
//! Internally `α = μ + λq` is the rate of leaving a level, `β = μ + λq(1−p)`
//! the rate of losing the link and `δ = λqp` the rate of moving up a level.

use crate::error::{domain, Error, Result};
use crate::protocols::{JumpFunction, LinearJump};
use crate::states::{decay, ALGEBRAIC_TOL};

/// Rates and probabilities of the buffer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    lambda: f64,
    mu: f64,
    gamma: f64,
    q: f64,
    p: f64,
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} = {v} must be finite and non-negative")))
    }
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(domain(format!("{name} = {v} outside [0, 1]")))
    }
}

pub(crate) fn check_fidelity(f: f64) -> Result<()> {
    if (0.25 - ALGEBRAIC_TOL..=1.0 + ALGEBRAIC_TOL).contains(&f) {
        Ok(())
    } else {
        Err(domain(format!("fidelity {f} outside [1/4, 1]")))
    }
}

impl SystemParams {
    /// Requires `lambda > 0`, `mu, gamma >= 0` and `q, p` in `[0, 1]`.
    pub fn new(lambda: f64, mu: f64, gamma: f64, q: f64, p: f64) -> Result<Self> {
        let s = Self::for_simulation(lambda, mu, gamma, q, p)?;
        if lambda > 0.0 {
            Ok(s)
        } else {
            Err(domain(format!("lambda = {lambda} must be positive")))
        }
    }

    /// Like [`SystemParams::new`] but also accepts `lambda = 0`, a buffer
    /// that never fills. Only the simulator makes sense of such a system.
    pub fn for_simulation(lambda: f64, mu: f64, gamma: f64, q: f64, p: f64) -> Result<Self> {
        check_rate("lambda", lambda)?;
        check_rate("mu", mu)?;
        check_rate("gamma", gamma)?;
        check_prob("q", q)?;
        check_prob("p", p)?;
        Ok(Self { lambda, mu, gamma, q, p })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.mu, self.gamma, self.q, self.p)
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        Self::new(self.lambda, mu, self.gamma, self.q, self.p)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.lambda, self.mu, gamma, self.q, self.p)
    }

    pub fn with_q(self, q: f64) -> Result<Self> {
        Self::new(self.lambda, self.mu, self.gamma, q, self.p)
    }

    pub fn with_p(self, p: f64) -> Result<Self> {
        Self::new(self.lambda, self.mu, self.gamma, self.q, p)
    }

    /// Rate of leaving the current level, `μ + λq`.
    pub(crate) fn alpha(&self) -> f64 {
        self.mu + self.lambda * self.q
    }

    /// Rate of losing the link, `μ + λq(1−p)`.
    pub(crate) fn beta(&self) -> f64 {
        self.mu + self.lambda * self.q * (1.0 - self.p)
    }

    /// Rate of a successful pump, `λqp`.
    pub(crate) fn delta(&self) -> f64 {
        self.lambda * self.q * self.p
    }
}

/// Probability that a link is buffered, `λ / (λ + μ + λq(1−p))`.
pub fn availability(params: &SystemParams) -> f64 {
    let lambda = params.lambda;
    if lambda == 0.0 {
        return 0.0;
    }
    lambda / (lambda + params.beta())
}

/// Stationary law of the buffer: `π_∅` and a geometric law over levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub pi_empty: f64,
    /// `π_{i+1} / π_i = λqp / (μ + λq)`.
    pub ratio: f64,
}

impl SteadyState {
    pub fn availability(&self) -> f64 {
        1.0 - self.pi_empty
    }

    /// `π_i`, probability of holding a link at level `i`.
    pub fn pi(&self, level: usize) -> f64 {
        let head = self.availability() * (1.0 - self.ratio);
        if level == 0 {
            head
        } else {
            head * self.ratio.powi(level.min(i32::MAX as usize) as i32)
        }
    }

    /// Probability mass on levels above `n`, `A r^{n+1}`.
    pub fn tail_mass(&self, n: usize) -> f64 {
        self.availability() * self.ratio.powf(n as f64 + 1.0)
    }

    /// Smallest `N` with `Σ_{i>N} π_i / A <= tol`.
    pub fn truncation_index(&self, tol: f64) -> Result<usize> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(domain(format!("tolerance {tol} outside (0, 1)")));
        }
        let r = self.ratio;
        if r >= 1.0 {
            return Err(Error::DegenerateSystem(
                "levels never drain (μ = 0 with q = p = 1)".into(),
            ));
        }
        if r == 0.0 {
            return Ok(0);
        }
        // r^{N+1} <= tol
        let n = (tol.ln() / r.ln() - 1.0).ceil().max(0.0);
        Ok(n as usize)
    }
}

pub fn steady_state(params: &SystemParams) -> SteadyState {
    let a = availability(params);
    let alpha = params.alpha();
    let ratio = if alpha > 0.0 { params.delta() / alpha } else { 0.0 };
    SteadyState {
        pi_empty: 1.0 - a,
        ratio,
    }
}

/// How an average fidelity was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    ClosedForm,
    /// Truncated sum over levels `0..=terms-1`; the neglected probability
    /// mass (relative to `A`) is at most `truncation_bound`.
    Series { terms: usize, truncation_bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsResult {
    pub availability: f64,
    pub avg_consumed_fidelity: f64,
    pub method: Method,
}

/// Fidelity of a link with level history `times = (t_0, …, t_i)`, computed
/// by applying decay and jumps in turn.
pub fn fidelity_after_levels(times: &[f64], jump: LinearJump, f_new: f64, gamma: f64) -> Result<f64> {
    check_level_inputs(times, f_new, gamma)?;
    let mut f = decay(f_new, times[0], gamma);
    for &t in &times[1..] {
        f = decay(jump.eval(f), t, gamma);
    }
    Ok(f)
}

/// Same quantity as [`fidelity_after_levels`] via the explicit sum
/// `1/4 + Σ_j m_j e^{−Γ(t_j + … + t_i)}`.
pub fn fidelity_after_levels_closed(times: &[f64], jump: LinearJump, f_new: f64, gamma: f64) -> Result<f64> {
    check_level_inputs(times, f_new, gamma)?;
    let i = times.len() - 1;
    let (a, b) = (jump.a(), jump.b());
    let step = a / 4.0 + b - 0.25;
    let mut total = 0.25;
    let mut suffix = 0.0;
    for j in (0..=i).rev() {
        suffix += times[j];
        let m = if j == 0 {
            a.powi(i as i32) * (f_new - 0.25)
        } else {
            a.powi((i - j) as i32) * step
        };
        total += m * (-gamma * suffix).exp();
    }
    Ok(total)
}

fn check_level_inputs(times: &[f64], f_new: f64, gamma: f64) -> Result<()> {
    if times.is_empty() {
        return Err(domain("at least one level duration is required"));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(domain(format!("duration {t} must be finite and non-negative")));
    }
    check_rate("gamma", gamma)?;
    check_fidelity(f_new)
}

/// `Σ_{k<n} x^k`, stable near `x = 1`.
fn geometric_partial(x: f64, n: usize) -> f64 {
    if (1.0 - x).abs() < 1e-12 {
        n as f64
    } else {
        (1.0 - x.powi(n as i32)) / (1.0 - x)
    }
}

/// Mean fidelity of a link consumed at level `i`.
///
/// `c_i = 1/4 + (F_new − 1/4) a^i γ^{i+1} + (a/4 + b − 1/4) γ Σ_{k<i} (aγ)^k`
/// with `γ = α/(α+Γ)`; does not depend on `p`.
pub fn c_i_linear(i: usize, params: &SystemParams, jump: LinearJump, f_new: f64) -> Result<f64> {
    check_fidelity(f_new)?;
    let alpha = params.alpha();
    if alpha <= 0.0 {
        return Err(Error::DegenerateSystem(
            "μ + λq = 0: a buffered link is never consumed or pumped".into(),
        ));
    }
    let g = alpha / (alpha + params.gamma);
    let a = jump.a();
    let step = a / 4.0 + jump.b() - 0.25;
    let n = i32::try_from(i).map_err(|_| domain(format!("level {i} too large")))?;
    Ok(0.25 + (f_new - 0.25) * a.powi(n) * g.powi(n + 1) + step * g * geometric_partial(a * g, i))
}

/// Closed-form average consumed fidelity for a linear jump with the
/// system's constant success probability.
pub fn avg_fidelity_linear(params: &SystemParams, jump: LinearJump, f_new: f64) -> Result<MetricsResult> {
    check_fidelity(f_new)?;
    let SystemParams { lambda, mu, gamma, q, p } = *params;
    let den = gamma + mu + lambda * q * (1.0 - p * jump.a());
    if den <= 0.0 {
        return Err(Error::DegenerateSystem(
            "Γ + μ + λq(1 − pa) = 0: the stored fidelity is never refreshed or consumed".into(),
        ));
    }
    let num = gamma / 4.0 + jump.b() * lambda * q * p + f_new * params.beta();
    Ok(MetricsResult {
        availability: availability(params),
        avg_consumed_fidelity: num / den,
        method: Method::ClosedForm,
    })
}

/// Linear form of `jump` for closed-form work. A protocol that carries its
/// own constant success probability must agree with `params.p`.
pub fn resolve_linear(params: &SystemParams, jump: &JumpFunction) -> Result<LinearJump> {
    let linear = jump.linear().ok_or(Error::NonConstantSuccess)?;
    if let Some(p0) = jump.constant_success() {
        if (p0 - params.p).abs() > ALGEBRAIC_TOL {
            return Err(domain(format!(
                "protocol success probability {p0} differs from system p = {}",
                params.p
            )));
        }
    }
    Ok(linear)
}

/// Average consumed fidelity as the level sum `Σ_i c_i π_i / A`, truncated
/// once the remaining level mass drops below `tol`.
pub fn avg_fidelity_series(
    params: &SystemParams,
    jump: &JumpFunction,
    f_new: f64,
    tol: f64,
) -> Result<MetricsResult> {
    let linear = resolve_linear(params, jump)?;
    let ss = steady_state(params);
    let n = ss.truncation_index(tol)?;
    let r = ss.ratio;
    let mut sum = 0.0;
    let mut weight = 1.0 - r;
    for i in 0..=n {
        sum += c_i_linear(i, params, linear, f_new)? * weight;
        weight *= r;
    }
    Ok(MetricsResult {
        availability: ss.availability(),
        avg_consumed_fidelity: sum,
        method: Method::Series {
            terms: n + 1,
            truncation_bound: r.powf(n as f64 + 1.0),
        },
    })
}

fn common_denominator(params: &SystemParams, a: f64) -> f64 {
    let d = params.gamma + params.mu + params.lambda * params.q * (1.0 - a * params.p);
    4.0 * d * d
}

/// `∂F̄/∂q` of the closed-form average fidelity.
pub fn df_dq(params: &SystemParams, jump: LinearJump, f_new: f64) -> f64 {
    let SystemParams { lambda, mu, gamma, p, .. } = *params;
    let (a, b) = (jump.a(), jump.b());
    let y = 4.0 * f_new * (1.0 - p) + (4.0 * b + a) * p - 1.0;
    let z = b - f_new * (1.0 - a);
    lambda * (gamma * y + 4.0 * mu * p * z) / common_denominator(params, a)
}

/// `∂F̄/∂p` of the closed-form average fidelity.
pub fn df_dp(params: &SystemParams, jump: LinearJump, f_new: f64) -> f64 {
    let SystemParams { lambda, mu, gamma, q, .. } = *params;
    let (a, b) = (jump.a(), jump.b());
    let alpha = mu + lambda * q;
    let num = 4.0 * (b - f_new) * (gamma + alpha) + a * (gamma + 4.0 * f_new * alpha);
    lambda * q * num / common_denominator(params, a)
}

/// Decoherence rate above which pumping raises the average fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseThreshold {
    /// Pumping helps for every `Γ >= 0`.
    AlwaysBeneficial,
    /// Pumping helps exactly when `Γ` exceeds this value.
    Threshold(f64),
    /// `4F_new(1−p) + (4b+a)p − 1 = 0`: the sign of `∂F̄/∂q` does not depend
    /// on `Γ`.
    Degenerate,
}

pub fn noise_threshold(jump: LinearJump, p: f64, mu: f64, f_new: f64) -> Result<NoiseThreshold> {
    check_prob("p", p)?;
    check_rate("mu", mu)?;
    check_fidelity(f_new)?;
    let (a, b) = (jump.a(), jump.b());
    let y = 4.0 * f_new * (1.0 - p) + (4.0 * b + a) * p - 1.0;
    if y.abs() <= ALGEBRAIC_TOL {
        return Ok(NoiseThreshold::Degenerate);
    }
    let excess = f_new * (1.0 - a) - b;
    Ok(if excess < 0.0 {
        NoiseThreshold::AlwaysBeneficial
    } else {
        NoiseThreshold::Threshold(4.0 * mu * p * excess / y)
    })
}
