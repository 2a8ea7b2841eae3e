use crate::error::{domain, Result};

const TOL: f64 = 1e-12;

/// `J(F) = a F + b`, the jump of a protocol whose success probability does
/// not depend on the stored fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearJump {
    a: f64,
    b: f64,
}

impl LinearJump {
    /// Requires `0 <= a <= 1` and `(1 - a)/4 <= b <= 1 - a`, i.e. the jump
    /// maps `[1/4, 1]` into itself.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(domain("linear jump coefficients must be finite"));
        }
        if a < -TOL || a > 1.0 + TOL {
            return Err(domain(format!("jump slope {a} outside [0, 1]")));
        }
        if b < (1.0 - a) / 4.0 - TOL || b > 1.0 - a + TOL {
            return Err(domain(format!(
                "jump intercept {b} outside [{}, {}] for slope {a}",
                (1.0 - a) / 4.0,
                1.0 - a
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn eval(&self, f: f64) -> f64 {
        self.a * f + self.b
    }
}

/// `J(F) = (ã F + b̃) / (c F + d)` with success probability `p(F) = c F + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalJump {
    at: f64,
    bt: f64,
    c: f64,
    d: f64,
}

impl RationalJump {
    /// Checks that `p(F) ∈ (0, 1]` and `J(F) ∈ [0, 1]` on `F ∈ [1/4, 1]`.
    /// Both are affine / Möbius in `F`, so the endpoints decide.
    pub fn new(at: f64, bt: f64, c: f64, d: f64) -> Result<Self> {
        if ![at, bt, c, d].iter().all(|x| x.is_finite()) {
            return Err(domain("rational jump coefficients must be finite"));
        }
        let j = Self { at, bt, c, d };
        for f in [0.25, 1.0] {
            let p = j.success_probability(f);
            if p <= 0.0 || p > 1.0 + TOL {
                return Err(domain(format!("success probability {p} at F={f} outside (0, 1]")));
            }
            let v = j.eval(f);
            if v < -TOL || v > 1.0 + TOL {
                return Err(domain(format!("jump value {v} at F={f} outside [0, 1]")));
            }
        }
        Ok(j)
    }

    /// A linear jump with constant success probability `p`.
    pub fn from_linear(jump: LinearJump, p: f64) -> Result<Self> {
        Self::new(jump.a * p, jump.b * p, 0.0, p)
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.at, self.bt, self.c, self.d]
    }

    #[inline]
    pub fn eval(&self, f: f64) -> f64 {
        (self.at * f + self.bt) / (self.c * f + self.d)
    }

    #[inline]
    pub fn success_probability(&self, f: f64) -> f64 {
        self.c * f + self.d
    }

    /// `Some((J, p))` when the success probability is constant (`c == 0`);
    /// the jump is then `(ã/d) F + b̃/d`.
    pub fn as_linear(&self) -> Option<(LinearJump, f64)> {
        if self.c != 0.0 {
            return None;
        }
        LinearJump::new(self.at / self.d, self.bt / self.d)
            .ok()
            .map(|j| (j, self.d))
    }
}

/// Jump function of a pumping protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpFunction {
    /// Success probability supplied separately (the system's constant `p`).
    Linear(LinearJump),
    /// Success probability is part of the protocol.
    Rational(RationalJump),
}

impl JumpFunction {
    #[inline]
    pub fn eval(&self, f: f64) -> f64 {
        match self {
            JumpFunction::Linear(j) => j.eval(f),
            JumpFunction::Rational(j) => j.eval(f),
        }
    }

    /// Protocol-defined success probability, if the protocol defines one.
    #[inline]
    pub fn success_probability(&self, f: f64) -> Option<f64> {
        match self {
            JumpFunction::Linear(_) => None,
            JumpFunction::Rational(j) => Some(j.success_probability(f)),
        }
    }

    /// The linear form usable by closed-form analytics, if there is one.
    pub fn linear(&self) -> Option<LinearJump> {
        match self {
            JumpFunction::Linear(j) => Some(*j),
            JumpFunction::Rational(j) => j.as_linear().map(|(l, _)| l),
        }
    }

    /// Constant success probability carried by the protocol itself.
    pub fn constant_success(&self) -> Option<f64> {
        match self {
            JumpFunction::Linear(_) => None,
            JumpFunction::Rational(j) => j.as_linear().map(|(_, p)| p),
        }
    }
}

impl From<LinearJump> for JumpFunction {
    fn from(j: LinearJump) -> Self {
        JumpFunction::Linear(j)
    }
}

impl From<RationalJump> for JumpFunction {
    fn from(j: RationalJump) -> Self {
        JumpFunction::Rational(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_bounds_enforced() {
        assert!(LinearJump::new(1.0 / 3.0, 0.6).is_ok());
        assert!(LinearJump::new(0.9, 0.025).is_ok());
        assert!(LinearJump::new(0.0, 1.0).is_ok());
        assert!(LinearJump::new(0.5, 0.1).is_err());
        assert!(LinearJump::new(0.5, 0.6).is_err());
        assert!(LinearJump::new(1.1, 0.0).is_err());
    }

    #[test]
    fn rational_rejects_invalid_success_probability() {
        assert!(RationalJump::new(0.5, 0.0, 0.0, 0.0).is_err());
        assert!(RationalJump::new(0.5, 0.0, 1.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn zero_slope_success_is_linear(a in 0.0..1.0f64, t in 0.0..1.0f64, p in 0.05..1.0f64, f in 0.25..1.0f64) {
            let b = (1.0 - a) / 4.0 + t * 0.75 * (1.0 - a);
            let lin = LinearJump::new(a, b).unwrap();
            let rat = RationalJump::from_linear(lin, p).unwrap();
            let (back, pb) = rat.as_linear().unwrap();
            prop_assert!((rat.eval(f) - lin.eval(f)).abs() < 1e-12);
            prop_assert!((back.eval(f) - lin.eval(f)).abs() < 1e-12);
            prop_assert!((pb - p).abs() < 1e-15);
        }
    }
}
