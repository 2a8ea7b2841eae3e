//! The seven distinct 2-to-1 bilocal Clifford protocols for a Werner state
//! pumped with a Bell-diagonal state.
//!
//! Rows 1–3 are stored as
//! `J_i(F) = ((3F_BD − λ_i) F + λ_i) / ((4F_BD + 4λ_i − 2) F + 2 − F_BD − λ_i)`
//! with the denominator scaled by 1/3 so that it is exactly the success
//! probability. Rows 4–6 leave the stored fidelity unchanged, row 7 swaps in
//! the fresh link.

use std::fmt;

use super::jump::RationalJump;
use crate::error::{domain, Result};
use crate::states::BellDiagonalState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProtocolId(u8);

impl ProtocolId {
    pub const ALL: [ProtocolId; 7] = [
        ProtocolId(1),
        ProtocolId(2),
        ProtocolId(3),
        ProtocolId(4),
        ProtocolId(5),
        ProtocolId(6),
        ProtocolId(7),
    ];

    /// The three rows that change the stored fidelity non-trivially.
    pub const NONTRIVIAL: [ProtocolId; 3] = [ProtocolId(1), ProtocolId(2), ProtocolId(3)];

    pub fn new(index: u8) -> Result<Self> {
        if (1..=7).contains(&index) {
            Ok(Self(index))
        } else {
            Err(domain(format!("protocol index {index} outside 1..=7")))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn table3_jump(id: ProtocolId, rho: &BellDiagonalState) -> RationalJump {
    let fbd = rho.f();
    let l = rho.lambdas();
    let (at, bt, c, d) = match id.0 {
        i @ 1..=3 => {
            let li = l[usize::from(i - 1)];
            (
                (3.0 * fbd - li) / 3.0,
                li / 3.0,
                (4.0 * fbd + 4.0 * li - 2.0) / 3.0,
                (2.0 - fbd - li) / 3.0,
            )
        }
        i @ 4..=6 => {
            let p = fbd + l[usize::from(i - 4)];
            (p, 0.0, 0.0, p)
        }
        _ => (2.0 * fbd / 3.0, fbd / 3.0, 2.0 / 3.0, 1.0 / 3.0),
    };
    RationalJump::new(at, bt, c, d).unwrap_or_else(|e| {
        // every valid Bell-diagonal state gives p(1/4)=1/2, p(1)=F_BD+λ_i
        unreachable!("table row {id} invalid for {rho:?}: {e}")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Rows 1–3 exactly as tabulated, before simplification.
    fn printed_row(i: usize, rho: &BellDiagonalState, f: f64) -> (f64, f64) {
        let l = rho.lambdas();
        let (li, lj, lk) = match i {
            1 => (l[0], l[1], l[2]),
            2 => (l[1], l[2], l[0]),
            _ => (l[2], l[0], l[1]),
        };
        let num = (4.0 * li + 3.0 * lj + 3.0 * lk - 3.0) * f - li;
        let den = (4.0 * lj + 4.0 * lk - 2.0) * f - lj - lk - 1.0;
        let p = 2.0 / 3.0 * (1.0 - 2.0 * lj - 2.0 * lk) * f + (1.0 + lj + lk) / 3.0;
        (num / den, p)
    }

    fn rho(f: f64, l1: f64, l2: f64, l3: f64) -> BellDiagonalState {
        BellDiagonalState::new(f, l1, l2, l3).unwrap()
    }

    #[test]
    fn endpoint_values() {
        let r = rho(0.7, 0.15, 0.1, 0.05);
        for id in ProtocolId::NONTRIVIAL {
            let li = r.lambdas()[usize::from(id.index() - 1)];
            let j = table3_jump(id, &r);
            assert_abs_diff_eq!(j.eval(0.25), (r.f() + li) / 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(j.eval(1.0), r.f() / (r.f() + li), epsilon = 1e-15);
            assert_abs_diff_eq!(j.success_probability(0.25), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn trivial_rows() {
        let r = rho(0.8, 0.1, 0.1, 0.0);
        for (k, id) in [4u8, 5, 6].into_iter().enumerate() {
            let j = table3_jump(ProtocolId::new(id).unwrap(), &r);
            assert_abs_diff_eq!(j.eval(0.6), 0.6, epsilon = 1e-15);
            assert_abs_diff_eq!(j.success_probability(0.6), 0.8 + r.lambdas()[k], epsilon = 1e-15);
        }
        let j7 = table3_jump(ProtocolId::new(7).unwrap(), &r);
        assert_abs_diff_eq!(j7.eval(0.6), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(j7.success_probability(0.6), 0.4 + 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn id_range() {
        assert!(ProtocolId::new(0).is_err());
        assert!(ProtocolId::new(8).is_err());
        assert_eq!(ProtocolId::new(3).unwrap().index(), 3);
    }

    proptest! {
        #[test]
        fn stored_form_equals_printed_form(
            f in 0.5001..1.0f64, w1 in 0.0..1.0f64, w2 in 0.0..1.0f64, w3 in 0.0..1.0f64, x in 0.25..1.0f64
        ) {
            let s = w1 + w2 + w3 + 1e-12;
            let rest = 1.0 - f;
            let (l1, l2) = (rest * w1 / s, rest * w2 / s);
            let r = rho(f, l1, l2, rest - l1 - l2);
            for i in 1..=3u8 {
                let j = table3_jump(ProtocolId::new(i).unwrap(), &r);
                let (jp, pp) = printed_row(usize::from(i), &r, x);
                prop_assert!((j.eval(x) - jp).abs() < 1e-12);
                prop_assert!((j.success_probability(x) - pp).abs() < 1e-12);
            }
        }
    }
}
