//! Fixed points and linear bounds for the non-trivial catalogue rows.

use crate::error::{Error, Result};
use crate::states::BellDiagonalState;

fn require_purifiable(rho: &BellDiagonalState) -> Result<()> {
    if rho.f() > 0.5 {
        Ok(())
    } else {
        Err(Error::NotPurifiable(rho.f()))
    }
}

/// Positive root of `(2 − 4F_BD − 4λ)F² + (4F_BD − 2)F + λ = 0`, the fixed
/// point of the row whose λ weight is `lambda`.
fn fixed_point(fbd: f64, lambda: f64) -> f64 {
    let u = 2.0 * fbd - 1.0;
    let v = u + 2.0 * lambda;
    (u + (u * u + 2.0 * lambda * v).sqrt()) / (2.0 * v)
}

/// Highest fidelity reachable by repeated pumping with `rho`: the fixed
/// point of the row built on `λ_min`.
pub fn f_star(rho: &BellDiagonalState) -> Result<f64> {
    require_purifiable(rho)?;
    Ok(fixed_point(rho.f(), rho.lambda_min()))
}

/// Common crossing point of rows 1–3 (depends on `F_BD` only).
pub fn f_intersection(rho: &BellDiagonalState) -> Result<f64> {
    require_purifiable(rho)?;
    let f = rho.f();
    Ok((4.0 * f - 2.0 + 3.0 * (2.0 * f).sqrt()) / (2.0 * (8.0 * f - 1.0)))
}

/// Linear envelope of every non-trivial bilocal Clifford jump.
///
/// `a_l F + b_l <= J(F) <= a_u F + b_u`, the lower line valid on
/// `[1/4, F*]`, the upper on `[1/4, 1]`; success probability in `[p_l, p_u]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliffordBounds {
    pub a_l: f64,
    pub b_l: f64,
    pub a_u: f64,
    pub b_u: f64,
    pub p_l: f64,
    pub p_u: f64,
    pub f_star: f64,
}

impl CliffordBounds {
    pub fn lower(&self, f: f64) -> f64 {
        self.a_l * f + self.b_l
    }

    pub fn upper(&self, f: f64) -> f64 {
        self.a_u * f + self.b_u
    }
}

pub fn clifford_bounds(rho: &BellDiagonalState) -> Result<CliffordBounds> {
    let fs = f_star(rho)?;
    let f = rho.f();
    let (lmin, lmax) = (rho.lambda_min(), rho.lambda_max());

    // Chord from (1/4, J_min(1/4)) = (1/4, (F+λ_min)/2) to (F*, J_{λmax}(F*)).
    let num = 2.0 * (4.0 * fs - 1.0) * (2.0 * f - (f + lmin) * (f + lmax))
        + 4.0 * (lmax - lmin) * (1.0 - fs);
    let den = (4.0 * fs - 1.0) * ((4.0 * f + 4.0 * lmax - 2.0) * fs + 2.0 - f - lmax);
    let a_l = num / den;
    let b_l = (f + lmin) / 2.0 - a_l / 4.0;

    Ok(CliffordBounds {
        a_l,
        b_l,
        a_u: 4.0 * (1.0 - f) / 3.0,
        b_u: (4.0 * f - 1.0) / 3.0,
        p_l: 0.5,
        p_u: f + lmax,
        f_star: fs,
    })
}
