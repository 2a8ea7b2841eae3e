//! Two-qubit states used by the buffer model.
//!
//! Bell-basis ordering is (φ+, ψ+, ψ−, φ−) throughout. [`BELL_BASIS`] is the
//! only place that ordering is written down; every conversion between
//! Bell weights and computational-basis matrices goes through it.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{domain, Result};

/// Tolerance for algebraic identities (normalisation, hermiticity, trace).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue positivity from numerical eigensolves.
pub const EIGEN_TOL: f64 = 1e-10;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Bell vectors in the computational basis {|00⟩, |01⟩, |10⟩, |11⟩},
/// in the order (φ+, ψ+, ψ−, φ−).
pub const BELL_BASIS: [[f64; 4]; 4] = [
    [H, 0.0, 0.0, H],
    [0.0, H, H, 0.0],
    [0.0, H, -H, 0.0],
    [H, 0.0, 0.0, -H],
];

/// Depolarising decay of a fidelity over `dt` at rate `gamma`.
///
/// Maps `f` to `e^{-gamma dt} (f - 1/4) + 1/4`, the fidelity of a Werner
/// state after spending `dt` in a depolarising memory.
pub fn depolarize(f: f64, dt: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(domain(format!("fidelity {f} outside [0, 1]")));
    }
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(domain(format!("duration {dt} must be finite and non-negative")));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(domain(format!("decoherence rate {gamma} must be finite and non-negative")));
    }
    Ok(decay(f, dt, gamma))
}

/// Unchecked form of [`depolarize`] for hot loops whose inputs are already
/// validated.
#[inline]
pub(crate) fn decay(f: f64, dt: f64, gamma: f64) -> f64 {
    (-gamma * dt).exp() * (f - 0.25) + 0.25
}

/// Mixture of the four Bell projectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalState {
    f: f64,
    l1: f64,
    l2: f64,
    l3: f64,
}

impl BellDiagonalState {
    /// Weights on (φ+, ψ+, ψ−, φ−). Rejects weights outside `[0, 1]` or a
    /// sum away from one; nothing is renormalised.
    pub fn new(f: f64, l1: f64, l2: f64, l3: f64) -> Result<Self> {
        let w = [f, l1, l2, l3];
        if let Some(bad) = w
            .iter()
            .find(|x| !x.is_finite() || **x < -ALGEBRAIC_TOL || **x > 1.0 + ALGEBRAIC_TOL)
        {
            return Err(domain(format!("Bell weight {bad} outside [0, 1]")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(domain(format!("Bell weights sum to {sum}, expected 1")));
        }
        Ok(Self { f, l1, l2, l3 })
    }

    pub fn from_weights(w: [f64; 4]) -> Result<Self> {
        Self::new(w[0], w[1], w[2], w[3])
    }

    pub fn werner(f: f64) -> Result<Self> {
        Ok(WernerState::new(f)?.to_bell_diagonal())
    }

    /// Fidelity to φ+.
    pub fn f(&self) -> f64 {
        self.f
    }

    /// Weights on (ψ+, ψ−, φ−).
    pub fn lambdas(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }

    /// All four weights in Bell-basis order.
    pub fn weights(&self) -> [f64; 4] {
        [self.f, self.l1, self.l2, self.l3]
    }

    pub fn lambda_min(&self) -> f64 {
        self.l1.min(self.l2).min(self.l3)
    }

    pub fn lambda_max(&self) -> f64 {
        self.l1.max(self.l2).max(self.l3)
    }

    /// Same fidelity, λ weights reordered so that `lambdas()[k] == old[perm[k]]`.
    pub fn permute_lambdas(&self, perm: [usize; 3]) -> Self {
        let l = self.lambdas();
        Self {
            f: self.f,
            l1: l[perm[0]],
            l2: l[perm[1]],
            l3: l[perm[2]],
        }
    }
}

/// Bell-diagonal state with equal weight `(1 - f)/3` on the three
/// non-target Bell states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerState {
    f: f64,
}

impl WernerState {
    pub fn new(f: f64) -> Result<Self> {
        if !(0.25 - ALGEBRAIC_TOL..=1.0 + ALGEBRAIC_TOL).contains(&f) {
            return Err(domain(format!("Werner fidelity {f} outside [1/4, 1]")));
        }
        Ok(Self { f })
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn to_bell_diagonal(&self) -> BellDiagonalState {
        let r = (1.0 - self.f) / 3.0;
        BellDiagonalState {
            f: self.f,
            l1: r,
            l2: r,
            l3: r,
        }
    }
}

/// Two-qubit density matrix in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    m: Matrix4<Complex64>,
}

impl DensityMatrix4 {
    /// Validates hermiticity and unit trace (1e-12) and positivity (1e-10).
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let herm_err = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > ALGEBRAIC_TOL {
            return Err(domain(format!("matrix is not Hermitian (deviation {herm_err:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > ALGEBRAIC_TOL || tr.im.abs() > ALGEBRAIC_TOL {
            return Err(domain(format!("trace {tr} differs from 1")));
        }
        let dm = Self { m };
        let min_eig = dm.min_eigenvalue();
        if min_eig < -EIGEN_TOL {
            return Err(domain(format!("matrix is not positive semidefinite (eigenvalue {min_eig:e})")));
        }
        Ok(dm)
    }

    /// `|ψ⟩⟨ψ|` for a normalised amplitude vector.
    pub fn from_pure(amplitudes: [Complex64; 4]) -> Result<Self> {
        let v = nalgebra::Vector4::from(amplitudes);
        Self::new(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.m
    }

    /// `⟨B_k|ρ|B_k⟩` for the k-th Bell vector.
    pub fn bell_overlap(&self, k: usize) -> f64 {
        overlap(&self.m, &BELL_BASIS[k])
    }

    /// Transpose on the second qubit.
    pub fn partial_transpose(&self) -> Matrix4<Complex64> {
        Matrix4::from_fn(|r, c| {
            let (a, b) = (r >> 1, r & 1);
            let (a2, b2) = (c >> 1, c & 1);
            self.m[(a << 1 | b2, a2 << 1 | b)]
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(self.m)
    }
}

pub(crate) fn min_hermitian_eigenvalue(m: Matrix4<Complex64>) -> f64 {
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn overlap(m: &Matrix4<Complex64>, v: &[f64; 4]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..4 {
        for c in 0..4 {
            acc += m[(r, c)] * (v[r] * v[c]);
        }
    }
    acc.re
}

/// Bell-diagonal state as a computational-basis density matrix, using the
/// given Bell vectors for the four weights.
pub fn density_matrix_in_basis(s: &BellDiagonalState, basis: &[[f64; 4]; 4]) -> Matrix4<Complex64> {
    let w = s.weights();
    Matrix4::from_fn(|r, c| {
        let x: f64 = (0..4).map(|k| w[k] * basis[k][r] * basis[k][c]).sum();
        Complex64::new(x, 0.0)
    })
}

pub fn to_density_matrix(s: &BellDiagonalState) -> DensityMatrix4 {
    DensityMatrix4 {
        m: density_matrix_in_basis(s, &BELL_BASIS),
    }
}

/// Projects onto the Bell-diagonal part, discarding Bell-basis coherences.
/// The φ+ weight (the fidelity) is carried over unchanged.
pub fn twirl(m: &DensityMatrix4) -> Result<BellDiagonalState> {
    let w: [f64; 4] = std::array::from_fn(|k| m.bell_overlap(k));
    BellDiagonalState::from_weights(w)
}

/// Peres–Horodecki test specialised to Bell-diagonal states: entangled iff
/// some Bell weight exceeds 1/2 (strictly).
pub fn is_entangled(s: &BellDiagonalState) -> bool {
    s.weights().iter().any(|&w| w > 0.5)
}
