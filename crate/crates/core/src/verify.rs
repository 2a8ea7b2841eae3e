//! Cross-checks between independent routes to the same quantities.
//!
//! Each check compares two computations that share no code path beyond the
//! basic state types: the circuit engine against the tabulated catalogue,
//! level sums against closed forms, the simulator against the analytics,
//! and so on. [`run_suite`] runs all of them; a [`Fault`] can be injected to
//! confirm that the relevant check notices.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::analytics::{
    avg_fidelity_linear, avg_fidelity_series, fidelity_after_levels, fidelity_after_levels_closed, SystemParams,
};
use crate::protocols::{
    clifford_bounds, f_intersection, f_star, table3_jump, BilocalEngine, CliffordCircuit2Pair, LinearJump,
    ProtocolId,
};
use crate::simulator::{estimate, SimConfig, SuccessMode};
use crate::states::{is_entangled, to_density_matrix, BellDiagonalState, BELL_BASIS};

/// Deliberate defects for exercising the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Add 1e-3 to the slope of the lower jump bound.
    LowerSlope,
    /// Prepare engine inputs with φ+ and ψ+ swapped.
    BellOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Bell-diagonal state with `F` uniform on `(1/2, 1]` and the remaining
/// weight split by a flat Dirichlet draw.
pub fn random_entangled_state(rng: &mut impl Rng) -> BellDiagonalState {
    let f = 1.0 - 0.5 * rng.random::<f64>();
    let e: [f64; 3] = std::array::from_fn(|_| Exp1.sample(rng));
    let s: f64 = e.iter().sum();
    let rest = 1.0 - f;
    let (l1, l2) = (rest * e[0] / s, rest * e[1] / s);
    BellDiagonalState::new(f, l1, l2, (rest - l1 - l2).max(0.0)).expect("weights sum to one")
}

/// Bell-diagonal state drawn uniformly from the simplex.
pub fn random_bell_diagonal(rng: &mut impl Rng) -> BellDiagonalState {
    let e: [f64; 4] = std::array::from_fn(|_| Exp1.sample(rng));
    let s: f64 = e.iter().sum();
    let (w0, w1, w2) = (e[0] / s, e[1] / s, e[2] / s);
    BellDiagonalState::new(w0, w1, w2, (1.0 - w0 - w1 - w2).max(0.0)).expect("weights sum to one")
}

pub fn random_params(rng: &mut impl Rng) -> SystemParams {
    SystemParams::new(
        rng.random_range(0.1..5.0),
        rng.random_range(0.01..2.0),
        rng.random_range(0.0..0.5),
        rng.random(),
        rng.random(),
    )
    .expect("ranges are valid")
}

/// Linear jump mapping `[1/4, 1]` into itself.
pub fn random_linear_jump(rng: &mut impl Rng) -> LinearJump {
    let a: f64 = rng.random();
    let lo = (1.0 - a) / 4.0;
    let b = lo + (1.0 - a - lo) * rng.random::<f64>();
    LinearJump::new(a, b).expect("b drawn inside its range")
}

fn suite_rng(stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e17_b0ff);
    rng.set_stream(stream);
    rng
}

/// Evenly spaced fidelities on `[lo, hi]`.
fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

/// Largest deviation, over `n` fidelities in `[1/4, 1]`, between the engine's
/// jump for `circ` and the closest non-trivial catalogue row.
pub fn catalogue_deviation(
    engine: &BilocalEngine,
    circ: &CliffordCircuit2Pair,
    rho: &BellDiagonalState,
    n: usize,
) -> Option<(ProtocolId, f64)> {
    let fitted = engine.fit(circ, rho).ok()?.jump;
    ProtocolId::NONTRIVIAL
        .iter()
        .map(|&id| {
            let row = table3_jump(id, rho);
            let dev = grid(0.25, 1.0, n)
                .map(|f| {
                    (fitted.eval(f) - row.eval(f))
                        .abs()
                        .max((fitted.success_probability(f) - row.success_probability(f)).abs())
                })
                .fold(0.0, f64::max);
            (id, dev)
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

fn oracle_check(fault: Option<Fault>) -> Check {
    let engine = if fault == Some(Fault::BellOrder) {
        let mut basis = BELL_BASIS;
        basis.swap(0, 1);
        BilocalEngine::with_preparation_basis(basis)
    } else {
        BilocalEngine::default()
    };
    let mut rng = suite_rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let rho = random_entangled_state(&mut rng);
        for circ in [CliffordCircuit2Pair::bilateral_cnot(), CliffordCircuit2Pair::dejmps()] {
            let dev = catalogue_deviation(&engine, &circ, &rho, 20).map_or(f64::INFINITY, |(_, d)| d);
            worst = worst.max(dev);
        }
    }
    check(
        "catalogue-vs-engine",
        worst < 1e-10,
        format!("max |J_engine − J_row| = {worst:.3e} (tol 1e-10)"),
    )
}

fn sandwich_check(fault: Option<Fault>) -> Check {
    let mut rng = suite_rng(2);
    let slack = 1e-10;
    let mut violations = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let rho = random_entangled_state(&mut rng);
        let mut b = clifford_bounds(&rho).expect("entangled state");
        if fault == Some(Fault::LowerSlope) {
            b.a_l += 1e-3;
        }
        for id in ProtocolId::NONTRIVIAL {
            let row = table3_jump(id, &rho);
            for f in grid(0.25, b.f_star, 50) {
                let gap = row.eval(f) - b.lower(f);
                worst = worst.min(gap);
                violations += usize::from(gap < -slack);
            }
            for f in grid(0.25, 1.0, 50) {
                let gap = b.upper(f) - row.eval(f);
                let p = row.success_probability(f);
                worst = worst.min(gap).min(p - b.p_l).min(b.p_u - p);
                violations += usize::from(gap < -slack || p < b.p_l - slack || p > b.p_u + slack);
            }
        }
    }
    check(
        "bound-sandwich",
        violations == 0,
        format!("{violations} violations, most negative gap {worst:.3e}"),
    )
}

fn fixed_point_check() -> Check {
    let mut rng = suite_rng(3);
    let (mut star, mut cross): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let rho = random_entangled_state(&mut rng);
        let fs = f_star(&rho).expect("entangled state");
        let best = ProtocolId::NONTRIVIAL
            .iter()
            .map(|&id| (id, rho.lambdas()[usize::from(id.index() - 1)]))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(id, _)| table3_jump(id, &rho))
            .expect("three rows");
        star = star.max((best.eval(fs) - fs).abs());
        let fi = f_intersection(&rho).expect("entangled state");
        for id in ProtocolId::NONTRIVIAL {
            cross = cross.max((table3_jump(id, &rho).eval(fi) - (rho.f() / 2.0).sqrt()).abs());
        }
    }
    check(
        "fixed-points",
        star < 1e-12 && cross < 1e-12,
        format!("F* residual {star:.3e}, crossing residual {cross:.3e} (tol 1e-12)"),
    )
}

fn ppt_check() -> Check {
    let mut rng = suite_rng(4);
    let mut disagreements = 0;
    let mut tested = 0;
    for _ in 0..500 {
        let rho = random_bell_diagonal(&mut rng);
        let max_w = rho.weights().into_iter().fold(0.0, f64::max);
        if (max_w - 0.5).abs() < 1e-8 {
            continue;
        }
        tested += 1;
        let pt_negative = to_density_matrix(&rho).partial_transpose().symmetric_eigenvalues().min() < 0.0;
        disagreements += usize::from(pt_negative != is_entangled(&rho));
    }
    check(
        "ppt-cross-check",
        disagreements == 0,
        format!("{disagreements} of {tested} states disagree"),
    )
}

fn series_check() -> Check {
    let mut rng = suite_rng(5);
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..200 {
        let params = random_params(&mut rng);
        let jump = random_linear_jump(&mut rng);
        let f_new = rng.random_range(0.25..=1.0);
        let closed = avg_fidelity_linear(&params, jump, f_new);
        let series = avg_fidelity_series(&params, &jump.into(), f_new, 1e-13);
        match (closed, series) {
            (Ok(c), Ok(s)) => worst = worst.max((c.avg_consumed_fidelity - s.avg_consumed_fidelity).abs()),
            _ => errors += 1,
        }
    }
    check(
        "series-vs-closed",
        worst < 1e-10 && errors == 0,
        format!("max difference {worst:.3e} (tol 1e-10), {errors} evaluation errors"),
    )
}

fn recursion_check() -> Check {
    let mut rng = suite_rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let jump = random_linear_jump(&mut rng);
        let f_new = rng.random_range(0.25..=1.0);
        let gamma = rng.random_range(0.0..0.5);
        let levels = rng.random_range(0..=10);
        let times: Vec<f64> = (0..=levels).map(|_| rng.random_range(0.0..5.0)).collect();
        let rec = fidelity_after_levels(&times, jump, f_new, gamma).expect("valid inputs");
        let closed = fidelity_after_levels_closed(&times, jump, f_new, gamma).expect("valid inputs");
        worst = worst.max((rec - closed).abs());
    }
    check(
        "recursion-vs-closed",
        worst < 1e-12,
        format!("max difference {worst:.3e} (tol 1e-12)"),
    )
}

fn simulation_check() -> Check {
    let params = SystemParams::new(1.0, 0.1, 0.025, 1.0, 0.75).expect("valid");
    let jump = LinearJump::new(1.0 / 3.0, 0.6).expect("valid");
    let result = SimConfig::new(params, jump, 0.8, 50.0, 10_000, 2024, SuccessMode::ConstantP)
        .and_then(|cfg| estimate(&cfg))
        .and_then(|est| Ok((est, avg_fidelity_linear(&params, jump, 0.8)?)));
    match result {
        Ok((est, exact)) => {
            let za = (est.availability - exact.availability).abs() / est.stderr_availability;
            let zf = (est.avg_fidelity - exact.avg_consumed_fidelity).abs() / est.stderr_fidelity;
            check(
                "simulation-vs-closed",
                za < 3.0 && zf < 3.0,
                format!("availability off by {za:.2}σ, fidelity off by {zf:.2}σ (tol 3σ)"),
            )
        }
        Err(e) => check("simulation-vs-closed", false, e.to_string()),
    }
}

pub fn run_suite(fault: Option<Fault>) -> Report {
    Report {
        checks: vec![
            oracle_check(fault),
            series_check(),
            recursion_check(),
            simulation_check(),
            sandwich_check(fault),
            fixed_point_check(),
            ppt_check(),
        ],
    }
}
