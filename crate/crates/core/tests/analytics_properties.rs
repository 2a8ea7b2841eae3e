use entbuffer_core::analytics::*;
use entbuffer_core::protocols::LinearJump;
use entbuffer_core::verify::{random_linear_jump, random_params};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(31);
    r.set_stream(stream);
    r
}

fn fbar(params: &SystemParams, jump: LinearJump, f_new: f64) -> f64 {
    avg_fidelity_linear(params, jump, f_new).unwrap().avg_consumed_fidelity
}

#[test]
fn series_matches_closed_form_on_random_draws() {
    let mut r = rng(1);
    for _ in 0..200 {
        let params = random_params(&mut r);
        let jump = random_linear_jump(&mut r);
        let f_new = r.random_range(0.25..=1.0);
        let closed = fbar(&params, jump, f_new);
        let series = avg_fidelity_series(&params, &jump.into(), f_new, 1e-13).unwrap();
        assert!(
            (closed - series.avg_consumed_fidelity).abs() < 1e-10,
            "{params:?} {jump:?} {f_new}: {closed} vs {}",
            series.avg_consumed_fidelity
        );
    }
}

#[test]
fn monotone_in_q_and_p() {
    let mut r = rng(2);
    let grid: Vec<f64> = (1..=19).map(|k| k as f64 * 0.05).collect();
    let h = 1e-6;
    for _ in 0..200 {
        let params = random_params(&mut r);
        let jump = random_linear_jump(&mut r);
        let f_new = r.random_range(0.25..=1.0);

        let slopes_q: Vec<f64> = grid
            .iter()
            .map(|&q| {
                let up = fbar(&params.with_q(q + h).unwrap(), jump, f_new);
                let down = fbar(&params.with_q(q - h).unwrap(), jump, f_new);
                (up - down) / (2.0 * h)
            })
            .collect();
        let slopes_p: Vec<f64> = grid
            .iter()
            .map(|&p| {
                let up = fbar(&params.with_p(p + h).unwrap(), jump, f_new);
                let down = fbar(&params.with_p(p - h).unwrap(), jump, f_new);
                (up - down) / (2.0 * h)
            })
            .collect();
        for slopes in [slopes_q, slopes_p] {
            // a flat curve has no sign to keep; finite differences sit at rounding level
            let big: Vec<f64> = slopes.into_iter().filter(|s| s.abs() > 1e-7).collect();
            assert!(
                big.iter().all(|s| *s > 0.0) || big.iter().all(|s| *s < 0.0),
                "{params:?} {jump:?} {f_new}: {big:?}"
            );
        }
    }
}

#[test]
fn values_stay_in_range() {
    let mut r = rng(3);
    for _ in 0..500 {
        let params = random_params(&mut r);
        let jump = random_linear_jump(&mut r);
        let f_new = r.random_range(0.25..=1.0);
        let (l, mu) = (params.lambda(), params.mu());
        let a = availability(&params);
        assert!(a >= l / (2.0 * l + mu) - 1e-15 && a <= l / (l + mu) + 1e-15);
        let f = fbar(&params, jump, f_new);
        assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&f), "{f}");
        for i in 0..5 {
            let c = c_i_linear(i, &params, jump, f_new).unwrap();
            assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&c), "{c}");
        }
        let ss = steady_state(&params);
        let levels = ss.availability();
        assert!((ss.pi_empty + levels - 1.0).abs() < 1e-12);
        // geometric sum of π_i reproduces A
        if ss.ratio < 1.0 {
            let sum = ss.pi(0) / (1.0 - ss.ratio);
            assert!((sum - a).abs() < 1e-12);
        }
    }
}

#[test]
fn c_i_is_independent_of_p() {
    let mut r = rng(4);
    for _ in 0..50 {
        let params = random_params(&mut r);
        let jump = random_linear_jump(&mut r);
        for i in 0..6 {
            let reference = c_i_linear(i, &params.with_p(0.0).unwrap(), jump, 0.9).unwrap();
            for p in [0.5, 1.0] {
                assert_eq!(c_i_linear(i, &params.with_p(p).unwrap(), jump, 0.9).unwrap(), reference);
            }
        }
    }
}

/// Levels are held for i.i.d. `Exp(μ + λq)` times; averaging the recursive
/// fidelity over such times must reproduce `c_i`.
#[test]
fn c_i_matches_monte_carlo() {
    let params = SystemParams::new(1.0, 0.1, 0.025, 1.0, 0.75).unwrap();
    let jump = LinearJump::new(1.0 / 3.0, 0.6).unwrap();
    let hold = Exp::new(1.1).unwrap();
    let n = 1_000_000;
    for i in 0..=3usize {
        let mut r = rng(10 + i as u64);
        let mut times = vec![0.0; i + 1];
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            for t in times.iter_mut() {
                *t = hold.sample(&mut r);
            }
            let f = fidelity_after_levels(&times, jump, 0.8, 0.025).unwrap();
            sum += f;
            sum_sq += f * f;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / (n as f64 - 1.0)).sqrt();
        let exact = c_i_linear(i, &params, jump, 0.8).unwrap();
        assert!((mean - exact).abs() < 3.0 * se, "i={i}: {mean} ± {se} vs {exact}");
    }
}

proptest! {
    #[test]
    fn recursion_equals_closed_form(
        a in 0.0..=1.0f64,
        frac in 0.0..=1.0f64,
        f_new in 0.25..=1.0f64,
        gamma in 0.0..1.0f64,
        times in prop::collection::vec(0.0..10.0f64, 1..=11),
    ) {
        let lo = (1.0 - a) / 4.0;
        let jump = LinearJump::new(a, lo + frac * (1.0 - a - lo)).unwrap();
        let rec = fidelity_after_levels(&times, jump, f_new, gamma).unwrap();
        let closed = fidelity_after_levels_closed(&times, jump, f_new, gamma).unwrap();
        prop_assert!((rec - closed).abs() < 1e-12);
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&rec));
    }

    #[test]
    fn derivative_formulas_match_differences(
        q in 0.05..0.95f64,
        p in 0.05..0.95f64,
        seed in any::<u64>(),
    ) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let base = random_params(&mut r);
        let params = base.with_q(q).unwrap().with_p(p).unwrap();
        let jump = random_linear_jump(&mut r);
        let f_new = r.random_range(0.25..=1.0);
        let h = 1e-5;
        let fd_q = (fbar(&params.with_q(q + h).unwrap(), jump, f_new)
            - fbar(&params.with_q(q - h).unwrap(), jump, f_new)) / (2.0 * h);
        let fd_p = (fbar(&params.with_p(p + h).unwrap(), jump, f_new)
            - fbar(&params.with_p(p - h).unwrap(), jump, f_new)) / (2.0 * h);
        prop_assert!((df_dq(&params, jump, f_new) - fd_q).abs() < 1e-6);
        prop_assert!((df_dp(&params, jump, f_new) - fd_p).abs() < 1e-6);
    }
}
