//! Small estimators and goodness-of-fit statistics used by the simulator
//! diagnostics.

/// Sample mean and the standard error of the mean,
/// `sqrt(Σ(x − x̄)² / (n(n−1)))`. `None` for fewer than two values.
pub fn mean_and_stderr(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
    Some((mean, (ss / (nf * (nf - 1.0))).sqrt()))
}

/// Standard error of a Bernoulli proportion, `sqrt(p(1−p)/n)`.
pub fn proportion_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n(x) − F(x)|` against
/// a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i as f64 + 1.0) / n - c)
        })
        .fold(0.0, f64::max)
}

/// KS statistic against `Exp(rate)`.
pub fn ks_statistic_exponential(samples: &[f64], rate: f64) -> f64 {
    ks_statistic(samples, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-rate * x).exp() })
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Total-variation distance `½ Σ |p_k − q_k|`; missing entries count as 0.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|k| (at(p, k) - at(q, k)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_stderr() {
        assert_eq!(mean_and_stderr(&[1.0]), None);
        let (m, e) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(m, 2.5, epsilon = 1e-15);
        // sample variance 5/3, divided by n
        assert_abs_diff_eq!(e, (5.0 / 3.0 / 4.0f64).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn ks_on_exact_quantiles() {
        // midpoints of n equal-probability cells give statistic 1/(2n)
        let n = 100;
        let xs: Vec<f64> = (0..n)
            .map(|i| -((1.0 - (i as f64 + 0.5) / n as f64).ln()) / 2.0)
            .collect();
        assert_abs_diff_eq!(ks_statistic_exponential(&xs, 2.0), 0.005, epsilon = 1e-12);
        assert!(ks_statistic_exponential(&xs, 4.0) > 0.2);
    }

    #[test]
    fn tv() {
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_abs_diff_eq!(total_variation(&[1.0], &[0.5, 0.5]), 0.5, epsilon = 1e-15);
        assert!((ks_critical_1pct(10_000) - 0.0163).abs() < 1e-12);
        assert_abs_diff_eq!(proportion_stderr(0.5, 100), 0.05, epsilon = 1e-15);
    }
}
