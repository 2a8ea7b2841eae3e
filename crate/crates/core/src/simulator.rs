//! Discrete-event Monte Carlo of the buffer.
//!
//! Each replication starts empty at time 0 and runs to `t_sim`; the state at
//! `t_sim` is the sample. Generation and consumption are independent Poisson
//! streams, so after every event both waiting times are simply redrawn.
//! Decoherence is applied lazily: the stored fidelity is kept together with
//! the time it was last set.
//!
//! Replication `i` draws from a ChaCha8 stream seeded with `seed` and
//! stream number `i`, so results do not depend on thread count or order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::analytics::{check_fidelity, steady_state, SystemParams};
use crate::error::{domain, Error, Result};
use crate::protocols::JumpFunction;
use crate::states::decay;
use crate::stats;

/// Where the success probability of a pump comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessMode {
    /// The system's constant `p`.
    ConstantP,
    /// The protocol's `c F + d`, evaluated at the decayed stored fidelity.
    /// Linear jumps have no such law and fall back to `p`.
    LinearP,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SystemParams,
    pub jump: JumpFunction,
    pub f_new: f64,
    pub t_sim: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub success_mode: SuccessMode,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl SimConfig {
    pub fn new(
        params: SystemParams,
        jump: impl Into<JumpFunction>,
        f_new: f64,
        t_sim: f64,
        n_samples: usize,
        seed: u64,
        success_mode: SuccessMode,
    ) -> Result<Self> {
        let cfg = Self {
            params,
            jump: jump.into(),
            f_new,
            t_sim,
            n_samples,
            seed,
            success_mode,
            threads: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(domain("thread count must be positive"));
        }
        self.threads = Some(threads);
        Ok(self)
    }

    pub fn with_t_sim(mut self, t_sim: f64) -> Result<Self> {
        self.t_sim = t_sim;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        check_fidelity(self.f_new)?;
        if !(self.t_sim.is_finite() && self.t_sim > 0.0) {
            return Err(domain(format!("t_sim = {} must be finite and positive", self.t_sim)));
        }
        if self.n_samples < 2 {
            return Err(domain(format!("n_samples = {} must be at least 2", self.n_samples)));
        }
        if matches!(self.threads, Some(0)) {
            return Err(domain("thread count must be positive"));
        }
        Ok(())
    }
}

/// State of one replication at `t_sim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replication {
    /// `None` when the buffer is empty.
    pub link: Option<LinkSample>,
    /// Pumps whose success probability had to be clamped into `[0, 1]`.
    pub clamp_events: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub fidelity: f64,
    pub level: usize,
    /// Time since the link was placed into the empty buffer.
    pub lifetime: f64,
}

impl Replication {
    /// Fidelity with the empty buffer recorded as 0.
    pub fn fidelity_or_zero(&self) -> f64 {
        self.link.map_or(0.0, |l| l.fidelity)
    }
}

struct Stored {
    fidelity: f64,
    since: f64,
    level: usize,
    born: f64,
}

fn waiting_time(dist: &Option<Exp<f64>>, rng: &mut ChaCha8Rng) -> f64 {
    dist.as_ref().map_or(f64::INFINITY, |d| d.sample(rng))
}

fn rate_dist(rate: f64) -> Option<Exp<f64>> {
    (rate > 0.0).then(|| Exp::new(rate).expect("positive finite rate"))
}

/// Simulates one replication with the given random stream.
pub fn run_one(config: &SimConfig, rng: &mut ChaCha8Rng) -> Replication {
    let params = &config.params;
    let gen = rate_dist(params.lambda());
    let con = rate_dist(params.mu());
    let gamma = params.gamma();
    let mut clamp_events = 0;
    let mut stored: Option<Stored> = None;
    let mut t = 0.0;

    loop {
        let dt_gen = waiting_time(&gen, rng);
        let dt_con = waiting_time(&con, rng);
        let dt = dt_gen.min(dt_con);
        if t + dt >= config.t_sim {
            break;
        }
        t += dt;
        if dt_con < dt_gen {
            stored = None;
            continue;
        }
        let Some(s) = stored.as_mut() else {
            stored = Some(Stored {
                fidelity: config.f_new,
                since: t,
                level: 0,
                born: t,
            });
            continue;
        };
        let attempt: f64 = rng.random();
        if attempt >= params.q() {
            continue;
        }
        let current = decay(s.fidelity, t - s.since, gamma);
        let p_success = match (config.success_mode, config.jump.success_probability(current)) {
            (SuccessMode::LinearP, Some(ps)) => {
                if !(0.0..=1.0).contains(&ps) {
                    clamp_events += 1;
                }
                ps.clamp(0.0, 1.0)
            }
            _ => params.p(),
        };
        let draw: f64 = rng.random();
        if draw < p_success {
            s.fidelity = config.jump.eval(current);
            s.since = t;
            s.level += 1;
        } else {
            stored = None;
        }
    }

    Replication {
        link: stored.map(|s| LinkSample {
            fidelity: decay(s.fidelity, config.t_sim - s.since, gamma),
            level: s.level,
            lifetime: config.t_sim - s.born,
        }),
        clamp_events,
    }
}

/// Random stream of replication `index`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// All replications of a configuration, in replication order.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub config: SimConfig,
    pub replications: Vec<Replication>,
}

pub fn simulate(config: &SimConfig) -> Result<SimRun> {
    config.validate()?;
    let work = || -> Vec<Replication> {
        (0..config.n_samples as u64)
            .into_par_iter()
            .map(|i| run_one(config, &mut replication_rng(config.seed, i)))
            .collect()
    };
    let replications = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| domain(format!("cannot start {n} worker threads: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(SimRun {
        config: config.clone(),
        replications,
    })
}

/// Sample estimates of availability and average consumed fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub avg_fidelity: f64,
    pub stderr_fidelity: f64,
    pub availability: f64,
    pub stderr_availability: f64,
    pub n_samples: usize,
    pub n_nonempty: usize,
    pub clamp_events: u64,
}

pub fn estimate(config: &SimConfig) -> Result<SimEstimate> {
    simulate(config)?.estimate()
}

/// Empirical law of the buffer over {∅, 0, 1, …} at `t_sim`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelHistogram {
    pub empty: f64,
    /// `levels[i]` is the fraction of samples holding a link at level `i`.
    pub levels: Vec<f64>,
    pub n_samples: usize,
    /// Total-variation distance to the stationary law.
    pub tv_distance: f64,
}

/// Current lifetime of nonempty samples against `Exp(μ + λq(1−p))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeFit {
    pub samples: Vec<f64>,
    pub beta: f64,
    pub ks_statistic: f64,
    pub critical_1pct: f64,
}

impl LifetimeFit {
    pub fn passes(&self) -> bool {
        self.ks_statistic < self.critical_1pct
    }
}

impl SimRun {
    pub fn nonempty(&self) -> impl Iterator<Item = &LinkSample> {
        self.replications.iter().filter_map(|r| r.link.as_ref())
    }

    pub fn estimate(&self) -> Result<SimEstimate> {
        let n = self.replications.len();
        let fidelities: Vec<f64> = self.nonempty().map(|l| l.fidelity).collect();
        let n_nonempty = fidelities.len();
        let availability = n_nonempty as f64 / n as f64;
        let (avg_fidelity, stderr_fidelity) =
            stats::mean_and_stderr(&fidelities).ok_or(Error::InsufficientSamples {
                nonempty: n_nonempty,
                samples: n,
                availability,
            })?;
        Ok(SimEstimate {
            avg_fidelity,
            stderr_fidelity,
            availability,
            stderr_availability: stats::proportion_stderr(availability, n),
            n_samples: n,
            n_nonempty,
            clamp_events: self.replications.iter().map(|r| u64::from(r.clamp_events)).sum(),
        })
    }

    fn require_constant_p(&self, what: &str) -> Result<()> {
        if self.config.success_mode == SuccessMode::ConstantP {
            Ok(())
        } else {
            Err(domain(format!("{what} compares against the constant-p law")))
        }
    }

    pub fn level_histogram(&self) -> Result<LevelHistogram> {
        self.require_constant_p("level histogram")?;
        let n = self.replications.len();
        let mut counts: Vec<usize> = Vec::new();
        for link in self.nonempty() {
            if counts.len() <= link.level {
                counts.resize(link.level + 1, 0);
            }
            counts[link.level] += 1;
        }
        let levels: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let empty = 1.0 - counts.iter().sum::<usize>() as f64 / n as f64;

        let ss = steady_state(&self.config.params);
        let mut empirical = vec![empty];
        empirical.extend(&levels);
        let mut exact = vec![ss.pi_empty];
        exact.extend((0..levels.len()).map(|i| ss.pi(i)));
        // levels never observed contribute their whole stationary mass
        let unseen = if levels.is_empty() {
            ss.availability()
        } else {
            ss.tail_mass(levels.len() - 1)
        };
        let tv_distance = stats::total_variation(&empirical, &exact) + 0.5 * unseen;

        Ok(LevelHistogram {
            empty,
            levels,
            n_samples: n,
            tv_distance,
        })
    }

    pub fn lifetime_fit(&self) -> Result<LifetimeFit> {
        self.require_constant_p("lifetime law")?;
        let samples: Vec<f64> = self.nonempty().map(|l| l.lifetime).collect();
        if samples.is_empty() {
            return Err(Error::InsufficientSamples {
                nonempty: 0,
                samples: self.replications.len(),
                availability: 0.0,
            });
        }
        let beta = self.config.params.beta();
        Ok(LifetimeFit {
            ks_statistic: stats::ks_statistic_exponential(&samples, beta),
            critical_1pct: stats::ks_critical_1pct(samples.len()),
            beta,
            samples,
        })
    }
}

/// Estimates at `t_sim` and `2 t_sim` (independent streams) and whether
/// they agree within one combined standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub at_t: SimEstimate,
    pub at_2t: SimEstimate,
    pub availability_agrees: bool,
    pub fidelity_agrees: bool,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.availability_agrees && self.fidelity_agrees
    }
}

const CONVERGENCE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn convergence_check(config: &SimConfig) -> Result<ConvergenceReport> {
    let at_t = estimate(config)?;
    let doubled = config
        .clone()
        .with_t_sim(2.0 * config.t_sim)?
        .with_seed(config.seed.wrapping_add(CONVERGENCE_SEED_OFFSET));
    let at_2t = estimate(&doubled)?;
    let within = |x: f64, y: f64, ex: f64, ey: f64| (x - y).abs() <= ex.hypot(ey);
    Ok(ConvergenceReport {
        availability_agrees: within(
            at_t.availability,
            at_2t.availability,
            at_t.stderr_availability,
            at_2t.stderr_availability,
        ),
        fidelity_agrees: within(
            at_t.avg_fidelity,
            at_2t.avg_fidelity,
            at_t.stderr_fidelity,
            at_2t.stderr_fidelity,
        ),
        at_t,
        at_2t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::LinearJump;

    fn config(params: SystemParams, n: usize) -> SimConfig {
        let jump = LinearJump::new(1.0 / 3.0, 0.6).unwrap();
        SimConfig::new(params, jump, 0.8, 50.0, n, 7, SuccessMode::ConstantP).unwrap()
    }

    #[test]
    fn config_validation() {
        let params = SystemParams::new(1.0, 0.1, 0.0, 0.5, 0.5).unwrap();
        let jump = LinearJump::new(1.0 / 3.0, 0.6).unwrap();
        assert!(SimConfig::new(params, jump, 0.8, 0.0, 10, 0, SuccessMode::ConstantP).is_err());
        assert!(SimConfig::new(params, jump, 0.8, 1.0, 1, 0, SuccessMode::ConstantP).is_err());
        assert!(SimConfig::new(params, jump, 0.1, 1.0, 10, 0, SuccessMode::ConstantP).is_err());
        assert!(config(params, 10).with_threads(0).is_err());
    }

    #[test]
    fn never_generating() {
        let params = SystemParams::for_simulation(0.0, 0.1, 0.0, 0.5, 0.5).unwrap();
        let run = simulate(&config(params, 50)).unwrap();
        assert!(run.replications.iter().all(|r| r.fidelity_or_zero() == 0.0));
        assert_eq!(
            run.estimate(),
            Err(Error::InsufficientSamples {
                nonempty: 0,
                samples: 50,
                availability: 0.0
            })
        );
    }

    #[test]
    fn no_decay_no_pumping_keeps_fresh_fidelity() {
        let params = SystemParams::new(1.0, 0.1, 0.0, 0.0, 0.5).unwrap();
        let run = simulate(&config(params, 500)).unwrap();
        assert!(run.nonempty().count() > 300);
        assert!(run.nonempty().all(|l| l.fidelity == 0.8 && l.level == 0));
    }

    #[test]
    fn zero_success_never_levels_up() {
        let params = SystemParams::new(1.0, 0.1, 0.02, 1.0, 0.0).unwrap();
        let hist = simulate(&config(params, 500)).unwrap().level_histogram().unwrap();
        assert_eq!(hist.levels.len(), 1);
    }

    #[test]
    fn same_seed_same_result() {
        let params = SystemParams::new(1.0, 0.1, 0.025, 0.5, 0.75).unwrap();
        let cfg = config(params, 300);
        let one = estimate(&cfg).unwrap();
        let two = estimate(&cfg.clone().with_threads(3).unwrap()).unwrap();
        assert_eq!(one, two);
        assert_ne!(one, estimate(&cfg.with_seed(8)).unwrap());
    }

    #[test]
    fn diagnostics_need_constant_p() {
        let params = SystemParams::new(1.0, 0.1, 0.025, 0.5, 0.75).unwrap();
        let mut cfg = config(params, 20);
        cfg.success_mode = SuccessMode::LinearP;
        let run = simulate(&cfg).unwrap();
        assert!(run.level_histogram().is_err());
        assert!(run.lifetime_fit().is_err());
    }
}
