//! Subcommand implementations. Each returns its output as text; `main`
//! decides where it goes.

use std::fmt::Write as _;

use entbuffer_core::analytics::{
    avg_fidelity_linear, noise_threshold, resolve_linear, steady_state, NoiseThreshold, SystemParams,
};
use entbuffer_core::protocols::{ProtocolRegistry, PumpingProtocol};
use entbuffer_core::regimes::{
    clifford_band, no_pumping_fidelity, q_grid, replacement_point, universal_cap,
};
use entbuffer_core::simulator::{convergence_check, simulate as run_simulation, SimConfig, SimRun, SuccessMode};
use entbuffer_core::verify::{run_suite, Fault};

use crate::config::{ConfigFile, Mode};
use crate::error::{config, CliError, Result};
use crate::format::{num, num_row, row};

pub const THREADS_ENV: &str = "ENTBUFFER_THREADS";

fn protocol(cfg: &ConfigFile) -> Result<Box<dyn PumpingProtocol>> {
    cfg.build_protocol(&ProtocolRegistry::with_builtins())
}

fn require_p(cfg: &ConfigFile, proto: &dyn PumpingProtocol) -> Result<f64> {
    cfg.success_probability(proto)?
        .ok_or_else(|| config("missing field `system.p`"))
}

pub fn analyze(cfg: &ConfigFile) -> Result<String> {
    let proto = protocol(cfg)?;
    let f_new = cfg.f_new()?;
    let mut out = String::new();
    writeln!(out, "protocol: {}", proto.name()).unwrap();

    if proto.jump().linear().is_none() {
        return analyze_fidelity_dependent(cfg, out);
    }
    let p = require_p(cfg, proto.as_ref())?;
    let params = cfg.params(p)?;
    let jump = resolve_linear(&params, &proto.jump())?;
    let metrics = avg_fidelity_linear(&params, jump, f_new)?;
    let baseline = avg_fidelity_linear(&params.with_q(0.0)?, jump, f_new)?;

    writeln!(out, "availability: {}", num(metrics.availability)).unwrap();
    writeln!(out, "avg_fidelity: {}", num(metrics.avg_consumed_fidelity)).unwrap();
    writeln!(out, "no_pumping_avg_fidelity: {}", num(baseline.avg_consumed_fidelity)).unwrap();
    match noise_threshold(jump, p, params.mu(), f_new)? {
        NoiseThreshold::AlwaysBeneficial => writeln!(out, "noise_threshold: always-beneficial").unwrap(),
        NoiseThreshold::Degenerate => writeln!(out, "noise_threshold: degenerate").unwrap(),
        NoiseThreshold::Threshold(g) => {
            writeln!(out, "noise_threshold: {}", num(g)).unwrap();
            let verdict = if params.gamma() > g { "pumping-helps" } else { "pumping-hurts-or-neutral" };
            writeln!(out, "verdict_at_gamma: {verdict}").unwrap();
        }
    }
    if params.q() == 0.0 {
        writeln!(out, "note: q = 0 is the no-pumping baseline; the threshold applies once q > 0").unwrap();
    }
    let ss = steady_state(&params);
    writeln!(out, "pi_empty: {}", num(ss.pi_empty)).unwrap();
    for i in 0..=5 {
        writeln!(out, "pi_{i}: {}", num(ss.pi(i))).unwrap();
    }
    Ok(out)
}

/// Protocols whose success probability depends on the stored fidelity have
/// no closed form; report the bound band at the configured `q` instead.
fn analyze_fidelity_dependent(cfg: &ConfigFile, mut out: String) -> Result<String> {
    let rho = cfg.require_rho()?;
    let rates = cfg.rates()?;
    let band = clifford_band(&rates, &rho, &[cfg.system.q])?[0];
    writeln!(out, "availability: n/a (success probability depends on fidelity; use `simulate`)").unwrap();
    writeln!(out, "avg_fidelity: n/a").unwrap();
    writeln!(
        out,
        "availability_range: {},{}",
        num(band.availability_lower),
        num(band.availability_upper)
    )
    .unwrap();
    writeln!(out, "avg_fidelity_bounds: {},{}", num(band.f_lower), num(band.f_upper)).unwrap();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Q,
    P,
    Gamma,
    Mu,
    Lambda,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepArgs {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

fn sweep_values(args: &SweepArgs) -> Result<Vec<f64>> {
    let SweepArgs { from, to, steps, .. } = *args;
    if !from.is_finite() || !to.is_finite() {
        return Err(config("sweep bounds must be finite"));
    }
    match steps {
        0 => Err(config("--steps must be at least 1")),
        1 if from == to => Ok(vec![from]),
        1 => Err(config("--steps 1 needs --from equal to --to")),
        _ if from >= to => Err(config(format!("empty sweep range: --from {from} must be below --to {to}"))),
        _ => Ok((0..steps)
            .map(|k| if k + 1 == steps { to } else { from + (to - from) * k as f64 / (steps - 1) as f64 })
            .collect()),
    }
}

pub fn sweep(cfg: &ConfigFile, args: &SweepArgs) -> Result<String> {
    let values = sweep_values(args)?;
    let proto = protocol(cfg)?;
    let f_new = cfg.f_new()?;
    let own_p = proto.jump().constant_success();
    if args.param == SweepParam::P && own_p.is_some() {
        return Err(config(format!(
            "protocol `{}` fixes its own success probability; it cannot be swept",
            proto.name()
        )));
    }
    let p = match args.param {
        SweepParam::P => cfg.system.p.unwrap_or(0.0),
        _ => require_p(cfg, proto.as_ref())?,
    };
    // every `with_*` below revalidates, so only the swept field may be out of range here
    let s = &cfg.system;
    let base = SystemParams::for_simulation(s.lambda, s.mu, s.gamma, s.q, p)?;

    let mut out = row(&["param_value".into(), "availability".into(), "avg_fidelity".into()]);
    for v in values {
        let params = match args.param {
            SweepParam::Q => base.with_q(v),
            SweepParam::P => base.with_p(v),
            SweepParam::Gamma => base.with_gamma(v),
            SweepParam::Mu => base.with_mu(v),
            SweepParam::Lambda => base.with_lambda(v),
        }?;
        let jump = resolve_linear(&params, &proto.jump())?;
        let m = avg_fidelity_linear(&params, jump, f_new)?;
        out.push_str(&num_row(&[v, m.availability, m.avg_consumed_fidelity]));
    }
    Ok(out)
}

pub fn regimes(cfg: &ConfigFile, steps: usize) -> Result<String> {
    if steps == 0 {
        return Err(config("--steps must be at least 1"));
    }
    let rho = cfg.require_rho()?;
    cfg.f_new()?;
    let rates = cfg.rates()?;
    let band = clifford_band(&rates, &rho, &q_grid(steps))?;
    let mut out = row(&[
        "q".into(),
        "avail_lower_p".into(),
        "f_lower".into(),
        "avail_upper_p".into(),
        "f_upper".into(),
    ]);
    for pt in &band {
        out.push_str(&num_row(&[pt.q, pt.availability_lower, pt.f_lower, pt.availability_upper, pt.f_upper]));
    }
    let cap = universal_cap(&rates, rho.f())?;
    let repl = replacement_point(&rates, rho.f())?;
    writeln!(out, "# universal_cap,{}", num(cap)).unwrap();
    writeln!(
        out,
        "# replacement_point,{},{}",
        num(repl.availability_lower),
        num(repl.f_lower)
    )
    .unwrap();
    writeln!(out, "# no_pumping,{}", num(no_pumping_fidelity(&rates, rho.f())?)).unwrap();
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub samples: Option<usize>,
    pub t_sim: Option<f64>,
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub diagnostics: bool,
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub csv: String,
    /// Human-readable report.
    pub summary: String,
    /// Level histogram against the stationary law, with `--diagnostics`.
    pub levels_csv: Option<String>,
}

/// `--threads`, else `ENTBUFFER_THREADS`, else rayon's default.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| config(format!("{THREADS_ENV} = {v:?} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

pub fn simulate(cfg: &ConfigFile, args: &SimulateArgs) -> Result<SimulateOutput> {
    let proto = protocol(cfg)?;
    let f_new = cfg.f_new()?;
    let sim = &cfg.simulation;
    let mode: SuccessMode = args.mode.or(sim.mode).unwrap_or(Mode::Constant).into();
    let p = match cfg.success_probability(proto.as_ref())? {
        Some(p) => p,
        // never read: every pump draws from the protocol's own law
        None if mode == SuccessMode::LinearP && proto.jump().success_probability(0.5).is_some() => 0.0,
        None => return Err(config("missing field `system.p`")),
    };
    let s = &cfg.system;
    let params = SystemParams::for_simulation(s.lambda, s.mu, s.gamma, s.q, p)?;
    let mut sim_cfg = SimConfig::new(
        params,
        proto.jump(),
        f_new,
        args.t_sim.or(sim.t_sim).unwrap_or(50.0),
        args.samples.or(sim.samples).unwrap_or(10_000),
        args.seed.or(sim.seed).unwrap_or(0),
        mode,
    )?;
    if let Some(n) = resolve_threads(args.threads)? {
        sim_cfg = sim_cfg.with_threads(n)?;
    }

    let run = run_simulation(&sim_cfg)?;
    let est = run.estimate()?;
    let csv = row(&[
        "avg_fidelity".into(),
        "stderr_fidelity".into(),
        "availability".into(),
        "stderr_availability".into(),
        "n_samples".into(),
        "n_nonempty".into(),
    ]) + &row(&[
        num(est.avg_fidelity),
        num(est.stderr_fidelity),
        num(est.availability),
        num(est.stderr_availability),
        est.n_samples.to_string(),
        est.n_nonempty.to_string(),
    ]);

    let mut summary = String::new();
    writeln!(summary, "protocol: {} ({:?})", proto.name(), mode).unwrap();
    writeln!(
        summary,
        "availability: {} ± {}",
        num(est.availability),
        num(est.stderr_availability)
    )
    .unwrap();
    writeln!(summary, "avg_fidelity: {} ± {}", num(est.avg_fidelity), num(est.stderr_fidelity)).unwrap();
    if est.clamp_events > 0 {
        writeln!(summary, "warning: {} success probabilities clamped into [0, 1]", est.clamp_events).unwrap();
    }

    let levels_csv = if args.diagnostics {
        Some(diagnostics(&run, &sim_cfg, &mut summary)?)
    } else {
        None
    };
    Ok(SimulateOutput { csv, summary, levels_csv })
}

fn diagnostics(run: &SimRun, sim_cfg: &SimConfig, summary: &mut String) -> Result<String> {
    let conv = convergence_check(sim_cfg)?;
    writeln!(
        summary,
        "convergence (t_sim vs 2 t_sim, 1σ): availability {}, fidelity {}",
        if conv.availability_agrees { "agrees" } else { "differs" },
        if conv.fidelity_agrees { "agrees" } else { "differs" }
    )
    .unwrap();
    if sim_cfg.success_mode != SuccessMode::ConstantP {
        writeln!(summary, "level histogram and lifetime law need --mode constant; skipped").unwrap();
        return Ok(String::new());
    }
    let hist = run.level_histogram()?;
    let ss = steady_state(&sim_cfg.params);
    let mut csv = row(&["level".into(), "empirical".into(), "stationary".into()]);
    csv.push_str(&row(&["empty".into(), num(hist.empty), num(ss.pi_empty)]));
    for (i, freq) in hist.levels.iter().enumerate() {
        csv.push_str(&row(&[i.to_string(), num(*freq), num(ss.pi(i))]));
    }
    writeln!(summary, "level_tv_distance: {}", num(hist.tv_distance)).unwrap();
    match run.lifetime_fit() {
        Ok(fit) => writeln!(
            summary,
            "lifetime_ks: {} (1% critical {}, beta {}) {}",
            num(fit.ks_statistic),
            num(fit.critical_1pct),
            num(fit.beta),
            if fit.passes() { "pass" } else { "fail" }
        )
        .unwrap(),
        Err(e) => writeln!(summary, "lifetime_ks: n/a ({e})").unwrap(),
    }
    Ok(csv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FaultArg {
    LowerSlope,
    BellOrder,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::LowerSlope => Fault::LowerSlope,
            FaultArg::BellOrder => Fault::BellOrder,
        }
    }
}

/// Runs the oracle suite; the report is returned on success and carried by
/// the error on failure.
pub fn verify(fault: Option<FaultArg>) -> Result<String> {
    let report = run_suite(fault.map(Fault::from));
    let text: String = report.checks.iter().map(|c| format!("{c}\n")).collect();
    if report.passed() {
        Ok(text)
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        Err(CliError::Verify(format!("{}\n{text}", names.join(", "))))
    }
}
