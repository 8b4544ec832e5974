use std::path::PathBuf;

use clap::ValueEnum;
use rayon::prelude::*;

use hsbnet_core::optimizer::{
    benchmark_assign, evaluate_objective, solve_with, Assignment, BenchmarkScheme, IterationRecord,
};
use hsbnet_core::queueing::{analyze_ptq, merged_arrival_rate, scq_latency_raw, ArrivalSpec, DepartureSpec, VarianceModel};
use hsbnet_core::scenario::{generate_scenario, load_scenario, GenerationConfig, MobileUser, Scenario, SystemConfig};
use hsbnet_core::sim::{simulate_ptq, simulate_scq, SimConfig, SimEstimate, Slack};
use hsbnet_core::Mode;

use crate::args::{b2m_template, RunArgs};
use crate::output::{AssignmentRow, CdfRow, Row, TraceRow};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// SCQ latency, closed form vs simulation, over arrival rates.
    ValidateScq,
    /// PTQ loss and latency, Markov chain vs simulation, over bandwidths.
    ValidatePtq,
    /// Throughput of all schemes over the number of BSs.
    SweepBs,
    /// Throughput of all schemes over the number of MUs.
    SweepMu,
    /// Throughput of all schemes over the mean matching degree.
    SweepTau,
    /// Distribution of per-MU message rates.
    RateCdf,
    /// One scenario: metrics, assignment and convergence trace.
    SingleRun,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ValidateScq => "validate-scq",
            Experiment::ValidatePtq => "validate-ptq",
            Experiment::SweepBs => "sweep-bs",
            Experiment::SweepMu => "sweep-mu",
            Experiment::SweepTau => "sweep-tau",
            Experiment::RateCdf => "rate-cdf",
            Experiment::SingleRun => "single-run",
        }
    }

    fn is_validation(self) -> bool {
        matches!(self, Experiment::ValidateScq | Experiment::ValidatePtq)
    }

    fn sweep_var(self) -> &'static str {
        match self {
            Experiment::ValidateScq => "arrival_rate",
            Experiment::ValidatePtq => "bandwidth_mhz",
            Experiment::SweepBs => "num_bss",
            Experiment::SweepMu => "num_mus",
            Experiment::SweepTau => "mean_tau",
            Experiment::RateCdf | Experiment::SingleRun => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Desk,
    Full,
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub scenario: Option<Scenario>,
    pub generation: GenerationConfig,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub slots: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Scheme label of the joint optimizer in result files.
pub const PROPOSED: &str = "proposed";

impl ExperimentSpec {
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let e = args.experiment;
        if e.is_validation() && args.scenario.is_some() {
            return Err(CliError::Usage(format!("{} does not take --scenario", e.name())));
        }
        let scenario = args.scenario.as_ref().map(load_scenario).transpose()?;
        let (mus, bss) = match args.scale {
            Scale::Desk => (20, 3),
            Scale::Full => (200, 10),
        };
        let generation = GenerationConfig {
            num_users: args.mus.unwrap_or(mus),
            num_stations: args.bss.unwrap_or(bss),
            radius_m: args.radius.unwrap_or(GenerationConfig::default().radius_m),
            b2m: b2m_template(args.b2m),
            ..Default::default()
        };
        let grid = match &args.grid {
            Some(text) => parse_grid(text)?,
            None => default_grid(e, args.scale),
        };
        let trials = match (args.trials, e.is_validation(), &scenario) {
            (Some(t), ..) => t,
            (None, true, _) => 10,
            // A fixed scenario gives identical trials.
            (None, false, Some(_)) => 1,
            (None, false, None) => 20,
        };
        let slots = args.slots.unwrap_or(match args.scale {
            Scale::Desk => 100_000,
            Scale::Full => 1_000_000,
        });
        let spec = ExperimentSpec {
            experiment: e,
            scenario,
            generation,
            grid,
            trials,
            slots,
            seed: args.seed,
            out_dir: args.out.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.experiment;
        if self.trials < 1 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        if self.slots < 10 {
            return Err(CliError::Usage("--slots must be at least 10".into()));
        }
        if self.grid.is_empty() && !matches!(e, Experiment::RateCdf | Experiment::SingleRun) {
            return Err(CliError::Usage("grid is empty".into()));
        }
        let bad = |what: &str| Err(CliError::Usage(format!("{}: grid values must be {what}", e.name())));
        match e {
            Experiment::ValidateScq | Experiment::ValidatePtq => {
                if self.grid.iter().any(|v| !(*v > 0.0)) {
                    return bad("positive");
                }
            }
            Experiment::SweepBs | Experiment::SweepMu => {
                if self.grid.iter().any(|v| !(*v >= 1.0 && v.fract() == 0.0)) {
                    return bad("positive integers");
                }
                let available = match (&self.scenario, e) {
                    (Some(s), Experiment::SweepBs) => Some(s.num_stations()),
                    (Some(s), _) => Some(s.num_users()),
                    (None, _) => None,
                };
                if let Some(n) = available {
                    if self.grid.iter().any(|v| *v as usize > n) {
                        return bad(&format!("at most {n} for the given scenario"));
                    }
                }
            }
            Experiment::SweepTau => {
                if self.grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return bad("in [0, 1]");
                }
            }
            Experiment::RateCdf | Experiment::SingleRun => {}
        }
        self.generation.validate()?;
        Ok(())
    }
}

/// Parses `a,b,c` or `start:step:end` (inclusive).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("invalid grid value `{s}`")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if !(step > 0.0) || end < start {
                return Err(CliError::Usage(format!("invalid grid range `{text}`")));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| tidy(start + k as f64 * step)).collect())
        }
        [list] => list.split(',').filter(|s| !s.trim().is_empty()).map(num).collect(),
        _ => Err(CliError::Usage(format!("invalid grid `{text}`"))),
    }
}

/// Rounds away accumulated step error so grid labels print cleanly.
fn tidy(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

fn default_grid(e: Experiment, scale: Scale) -> Vec<f64> {
    let range = |a: f64, step: f64, n: usize| (0..n).map(|k| tidy(a + k as f64 * step)).collect::<Vec<_>>();
    match (e, scale) {
        (Experiment::ValidateScq, _) => range(750.0, 50.0, 7),
        (Experiment::ValidatePtq, _) => range(0.8, 0.1, 13),
        (Experiment::SweepBs, Scale::Desk) => range(2.0, 1.0, 3),
        (Experiment::SweepBs, Scale::Full) => range(8.0, 1.0, 6),
        (Experiment::SweepMu, Scale::Desk) => range(10.0, 5.0, 5),
        (Experiment::SweepMu, Scale::Full) => range(140.0, 20.0, 6),
        (Experiment::SweepTau, _) => range(0.6, 0.1, 5),
        (Experiment::RateCdf | Experiment::SingleRun, _) => Vec::new(),
    }
}

/// Stateless seed mixing (SplitMix64 finalizer) so that every grid point and
/// trial gets an independent, reproducible seed.
pub fn derive_seed(base: u64, point: u64, trial: u64) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    mix(base ^ mix(point.wrapping_mul(0x1_0000_0001) ^ mix(trial)))
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentResult {
    pub rows: Vec<Row>,
    pub cdf: Vec<CdfRow>,
    pub trace: Vec<TraceRow>,
    pub assignments: Vec<AssignmentRow>,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    match spec.experiment {
        Experiment::ValidateScq => Ok(validate_scq(spec)),
        Experiment::ValidatePtq => Ok(validate_ptq(spec)),
        Experiment::SweepBs | Experiment::SweepMu | Experiment::SweepTau => sweep(spec),
        Experiment::RateCdf => rate_cdf(spec),
        Experiment::SingleRun => single_run(spec),
    }
}

fn row(spec: &ExperimentSpec, series: &str, value: f64, scheme: &str, metric: &str, est: SimEstimate, flag: &str) -> Row {
    Row {
        experiment: spec.experiment.name().to_string(),
        series: series.to_string(),
        sweep_var: spec.experiment.sweep_var().to_string(),
        sweep_value: value,
        scheme: scheme.to_string(),
        metric: metric.to_string(),
        mean: est.mean,
        ci95: est.half_width_95,
        n: est.samples,
        flag: flag.to_string(),
    }
}

fn exact(value: f64) -> SimEstimate {
    SimEstimate { mean: value, half_width_95: 0.0, samples: 1 }
}

fn missing() -> SimEstimate {
    SimEstimate { mean: f64::NAN, half_width_95: f64::NAN, samples: 0 }
}

/// Default MU of the queue validations: 1000 packets/s, 1250 and 1000
/// packets/s coding rates.
fn reference_user(lambda: f64, tau: f64) -> MobileUser {
    let g = GenerationConfig::default();
    MobileUser {
        id: 0,
        position: [0.0, 0.0],
        arrival_rate: lambda,
        matching_degree: tau,
        mu_match: 1.0 / g.mean_match_time_s,
        mu_mismatch: 1.0 / g.mean_mismatch_time_s,
        min_rate: 0.0,
        transmit_power_dbm: g.transmit_power_dbm,
        beta_std: 0.0,
    }
}

const VALIDATION_TAUS_SCQ: [f64; 3] = [0.4, 0.7, 1.0];
const VALIDATION_TAUS_PTQ: [f64; 3] = [0.0, 0.5, 1.0];

fn validate_scq(spec: &ExperimentSpec) -> ExperimentResult {
    let jobs: Vec<(usize, usize)> = (0..VALIDATION_TAUS_SCQ.len())
        .flat_map(|s| (0..spec.grid.len()).map(move |p| (s, p)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(s, p)| {
            let tau = VALIDATION_TAUS_SCQ[s];
            let lambda = spec.grid[p];
            let series = format!("tau={tau}");
            let user = reference_user(lambda, tau);
            let analytic = scq_latency_raw(lambda, tau, user.mu_match, user.mu_mismatch, VarianceModel::Mixture);
            let cfg = SimConfig::new(spec.slots, spec.trials, derive_seed(spec.seed, p as u64, s as u64));
            match (analytic, simulate_scq(&user, &cfg)) {
                (Ok(a), Ok(sim)) => {
                    let a_ms = a.latency * 1e3;
                    let sim_ms = scale(sim, 1e3);
                    let flag = if sim_ms.contains(a_ms, 0.0) { "" } else { "outside-ci" };
                    vec![
                        row(spec, &series, lambda, "analytic", "latency_ms", exact(a_ms), ""),
                        row(spec, &series, lambda, "simulated", "latency_ms", sim_ms, flag),
                    ]
                }
                _ => vec![
                    row(spec, &series, lambda, "analytic", "latency_ms", missing(), "unstable"),
                    row(spec, &series, lambda, "simulated", "latency_ms", missing(), "unstable"),
                ],
            }
        })
        .collect::<Vec<_>>()
        .concat();
    ExperimentResult { rows, ..Default::default() }
}

fn scale(est: SimEstimate, factor: f64) -> SimEstimate {
    SimEstimate {
        mean: est.mean * factor,
        half_width_95: est.half_width_95 * factor,
        samples: est.samples,
    }
}

fn validate_ptq(spec: &ExperimentSpec) -> ExperimentResult {
    let sys = SystemConfig::default();
    let jobs: Vec<(usize, usize)> = (0..VALIDATION_TAUS_PTQ.len())
        .flat_map(|s| (0..spec.grid.len()).map(move |p| (s, p)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(s, p)| {
            let tau = VALIDATION_TAUS_PTQ[s];
            let z_mhz = spec.grid[p];
            let series = format!("tau={tau}");
            let user = reference_user(1000.0, tau);
            let rate = merged_arrival_rate(tau, user.mu_match, user.mu_mismatch);
            let departure = DepartureSpec {
                bandwidth_hz: z_mhz * 1e6,
                mean_sinr_db: 0.0,
                sinr_std_db: GenerationConfig::default().sinr_std_db,
                slot_length: sys.slot_length_s,
                packet_bits: sys.packet_bits,
            };
            let cfg = SimConfig::new(spec.slots, spec.trials, derive_seed(spec.seed, p as u64, s as u64));
            let outcome = ArrivalSpec::new(rate, sys.slot_length_s).and_then(|arrival| {
                let analytic = analyze_ptq(&arrival, &departure, sys.buffer_size)?;
                let sim = simulate_ptq(&arrival, &departure, sys.buffer_size, &cfg)?;
                Ok((analytic, sim))
            });
            match outcome {
                Ok((a, sim)) => {
                    let slack = Slack::default();
                    let loss_flag = if sim.loss_ratio.contains(a.loss_ratio, slack.loss) { "" } else { "outside-ci" };
                    let latency = scale(sim.latency, 1e3);
                    let latency_flag = if latency.contains(a.latency * 1e3, slack.latency * 1e3) { "" } else { "outside-ci" };
                    vec![
                        row(spec, &series, z_mhz, "analytic", "loss_ratio", exact(a.loss_ratio), ""),
                        row(spec, &series, z_mhz, "simulated", "loss_ratio", sim.loss_ratio, loss_flag),
                        row(spec, &series, z_mhz, "analytic", "latency_ms", exact(a.latency * 1e3), ""),
                        row(spec, &series, z_mhz, "simulated", "latency_ms", latency, latency_flag),
                    ]
                }
                Err(_) => ["loss_ratio", "latency_ms"]
                    .iter()
                    .flat_map(|m| {
                        [
                            row(spec, &series, z_mhz, "analytic", m, missing(), "error"),
                            row(spec, &series, z_mhz, "simulated", m, missing(), "error"),
                        ]
                    })
                    .collect(),
            }
        })
        .collect::<Vec<_>>()
        .concat();
    ExperimentResult { rows, ..Default::default() }
}

/// Outcome of one scheme on one scenario.
#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub scheme: &'static str,
    pub assignment: Assignment,
    pub rates: Vec<f64>,
    pub throughput: f64,
    pub unserved: usize,
    /// MUs whose latency, loss or minimum-rate constraint is violated.
    pub qos_violating: usize,
}

/// Runs the joint optimizer and the four benchmarks on `scenario`.
pub fn compare_schemes(scenario: &Scenario) -> Result<(Vec<SchemeOutcome>, Vec<IterationRecord>)> {
    let cfg = scenario.optimizer.clone().unwrap_or_default();
    let solution = solve_with(scenario, &cfg)?;
    let mut outcomes = vec![outcome(scenario, PROPOSED, solution.assignment)];
    for scheme in BenchmarkScheme::ALL {
        outcomes.push(outcome(scenario, scheme.id(), benchmark_assign(scenario, scheme, &cfg)));
    }
    Ok((outcomes, solution.trace))
}

fn outcome(scenario: &Scenario, scheme: &'static str, assignment: Assignment) -> SchemeOutcome {
    let eval = evaluate_objective(scenario, &assignment);
    SchemeOutcome {
        scheme,
        unserved: assignment.links.iter().filter(|l| l.is_none()).count(),
        qos_violating: eval.violating_users().len(),
        rates: eval.rates,
        throughput: eval.objective,
        assignment,
    }
}

const SCHEME_ORDER: [&str; 5] = [PROPOSED, "ms1-ba1", "ms1-ba2", "ms2-ba1", "ms2-ba2"];

/// Scenario of one trial before any sweep perturbation.
fn base_scenario(spec: &ExperimentSpec, point: usize, trial: usize, users: Option<usize>) -> Result<Scenario> {
    if let Some(s) = &spec.scenario {
        return Ok(s.clone());
    }
    let mut generation = spec.generation.clone();
    generation.seed = derive_seed(spec.seed, point as u64, trial as u64);
    if let Some(u) = users {
        generation.num_users = u;
    }
    if spec.experiment == Experiment::SweepBs {
        generation.num_stations = spec.grid.iter().fold(1.0f64, |a, b| a.max(*b)) as usize;
    }
    Ok(generate_scenario(&generation)?)
}

fn with_users(scenario: &Scenario, count: usize) -> Scenario {
    let mut s = scenario.clone();
    s.users.truncate(count);
    s.links.truncate(count);
    s
}

/// Scenario at one grid point. BS and matching-degree sweeps perturb a base
/// scenario shared by all points of a trial; MU sweeps regenerate per point.
fn sweep_scenario(spec: &ExperimentSpec, point: usize, trial: usize) -> Result<Scenario> {
    let value = spec.grid[point];
    match spec.experiment {
        Experiment::SweepBs => Ok(base_scenario(spec, 0, trial, None)?.with_stations(value as usize)?),
        Experiment::SweepTau => Ok(base_scenario(spec, 0, trial, None)?.with_mean_matching_degree(value)?),
        Experiment::SweepMu => {
            let u = value as usize;
            match &spec.scenario {
                Some(s) => Ok(with_users(s, u)),
                None => base_scenario(spec, point, trial, Some(u)),
            }
        }
        _ => unreachable!("not a sweep"),
    }
}

fn sweep(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let jobs: Vec<(usize, usize)> = (0..spec.grid.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let outcomes: Vec<Option<Vec<SchemeOutcome>>> = jobs
        .par_iter()
        .map(|&(p, t)| {
            let scenario = sweep_scenario(spec, p, t)?;
            Ok(compare_schemes(&scenario).ok().map(|(o, _)| o))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (p, &value) in spec.grid.iter().enumerate() {
        let trials: Vec<&Vec<SchemeOutcome>> = outcomes[p * spec.trials..(p + 1) * spec.trials]
            .iter()
            .flatten()
            .collect();
        let flag = match trials.len() {
            0 => "infeasible",
            n if n < spec.trials => "failed-trials",
            _ => "",
        };
        push_scheme_rows(spec, &mut rows, "all", value, &trials, flag);
    }
    Ok(ExperimentResult { rows, ..Default::default() })
}

fn push_scheme_rows(spec: &ExperimentSpec, rows: &mut Vec<Row>, series: &str, value: f64, trials: &[&Vec<SchemeOutcome>], flag: &str) {
    let metrics: [(&str, fn(&SchemeOutcome) -> f64); 3] = [
        ("throughput", |o| o.throughput),
        ("unserved", |o| o.unserved as f64),
        ("qos_violating", |o| o.qos_violating as f64),
    ];
    for (k, scheme) in SCHEME_ORDER.iter().enumerate() {
        for (metric, f) in metrics {
            let samples: Vec<f64> = trials.iter().map(|t| f(&t[k])).collect();
            let est = if samples.is_empty() { missing() } else { SimEstimate::from_samples(&samples) };
            rows.push(row(spec, series, value, scheme, metric, est, flag));
        }
    }
}

fn trial_scenario(spec: &ExperimentSpec, trial: usize) -> Result<Scenario> {
    base_scenario(spec, 0, trial, None)
}

fn rate_cdf(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let outcomes: Vec<Vec<SchemeOutcome>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| Ok(compare_schemes(&trial_scenario(spec, t)?)?.0))
        .collect::<Result<_>>()?;
    let mut cdf = Vec::new();
    for (k, scheme) in SCHEME_ORDER.iter().enumerate() {
        let mut points: Vec<(f64, usize, usize)> = outcomes
            .iter()
            .enumerate()
            .flat_map(|(t, o)| {
                let a = &o[k];
                a.rates
                    .iter()
                    .enumerate()
                    .filter(move |(i, _)| a.assignment.links[*i].is_some())
                    .map(move |(i, r)| (*r, t, i))
            })
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let n = points.len() as f64;
        for (rank, (rate, trial, mu)) in points.into_iter().enumerate() {
            cdf.push(CdfRow {
                scheme: scheme.to_string(),
                trial,
                mu,
                rate,
                cdf: (rank + 1) as f64 / n,
            });
        }
    }
    Ok(ExperimentResult { cdf, ..Default::default() })
}

fn single_run(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let scenario = trial_scenario(spec, 0)?;
    let (outcomes, trace) = compare_schemes(&scenario)?;
    let mut rows = Vec::new();
    let all: Vec<&Vec<SchemeOutcome>> = vec![&outcomes];
    push_scheme_rows(spec, &mut rows, "all", 0.0, &all, "");
    let trace = trace
        .iter()
        .map(|r| TraceRow {
            iteration: r.iteration,
            dual_value: r.dual_value,
            objective: r.objective,
            eta_max: r.eta.iter().copied().fold(0.0, f64::max),
            eta_change: r.eta_change,
            removals: r.removals,
        })
        .collect();
    let mut assignments = Vec::new();
    for o in &outcomes {
        for (i, link) in o.assignment.links.iter().enumerate() {
            let (bs, mode, z) = match *link {
                Some((j, mode)) => (Some(j), Some(mode), o.assignment.bandwidth[i][j]),
                None => (None, None, 0.0),
            };
            assignments.push(AssignmentRow {
                scheme: o.scheme.to_string(),
                mu: i,
                bs,
                mode: mode.map(|m| match m {
                    Mode::SemCom => "semcom".to_string(),
                    Mode::BitCom => "bitcom".to_string(),
                }),
                bandwidth_hz: z,
                rate: o.rates[i],
            });
        }
    }
    Ok(ExperimentResult { rows, trace, assignments, ..Default::default() })
}
