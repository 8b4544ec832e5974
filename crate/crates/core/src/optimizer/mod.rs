//! Joint user association, mode selection and bandwidth allocation.
//!
//! The pipeline is: per-link minimum bandwidths ([`compute_thresholds`]),
//! a Lagrangian dual loop over association and mode ([`solve_ua_ms`]) with
//! preference-list repair, then an exact per-BS bandwidth split
//! ([`allocate_bandwidth`]). [`benchmark_assign`] builds the baselines.

mod allocate;
mod benchmark;
mod dual;
mod evaluate;
mod thresholds;

pub use allocate::{allocate_bandwidth, allocate_station};
pub use benchmark::{benchmark_assign, water_filling, BandwidthScheme, BenchmarkScheme, ModeScheme};
pub use dual::{
    assign_best, compute_xi, dual_value, relaxed_objective, repair_feasibility, solve_ua_ms, threshold_loads,
    update_multipliers, DualState, IterationRecord, Link, PreferenceLists, ThresholdRates, UaMsSolution,
};
pub use evaluate::{evaluate_objective, Evaluation, Violation, ViolationKind};
pub use thresholds::{
    compute_thresholds, min_bandwidth_qos, min_bandwidth_rate, BandwidthThresholds, LinkThresholds, ModeThresholds,
    QosTarget,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::queueing::VarianceModel;
use crate::scenario::Scenario;
use crate::Mode;

/// Tuning knobs of the solver and the benchmark thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Upper bound `V` on dual iterations.
    pub max_iterations: usize,
    /// Step size `ε(l) = step_constant / l`.
    pub step_constant: f64,
    /// Stop once no multiplier moves by more than this.
    pub tolerance: f64,
    /// Bisection stops when the bracket is narrower than this, in Hz.
    pub bisection_resolution_hz: f64,
    /// Bisection upper bound as a multiple of the BS budget.
    pub bracket_factor: f64,
    /// MS-I picks SemCom above this matching degree.
    pub tau_threshold: f64,
    /// MS-II picks BitCom above this mean SINR.
    pub sinr_threshold_db: f64,
    pub variance_model: VarianceModel,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 1000,
            step_constant: 1e-6,
            tolerance: 1e-12,
            bisection_resolution_hz: 1e3,
            bracket_factor: 10.0,
            tau_threshold: 0.8,
            sinr_threshold_db: 6.0,
            variance_model: VarianceModel::Mixture,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::validation("optimizer.max_iterations", "must be at least 1"));
        }
        let positive = [
            ("optimizer.step_constant", self.step_constant),
            ("optimizer.bisection_resolution_hz", self.bisection_resolution_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::validation("optimizer.tolerance", "must be non-negative"));
        }
        if !(self.bracket_factor >= 1.0 && self.bracket_factor.is_finite()) {
            return Err(Error::validation("optimizer.bracket_factor", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.tau_threshold) {
            return Err(Error::validation("optimizer.tau_threshold", "must lie in [0, 1]"));
        }
        if !self.sinr_threshold_db.is_finite() {
            return Err(Error::validation("optimizer.sinr_threshold_db", "must be finite"));
        }
        Ok(())
    }
}

/// Association, mode and bandwidth of every MU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `(bs, mode)` per MU, `None` when unserved.
    pub links: Vec<Option<(usize, Mode)>>,
    /// U×J bandwidth in Hz.
    pub bandwidth: Vec<Vec<f64>>,
    pub unserved: Vec<usize>,
    /// Total message rate in msg/s.
    pub objective: f64,
}

impl Assignment {
    /// Builds an assignment with zero bandwidth everywhere.
    pub fn new(links: Vec<Option<(usize, Mode)>>, num_stations: usize) -> Self {
        let unserved = links
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_none())
            .map(|(i, _)| i)
            .collect();
        Assignment {
            bandwidth: vec![vec![0.0; num_stations]; links.len()],
            links,
            unserved,
            objective: 0.0,
        }
    }

    pub fn x(&self, mu: usize, bs: usize) -> bool {
        matches!(self.links[mu], Some((j, _)) if j == bs)
    }

    pub fn y(&self, mu: usize, bs: usize) -> bool {
        self.links[mu] == Some((bs, Mode::SemCom))
    }

    /// MUs associated with `bs`, ascending.
    pub fn users_of(&self, bs: usize) -> Vec<usize> {
        (0..self.links.len()).filter(|&i| self.x(i, bs)).collect()
    }
}

/// Output of [`solve`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub assignment: Assignment,
    pub thresholds: BandwidthThresholds,
    pub trace: Vec<IterationRecord>,
}

/// Runs the full pipeline with the scenario's optimizer block, or defaults.
pub fn solve(scenario: &Scenario) -> Result<Solution> {
    let cfg = scenario.optimizer.clone().unwrap_or_default();
    solve_with(scenario, &cfg)
}

pub fn solve_with(scenario: &Scenario, cfg: &OptimizerConfig) -> Result<Solution> {
    cfg.validate()?;
    let thresholds = compute_thresholds(scenario, cfg);
    let ua = solve_ua_ms(scenario, &thresholds, cfg);
    let mut assignment = Assignment::new(ua.links, scenario.num_stations());
    assignment.bandwidth = allocate_bandwidth(scenario, &assignment.links, &thresholds)?;
    assignment.objective = evaluate::throughput(scenario, &assignment).0;
    Ok(Solution {
        assignment,
        thresholds,
        trace: ua.trace,
    })
}
