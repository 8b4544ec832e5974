use serde::{Deserialize, Serialize};

use super::Assignment;
use crate::queueing::{link_metrics_with, mean_message_rate};
use crate::scenario::Scenario;

/// Relative slack when comparing against budgets.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Total latency above the budget, seconds.
    Latency { value: f64, limit: f64 },
    Loss { value: f64, limit: f64 },
    /// Mean message rate below the minimum, msg/s.
    MinRate { value: f64, limit: f64 },
    /// Bandwidth granted on a BS the MU is not associated with, Hz.
    SingleBs { bandwidth: f64 },
    /// Total bandwidth above the BS budget, Hz.
    Bandwidth { value: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// `None` for BS-level violations.
    pub mu: Option<usize>,
    pub bs: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// msg/s over served MUs.
    pub objective: f64,
    /// msg/s per MU, zero when unserved.
    pub rates: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// MUs with at least one link-level violation, ascending.
    pub fn violating_users(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.violations.iter().filter_map(|v| v.mu).collect();
        v.dedup();
        v
    }
}

pub(crate) fn throughput(scenario: &Scenario, a: &Assignment) -> (f64, Vec<f64>) {
    let rates: Vec<f64> = a
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| match *l {
            Some((j, mode)) => mean_message_rate(&scenario.users[i], scenario.link(i, j), a.bandwidth[i][j], mode),
            None => 0.0,
        })
        .collect();
    (rates.iter().sum(), rates)
}

/// Total message rate and every violated constraint of `a`.
pub fn evaluate_objective(scenario: &Scenario, a: &Assignment) -> Evaluation {
    let sys = &scenario.system;
    let model = scenario.optimizer.clone().unwrap_or_default().variance_model;
    let (objective, rates) = throughput(scenario, a);
    let mut violations = Vec::new();
    for (i, link) in a.links.iter().enumerate() {
        for (j, &z) in a.bandwidth[i].iter().enumerate() {
            if z > 0.0 && !matches!(*link, Some((b, _)) if b == j) {
                violations.push(Violation { mu: Some(i), bs: j, kind: ViolationKind::SingleBs { bandwidth: z } });
            }
        }
        let Some((j, mode)) = *link else { continue };
        let user = &scenario.users[i];
        let (latency, loss) = match link_metrics_with(user, scenario.link(i, j), a.bandwidth[i][j], mode, sys, model) {
            Ok(m) => (m.total_latency, m.loss_ratio),
            Err(_) => (f64::INFINITY, 1.0),
        };
        let mut push = |kind| violations.push(Violation { mu: Some(i), bs: j, kind });
        if !(latency <= sys.latency_budget_s * (1.0 + SLACK)) {
            push(ViolationKind::Latency { value: latency, limit: sys.latency_budget_s });
        }
        if !(loss <= sys.loss_budget * (1.0 + SLACK)) {
            push(ViolationKind::Loss { value: loss, limit: sys.loss_budget });
        }
        if rates[i] < user.min_rate * (1.0 - SLACK) {
            push(ViolationKind::MinRate { value: rates[i], limit: user.min_rate });
        }
    }
    for (j, bs) in scenario.stations.iter().enumerate() {
        let used: f64 = a.bandwidth.iter().map(|row| row[j]).sum();
        if used > bs.bandwidth_hz * (1.0 + SLACK) {
            violations.push(Violation { mu: None, bs: j, kind: ViolationKind::Bandwidth { value: used, limit: bs.bandwidth_hz } });
        }
    }
    Evaluation { objective, rates, violations }
}
