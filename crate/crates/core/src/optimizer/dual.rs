use serde::{Deserialize, Serialize};

use super::thresholds::BandwidthThresholds;
use super::OptimizerConfig;
use crate::queueing::mean_message_rate;
use crate::scenario::Scenario;
use crate::Mode;

/// Choice of one MU: `(bs, mode)`, or `None` when unserved.
pub type Link = Option<(usize, Mode)>;

/// Extended option index: `bs` for SemCom, `J + bs` for BitCom.
fn option_index(bs: usize, mode: Mode, num_stations: usize) -> usize {
    match mode {
        Mode::SemCom => bs,
        Mode::BitCom => num_stations + bs,
    }
}

fn decode(option: usize, num_stations: usize) -> (usize, Mode) {
    if option < num_stations {
        (option, Mode::SemCom)
    } else {
        (option - num_stations, Mode::BitCom)
    }
}

/// Options still open to each MU, as U rows over the 2J extended indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceLists {
    allowed: Vec<Vec<bool>>,
}

impl PreferenceLists {
    pub fn full(num_users: usize, num_stations: usize) -> Self {
        PreferenceLists {
            allowed: vec![vec![true; 2 * num_stations]; num_users],
        }
    }

    pub fn remove(&mut self, mu: usize, bs: usize, mode: Mode) {
        let j = self.allowed[mu].len() / 2;
        self.allowed[mu][option_index(bs, mode, j)] = false;
    }

    pub fn contains(&self, mu: usize, bs: usize, mode: Mode) -> bool {
        let j = self.allowed[mu].len() / 2;
        self.allowed[mu][option_index(bs, mode, j)]
    }

    pub fn total_len(&self) -> usize {
        self.allowed.iter().flatten().filter(|&&a| a).count()
    }
}

/// Message rates at the threshold bandwidths, `[mu][bs]`. Infeasible
/// entries are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRates {
    pub semcom: Vec<Vec<f64>>,
    pub bitcom: Vec<Vec<f64>>,
}

impl ThresholdRates {
    pub fn new(scenario: &Scenario, thresholds: &BandwidthThresholds) -> Self {
        let rates = |mode: Mode| -> Vec<Vec<f64>> {
            (0..scenario.num_users())
                .map(|i| {
                    (0..scenario.num_stations())
                        .map(|j| {
                            let z = thresholds.z_th(i, j, mode);
                            if z.is_finite() {
                                mean_message_rate(&scenario.users[i], scenario.link(i, j), z, mode)
                            } else {
                                f64::NAN
                            }
                        })
                        .collect()
                })
                .collect()
        };
        ThresholdRates {
            semcom: rates(Mode::SemCom),
            bitcom: rates(Mode::BitCom),
        }
    }

    pub fn get(&self, mu: usize, bs: usize, mode: Mode) -> f64 {
        match mode {
            Mode::SemCom => self.semcom[mu][bs],
            Mode::BitCom => self.bitcom[mu][bs],
        }
    }
}

/// ξ over the extended index set: `rate − η_j z_th`, `−∞` where the
/// threshold is infinite.
pub fn compute_xi(thresholds: &BandwidthThresholds, rates: &ThresholdRates, eta: &[f64]) -> Vec<Vec<f64>> {
    let num_stations = thresholds.num_stations();
    (0..thresholds.num_users())
        .map(|i| {
            (0..2 * num_stations)
                .map(|jp| {
                    let (j, mode) = decode(jp, num_stations);
                    let z = thresholds.z_th(i, j, mode);
                    if z.is_finite() {
                        rates.get(i, j, mode) - eta[j] * z
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect()
        })
        .collect()
}

fn argmax_row(row: &[f64], allowed: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (jp, (&v, &ok)) in row.iter().zip(allowed).enumerate() {
        if !ok || v == f64::NEG_INFINITY || v.is_nan() {
            continue;
        }
        if best.is_none_or(|b| v > row[b]) {
            best = Some(jp);
        }
    }
    best
}

/// Per-MU argmax of ξ over its open options, lowest index on ties.
pub fn assign_best(xi: &[Vec<f64>], lists: &PreferenceLists) -> Vec<Link> {
    xi.iter()
        .zip(&lists.allowed)
        .map(|(row, allowed)| argmax_row(row, allowed).map(|jp| decode(jp, row.len() / 2)))
        .collect()
}

/// Threshold bandwidth demanded at each BS by `links`.
pub fn threshold_loads(links: &[Link], thresholds: &BandwidthThresholds, num_stations: usize) -> Vec<f64> {
    let mut load = vec![0.0; num_stations];
    for (i, link) in links.iter().enumerate() {
        if let Some((j, mode)) = *link {
            load[j] += thresholds.z_th(i, j, mode);
        }
    }
    load
}

/// Sum of threshold message rates over served MUs.
pub fn relaxed_objective(links: &[Link], rates: &ThresholdRates) -> f64 {
    links
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|(j, mode)| rates.get(i, j, mode)))
        .sum()
}

/// Lagrangian dual function `H(η) = Σ_i max ξ_i + Σ_j η_j Z_j`.
pub fn dual_value(xi: &[Vec<f64>], eta: &[f64], budgets: &[f64]) -> f64 {
    let inner: f64 = xi
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .filter(|v| v.is_finite())
        .sum();
    inner + eta.iter().zip(budgets).map(|(e, z)| e * z).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub eta: Vec<f64>,
    /// Index `l` of the next update, starting at 1.
    pub iteration: usize,
    pub history: Vec<f64>,
}

impl DualState {
    pub fn new(num_stations: usize) -> Self {
        DualState {
            eta: vec![0.0; num_stations],
            iteration: 1,
            history: Vec::new(),
        }
    }

    /// `ε(l) = c / l`.
    pub fn step(&self, step_constant: f64) -> f64 {
        step_constant / self.iteration as f64
    }
}

/// Projected subgradient step `η ← max(η − ε(l)(Z − load), 0)`.
pub fn update_multipliers(
    state: &DualState,
    links: &[Link],
    thresholds: &BandwidthThresholds,
    budgets: &[f64],
    step_constant: f64,
) -> DualState {
    let load = threshold_loads(links, thresholds, budgets.len());
    let eps = state.step(step_constant);
    let eta = state
        .eta
        .iter()
        .zip(budgets.iter().zip(&load))
        .map(|(e, (z, l))| (e - eps * (z - l)).max(0.0))
        .collect();
    DualState {
        eta,
        iteration: state.iteration + 1,
        history: state.history.clone(),
    }
}

/// Evicts MUs from overloaded BSs until every budget holds. The victim is
/// the MU with the largest threshold demand (lowest index on ties); its
/// current option leaves its list and it re-picks among the rest. Returns
/// the repaired choices and the number of removals.
pub fn repair_feasibility(
    links: &[Link],
    thresholds: &BandwidthThresholds,
    xi: &[Vec<f64>],
    budgets: &[f64],
) -> (Vec<Link>, usize) {
    let num_stations = budgets.len();
    let mut links = links.to_vec();
    let mut lists = PreferenceLists::full(links.len(), num_stations);
    let mut removals = 0;
    loop {
        let load = threshold_loads(&links, thresholds, num_stations);
        let Some(bs) = (0..num_stations).find(|&j| load[j] > budgets[j]) else {
            break;
        };
        let mut victim: Option<(usize, f64)> = None;
        for (i, link) in links.iter().enumerate() {
            if let Some((j, mode)) = *link {
                let demand = thresholds.z_th(i, j, mode);
                if j == bs && victim.is_none_or(|(_, d)| demand > d) {
                    victim = Some((i, demand));
                }
            }
        }
        let (i, _) = victim.expect("overloaded BS has users");
        let (j, mode) = links[i].expect("victim is served");
        lists.remove(i, j, mode);
        removals += 1;
        links[i] = argmax_row(&xi[i], &lists.allowed[i]).map(|jp| decode(jp, num_stations));
    }
    (links, removals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub eta: Vec<f64>,
    pub dual_value: f64,
    /// Relaxed objective of the repaired choice.
    pub objective: f64,
    /// Largest multiplier change caused by this iteration's update.
    pub eta_change: f64,
    pub removals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UaMsSolution {
    pub links: Vec<Link>,
    /// Relaxed objective of `links`.
    pub objective: f64,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
}

/// Alternates argmax, repair and multiplier updates. Multipliers follow the
/// unrepaired argmax; the best repaired iterate is returned.
pub fn solve_ua_ms(scenario: &Scenario, thresholds: &BandwidthThresholds, cfg: &OptimizerConfig) -> UaMsSolution {
    let budgets: Vec<f64> = scenario.stations.iter().map(|s| s.bandwidth_hz).collect();
    let rates = ThresholdRates::new(scenario, thresholds);
    let full = PreferenceLists::full(scenario.num_users(), scenario.num_stations());
    let mut state = DualState::new(scenario.num_stations());
    let mut best: Option<(Vec<Link>, f64)> = None;
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        let xi = compute_xi(thresholds, &rates, &state.eta);
        let raw = assign_best(&xi, &full);
        let (repaired, removals) = repair_feasibility(&raw, thresholds, &xi, &budgets);
        let objective = relaxed_objective(&repaired, &rates);
        if best.as_ref().is_none_or(|(_, b)| objective > *b) {
            best = Some((repaired, objective));
        }
        let h = dual_value(&xi, &state.eta, &budgets);
        let mut next = update_multipliers(&state, &raw, thresholds, &budgets, cfg.step_constant);
        next.history.push(h);
        let change = next
            .eta
            .iter()
            .zip(&state.eta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        trace.push(IterationRecord {
            iteration: state.iteration,
            eta: state.eta.clone(),
            dual_value: h,
            objective,
            eta_change: change,
            removals,
        });
        state = next;
        if change <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    let (links, objective) = best.expect("at least one iteration");
    UaMsSolution {
        links,
        objective,
        trace,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_index_roundtrip() {
        for j in 0..3 {
            for mode in Mode::ALL {
                assert_eq!(decode(option_index(j, mode, 3), 3), (j, mode));
            }
        }
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax_row(&[1.0, 3.0, 3.0], &[true; 3]), Some(1));
        assert_eq!(argmax_row(&[f64::NEG_INFINITY; 2], &[true; 2]), None);
        assert_eq!(argmax_row(&[5.0, 1.0], &[false, true]), Some(1));
    }
}
