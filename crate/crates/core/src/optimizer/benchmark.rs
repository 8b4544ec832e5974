use serde::{Deserialize, Serialize};

use super::{evaluate, Assignment, OptimizerConfig};
use crate::scenario::Scenario;
use crate::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeScheme {
    /// MS-I: SemCom iff the matching degree exceeds the threshold.
    MatchingDegree,
    /// MS-II: BitCom iff the mean SINR exceeds the threshold.
    Sinr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BandwidthScheme {
    /// BA-I
    WaterFilling,
    /// BA-II
    Even,
}

/// A baseline: max-SINR association plus a mode rule and a bandwidth rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BenchmarkScheme {
    pub mode: ModeScheme,
    pub bandwidth: BandwidthScheme,
}

impl BenchmarkScheme {
    pub const ALL: [BenchmarkScheme; 4] = [
        BenchmarkScheme { mode: ModeScheme::MatchingDegree, bandwidth: BandwidthScheme::WaterFilling },
        BenchmarkScheme { mode: ModeScheme::MatchingDegree, bandwidth: BandwidthScheme::Even },
        BenchmarkScheme { mode: ModeScheme::Sinr, bandwidth: BandwidthScheme::WaterFilling },
        BenchmarkScheme { mode: ModeScheme::Sinr, bandwidth: BandwidthScheme::Even },
    ];

    /// Short identifier such as `ms1-ba2`.
    pub fn id(&self) -> &'static str {
        match (self.mode, self.bandwidth) {
            (ModeScheme::MatchingDegree, BandwidthScheme::WaterFilling) => "ms1-ba1",
            (ModeScheme::MatchingDegree, BandwidthScheme::Even) => "ms1-ba2",
            (ModeScheme::Sinr, BandwidthScheme::WaterFilling) => "ms2-ba1",
            (ModeScheme::Sinr, BandwidthScheme::Even) => "ms2-ba2",
        }
    }
}

/// Water-filling of `budget` over channels with linear gains `gains`.
/// Floor levels are proportional to `1/g` and scaled to sum to the budget;
/// each channel receives `(w − h_i)^+` with the level `w` set so the shares
/// sum to `budget`.
pub fn water_filling(budget: f64, gains: &[f64]) -> Vec<f64> {
    if gains.is_empty() {
        return Vec::new();
    }
    let inv: Vec<f64> = gains.iter().map(|g| 1.0 / g).collect();
    let scale = budget / inv.iter().sum::<f64>();
    let heights: Vec<f64> = inv.iter().map(|v| v * scale).collect();
    let mut sorted = heights.clone();
    sorted.sort_by(f64::total_cmp);
    let mut level = 0.0;
    let mut prefix = 0.0;
    for (k, h) in sorted.iter().enumerate() {
        prefix += h;
        let candidate = (budget + prefix) / (k + 1) as f64;
        if k + 1 == sorted.len() || candidate <= sorted[k + 1] {
            level = candidate;
            break;
        }
    }
    heights.iter().map(|h| (level - h).max(0.0)).collect()
}

/// Builds a baseline assignment. QoS is not enforced; every MU is served.
pub fn benchmark_assign(scenario: &Scenario, scheme: BenchmarkScheme, cfg: &OptimizerConfig) -> Assignment {
    let links = scenario
        .links
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut best = 0;
            for (j, l) in row.iter().enumerate() {
                if l.mean_sinr_db > row[best].mean_sinr_db {
                    best = j;
                }
            }
            let mode = match scheme.mode {
                ModeScheme::MatchingDegree => {
                    if scenario.users[i].matching_degree > cfg.tau_threshold {
                        Mode::SemCom
                    } else {
                        Mode::BitCom
                    }
                }
                ModeScheme::Sinr => {
                    if row[best].mean_sinr_db > cfg.sinr_threshold_db {
                        Mode::BitCom
                    } else {
                        Mode::SemCom
                    }
                }
            };
            Some((best, mode))
        })
        .collect();
    let mut a = Assignment::new(links, scenario.num_stations());
    for j in 0..scenario.num_stations() {
        let users = a.users_of(j);
        let budget = scenario.stations[j].bandwidth_hz;
        let shares = match scheme.bandwidth {
            BandwidthScheme::Even => vec![budget / users.len().max(1) as f64; users.len()],
            BandwidthScheme::WaterFilling => {
                let gains: Vec<f64> = users.iter().map(|&i| scenario.link(i, j).mean_sinr_linear()).collect();
                water_filling(budget, &gains)
            }
        };
        for (i, z) in users.into_iter().zip(shares) {
            a.bandwidth[i][j] = z;
        }
    }
    a.objective = evaluate::throughput(scenario, &a).0;
    a
}
