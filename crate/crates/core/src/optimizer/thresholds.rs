use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OptimizerConfig;
use crate::queueing::{link_metrics_with, scq_latency, VarianceModel};
use crate::scenario::{LinkModel, MobileUser, Scenario, SystemConfig};
use crate::Mode;

/// Minimum bandwidths (Hz) of one link in one mode. `+∞` marks a
/// requirement that cannot be met.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeThresholds {
    pub rate: f64,
    pub latency: f64,
    pub loss: f64,
}

impl ModeThresholds {
    /// The binding requirement: the largest of the three.
    pub fn threshold(&self) -> f64 {
        self.rate.max(self.latency).max(self.loss)
    }

    pub fn is_feasible(&self) -> bool {
        self.threshold().is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkThresholds {
    pub semcom: ModeThresholds,
    pub bitcom: ModeThresholds,
}

impl LinkThresholds {
    pub fn get(&self, mode: Mode) -> &ModeThresholds {
        match mode {
            Mode::SemCom => &self.semcom,
            Mode::BitCom => &self.bitcom,
        }
    }
}

/// Per-link thresholds, indexed `[mu][bs]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthThresholds {
    pub links: Vec<Vec<LinkThresholds>>,
}

impl BandwidthThresholds {
    pub fn z_th(&self, mu: usize, bs: usize, mode: Mode) -> f64 {
        self.links[mu][bs].get(mode).threshold()
    }

    pub fn num_users(&self) -> usize {
        self.links.len()
    }

    pub fn num_stations(&self) -> usize {
        self.links.first().map_or(0, Vec::len)
    }
}

/// QoS requirement used by [`min_bandwidth_qos`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QosTarget {
    /// Total latency at most this many seconds.
    Latency(f64),
    /// Loss ratio at most this value.
    Loss(f64),
}

/// Bandwidth at which the mean message rate reaches the MU's minimum rate.
pub fn min_bandwidth_rate(user: &MobileUser, link: &LinkModel, mode: Mode) -> f64 {
    if user.min_rate == 0.0 {
        return 0.0;
    }
    let se = link.spectral_efficiency();
    match mode {
        Mode::SemCom => {
            if user.matching_degree <= 0.0 {
                return f64::INFINITY;
            }
            match link.b2m.invert(user.min_rate / user.matching_degree) {
                Ok(bits) => bits / se,
                Err(_) => f64::INFINITY,
            }
        }
        Mode::BitCom => user.min_rate / (link.rho * se),
    }
}

/// Smallest bandwidth in `[0, z_hi]` meeting `target`, to within
/// `resolution` Hz, found by bisection. Metrics are non-increasing in the
/// bandwidth, so the bracket `(violating, satisfying)` shrinks monotonically.
/// Returns `+∞` when `z_hi` does not suffice or when the SCQ alone already
/// breaks the latency budget.
#[allow(clippy::too_many_arguments)]
pub fn min_bandwidth_qos(
    user: &MobileUser,
    link: &LinkModel,
    mode: Mode,
    target: QosTarget,
    sys: &SystemConfig,
    z_hi: f64,
    resolution: f64,
    model: VarianceModel,
) -> f64 {
    if mode == Mode::SemCom {
        match scq_latency(user, model) {
            Err(_) => return f64::INFINITY,
            Ok(scq) => {
                if let QosTarget::Latency(budget) = target {
                    if scq.latency > budget {
                        return f64::INFINITY;
                    }
                }
            }
        }
    }
    // Value of the constrained metric; failures count as violations.
    let metric = |z: f64| -> f64 {
        match link_metrics_with(user, link, z, mode, sys, model) {
            Ok(m) => match target {
                QosTarget::Latency(_) => m.total_latency,
                QosTarget::Loss(_) => m.loss_ratio,
            },
            Err(_) => f64::INFINITY,
        }
    };
    let limit = match target {
        QosTarget::Latency(v) | QosTarget::Loss(v) => v,
    };
    let mut hi = z_hi;
    let mut m_hi = metric(hi);
    if !(m_hi <= limit) {
        return f64::INFINITY;
    }
    let mut lo = 0.0;
    let mut m_lo = metric(lo);
    if m_lo <= limit {
        return lo;
    }
    while hi - lo > resolution {
        debug_assert!(m_lo >= m_hi - 1e-9, "metric increased with bandwidth: {m_lo} -> {m_hi}");
        let mid = 0.5 * (lo + hi);
        let m = metric(mid);
        if m <= limit {
            hi = mid;
            m_hi = m;
        } else {
            lo = mid;
            m_lo = m;
        }
    }
    hi
}

fn mode_thresholds(
    user: &MobileUser,
    link: &LinkModel,
    mode: Mode,
    sys: &SystemConfig,
    z_hi: f64,
    cfg: &OptimizerConfig,
) -> ModeThresholds {
    let qos = |target| min_bandwidth_qos(user, link, mode, target, sys, z_hi, cfg.bisection_resolution_hz, cfg.variance_model);
    ModeThresholds {
        rate: min_bandwidth_rate(user, link, mode),
        latency: qos(QosTarget::Latency(sys.latency_budget_s)),
        loss: qos(QosTarget::Loss(sys.loss_budget)),
    }
}

/// Thresholds of every (MU, BS, mode) triple, evaluated in parallel.
pub fn compute_thresholds(scenario: &Scenario, cfg: &OptimizerConfig) -> BandwidthThresholds {
    let j_count = scenario.num_stations();
    let pairs: Vec<(usize, usize)> = (0..scenario.num_users())
        .flat_map(|i| (0..j_count).map(move |j| (i, j)))
        .collect();
    let flat: Vec<LinkThresholds> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let user = &scenario.users[i];
            let link = scenario.link(i, j);
            let z_hi = cfg.bracket_factor * scenario.stations[j].bandwidth_hz;
            LinkThresholds {
                semcom: mode_thresholds(user, link, Mode::SemCom, &scenario.system, z_hi, cfg),
                bitcom: mode_thresholds(user, link, Mode::BitCom, &scenario.system, z_hi, cfg),
            }
        })
        .collect();
    BandwidthThresholds {
        links: flat.chunks(j_count.max(1)).map(<[_]>::to_vec).collect(),
    }
}
