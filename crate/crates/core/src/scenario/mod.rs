//! Network snapshots: users, base stations, per-link channel statistics and
//! B2M functions.

mod b2m;
mod generate;
mod io;

pub use b2m::B2mFunction;
pub use generate::{generate_scenario, mean_sinr_db, path_loss_db, B2mTemplate, GenerationConfig};
pub use io::{load_scenario, parse_scenario, save_scenario, scenario_to_json};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;

/// System-wide constants shared by every link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Slot duration `T` in seconds.
    pub slot_length_s: f64,
    /// Packet size `L` in bits.
    pub packet_bits: f64,
    /// PTQ buffer capacity `F` in packets.
    pub buffer_size: usize,
    /// Latency budget in seconds.
    pub latency_budget_s: f64,
    /// Packet loss budget, a ratio in (0, 1).
    pub loss_budget: f64,
    /// Simulation horizon in slots.
    pub num_slots: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            slot_length_s: 1e-3,
            packet_bits: 800.0,
            buffer_size: 20,
            latency_budget_s: 20e-3,
            loss_budget: 0.01,
            num_slots: 1_000_000,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        positive("system.slot_length_s", self.slot_length_s)?;
        positive("system.packet_bits", self.packet_bits)?;
        if self.buffer_size < 1 {
            return Err(Error::validation("system.buffer_size", "must be at least 1"));
        }
        positive("system.latency_budget_s", self.latency_budget_s)?;
        if !(self.loss_budget > 0.0 && self.loss_budget < 1.0) {
            return Err(Error::validation(
                "system.loss_budget",
                format!("must lie in (0, 1), got {}", self.loss_budget),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobileUser {
    pub id: usize,
    /// Position in meters.
    pub position: [f64; 2],
    /// Packet generation rate `λ` in packets/s.
    pub arrival_rate: f64,
    /// Mean knowledge-matching degree `τ`.
    pub matching_degree: f64,
    /// Semantic-coding rate of knowledge-matching packets, packets/s.
    pub mu_match: f64,
    /// Semantic-coding rate of knowledge-mismatching packets, packets/s.
    pub mu_mismatch: f64,
    /// Minimum message rate in msg/s.
    pub min_rate: f64,
    pub transmit_power_dbm: f64,
    /// Standard deviation of the per-slot matching degree around `τ`.
    pub beta_std: f64,
}

impl MobileUser {
    pub fn validate(&self, idx: usize) -> Result<()> {
        let f = |name: &str| format!("users[{idx}].{name}");
        positive(&f("arrival_rate"), self.arrival_rate)?;
        if !(0.0..=1.0).contains(&self.matching_degree) {
            return Err(Error::validation(f("matching_degree"), "must lie in [0, 1]"));
        }
        positive(&f("mu_mismatch"), self.mu_mismatch)?;
        if !(self.mu_match > self.mu_mismatch) {
            return Err(Error::validation(
                f("mu_match"),
                format!(
                    "must exceed mu_mismatch ({} <= {})",
                    self.mu_match, self.mu_mismatch
                ),
            ));
        }
        if !(self.min_rate >= 0.0) {
            return Err(Error::validation(f("min_rate"), "must be non-negative"));
        }
        finite(&f("transmit_power_dbm"), self.transmit_power_dbm)?;
        if !(self.beta_std >= 0.0) {
            return Err(Error::validation(f("beta_std"), "must be non-negative"));
        }
        finite(&f("position"), self.position[0])?;
        finite(&f("position"), self.position[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseStation {
    pub id: usize,
    pub position: [f64; 2],
    /// Bandwidth budget `Z` in Hz.
    pub bandwidth_hz: f64,
}

/// Channel and transformation statistics of one (MU, BS) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkModel {
    pub mu_id: usize,
    pub bs_id: usize,
    /// Mean SINR in dB. Per-slot SINR is Gaussian in the dB domain.
    pub mean_sinr_db: f64,
    pub sinr_std_db: f64,
    pub b2m: B2mFunction,
    /// BitCom message-per-bit coefficient `ρ`.
    pub rho: f64,
}

impl LinkModel {
    /// Mean SINR on the linear scale.
    pub fn mean_sinr_linear(&self) -> f64 {
        10f64.powf(self.mean_sinr_db / 10.0)
    }

    /// Spectral efficiency `log2(1 + γ̄)` at the mean SINR, bit/s per Hz.
    pub fn spectral_efficiency(&self) -> f64 {
        self.mean_sinr_linear().ln_1p() / std::f64::consts::LN_2
    }

    fn validate(&self, i: usize, j: usize) -> Result<()> {
        let f = |name: &str| format!("links[{i}][{j}].{name}");
        finite(&f("mean_sinr_db"), self.mean_sinr_db)?;
        if !(self.sinr_std_db >= 0.0 && self.sinr_std_db.is_finite()) {
            return Err(Error::validation(f("sinr_std_db"), "must be finite and non-negative"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::validation(f("rho"), format!("must lie in (0, 1), got {}", self.rho)));
        }
        self.b2m.validate().map_err(|reason| Error::validation(f("b2m"), reason))
    }
}

/// Immutable network snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub system: SystemConfig,
    pub users: Vec<MobileUser>,
    pub stations: Vec<BaseStation>,
    /// `links[i][j]` describes MU `i` towards BS `j`.
    pub links: Vec<Vec<LinkModel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerConfig>,
}

impl Scenario {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn link(&self, mu: usize, bs: usize) -> &LinkModel {
        &self.links[mu][bs]
    }

    /// Copy keeping only the first `count` BSs. Mean SINRs are unaffected
    /// because interference is counted per receiving BS.
    pub fn with_stations(&self, count: usize) -> Result<Scenario> {
        if count == 0 || count > self.num_stations() {
            return Err(Error::Config(format!(
                "station count must lie in 1..={}, got {count}",
                self.num_stations()
            )));
        }
        let mut s = self.clone();
        s.stations.truncate(count);
        for row in &mut s.links {
            row.truncate(count);
        }
        Ok(s)
    }

    /// Copy with every matching degree shifted by a common offset and
    /// clamped to [0, 1], the offset chosen so the mean equals `target`.
    pub fn with_mean_matching_degree(&self, target: f64) -> Result<Scenario> {
        if !(0.0..=1.0).contains(&target) || self.users.is_empty() {
            return Err(Error::Config(format!("mean matching degree must lie in [0, 1], got {target}")));
        }
        let mean_at = |shift: f64| {
            self.users.iter().map(|u| (u.matching_degree + shift).clamp(0.0, 1.0)).sum::<f64>() / self.users.len() as f64
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mean_at(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut s = self.clone();
        for u in &mut s.users {
            u.matching_degree = (u.matching_degree + hi).clamp(0.0, 1.0);
        }
        Ok(s)
    }

    /// Checks every type invariant, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        for (i, u) in self.users.iter().enumerate() {
            u.validate(i)?;
        }
        for (j, s) in self.stations.iter().enumerate() {
            positive(&format!("stations[{j}].bandwidth_hz"), s.bandwidth_hz)?;
        }
        if self.links.len() != self.users.len() {
            return Err(Error::validation(
                "links",
                format!("expected {} rows, found {}", self.users.len(), self.links.len()),
            ));
        }
        for (i, row) in self.links.iter().enumerate() {
            if row.len() != self.stations.len() {
                return Err(Error::validation(
                    format!("links[{i}]"),
                    format!("expected {} entries, found {}", self.stations.len(), row.len()),
                ));
            }
            for (j, link) in row.iter().enumerate() {
                if link.mu_id != self.users[i].id || link.bs_id != self.stations[j].id {
                    return Err(Error::validation(
                        format!("links[{i}][{j}]"),
                        format!(
                            "expected pair ({}, {}), found ({}, {})",
                            self.users[i].id, self.stations[j].id, link.mu_id, link.bs_id
                        ),
                    ));
                }
                link.validate(i, j)?;
            }
        }
        if let Some(opt) = &self.optimizer {
            opt.validate()?;
        }
        Ok(())
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "must be finite"))
    }
}
