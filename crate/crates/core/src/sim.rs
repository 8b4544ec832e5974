//! Monte Carlo counterparts of the analytic queue models.
//!
//! Replication `r` draws from ChaCha8 stream `r` of the master seed (SCQ
//! runs use stream `r + 2^32`), so any replication can be rerun in
//! isolation and results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::queueing::{self, departure_spec, ptq_arrival_rate, ArrivalSpec, DepartureSpec, VarianceModel};
use crate::scenario::{LinkModel, MobileUser, SystemConfig};
use crate::Mode;

const SCQ_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Horizon per replication: slots for the PTQ, packets for the SCQ.
    pub num_slots: u64,
    /// Leading slots (packets) discarded before measuring.
    pub warmup_slots: u64,
    pub replications: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Discards the first 10% of the horizon.
    pub fn new(num_slots: u64, replications: usize, seed: u64) -> Self {
        SimConfig {
            num_slots,
            warmup_slots: num_slots / 10,
            replications,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_slots <= self.warmup_slots {
            return Err(Error::Config("num_slots must exceed warmup_slots".into()));
        }
        if self.replications < 1 {
            return Err(Error::Config("need at least one replication".into()));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Mean over replications with a Student-t 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    /// Infinite for a single replication.
    pub half_width_95: f64,
    pub samples: usize,
}

impl SimEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let half_width_95 = if n < 2 {
            f64::INFINITY
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
                .expect("dof > 0")
                .inverse_cdf(0.975);
            t * (var / n as f64).sqrt()
        };
        SimEstimate {
            mean,
            half_width_95,
            samples: n,
        }
    }

    pub fn contains(&self, value: f64, abs_slack: f64) -> bool {
        (value - self.mean).abs() <= self.half_width_95 + abs_slack
    }
}

/// One slot of the PTQ: departures leave first, then arrivals enter.
/// Returns the new length and the number of dropped packets.
pub fn ptq_step(queue: u64, departures: u64, arrivals: u64, buffer: u64) -> (u64, u64) {
    let offered = queue.saturating_sub(departures) + arrivals;
    (offered.min(buffer), offered.saturating_sub(buffer))
}

/// Counters of one PTQ replication. Totals cover the whole run; the
/// `measured_*` fields only the post-warmup window.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PtqReplication {
    pub arrivals: u64,
    pub departures: u64,
    pub drops: u64,
    pub final_queue: u64,
    pub measured_slots: u64,
    pub measured_arrivals: u64,
    pub measured_drops: u64,
    pub measured_queue_sum: u64,
}

impl PtqReplication {
    pub fn loss_ratio(&self) -> f64 {
        if self.measured_arrivals == 0 {
            0.0
        } else {
            self.measured_drops as f64 / self.measured_arrivals as f64
        }
    }

    pub fn drops_per_slot(&self) -> f64 {
        self.measured_drops as f64 / self.measured_slots as f64
    }

    pub fn mean_queue(&self) -> f64 {
        self.measured_queue_sum as f64 / self.measured_slots as f64
    }

    /// Little's law on the time-averaged queue and admitted packet rate.
    pub fn latency(&self, slot_length: f64) -> f64 {
        let admitted = (self.measured_arrivals - self.measured_drops) as f64;
        if admitted == 0.0 {
            return 0.0;
        }
        let rate = admitted / (self.measured_slots as f64 * slot_length);
        self.mean_queue() / rate
    }
}

/// Runs replication `rep` of the slotted PTQ.
pub fn simulate_ptq_replication(
    arrival: &ArrivalSpec,
    departure: &DepartureSpec,
    buffer: usize,
    cfg: &SimConfig,
    rep: usize,
) -> Result<PtqReplication> {
    cfg.validate()?;
    let mut rng = cfg.rng(rep as u64);
    let arrivals_dist = Poisson::new(arrival.per_slot()).map_err(|e| Error::Config(e.to_string()))?;
    let sinr_db = Normal::new(departure.mean_sinr_db, departure.sinr_std_db).map_err(|e| Error::Config(e.to_string()))?;
    let buffer = buffer as u64;
    let mut q = 0u64;
    let mut out = PtqReplication::default();
    for slot in 0..cfg.num_slots {
        let gamma = 10f64.powf(sinr_db.sample(&mut rng) / 10.0);
        let d = if departure.bandwidth_hz > 0.0 {
            departure.departures_at(gamma)
        } else {
            0
        };
        let a = arrivals_dist.sample(&mut rng) as u64;
        let (next, dropped) = ptq_step(q, d, a, buffer);
        debug_assert!(next <= buffer);
        out.arrivals += a;
        out.departures += d.min(q);
        out.drops += dropped;
        q = next;
        if slot >= cfg.warmup_slots {
            out.measured_slots += 1;
            out.measured_arrivals += a;
            out.measured_drops += dropped;
            out.measured_queue_sum += q;
        }
    }
    out.final_queue = q;
    Ok(out)
}

/// Simulated PTQ loss ratio and latency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtqSimulation {
    pub loss_ratio: SimEstimate,
    /// seconds
    pub latency: SimEstimate,
    /// packets/slot
    pub drop_rate: SimEstimate,
    pub mean_queue: SimEstimate,
}

pub fn simulate_ptq(
    arrival: &ArrivalSpec,
    departure: &DepartureSpec,
    buffer: usize,
    cfg: &SimConfig,
) -> Result<PtqSimulation> {
    cfg.validate()?;
    let reps: Vec<PtqReplication> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| simulate_ptq_replication(arrival, departure, buffer, cfg, r))
        .collect::<Result<_>>()?;
    let collect = |f: &dyn Fn(&PtqReplication) -> f64| SimEstimate::from_samples(&reps.iter().map(f).collect::<Vec<_>>());
    Ok(PtqSimulation {
        loss_ratio: collect(&|r| r.loss_ratio()),
        latency: collect(&|r| r.latency(arrival.slot_length)),
        drop_rate: collect(&|r| r.drops_per_slot()),
        mean_queue: collect(&|r| r.mean_queue()),
    })
}

/// Mean sojourn time of replication `rep` of the SCQ, via the Lindley
/// recursion over `cfg.num_slots` packets.
pub fn simulate_scq_replication(user: &MobileUser, cfg: &SimConfig, rep: usize) -> Result<f64> {
    let mut rng = cfg.rng(rep as u64 + SCQ_STREAM_OFFSET);
    let inter = Exp::new(user.arrival_rate).map_err(|e| Error::Config(e.to_string()))?;
    let fast = Exp::new(user.mu_match).map_err(|e| Error::Config(e.to_string()))?;
    let slow = Exp::new(user.mu_mismatch).map_err(|e| Error::Config(e.to_string()))?;
    let mut wait = 0.0f64;
    let mut total = 0.0;
    let mut count = 0u64;
    for n in 0..cfg.num_slots {
        let service = if rng.random::<f64>() < user.matching_degree {
            fast.sample(&mut rng)
        } else {
            slow.sample(&mut rng)
        };
        if n >= cfg.warmup_slots {
            total += wait + service;
            count += 1;
        }
        let gap: f64 = inter.sample(&mut rng);
        wait = (wait + service - gap).max(0.0);
    }
    Ok(total / count as f64)
}

/// Simulated SCQ sojourn time (seconds). Unstable inputs are rejected.
pub fn simulate_scq(user: &MobileUser, cfg: &SimConfig) -> Result<SimEstimate> {
    cfg.validate()?;
    queueing::scq_latency(user, VarianceModel::Mixture)?;
    let samples: Vec<f64> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| simulate_scq_replication(user, cfg, r))
        .collect::<Result<_>>()?;
    Ok(SimEstimate::from_samples(&samples))
}

/// Absolute slack added to confidence intervals when comparing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub loss: f64,
    /// seconds
    pub latency: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Slack {
            loss: 1e-6,
            latency: 1e-6,
        }
    }
}

/// Analytic vs simulated loss and latency of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub mode: Mode,
    pub analytic_loss: f64,
    pub simulated_loss: SimEstimate,
    pub analytic_latency: f64,
    pub simulated_latency: SimEstimate,
    pub loss_pass: bool,
    pub latency_pass: bool,
}

impl ValidationReport {
    pub fn loss_gap(&self) -> f64 {
        (self.analytic_loss - self.simulated_loss.mean).abs()
    }

    pub fn latency_gap(&self) -> f64 {
        (self.analytic_latency - self.simulated_latency.mean).abs()
    }

    pub fn relative_loss_gap(&self) -> f64 {
        relative(self.loss_gap(), self.simulated_loss.mean)
    }

    pub fn relative_latency_gap(&self) -> f64 {
        relative(self.latency_gap(), self.simulated_latency.mean)
    }

    pub fn pass(&self) -> bool {
        self.loss_pass && self.latency_pass
    }
}

fn relative(gap: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        gap / reference.abs()
    }
}

/// Compares [`queueing::link_metrics`] with simulation. SemCom latency adds
/// the simulated SCQ sojourn to the PTQ latency replication by replication.
pub fn validate_link(
    user: &MobileUser,
    link: &LinkModel,
    bandwidth_hz: f64,
    mode: Mode,
    sys: &SystemConfig,
    cfg: &SimConfig,
    slack: Slack,
) -> Result<ValidationReport> {
    cfg.validate()?;
    let analytic = queueing::link_metrics(user, link, bandwidth_hz, mode, sys)?;
    let arrival = ArrivalSpec::new(ptq_arrival_rate(user, mode), sys.slot_length_s)?;
    let departure = departure_spec(link, bandwidth_hz, sys);
    let per_rep: Vec<(f64, f64)> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let ptq = simulate_ptq_replication(&arrival, &departure, sys.buffer_size, cfg, r)?;
            let scq = match mode {
                Mode::SemCom => simulate_scq_replication(user, cfg, r)?,
                Mode::BitCom => 0.0,
            };
            Ok((ptq.loss_ratio(), scq + ptq.latency(sys.slot_length_s)))
        })
        .collect::<Result<_>>()?;
    let loss = SimEstimate::from_samples(&per_rep.iter().map(|p| p.0).collect::<Vec<_>>());
    let latency = SimEstimate::from_samples(&per_rep.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok(ValidationReport {
        mode,
        analytic_loss: analytic.loss_ratio,
        simulated_loss: loss,
        analytic_latency: analytic.total_latency,
        simulated_latency: latency,
        loss_pass: loss.contains(analytic.loss_ratio, slack.loss),
        latency_pass: latency.contains(analytic.total_latency, slack.latency),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        assert_eq!(ptq_step(5, 2, 3, 20), (6, 0));
        assert_eq!(ptq_step(19, 0, 4, 20), (20, 3));
        assert_eq!(ptq_step(1, 4, 0, 20), (0, 0));
    }

    #[test]
    fn single_replication_has_infinite_width() {
        let e = SimEstimate::from_samples(&[1.0]);
        assert!(e.half_width_95.is_infinite());
        let e = SimEstimate::from_samples(&[1.0, 1.0, 1.0]);
        assert_eq!(e.half_width_95, 0.0);
    }

    #[test]
    fn config_rules() {
        assert!(SimConfig { num_slots: 10, warmup_slots: 10, replications: 1, seed: 0 }.validate().is_err());
        assert!(SimConfig { num_slots: 10, warmup_slots: 0, replications: 0, seed: 0 }.validate().is_err());
        assert!(SimConfig::new(100, 2, 0).validate().is_ok());
    }
}
