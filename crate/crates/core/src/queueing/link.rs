use serde::{Deserialize, Serialize};

use super::dist::{ArrivalSpec, DepartureSpec};
use super::ptq::analyze_ptq;
use super::scq::{merged_arrival_rate, scq_latency, VarianceModel};
use crate::error::Result;
use crate::scenario::{LinkModel, MobileUser, SystemConfig};
use crate::Mode;

/// Steady-state queue metrics of one link in one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkQueueMetrics {
    pub mode: Mode,
    pub loss_ratio: f64,
    /// seconds
    pub ptq_latency: f64,
    /// seconds, zero for BitCom
    pub scq_latency: f64,
    /// seconds
    pub total_latency: f64,
    /// packets/s admitted to the PTQ
    pub effective_arrival: f64,
}

/// PTQ arrival rate of `user` in `mode`.
pub fn ptq_arrival_rate(user: &MobileUser, mode: Mode) -> f64 {
    match mode {
        Mode::SemCom => merged_arrival_rate(user.matching_degree, user.mu_match, user.mu_mismatch),
        Mode::BitCom => user.arrival_rate,
    }
}

pub fn departure_spec(link: &LinkModel, bandwidth_hz: f64, sys: &SystemConfig) -> DepartureSpec {
    DepartureSpec {
        bandwidth_hz,
        mean_sinr_db: link.mean_sinr_db,
        sinr_std_db: link.sinr_std_db,
        slot_length: sys.slot_length_s,
        packet_bits: sys.packet_bits,
    }
}

pub fn link_metrics(
    user: &MobileUser,
    link: &LinkModel,
    bandwidth_hz: f64,
    mode: Mode,
    sys: &SystemConfig,
) -> Result<LinkQueueMetrics> {
    link_metrics_with(user, link, bandwidth_hz, mode, sys, VarianceModel::default())
}

pub fn link_metrics_with(
    user: &MobileUser,
    link: &LinkModel,
    bandwidth_hz: f64,
    mode: Mode,
    sys: &SystemConfig,
    model: VarianceModel,
) -> Result<LinkQueueMetrics> {
    let scq = match mode {
        Mode::SemCom => scq_latency(user, model)?.latency,
        Mode::BitCom => 0.0,
    };
    let arrival = ArrivalSpec::new(ptq_arrival_rate(user, mode), sys.slot_length_s)?;
    let ptq = analyze_ptq(&arrival, &departure_spec(link, bandwidth_hz, sys), sys.buffer_size)?;
    Ok(LinkQueueMetrics {
        mode,
        loss_ratio: ptq.loss_ratio,
        ptq_latency: ptq.latency,
        scq_latency: scq,
        total_latency: scq + ptq.latency,
        effective_arrival: ptq.effective_arrival,
    })
}

/// Long-run message rate at the mean SINR:
/// SemCom `τ Re(z log2(1+γ̄))`, BitCom `ρ z log2(1+γ̄)`.
pub fn mean_message_rate(user: &MobileUser, link: &LinkModel, bandwidth_hz: f64, mode: Mode) -> f64 {
    let bits = bandwidth_hz.max(0.0) * link.spectral_efficiency();
    match mode {
        Mode::SemCom => user.matching_degree * link.b2m.eval(bits),
        Mode::BitCom => link.rho * bits,
    }
}
