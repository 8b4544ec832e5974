use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::MobileUser;

/// Second-moment model of the semantic-coding time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceModel {
    /// Each packet is matching with probability `τ`: a hyperexponential
    /// service time with `E[I²] = 2τ/μ_mat² + 2(1-τ)/μ_mis²`.
    #[default]
    Mixture,
    /// `V(I) = (τ/μ_mat)² + ((1-τ)/μ_mis)²`, i.e. `I` treated as a weighted
    /// sum of the two exponential times.
    WeightedSum,
}

/// M/G/1 quantities of the semantic-coding queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScqAnalysis {
    /// `E[I]`, seconds.
    pub mean_service: f64,
    /// `E[I²]`, seconds².
    pub second_moment: f64,
    pub utilization: f64,
    /// Mean sojourn time, seconds.
    pub latency: f64,
}

/// Packet rate entering the PTQ after semantic coding: `τ μ_mat + (1-τ) μ_mis`.
pub fn merged_arrival_rate(tau: f64, mu_match: f64, mu_mismatch: f64) -> f64 {
    tau * mu_match + (1.0 - tau) * mu_mismatch
}

/// Mean SCQ sojourn time by the Pollaczek–Khintchine formula.
pub fn scq_latency(user: &MobileUser, model: VarianceModel) -> Result<ScqAnalysis> {
    scq_latency_raw(
        user.arrival_rate,
        user.matching_degree,
        user.mu_match,
        user.mu_mismatch,
        model,
    )
}

pub fn scq_latency_raw(
    lambda: f64,
    tau: f64,
    mu_match: f64,
    mu_mismatch: f64,
    model: VarianceModel,
) -> Result<ScqAnalysis> {
    let a = tau / mu_match;
    let b = (1.0 - tau) / mu_mismatch;
    let mean = a + b;
    let second_moment = match model {
        VarianceModel::Mixture => {
            2.0 * tau / (mu_match * mu_match) + 2.0 * (1.0 - tau) / (mu_mismatch * mu_mismatch)
        }
        VarianceModel::WeightedSum => mean * mean + a * a + b * b,
    };
    let utilization = lambda * mean;
    if !(utilization < 1.0) {
        return Err(Error::UnstableScq { utilization });
    }
    let latency = lambda * second_moment / (2.0 * (1.0 - utilization)) + mean;
    Ok(ScqAnalysis {
        mean_service: mean,
        second_moment,
        utilization,
        latency,
    })
}
