use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Poisson tails beyond this mass are dropped.
pub const POISSON_TAIL: f64 = 1e-12;
/// Upper SINR quantile used to bound the departure support.
pub const SINR_QUANTILE: f64 = 1.0 - 1e-10;
/// Hard cap on any truncated support.
pub const MAX_SUPPORT: usize = 1 << 20;

/// Poisson packet arrivals per slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSpec {
    /// packets/s
    pub rate: f64,
    /// seconds
    pub slot_length: f64,
}

impl ArrivalSpec {
    pub fn new(rate: f64, slot_length: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Config(format!("arrival rate must be positive, got {rate}")));
        }
        if !(slot_length > 0.0) {
            return Err(Error::Config("slot length must be positive".into()));
        }
        Ok(ArrivalSpec { rate, slot_length })
    }

    /// Mean arrivals per slot.
    pub fn per_slot(&self) -> f64 {
        self.rate * self.slot_length
    }
}

/// Per-slot departures of a PTQ: `floor(T z log2(1 + γ) / L)` with `γ`
/// Gaussian in the dB domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepartureSpec {
    pub bandwidth_hz: f64,
    pub mean_sinr_db: f64,
    pub sinr_std_db: f64,
    pub slot_length: f64,
    pub packet_bits: f64,
}

impl DepartureSpec {
    /// Packets per slot per unit of `log2(1 + γ)`.
    fn packets_per_bit_capacity(&self) -> f64 {
        self.slot_length * self.bandwidth_hz / self.packet_bits
    }

    /// `10 log10(2^{k L / (T z)} - 1)`, the dB SINR at which `k` packets fit.
    fn threshold_db(&self, k: usize) -> f64 {
        if k == 0 {
            return f64::NEG_INFINITY;
        }
        let x = k as f64 / self.packets_per_bit_capacity() * std::f64::consts::LN_2;
        10.0 * x.exp_m1().log10()
    }

    /// Departures at a fixed linear SINR.
    pub fn departures_at(&self, sinr_linear: f64) -> u64 {
        let v = self.packets_per_bit_capacity() * sinr_linear.ln_1p() / std::f64::consts::LN_2;
        // snap values within rounding of an integer
        (v * (1.0 + 1e-12)).floor() as u64
    }

    fn sinr_cdf_db(&self, x_db: f64) -> f64 {
        if x_db == f64::NEG_INFINITY {
            return 0.0;
        }
        if x_db == f64::INFINITY {
            return 1.0;
        }
        let n = Normal::new(self.mean_sinr_db, self.sinr_std_db).expect("std > 0");
        n.cdf(x_db)
    }

    /// Bound on the departure support: `ceil(T z log2(1 + γ_max) / L)` with
    /// `γ_max` at the upper SINR quantile.
    pub fn support_bound(&self) -> usize {
        if self.bandwidth_hz <= 0.0 {
            return 0;
        }
        let top_db = if self.sinr_std_db > 0.0 {
            Normal::new(self.mean_sinr_db, self.sinr_std_db)
                .expect("std > 0")
                .inverse_cdf(SINR_QUANTILE)
        } else {
            self.mean_sinr_db
        };
        let g = 10f64.powf(top_db / 10.0);
        let k = (self.packets_per_bit_capacity() * g.ln_1p() / std::f64::consts::LN_2).ceil();
        k.min(MAX_SUPPORT as f64) as usize
    }
}

/// Probability mass on `0..head.len()` plus the lumped tail `Pr{X >= head.len()}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPmf {
    pub head: Vec<f64>,
    pub tail: f64,
}

impl TruncatedPmf {
    pub fn point_mass(k: usize) -> Self {
        let mut head = vec![0.0; k + 1];
        head[k] = 1.0;
        TruncatedPmf { head, tail: 0.0 }
    }

    /// `Pr{X = k}`; zero past the head.
    pub fn pmf(&self, k: usize) -> f64 {
        self.head.get(k).copied().unwrap_or(0.0)
    }

    /// `Pr{X >= k}`.
    pub fn at_least(&self, k: usize) -> f64 {
        if k >= self.head.len() {
            // exact at k == len, an upper bound beyond
            return self.tail;
        }
        let below: f64 = self.head[..k].iter().sum();
        let above: f64 = self.head[k..].iter().sum::<f64>() + self.tail;
        // pick the better conditioned complement
        if below < 0.5 {
            (1.0 - below).max(0.0)
        } else {
            above
        }
    }

    pub fn mean(&self) -> f64 {
        self.head.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.head.iter().sum::<f64>() + self.tail
    }
}

/// `(λT)^k e^{-λT} / k!`, evaluated in log space.
pub fn poisson_pmf(spec: &ArrivalSpec, k: usize) -> f64 {
    let m = spec.per_slot();
    (k as f64 * m.ln() - m - ln_gamma(k as f64 + 1.0)).exp()
}

/// Poisson PMF up to the smallest `K` with tail mass below
/// [`POISSON_TAIL`], extended to at least `min_len` entries.
pub fn arrival_distribution(spec: &ArrivalSpec, min_len: usize) -> Result<TruncatedPmf> {
    let mut head = Vec::new();
    let mut cum = 0.0;
    let mut k = 0;
    loop {
        let p = poisson_pmf(spec, k);
        head.push(p);
        cum += p;
        k += 1;
        let mean_passed = k as f64 > spec.per_slot();
        if mean_passed && 1.0 - cum < POISSON_TAIL && k >= min_len {
            break;
        }
        if k > MAX_SUPPORT {
            return Err(Error::Truncation {
                bound: MAX_SUPPORT,
                lost: 1.0 - cum,
            });
        }
    }
    let tail = (1.0 - cum).max(0.0);
    if tail > 1e-9 {
        return Err(Error::Truncation { bound: k, lost: tail });
    }
    Ok(TruncatedPmf { head, tail })
}

/// `Pr{D <= k}`.
pub fn departure_cdf(spec: &DepartureSpec, k: usize) -> f64 {
    if spec.bandwidth_hz <= 0.0 {
        return 1.0;
    }
    if spec.sinr_std_db == 0.0 {
        let d = spec.departures_at(10f64.powf(spec.mean_sinr_db / 10.0));
        return if (k as u64) >= d { 1.0 } else { 0.0 };
    }
    spec.sinr_cdf_db(spec.threshold_db(k + 1))
}

/// `Pr{D = k}`.
pub fn departure_pmf(spec: &DepartureSpec, k: usize) -> f64 {
    if k == 0 {
        departure_cdf(spec, 0)
    } else {
        (departure_cdf(spec, k) - departure_cdf(spec, k - 1)).max(0.0)
    }
}

/// Departure PMF with head `0..=cap` (or the full support when smaller) and
/// the remaining mass lumped into the tail.
pub fn departure_distribution(spec: &DepartureSpec, cap: usize) -> TruncatedPmf {
    if spec.bandwidth_hz <= 0.0 {
        return TruncatedPmf::point_mass(0);
    }
    let bound = spec.support_bound();
    let len = bound.min(cap) + 1;
    let mut head = Vec::with_capacity(len);
    let mut prev = 0.0;
    for k in 0..len {
        let c = departure_cdf(spec, k);
        head.push((c - prev).max(0.0));
        prev = c;
    }
    let mut tail = (1.0 - prev).max(0.0);
    if len > bound {
        // full support covered: fold the quantile remainder into the last entry
        *head.last_mut().expect("non-empty") += tail;
        tail = 0.0;
    }
    TruncatedPmf { head, tail }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dep(z: f64) -> DepartureSpec {
        DepartureSpec {
            bandwidth_hz: z,
            mean_sinr_db: 0.0,
            sinr_std_db: 4.0,
            slot_length: 1e-3,
            packet_bits: 800.0,
        }
    }

    #[test]
    fn poisson_zero_at_unit_mean() {
        let a = ArrivalSpec::new(1000.0, 1e-3).unwrap();
        assert_relative_eq!(poisson_pmf(&a, 0), (-1f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn poisson_one_at_merged_rate() {
        let a = ArrivalSpec::new(1125.0, 1e-3).unwrap();
        assert_relative_eq!(poisson_pmf(&a, 1), 1.125 * (-1.125f64).exp(), max_relative = 1e-13);
    }

    #[test]
    fn poisson_truncation_keeps_mass() {
        for rate in [1.0, 300.0, 1125.0, 4e4] {
            let a = ArrivalSpec::new(rate, 1e-3).unwrap();
            let d = arrival_distribution(&a, 0).unwrap();
            let s: f64 = d.head.iter().sum();
            assert!(s >= 1.0 - 1e-12, "rate {rate}: {s}");
        }
    }

    #[test]
    fn zero_bandwidth_never_departs() {
        let d = departure_distribution(&dep(0.0), 20);
        assert_eq!(d.head, vec![1.0]);
        assert_eq!(departure_pmf(&dep(0.0), 0), 1.0);
    }

    #[test]
    fn deterministic_sinr_two_packets() {
        let spec = DepartureSpec { sinr_std_db: 0.0, ..dep(1.6e6) };
        assert_eq!(departure_pmf(&spec, 2), 1.0);
        assert_eq!(departure_pmf(&spec, 1), 0.0);
        assert_eq!(departure_distribution(&spec, 20).pmf(2), 1.0);
    }

    #[test]
    fn departure_distribution_sums_to_one() {
        for z in [1e3, 2e5, 1.55e6, 3e7] {
            for cap in [0, 5, 20, 10_000] {
                let d = departure_distribution(&dep(z), cap);
                assert!((d.total() - 1.0).abs() < 1e-12, "z={z} cap={cap}");
            }
        }
    }

    #[test]
    fn at_least_matches_cdf() {
        let spec = dep(1.55e6);
        let d = departure_distribution(&spec, 20);
        for k in 1..6 {
            assert!((d.at_least(k) - (1.0 - departure_cdf(&spec, k - 1))).abs() < 1e-12);
        }
    }
}
