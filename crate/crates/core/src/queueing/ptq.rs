//! Finite-buffer packet-transmission queue as a discrete-time Markov chain.
//!
//! Per slot the queue first releases `D` packets, then admits `A` arrivals,
//! and anything above the buffer size `F` is dropped:
//! `Q' = min(max(Q - D, 0) + A, F)`.

use nalgebra::{DMatrix, DVector};

use super::dist::{arrival_distribution, departure_distribution, ArrivalSpec, DepartureSpec, TruncatedPmf};
use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-10;

/// Transition structure and steady state of a PTQ.
#[derive(Debug, Clone)]
pub struct PtqChain {
    /// Row-stochastic `(F+1)×(F+1)` one-step transition matrix.
    pub omega: DMatrix<f64>,
    /// Steady-state distribution of the queue length.
    pub alpha: Vec<f64>,
    /// Mean packets dropped per slot.
    pub drop_rate: f64,
    /// `W(c) = Σ_{l<=c} α_l`.
    pub cumulative: Vec<f64>,
}

impl PtqChain {
    pub fn buffer_size(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn mean_queue(&self) -> f64 {
        mean_queue(&self.alpha)
    }
}

/// Loss ratio and Little's-law latency of a PTQ.
#[derive(Debug, Clone)]
pub struct PtqAnalysis {
    pub chain: PtqChain,
    pub loss_ratio: f64,
    /// seconds
    pub latency: f64,
    /// packets/s
    pub effective_arrival: f64,
}

/// Builds `Ω` from arrival and departure PMFs using the closed-form cases of
/// the one-step transition probability.
pub fn transition_matrix_from_pmfs(
    arrivals: &TruncatedPmf,
    departures: &TruncatedPmf,
    buffer: usize,
) -> Result<DMatrix<f64>> {
    if buffer < 1 {
        return Err(Error::Config("buffer size must be at least 1".into()));
    }
    let f = buffer;
    let pa: Vec<f64> = (0..=f).map(|k| arrivals.pmf(k)).collect();
    let pa_ge: Vec<f64> = (0..=f).map(|k| arrivals.at_least(k)).collect();
    let pd: Vec<f64> = (0..=f).map(|k| departures.pmf(k)).collect();
    let pd_ge: Vec<f64> = (0..=f).map(|k| departures.at_least(k)).collect();

    let mut omega = DMatrix::zeros(f + 1, f + 1);
    for a in 0..=f {
        for b in 0..=f {
            omega[(a, b)] = if b == 0 {
                pa[0] * pd_ge[a]
            } else if a == 0 {
                if b < f {
                    pa[b]
                } else {
                    pa_ge[f]
                }
            } else if b == f {
                pa_ge[b] * pd_ge[a] + (0..a).map(|l| pd[l] * pa_ge[b - a + l]).sum::<f64>()
            } else if b <= a {
                pa[b] * pd_ge[a] + (0..b).map(|l| pa[l] * pd[a - b + l]).sum::<f64>()
            } else {
                pa[b] * pd_ge[a] + (0..a).map(|l| pd[l] * pa[b - a + l]).sum::<f64>()
            };
        }
    }
    for a in 0..=f {
        let s: f64 = omega.row(a).sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::Truncation {
                bound: f,
                lost: 1.0 - s,
            });
        }
    }
    Ok(omega)
}

/// `Ω` for Poisson arrivals and SINR-driven departures.
pub fn transition_matrix(arrival: &ArrivalSpec, departure: &DepartureSpec, buffer: usize) -> Result<DMatrix<f64>> {
    let arrivals = arrival_distribution(arrival, buffer + 1)?;
    let departures = departure_distribution(departure, buffer);
    transition_matrix_from_pmfs(&arrivals, &departures, buffer)
}

/// Solves `Ω^T α = α`, `Σ α = 1` directly, falling back to power iteration
/// when the linear solve fails or leaves a large residual.
pub fn steady_state(omega: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = omega.nrows();
    if n == 0 || omega.ncols() != n {
        return Err(Error::Numerical("transition matrix must be square and non-empty".into()));
    }
    let mut system = omega.transpose() - DMatrix::identity(n, n);
    for c in 0..n {
        system[(n - 1, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    if let Some(sol) = system.lu().solve(&rhs) {
        if let Some(alpha) = accept(omega, sol.as_slice()) {
            return Ok(alpha);
        }
    }
    power_iteration(omega, 1_000_000, 1e-15)
}

fn accept(omega: &DMatrix<f64>, raw: &[f64]) -> Option<Vec<f64>> {
    if raw.iter().any(|v| !v.is_finite() || *v < -1e-12) {
        return None;
    }
    let mut alpha: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let s: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|v| *v /= s);
    (stationarity_residual(omega, &alpha) < RESIDUAL_TOL).then_some(alpha)
}

/// `‖Ω^T α − α‖∞`.
pub fn stationarity_residual(omega: &DMatrix<f64>, alpha: &[f64]) -> f64 {
    let a = DVector::from_column_slice(alpha);
    (omega.transpose() * &a - &a).amax()
}

fn power_iteration(omega: &DMatrix<f64>, max_steps: usize, tol: f64) -> Result<Vec<f64>> {
    let n = omega.nrows();
    let t = omega.transpose();
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..max_steps {
        let next = &t * &v;
        let delta = (&next - &v).amax();
        v = next;
        if delta < tol {
            let s = v.sum();
            return Ok(v.iter().map(|x| x / s).collect());
        }
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {max_steps} steps"
    )))
}

/// `E[(A - n)^+]`.
fn expected_overflow(arrivals: &TruncatedPmf, n: usize) -> f64 {
    arrivals
        .head
        .iter()
        .enumerate()
        .skip(n + 1)
        .map(|(f, p)| (f - n) as f64 * p)
        .sum()
}

/// Mean packets dropped per slot in steady state.
pub fn expected_drops(alpha: &[f64], arrivals: &TruncatedPmf, departures: &TruncatedPmf) -> f64 {
    let f = alpha.len() - 1;
    let full_overflow = expected_overflow(arrivals, f);
    let busy: f64 = (1..=f)
        .map(|l| {
            let partial: f64 = (0..l)
                .map(|k| departures.pmf(k) * expected_overflow(arrivals, f - l + k))
                .sum();
            alpha[l] * (partial + departures.at_least(l) * full_overflow)
        })
        .sum();
    (busy + alpha[0] * full_overflow).max(0.0)
}

pub fn mean_queue(alpha: &[f64]) -> f64 {
    alpha.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}

fn cumulative(alpha: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = alpha
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

/// Chain, steady state and drop rate from explicit PMFs.
pub fn build_chain_from_pmfs(arrivals: &TruncatedPmf, departures: &TruncatedPmf, buffer: usize) -> Result<PtqChain> {
    let omega = transition_matrix_from_pmfs(arrivals, departures, buffer)?;
    let alpha = steady_state(&omega)?;
    let drop_rate = expected_drops(&alpha, arrivals, departures);
    Ok(PtqChain {
        omega,
        cumulative: cumulative(&alpha),
        alpha,
        drop_rate,
    })
}

pub fn build_chain(arrival: &ArrivalSpec, departure: &DepartureSpec, buffer: usize) -> Result<PtqChain> {
    let arrivals = arrival_distribution(arrival, buffer + 1)?;
    let departures = departure_distribution(departure, buffer);
    build_chain_from_pmfs(&arrivals, &departures, buffer)
}

/// Loss ratio `G / (λT)` and latency `E[Q] / (λ(1 − θ))`.
pub fn ptq_metrics(chain: &PtqChain, arrival: &ArrivalSpec) -> Result<(f64, f64)> {
    let loss = (chain.drop_rate / arrival.per_slot()).clamp(0.0, 1.0);
    let effective = arrival.rate * (1.0 - loss);
    if !(effective > 0.0) {
        return Err(Error::DegenerateQueue(effective));
    }
    Ok((loss, chain.mean_queue() / effective))
}

pub fn analyze_ptq(arrival: &ArrivalSpec, departure: &DepartureSpec, buffer: usize) -> Result<PtqAnalysis> {
    let chain = build_chain(arrival, departure, buffer)?;
    let (loss_ratio, latency) = ptq_metrics(&chain, arrival)?;
    Ok(PtqAnalysis {
        effective_arrival: arrival.rate * (1.0 - loss_ratio),
        chain,
        loss_ratio,
        latency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_half() -> TruncatedPmf {
        TruncatedPmf {
            head: vec![0.5, 0.5],
            tail: 0.0,
        }
    }

    #[test]
    fn two_state_hand_case() {
        // enumerate (A, D) in {0,1}²: from 0 -> {0: .5, 1: .5}; from 1 -> {0: .25, 1: .75}
        let chain = build_chain_from_pmfs(&half_half(), &half_half(), 1).unwrap();
        let expected = [[0.5, 0.5], [0.25, 0.75]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((chain.omega[(a, b)] - expected[a][b]).abs() < 1e-15);
            }
        }
        assert!((chain.alpha[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((chain.alpha[1] - 2.0 / 3.0).abs() < 1e-12);
        // only (Q=1, D=0, A=1) drops a packet
        assert!((chain.drop_rate - 2.0 / 3.0 * 0.25).abs() < 1e-12);
    }

    #[test]
    fn no_arrivals_drains() {
        let arrivals = TruncatedPmf::point_mass(0);
        let departures = half_half();
        let chain = build_chain_from_pmfs(&arrivals, &departures, 5).unwrap();
        assert_eq!(chain.omega[(0, 0)], 1.0);
        assert!(chain.omega.row(0).iter().skip(1).all(|&v| v == 0.0));
        assert!((chain.alpha[0] - 1.0).abs() < 1e-12);
        assert_eq!(chain.drop_rate, 0.0);
        let arrival = ArrivalSpec::new(1.0, 1.0).unwrap();
        let (_, latency) = ptq_metrics(&chain, &arrival).unwrap();
        assert!(latency.abs() < 1e-12);
    }

    #[test]
    fn rows_stochastic_at_default_point() {
        let arrival = ArrivalSpec::new(1125.0, 1e-3).unwrap();
        let departure = DepartureSpec {
            bandwidth_hz: 1.55e6,
            mean_sinr_db: 0.0,
            sinr_std_db: 4.0,
            slot_length: 1e-3,
            packet_bits: 800.0,
        };
        let omega = transition_matrix(&arrival, &departure, 20).unwrap();
        assert_eq!(omega.nrows(), 21);
        assert!(omega.iter().all(|&v| (0.0..=1.0).contains(&v)));
        for r in 0..21 {
            assert!((omega.row(r).sum() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_chain_has_unique_solution() {
        // period 2: the direct solve still has a unique answer
        let omega = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let alpha = steady_state(&omega).unwrap();
        assert!((alpha[0] - 0.5).abs() < 1e-12);
    }
}
