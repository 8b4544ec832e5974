//! Reference oracles written independently of `hsbnet-core`'s internals:
//! brute-force enumerations, plain power iteration and a slot-level queue
//! simulator. The acceptance suite checks the library against these.

use hsbnet_core::Mode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

/// One-step transition matrix obtained by pushing every `(A, D)` pair
/// through `Q' = min(max(Q - D, 0) + A, F)`. Both pmfs must be complete.
pub fn brute_force_transitions(arrivals: &[f64], departures: &[f64], buffer: usize) -> Vec<Vec<f64>> {
    let mut omega = vec![vec![0.0; buffer + 1]; buffer + 1];
    for (q, row) in omega.iter_mut().enumerate() {
        for (a, pa) in arrivals.iter().enumerate() {
            for (d, pd) in departures.iter().enumerate() {
                let next = (q.saturating_sub(d) + a).min(buffer);
                row[next] += pa * pd;
            }
        }
    }
    omega
}

/// `steps` rounds of `π ← π Ω` from the uniform vector.
pub fn power_iteration(omega: &[Vec<f64>], steps: usize) -> Vec<f64> {
    let n = omega.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..steps {
        let mut next = vec![0.0; n];
        for (i, row) in omega.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                next[j] += pi[i] * w;
            }
        }
        let s: f64 = next.iter().sum();
        pi = next.into_iter().map(|v| v / s).collect();
    }
    pi
}

/// Departures in one slot at SINR `sinr_db`.
pub fn departures(bandwidth_hz: f64, sinr_db: f64, slot_s: f64, packet_bits: f64) -> u64 {
    let bits = slot_s * bandwidth_hz * (1.0 + 10f64.powf(sinr_db / 10.0)).log2();
    (bits / packet_bits + 1e-9).floor() as u64
}

/// Empirical `Pr{D <= k}` for `k = 0..=kmax` from `draws` SINR samples.
pub fn monte_carlo_departure_cdf(
    mean_db: f64,
    std_db: f64,
    bandwidth_hz: f64,
    slot_s: f64,
    packet_bits: f64,
    kmax: usize,
    draws: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(mean_db, std_db).expect("valid normal");
    let mut counts = vec![0usize; kmax + 1];
    for _ in 0..draws {
        let d = departures(bandwidth_hz, normal.sample(&mut rng), slot_s, packet_bits) as usize;
        if d <= kmax {
            counts[d] += 1;
        }
    }
    let mut acc = 0;
    counts
        .iter()
        .map(|c| {
            acc += c;
            acc as f64 / draws as f64
        })
        .collect()
}

/// Slot-level queue run: mean drops per slot and the blocked fraction of
/// arrivals. Departures leave before arrivals enter.
#[derive(Debug, Clone, Copy)]
pub struct DropEstimate {
    pub drops_per_slot: f64,
    pub blocked_fraction: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_drops(
    arrivals_per_slot: f64,
    bandwidth_hz: f64,
    mean_db: f64,
    std_db: f64,
    slot_s: f64,
    packet_bits: f64,
    buffer: u64,
    slots: u64,
    seed: u64,
) -> DropEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(mean_db, std_db).expect("valid normal");
    let poisson = Poisson::new(arrivals_per_slot).expect("valid poisson");
    let warmup = slots / 10;
    let (mut q, mut drops, mut arrived) = (0u64, 0u64, 0u64);
    for t in 0..slots {
        let d = departures(bandwidth_hz, normal.sample(&mut rng), slot_s, packet_bits);
        let a = poisson.sample(&mut rng) as u64;
        let offered = q.saturating_sub(d) + a;
        q = offered.min(buffer);
        if t >= warmup {
            drops += offered - q;
            arrived += a;
        }
    }
    let measured = (slots - warmup) as f64;
    DropEstimate {
        drops_per_slot: drops as f64 / measured,
        blocked_fraction: drops as f64 / arrived.max(1) as f64,
    }
}

/// Every association of `num_users` MUs over `num_stations` BSs, with each MU
/// either unserved or on one `(bs, mode)`; returns the best value reported
/// by `value` (which returns `None` for infeasible choices).
pub fn exhaustive_best<F>(num_users: usize, num_stations: usize, mut value: F) -> Option<(Vec<Option<(usize, Mode)>>, f64)>
where
    F: FnMut(&[Option<(usize, Mode)>]) -> Option<f64>,
{
    let options = 2 * num_stations + 1;
    let total = options.checked_pow(num_users as u32).expect("enumeration too large");
    let mut best: Option<(Vec<Option<(usize, Mode)>>, f64)> = None;
    for code in 0..total {
        let mut c = code;
        let links: Vec<Option<(usize, Mode)>> = (0..num_users)
            .map(|_| {
                let o = c % options;
                c /= options;
                if o == 2 * num_stations {
                    None
                } else if o < num_stations {
                    Some((o, Mode::SemCom))
                } else {
                    Some((o - num_stations, Mode::BitCom))
                }
            })
            .collect();
        if let Some(v) = value(&links) {
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((links, v));
            }
        }
    }
    best
}

/// Best split of `budget` over users with rate curves `rate`, each at least
/// `lower[i]`, searched on a grid of `step` Hz (two or three users).
pub fn grid_search_allocation(rate: &[&dyn Fn(f64) -> f64], lower: &[f64], budget: f64, step: f64) -> (Vec<f64>, f64) {
    let surplus = budget - lower.iter().sum::<f64>();
    let n = (surplus / step).round() as usize;
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    let mut eval = |extra: &[f64]| {
        let z: Vec<f64> = lower.iter().zip(extra).map(|(l, e)| l + e).collect();
        let v: f64 = z.iter().zip(rate).map(|(zi, f)| f(*zi)).sum();
        if v > best.1 {
            best = (z, v);
        }
    };
    match rate.len() {
        1 => eval(&[surplus]),
        2 => {
            for a in 0..=n {
                let ea = a as f64 * step;
                eval(&[ea, surplus - ea]);
            }
        }
        3 => {
            for a in 0..=n {
                for b in 0..=(n - a) {
                    let (ea, eb) = (a as f64 * step, b as f64 * step);
                    eval(&[ea, eb, surplus - ea - eb]);
                }
            }
        }
        _ => panic!("grid search supports up to three users"),
    }
    best
}

/// Mean sojourn of an M/M/1 queue.
pub fn mm1_sojourn(arrival_rate: f64, service_rate: f64) -> f64 {
    1.0 / (service_rate - arrival_rate)
}
