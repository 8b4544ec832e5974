use rayon::prelude::*;

use super::dual::Link;
use super::thresholds::BandwidthThresholds;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::Mode;

struct Piece {
    user: usize,
    /// Width in Hz, possibly infinite.
    width: f64,
    /// msg/s per Hz
    slope: f64,
}

/// Splits `budget` among `users` of one BS, each at least its lower bound,
/// maximizing total message rate. Every rate curve is concave piecewise
/// linear in bandwidth, so filling pieces in order of decreasing slope is
/// optimal. Ties go to the lower-indexed user.
pub fn allocate_station(scenario: &Scenario, bs: usize, users: &[(usize, Mode)], lower: &[f64], budget: f64) -> Result<Vec<f64>> {
    if lower.iter().any(|z| !z.is_finite() || *z < 0.0) {
        return Err(Error::Contract(format!("BS {bs}: lower bounds must be finite and non-negative")));
    }
    let floor: f64 = lower.iter().sum();
    if floor > budget * (1.0 + 1e-9) {
        return Err(Error::Contract(format!(
            "BS {bs}: lower bounds need {floor} Hz but only {budget} Hz is available"
        )));
    }
    let mut alloc = lower.to_vec();
    if users.is_empty() {
        return Ok(alloc);
    }
    let mut pieces = Vec::new();
    for (k, &(i, mode)) in users.iter().enumerate() {
        let user = &scenario.users[i];
        let link = scenario.link(i, bs);
        let se = link.spectral_efficiency();
        match mode {
            Mode::BitCom => pieces.push(Piece {
                user: k,
                width: f64::INFINITY,
                slope: link.rho * se,
            }),
            Mode::SemCom => {
                for seg in link.b2m.segments() {
                    let start = (seg.start / se).max(lower[k]);
                    let end = seg.end / se;
                    if end > start {
                        pieces.push(Piece {
                            user: k,
                            width: end - start,
                            slope: user.matching_degree * seg.slope * se,
                        });
                    }
                }
            }
        }
    }
    pieces.sort_by(|a, b| b.slope.total_cmp(&a.slope).then(a.user.cmp(&b.user)));
    let mut surplus = (budget - floor).max(0.0);
    for p in &pieces {
        if surplus <= 0.0 {
            break;
        }
        let take = p.width.min(surplus);
        alloc[p.user] += take;
        surplus -= take;
    }
    Ok(alloc)
}

/// U×J bandwidth matrix: each BS's budget split among its users, with every
/// served link at or above its threshold. BSs without users keep nothing.
pub fn allocate_bandwidth(scenario: &Scenario, links: &[Link], thresholds: &BandwidthThresholds) -> Result<Vec<Vec<f64>>> {
    let per_bs: Vec<(Vec<usize>, Vec<f64>)> = (0..scenario.num_stations())
        .into_par_iter()
        .map(|j| {
            let users: Vec<(usize, Mode)> = links
                .iter()
                .enumerate()
                .filter_map(|(i, l)| match *l {
                    Some((b, mode)) if b == j => Some((i, mode)),
                    _ => None,
                })
                .collect();
            let lower: Vec<f64> = users.iter().map(|&(i, mode)| thresholds.z_th(i, j, mode)).collect();
            let z = allocate_station(scenario, j, &users, &lower, scenario.stations[j].bandwidth_hz)?;
            Ok((users.into_iter().map(|u| u.0).collect(), z))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; scenario.num_stations()]; scenario.num_users()];
    for (j, (users, z)) in per_bs.into_iter().enumerate() {
        for (i, zi) in users.into_iter().zip(z) {
            out[i][j] = zi;
        }
    }
    Ok(out)
}
