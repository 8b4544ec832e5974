use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{B2mFunction, BaseStation, LinkModel, MobileUser, Scenario, SystemConfig};
use crate::error::{Error, Result};

/// Interference scaling that centers the per-MU best-link SINR of the
/// default 200-MU / 10-BS scenario near 0 dB.
pub const DEFAULT_INTERFERENCE_FACTOR: f64 = 0.002;

/// How B2M functions are drawn for generated links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum B2mTemplate {
    /// Linear B2M with slope (msg/bit) drawn uniformly from the range.
    Linear { slope_range: [f64; 2] },
    /// Concave piecewise-linear B2M: initial slope drawn from `slope_range`,
    /// slope multiplied by `decay` at every knee (bit/s), flat after the last.
    PiecewiseLinear {
        slope_range: [f64; 2],
        knees: Vec<f64>,
        decay: f64,
    },
}

impl Default for B2mTemplate {
    fn default() -> Self {
        B2mTemplate::PiecewiseLinear {
            slope_range: [1e-4, 4e-4],
            knees: vec![2e6, 8e6],
            decay: 0.5,
        }
    }
}

impl B2mTemplate {
    fn sample(&self, rng: &mut impl Rng) -> B2mFunction {
        match self {
            B2mTemplate::Linear { slope_range } => B2mFunction::Linear {
                slope: uniform(rng, *slope_range),
            },
            B2mTemplate::PiecewiseLinear {
                slope_range,
                knees,
                decay,
            } => {
                let mut slope = uniform(rng, *slope_range);
                let mut breakpoints = vec![(0.0, 0.0)];
                let (mut r, mut m) = (0.0, 0.0);
                for &knee in knees {
                    m += slope * (knee - r);
                    r = knee;
                    breakpoints.push((r, m));
                    slope *= decay;
                }
                B2mFunction::PiecewiseLinear { breakpoints }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            B2mTemplate::Linear { slope_range } => check_range("b2m.slope_range", *slope_range, true),
            B2mTemplate::PiecewiseLinear {
                slope_range,
                knees,
                decay,
            } => {
                check_range("b2m.slope_range", *slope_range, true)?;
                if knees.is_empty() || knees.windows(2).any(|w| w[1] <= w[0]) || knees[0] <= 0.0 {
                    return Err(Error::Config("b2m.knees must be positive and strictly increasing".into()));
                }
                if !(*decay > 0.0 && *decay <= 1.0) {
                    return Err(Error::Config("b2m.decay must lie in (0, 1]".into()));
                }
                Ok(())
            }
        }
    }
}

/// Parameters for [`generate_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub num_users: usize,
    pub num_stations: usize,
    pub radius_m: f64,
    pub system: SystemConfig,
    pub bandwidth_hz: f64,
    pub transmit_power_dbm: f64,
    pub noise_dbm: f64,
    /// Fraction `κ` of the other MUs' received power counted as interference.
    pub interference_factor: f64,
    /// Distances are clamped to at least this many meters.
    pub min_distance_m: f64,
    pub arrival_rate: f64,
    pub mean_match_time_s: f64,
    pub mean_mismatch_time_s: f64,
    pub tau_range: [f64; 2],
    pub min_rate_range: [f64; 2],
    pub rho_range: [f64; 2],
    pub sinr_std_db: f64,
    pub beta_std: f64,
    pub b2m: B2mTemplate,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            num_users: 200,
            num_stations: 10,
            radius_m: 300.0,
            system: SystemConfig::default(),
            bandwidth_hz: 15e6,
            transmit_power_dbm: 20.0,
            noise_dbm: -111.45,
            interference_factor: DEFAULT_INTERFERENCE_FACTOR,
            min_distance_m: 1.0,
            arrival_rate: 1000.0,
            mean_match_time_s: 8e-4,
            mean_mismatch_time_s: 1e-3,
            tau_range: [0.6, 1.0],
            min_rate_range: [50.0, 100.0],
            rho_range: [2e-5, 2e-4],
            sinr_std_db: 4.0,
            beta_std: 0.1,
            b2m: B2mTemplate::default(),
            seed: 0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_users < 1 || self.num_stations < 1 {
            return Err(Error::Config("user and station counts must be at least 1".into()));
        }
        if !(self.radius_m > 0.0 && self.radius_m.is_finite()) {
            return Err(Error::Config(format!("radius must be positive, got {}", self.radius_m)));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Config("bandwidth must be positive".into()));
        }
        if !(self.interference_factor >= 0.0) {
            return Err(Error::Config("interference factor must be non-negative".into()));
        }
        if !(self.min_distance_m > 0.0) {
            return Err(Error::Config("minimum distance must be positive".into()));
        }
        if !(self.arrival_rate > 0.0) {
            return Err(Error::Config("arrival rate must be positive".into()));
        }
        if !(self.mean_match_time_s > 0.0 && self.mean_match_time_s < self.mean_mismatch_time_s) {
            return Err(Error::Config(
                "need 0 < mean_match_time_s < mean_mismatch_time_s".into(),
            ));
        }
        check_range("tau_range", self.tau_range, false)?;
        if self.tau_range[0] < 0.0 || self.tau_range[1] > 1.0 {
            return Err(Error::Config("tau_range must lie within [0, 1]".into()));
        }
        check_range("min_rate_range", self.min_rate_range, false)?;
        check_range("rho_range", self.rho_range, true)?;
        if self.rho_range[1] >= 1.0 {
            return Err(Error::Config("rho_range must lie within (0, 1)".into()));
        }
        if !(self.sinr_std_db >= 0.0 && self.beta_std >= 0.0) {
            return Err(Error::Config("standard deviations must be non-negative".into()));
        }
        self.b2m.validate()?;
        self.system.validate()
    }
}

fn check_range(name: &str, r: [f64; 2], strictly_positive: bool) -> Result<()> {
    let ok = r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] && (!strictly_positive || r[0] > 0.0);
    if ok && r[0] >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} is empty or invalid: {r:?}")))
    }
}

fn uniform(rng: &mut impl Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

/// Path loss in dB at distance `d` meters: `34 + 40 log10(d)`.
pub fn path_loss_db(distance_m: f64) -> f64 {
    34.0 + 40.0 * distance_m.log10()
}

/// Mean SINR in dB from received signal power and interference, all in mW.
pub fn mean_sinr_db(signal_mw: f64, noise_mw: f64, interference_mw: f64) -> f64 {
    10.0 * (signal_mw / (noise_mw + interference_mw)).log10()
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

fn point_in_disk(rng: &mut impl Rng, radius: f64) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    [r * phi.cos(), r * phi.sin()]
}

/// Draws a scenario: MUs and BSs uniform in a disk, per-link mean SINR from
/// path loss, noise and `κ`-scaled interference of the other MUs.
pub fn generate_scenario(cfg: &GenerationConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let stations: Vec<BaseStation> = (0..cfg.num_stations)
        .map(|id| BaseStation {
            id,
            position: point_in_disk(&mut rng, cfg.radius_m),
            bandwidth_hz: cfg.bandwidth_hz,
        })
        .collect();

    let users: Vec<MobileUser> = (0..cfg.num_users)
        .map(|id| MobileUser {
            id,
            position: point_in_disk(&mut rng, cfg.radius_m),
            arrival_rate: cfg.arrival_rate,
            matching_degree: uniform(&mut rng, cfg.tau_range),
            mu_match: 1.0 / cfg.mean_match_time_s,
            mu_mismatch: 1.0 / cfg.mean_mismatch_time_s,
            min_rate: uniform(&mut rng, cfg.min_rate_range),
            transmit_power_dbm: cfg.transmit_power_dbm,
            beta_std: cfg.beta_std,
        })
        .collect();

    // received[i][j]: power of MU i at BS j, mW
    let received: Vec<Vec<f64>> = users
        .iter()
        .map(|u| {
            stations
                .iter()
                .map(|s| {
                    let d = distance(u.position, s.position).max(cfg.min_distance_m);
                    dbm_to_mw(u.transmit_power_dbm - path_loss_db(d))
                })
                .collect()
        })
        .collect();
    let total_at: Vec<f64> = (0..stations.len())
        .map(|j| received.iter().map(|row| row[j]).sum())
        .collect();
    let noise_mw = dbm_to_mw(cfg.noise_dbm);

    let links = users
        .iter()
        .enumerate()
        .map(|(i, u)| {
            stations
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let signal = received[i][j];
                    let interference = cfg.interference_factor * (total_at[j] - signal).max(0.0);
                    LinkModel {
                        mu_id: u.id,
                        bs_id: s.id,
                        mean_sinr_db: mean_sinr_db(signal, noise_mw, interference),
                        sinr_std_db: cfg.sinr_std_db,
                        b2m: cfg.b2m.sample(&mut rng),
                        rho: uniform(&mut rng, cfg.rho_range),
                    }
                })
                .collect()
        })
        .collect();

    let scenario = Scenario {
        system: cfg.system.clone(),
        users,
        stations,
        links,
        seed: Some(cfg.seed),
        optimizer: None,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_distance_gives_base_loss() {
        assert_eq!(path_loss_db(1.0), 34.0);
    }

    #[test]
    fn single_pair_at_unit_distance() {
        let cfg = GenerationConfig {
            num_users: 1,
            num_stations: 1,
            radius_m: 1e-6,
            interference_factor: 0.0,
            ..Default::default()
        };
        let s = generate_scenario(&cfg).unwrap();
        // distance clamps to 1 m: 20 dBm - 34 dB - (-111.45 dBm)
        let expected = 20.0 - 34.0 + 111.45;
        assert!((s.links[0][0].mean_sinr_db - expected).abs() < 1e-9);
    }

    #[test]
    fn sinr_non_increasing_in_distance() {
        let noise = dbm_to_mw(-111.45);
        let mut last = f64::INFINITY;
        for d in [1.0, 2.0, 10.0, 50.0, 120.0, 300.0, 600.0] {
            let s = dbm_to_mw(20.0 - path_loss_db(d));
            let v = mean_sinr_db(s, noise, 1e-9);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            GenerationConfig { radius_m: 0.0, ..Default::default() },
            GenerationConfig { num_users: 0, ..Default::default() },
            GenerationConfig { tau_range: [0.9, 0.6], ..Default::default() },
            GenerationConfig { rho_range: [0.0, 1e-4], ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(generate_scenario(&cfg), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn default_scenario_is_complete() {
        let s = generate_scenario(&GenerationConfig { seed: 42, ..Default::default() }).unwrap();
        assert_eq!(s.links.iter().map(Vec::len).sum::<usize>(), 2000);
        assert!(s.links.iter().flatten().all(|l| l.mean_sinr_db.is_finite()));
    }

    #[test]
    fn same_seed_same_scenario() {
        let cfg = GenerationConfig { seed: 9, num_users: 30, num_stations: 4, ..Default::default() };
        assert_eq!(generate_scenario(&cfg).unwrap(), generate_scenario(&cfg).unwrap());
    }
}
