//! Analysis and resource optimization for hybrid semantic/bit communication
//! networks.
//!
//! A mobile user (MU) reaches a base station (BS) either through semantic
//! communication (SemCom), where packets pass a semantic-coding queue (SCQ)
//! before the packet-transmission queue (PTQ), or through plain bit
//! communication (BitCom), which only has the PTQ. The crate provides
//!
//! - [`scenario`]: network snapshots, path loss, bit-rate-to-message-rate
//!   (B2M) functions and scenario files,
//! - [`queueing`]: Pollaczek–Khintchine latency of the SCQ and the
//!   finite-buffer Markov chain of the PTQ,
//! - [`sim`]: Monte Carlo counterparts of both queues,
//! - [`optimizer`]: bandwidth thresholds, the Lagrange dual loop for user
//!   association and mode selection, preference-list repair, per-BS
//!   bandwidth allocation and the benchmark schemes.

pub mod error;
pub mod optimizer;
pub mod queueing;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Communication mode of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    SemCom,
    BitCom,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::SemCom, Mode::BitCom];
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::SemCom => f.write_str("semcom"),
            Mode::BitCom => f.write_str("bitcom"),
        }
    }
}
