use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bit-rate-to-message-rate transformation of a semantic link.
///
/// Both variants are concave, increasing and pass through the origin. The
/// piecewise-linear form saturates after its last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum B2mFunction {
    /// `Re(r) = slope * r`, slope in msg/bit.
    Linear { slope: f64 },
    /// Breakpoints `(bit/s, msg/s)` starting at the origin.
    PiecewiseLinear { breakpoints: Vec<(f64, f64)> },
}

/// A linear piece of a B2M function over `[start, end)` in bit/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// msg/bit
    pub slope: f64,
}

impl B2mFunction {
    pub(crate) fn validate(&self) -> std::result::Result<(), String> {
        match self {
            B2mFunction::Linear { slope } => {
                if *slope > 0.0 && slope.is_finite() {
                    Ok(())
                } else {
                    Err(format!("linear slope must be positive, got {slope}"))
                }
            }
            B2mFunction::PiecewiseLinear { breakpoints } => {
                if breakpoints.len() < 2 {
                    return Err("needs at least two breakpoints".into());
                }
                if breakpoints[0] != (0.0, 0.0) {
                    return Err("first breakpoint must be (0, 0)".into());
                }
                let mut prev_slope = f64::INFINITY;
                for w in breakpoints.windows(2) {
                    let (r0, m0) = w[0];
                    let (r1, m1) = w[1];
                    if !(r1 > r0 && m1 > m0) || !r1.is_finite() || !m1.is_finite() {
                        return Err("breakpoints must be strictly increasing in both coordinates".into());
                    }
                    let slope = (m1 - m0) / (r1 - r0);
                    if slope > prev_slope * (1.0 + 1e-12) {
                        return Err("segment slopes must be non-increasing".into());
                    }
                    prev_slope = slope;
                }
                Ok(())
            }
        }
    }

    /// Message rate reached at `bit_rate` bit/s.
    pub fn eval(&self, bit_rate: f64) -> f64 {
        debug_assert!(bit_rate >= 0.0);
        match self {
            B2mFunction::Linear { slope } => slope * bit_rate,
            B2mFunction::PiecewiseLinear { breakpoints } => {
                let &(r_last, m_last) = breakpoints.last().expect("validated");
                if bit_rate >= r_last {
                    return m_last;
                }
                let k = breakpoints.partition_point(|&(r, _)| r <= bit_rate);
                let (r0, m0) = breakpoints[k - 1];
                let (r1, m1) = breakpoints[k];
                m0 + (m1 - m0) * (bit_rate - r0) / (r1 - r0)
            }
        }
    }

    /// Smallest bit rate reaching `msg_rate`.
    pub fn invert(&self, msg_rate: f64) -> Result<f64> {
        if !(msg_rate >= 0.0) {
            return Err(Error::Config(format!("negative message rate {msg_rate}")));
        }
        match self {
            B2mFunction::Linear { slope } => Ok(msg_rate / slope),
            B2mFunction::PiecewiseLinear { breakpoints } => {
                let &(r_last, m_last) = breakpoints.last().expect("validated");
                if msg_rate > m_last {
                    return Err(Error::UnreachableRate {
                        requested: msg_rate,
                        saturation: m_last,
                    });
                }
                if msg_rate == m_last {
                    return Ok(r_last);
                }
                let k = breakpoints.partition_point(|&(_, m)| m <= msg_rate);
                let (r0, m0) = breakpoints[k - 1];
                let (r1, m1) = breakpoints[k];
                Ok(r0 + (r1 - r0) * (msg_rate - m0) / (m1 - m0))
            }
        }
    }

    /// Largest reachable message rate, `None` when unbounded.
    pub fn saturation(&self) -> Option<f64> {
        match self {
            B2mFunction::Linear { .. } => None,
            B2mFunction::PiecewiseLinear { breakpoints } => breakpoints.last().map(|b| b.1),
        }
    }

    /// Linear pieces in increasing bit-rate order, ending with an unbounded
    /// piece (slope zero after saturation).
    pub fn segments(&self) -> Vec<Segment> {
        match self {
            B2mFunction::Linear { slope } => vec![Segment {
                start: 0.0,
                end: f64::INFINITY,
                slope: *slope,
            }],
            B2mFunction::PiecewiseLinear { breakpoints } => {
                let mut out: Vec<Segment> = breakpoints
                    .windows(2)
                    .map(|w| Segment {
                        start: w[0].0,
                        end: w[1].0,
                        slope: (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
                    })
                    .collect();
                out.push(Segment {
                    start: breakpoints.last().expect("validated").0,
                    end: f64::INFINITY,
                    slope: 0.0,
                });
                out
            }
        }
    }
}
