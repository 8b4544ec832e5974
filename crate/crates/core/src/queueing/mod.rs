//! Analytic queue metrics for the semantic-coding queue (M/G/1) and the
//! packet-transmission queue (finite-buffer Markov chain).

mod dist;
mod link;
mod ptq;
mod scq;

pub use dist::{
    arrival_distribution, departure_cdf, departure_distribution, departure_pmf, poisson_pmf, ArrivalSpec,
    DepartureSpec, TruncatedPmf, POISSON_TAIL, SINR_QUANTILE,
};
pub use link::{departure_spec, link_metrics, link_metrics_with, mean_message_rate, ptq_arrival_rate, LinkQueueMetrics};
pub use ptq::{
    analyze_ptq, build_chain, build_chain_from_pmfs, expected_drops, mean_queue, ptq_metrics, stationarity_residual,
    steady_state, transition_matrix, transition_matrix_from_pmfs, PtqAnalysis, PtqChain,
};
pub use scq::{merged_arrival_rate, scq_latency, scq_latency_raw, ScqAnalysis, VarianceModel};
