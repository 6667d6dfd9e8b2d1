//! Independent checks on the analytic results: brute-force summation of the
//! product form, an exact Markov chain solve, and a discrete-event
//! simulation of the star network.

mod ctmc;
mod des;
mod enumerate;

use thiserror::Error;

use crate::network::NetworkError;

pub use ctmc::{ctmc_throughput, CtmcResult, CTMC_STATE_LIMIT};
pub use des::{simulate, DesConfig, DesEstimate, Estimate, Horizon, TravelDistribution};
pub use enumerate::{enumerate_product_form, state_count, Compositions, EnumerationResult, ENUMERATION_STATE_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("state space has {states} states, limit is {limit}")]
    StateSpaceTooLarge { states: u128, limit: u128 },
    #[error("node {0} is an infinite server with zero mean, which has no finite rate")]
    ZeroMeanInfiniteServer(usize),
    #[error("stationary solve failed: {0}")]
    Solve(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}
