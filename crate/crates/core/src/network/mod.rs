//! Closed product-form (Gordon–Newell) networks: traffic equations,
//! convolution of normalization constants, throughput and marginals.

mod convolution;
pub mod scaled;
mod traffic;

use nalgebra::DMatrix;
use thiserror::Error;

pub use convolution::{buzen_convolve, marginal_distribution, node_throughputs, throughput, ConvolutionTable, Convolver};
pub use scaled::Scaled;
pub use traffic::{solve_traffic, VisitRatios};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("routing row {row} sums to {sum}, expected 1")]
    RoutingRowSum { row: usize, sum: f64 },
    #[error("routing entry ({row}, {col}) = {value} is not a probability")]
    RoutingEntry { row: usize, col: usize, value: f64 },
    #[error("routing matrix is reducible")]
    Reducible,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid service rate at node {node}: {message}")]
    InvalidRate { node: usize, message: String },
    #[error("invalid visit ratios: {0}")]
    InvalidVisits(String),
    #[error("normalization constant out of numerical range at population {population}")]
    NumericalRange { population: usize },
    #[error("throughput needs a population of at least 1")]
    ZeroPopulation,
    #[error("node {0} does not exist")]
    NodeIndex(usize),
    #[error("table covers populations up to {available}, {requested} requested")]
    TableTooShort { available: usize, requested: usize },
}

/// Service rate function `n ↦ μ(n)` of a station.
#[derive(Clone, Debug, PartialEq)]
pub enum ServiceRate {
    /// `μ · min(n, s)`.
    MultiServer { rate: f64, servers: u32 },
    /// Every customer is served at once: `n / mean`. A zero mean is allowed
    /// and means the station is passed through instantly.
    InfiniteServer { mean: f64 },
    /// Arbitrary non-decreasing rates: `μ(n) = rates[n-1]`, constant past
    /// the end of the table.
    Table(Vec<f64>),
}

impl ServiceRate {
    pub fn multi_server(rate: f64, servers: u32) -> Self {
        ServiceRate::MultiServer { rate, servers }
    }

    pub fn infinite_server(mean: f64) -> Self {
        ServiceRate::InfiniteServer { mean }
    }

    pub fn rate(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self {
            ServiceRate::MultiServer { rate, servers } => rate * n.min(*servers as usize) as f64,
            ServiceRate::InfiniteServer { mean } => n as f64 / mean,
            ServiceRate::Table(rates) => rates[(n - 1).min(rates.len() - 1)],
        }
    }

    /// `visit / μ(n)` for `n ≥ 1`, finite even for a zero-mean infinite server.
    pub fn demand_ratio(&self, visit: f64, n: usize) -> f64 {
        debug_assert!(n >= 1);
        match self {
            ServiceRate::InfiniteServer { mean } => visit * mean / n as f64,
            _ => visit / self.rate(n),
        }
    }

    /// Rate the station approaches as its queue grows, `inf` for infinite servers.
    pub fn saturation_rate(&self) -> f64 {
        match self {
            ServiceRate::MultiServer { rate, servers } => rate * *servers as f64,
            ServiceRate::InfiniteServer { .. } => f64::INFINITY,
            ServiceRate::Table(rates) => *rates.last().expect("validated non-empty"),
        }
    }

    pub fn is_infinite_server(&self) -> bool {
        matches!(self, ServiceRate::InfiniteServer { .. })
    }

    fn validate(&self, node: usize) -> Result<(), NetworkError> {
        let bad = |message: &str| Err(NetworkError::InvalidRate { node, message: message.into() });
        match self {
            ServiceRate::MultiServer { rate, servers } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return bad("rate must be positive and finite");
                }
                if *servers == 0 {
                    return bad("at least one server is required");
                }
            }
            ServiceRate::InfiniteServer { mean } => {
                if !(*mean >= 0.0 && mean.is_finite()) {
                    return bad("mean service time must be non-negative and finite");
                }
            }
            ServiceRate::Table(rates) => {
                if rates.is_empty() {
                    return bad("rate table is empty");
                }
                if rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return bad("rates must be positive and finite");
                }
                if rates.windows(2).any(|w| w[1] < w[0]) {
                    return bad("rates must be non-decreasing");
                }
            }
        }
        Ok(())
    }
}

/// A closed network with a fixed population cycling through `stations`
/// according to a stochastic routing matrix.
#[derive(Clone, Debug)]
pub struct ClosedNetwork {
    stations: Vec<ServiceRate>,
    routing: DMatrix<f64>,
    population: usize,
}

impl ClosedNetwork {
    pub fn new(stations: Vec<ServiceRate>, routing: DMatrix<f64>, population: usize) -> Result<Self, NetworkError> {
        let n = stations.len();
        if n == 0 {
            return Err(NetworkError::Dimension("network has no stations".into()));
        }
        if routing.nrows() != n || routing.ncols() != n {
            return Err(NetworkError::Dimension(format!(
                "routing is {}x{} for {} stations",
                routing.nrows(),
                routing.ncols(),
                n
            )));
        }
        for (i, s) in stations.iter().enumerate() {
            s.validate(i)?;
        }
        validate_stochastic(&routing)?;
        if !is_irreducible(&routing) {
            return Err(NetworkError::Reducible);
        }
        Ok(Self { stations, routing, population })
    }

    /// Cyclic network `0 → 1 → … → n-1 → 0`.
    pub fn cycle(stations: Vec<ServiceRate>, population: usize) -> Result<Self, NetworkError> {
        let n = stations.len();
        let mut routing = DMatrix::zeros(n, n);
        for i in 0..n {
            routing[(i, (i + 1) % n)] = 1.0;
        }
        Self::new(stations, routing, population)
    }

    pub fn stations(&self) -> &[ServiceRate] {
        &self.stations
    }

    pub fn routing(&self) -> &DMatrix<f64> {
        &self.routing
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn with_population(&self, population: usize) -> ClosedNetwork {
        ClosedNetwork { population, ..self.clone() }
    }
}

fn validate_stochastic(routing: &DMatrix<f64>) -> Result<(), NetworkError> {
    for row in 0..routing.nrows() {
        let mut sum = 0.0;
        for col in 0..routing.ncols() {
            let value = routing[(row, col)];
            if !(0.0..=1.0).contains(&value) {
                return Err(NetworkError::RoutingEntry { row, col, value });
            }
            sum += value;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(NetworkError::RoutingRowSum { row, sum });
        }
    }
    Ok(())
}

/// Strong connectivity of the positive-entry graph.
pub(crate) fn is_irreducible(routing: &DMatrix<f64>) -> bool {
    let n = routing.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let p = if forward { routing[(i, j)] } else { routing[(j, i)] };
                if p > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_shapes() {
        let ms = ServiceRate::multi_server(2.0, 3);
        assert_eq!(ms.rate(0), 0.0);
        assert_eq!(ms.rate(2), 4.0);
        assert_eq!(ms.rate(9), 6.0);
        let is = ServiceRate::infinite_server(0.5);
        assert_eq!(is.rate(3), 6.0);
        assert_eq!(is.demand_ratio(0.5, 2), 0.125);
        assert_eq!(ServiceRate::infinite_server(0.0).demand_ratio(1.0, 1), 0.0);
        let t = ServiceRate::Table(vec![1.0, 1.5]);
        assert_eq!(t.rate(1), 1.0);
        assert_eq!(t.rate(5), 1.5);
    }

    #[test]
    fn rejects_bad_rows_and_reducible_routing() {
        let st = vec![ServiceRate::multi_server(1.0, 1); 2];
        let bad_sum = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.0, 1.0]);
        assert!(matches!(ClosedNetwork::new(st.clone(), bad_sum, 1), Err(NetworkError::RoutingRowSum { row: 0, .. })));
        let reducible = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(ClosedNetwork::new(st.clone(), reducible, 1).unwrap_err(), NetworkError::Reducible);
        let negative = DMatrix::from_row_slice(2, 2, &[-0.5, 1.5, 1.0, 0.0]);
        assert!(matches!(ClosedNetwork::new(st, negative, 1), Err(NetworkError::RoutingEntry { .. })));
    }

    #[test]
    fn rejects_bad_rates() {
        let st = vec![ServiceRate::multi_server(0.0, 1), ServiceRate::multi_server(1.0, 1)];
        assert!(matches!(ClosedNetwork::cycle(st, 1), Err(NetworkError::InvalidRate { node: 0, .. })));
        let st = vec![ServiceRate::Table(vec![2.0, 1.0])];
        assert!(matches!(ClosedNetwork::cycle(st, 1), Err(NetworkError::InvalidRate { .. })));
    }
}
