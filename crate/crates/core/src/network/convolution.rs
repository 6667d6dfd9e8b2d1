//! Buzen's convolution for normalization constants.
//!
//! Every value is carried twice: as an extended-range [`Scaled`] number and
//! as a natural logarithm accumulated with log-sum-exp. The two routes share
//! nothing but the per-node factors, so their agreement is a cheap health
//! check on the table.

use super::scaled::{log_sum_exp, Scaled};
use super::{ClosedNetwork, NetworkError, ServiceRate, VisitRatios};

/// Normalization constants `G(0..=N)` of a closed network.
#[derive(Clone, Debug)]
pub struct ConvolutionTable {
    values: Vec<Scaled>,
    log_values: Vec<f64>,
    node_order: Vec<usize>,
}

impl ConvolutionTable {
    pub(crate) fn from_parts(values: Vec<Scaled>, log_values: Vec<f64>, node_order: Vec<usize>) -> Self {
        debug_assert_eq!(values.len(), log_values.len());
        Self { values, log_values, node_order }
    }

    /// Largest population covered.
    pub fn population(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, m: usize) -> Scaled {
        self.values[m]
    }

    /// `G(m)` as a double; may saturate for large tables, prefer [`Self::ratio`].
    pub fn g(&self, m: usize) -> f64 {
        self.values[m].to_f64()
    }

    /// `ln G(m)` from the log-domain route.
    pub fn ln_g(&self, m: usize) -> f64 {
        self.log_values[m]
    }

    /// `G(a) / G(b)`.
    pub fn ratio(&self, a: usize, b: usize) -> f64 {
        self.values[a].ratio(self.values[b])
    }

    pub fn node_order(&self) -> &[usize] {
        &self.node_order
    }

    pub fn values(&self) -> &[Scaled] {
        &self.values
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// Largest relative disagreement between the scaled and the log-domain
    /// values over all populations.
    pub fn log_discrepancy(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.log_values)
            .map(|(v, l)| (l - v.ln()).exp_m1().abs())
            .fold(0.0, f64::max)
    }
}

/// Incremental Buzen convolution: the population can be raised one step at a
/// time, reusing all columns computed so far.
#[derive(Clone, Debug)]
pub struct Convolver {
    rates: Vec<ServiceRate>,
    visits: Vec<f64>,
    node_order: Vec<usize>,
    factors: Vec<Vec<Scaled>>,
    log_factors: Vec<Vec<f64>>,
    // columns[j][m] = G(m, first j+1 nodes in node_order)
    columns: Vec<Vec<Scaled>>,
    log_columns: Vec<Vec<f64>>,
    population: usize,
}

impl Convolver {
    pub fn new(rates: &[ServiceRate], visits: &[f64]) -> Result<Self, NetworkError> {
        let order: Vec<usize> = (0..rates.len()).collect();
        Self::with_order(rates, visits, &order)
    }

    /// Convolves nodes in the given order (a permutation or a subset of node
    /// indices).
    pub fn with_order(rates: &[ServiceRate], visits: &[f64], order: &[usize]) -> Result<Self, NetworkError> {
        if rates.len() != visits.len() {
            return Err(NetworkError::Dimension(format!("{} rates for {} visit ratios", rates.len(), visits.len())));
        }
        let mut seen = vec![false; rates.len()];
        for &i in order {
            if i >= rates.len() {
                return Err(NetworkError::NodeIndex(i));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(NetworkError::Dimension(format!("node {i} repeated in order")));
            }
        }
        for (i, v) in visits.iter().enumerate() {
            if !(*v >= 0.0 && v.is_finite()) {
                return Err(NetworkError::InvalidVisits(format!("visit ratio of node {i} is {v}")));
            }
        }
        let k = order.len();
        Ok(Self {
            rates: order.iter().map(|&i| rates[i].clone()).collect(),
            visits: order.iter().map(|&i| visits[i]).collect(),
            node_order: order.to_vec(),
            factors: vec![vec![Scaled::ONE]; k],
            log_factors: vec![vec![0.0]; k],
            columns: vec![vec![Scaled::ONE]; k],
            log_columns: vec![vec![0.0]; k],
            population: 0,
        })
    }

    pub fn population(&self) -> usize {
        self.population
    }

    /// `G(m)` over all nodes handled by this convolver.
    pub fn value(&self, m: usize) -> Scaled {
        match self.columns.last() {
            Some(col) => col[m],
            None if m == 0 => Scaled::ONE,
            None => Scaled::ZERO,
        }
    }

    pub fn log_value(&self, m: usize) -> f64 {
        match self.log_columns.last() {
            Some(col) => col[m],
            None if m == 0 => 0.0,
            None => f64::NEG_INFINITY,
        }
    }

    /// Product-form factor `g(n) = Π_{k≤n} η/μ(k)` of the `pos`-th node in
    /// convolution order.
    pub fn factor(&self, pos: usize, n: usize) -> Scaled {
        self.factors[pos][n]
    }

    pub fn extend_to(&mut self, population: usize) -> Result<(), NetworkError> {
        while self.population < population {
            self.push()?;
        }
        Ok(())
    }

    /// Adds population `m = population() + 1`. Fails if `G(m)` leaves the
    /// representable range or vanishes.
    pub fn push(&mut self) -> Result<(), NetworkError> {
        self.advance(false)
    }

    fn advance(&mut self, allow_zero: bool) -> Result<(), NetworkError> {
        let m = self.population + 1;
        let range_err = NetworkError::NumericalRange { population: m };
        let mut steps = Vec::with_capacity(self.rates.len());
        for (rate, &visit) in self.rates.iter().zip(&self.visits) {
            let ratio = rate.demand_ratio(visit, m);
            steps.push((Scaled::from_f64(ratio).ok_or(range_err.clone())?, ratio.ln()));
        }
        let mut row = Vec::with_capacity(self.rates.len());
        let mut terms = Vec::with_capacity(m + 1);
        for (j, &(step, log_step)) in steps.iter().enumerate() {
            let g_m = self.factors[j][m - 1].mul(step);
            let lg_m = self.log_factors[j][m - 1] + log_step;
            let entry = if j == 0 {
                (g_m, lg_m)
            } else {
                let prev = &self.columns[j - 1];
                let prev_log = &self.log_columns[j - 1];
                let g = &self.factors[j];
                let lg = &self.log_factors[j];
                // l = 0 pairs with g_j(m), which is not stored yet
                let mut acc = prev[0].mul(g_m);
                terms.clear();
                terms.push(prev_log[0] + lg_m);
                for l in 1..=m {
                    acc = acc.add(row_value(&row, j - 1, prev, l, m).mul(g[m - l]));
                    terms.push(row_log(&row, j - 1, prev_log, l, m) + lg[m - l]);
                }
                (acc, log_sum_exp(&terms))
            };
            row.push((g_m, lg_m, entry.0, entry.1));
        }
        if let Some(&(_, _, top, log_top)) = row.last() {
            let vanished = top.is_zero() && !allow_zero;
            if vanished || !top.is_finite() || log_top.is_nan() || log_top == f64::INFINITY {
                return Err(range_err);
            }
        }
        for (j, (g_m, lg_m, value, log_value)) in row.into_iter().enumerate() {
            self.factors[j].push(g_m);
            self.log_factors[j].push(lg_m);
            self.columns[j].push(value);
            self.log_columns[j].push(log_value);
        }
        self.population = m;
        Ok(())
    }

    pub fn table(&self) -> ConvolutionTable {
        let values = (0..=self.population).map(|m| self.value(m)).collect();
        let log_values = (0..=self.population).map(|m| self.log_value(m)).collect();
        ConvolutionTable::from_parts(values, log_values, self.node_order.clone())
    }
}

// G(l, j) where row m of column j may still be pending in `row`.
fn row_value(row: &[(Scaled, f64, Scaled, f64)], j: usize, stored: &[Scaled], l: usize, m: usize) -> Scaled {
    if l == m {
        row[j].2
    } else {
        stored[l]
    }
}

fn row_log(row: &[(Scaled, f64, Scaled, f64)], j: usize, stored: &[f64], l: usize, m: usize) -> f64 {
    if l == m {
        row[j].3
    } else {
        stored[l]
    }
}

fn check_visits(net: &ClosedNetwork, visits: &VisitRatios) -> Result<(), NetworkError> {
    if visits.len() != net.len() {
        return Err(NetworkError::Dimension(format!("{} visit ratios for {} nodes", visits.len(), net.len())));
    }
    Ok(())
}

/// `G(0..=N)` for the network's population.
pub fn buzen_convolve(net: &ClosedNetwork, visits: &VisitRatios) -> Result<ConvolutionTable, NetworkError> {
    let order: Vec<usize> = (0..net.len()).collect();
    buzen_convolve_ordered(net, visits, &order)
}

/// As [`buzen_convolve`] with an explicit node permutation.
pub fn buzen_convolve_ordered(
    net: &ClosedNetwork,
    visits: &VisitRatios,
    order: &[usize],
) -> Result<ConvolutionTable, NetworkError> {
    check_visits(net, visits)?;
    if order.len() != net.len() {
        return Err(NetworkError::Dimension("order must be a permutation of all nodes".into()));
    }
    let mut conv = Convolver::with_order(net.stations(), visits.values(), order)?;
    conv.extend_to(net.population())?;
    Ok(conv.table())
}

/// Overall throughput `G(N-1) / G(N)`, in units of the visit ratios used to
/// build the table.
pub fn throughput(table: &ConvolutionTable, population: usize) -> Result<f64, NetworkError> {
    if population == 0 {
        return Err(NetworkError::ZeroPopulation);
    }
    if population > table.population() {
        return Err(NetworkError::TableTooShort { available: table.population(), requested: population });
    }
    Ok(table.ratio(population - 1, population))
}

/// Per-node throughputs `η_j · G(N-1) / G(N)`.
pub fn node_throughputs(
    table: &ConvolutionTable,
    visits: &VisitRatios,
    population: usize,
) -> Result<Vec<f64>, NetworkError> {
    let th = throughput(table, population)?;
    Ok(visits.values().iter().map(|v| v * th).collect())
}

/// Stationary queue-length distribution of `node` at the network's population:
/// `P(n = k) = g(k) · G_without(N - k) / G(N)`.
pub fn marginal_distribution(
    net: &ClosedNetwork,
    visits: &VisitRatios,
    table: &ConvolutionTable,
    node: usize,
) -> Result<Vec<f64>, NetworkError> {
    check_visits(net, visits)?;
    if node >= net.len() {
        return Err(NetworkError::NodeIndex(node));
    }
    let n = net.population();
    if n > table.population() {
        return Err(NetworkError::TableTooShort { available: table.population(), requested: n });
    }
    let others: Vec<usize> = (0..net.len()).filter(|&i| i != node).collect();
    let mut rest = Convolver::with_order(net.stations(), visits.values(), &others)?;
    let mut own = Convolver::with_order(net.stations(), visits.values(), &[node])?;
    for _ in 0..n {
        rest.advance(true)?;
        own.advance(true)?;
    }
    let total = table.value(n);
    Ok((0..=n).map(|k| own.factor(0, k).mul(rest.value(n - k)).ratio(total)).collect())
}
