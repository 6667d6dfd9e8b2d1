use crate::network::{ClosedNetwork, NetworkError, VisitRatios};

use super::OracleError;

pub const ENUMERATION_STATE_LIMIT: u128 = 1_000_000;

/// `C(N + I - 1, I - 1)`, the number of ways to place `N` customers on `I` nodes.
pub fn state_count(population: usize, nodes: usize) -> u128 {
    if nodes == 0 {
        return u128::from(population == 0);
    }
    let (n, k) = ((population + nodes - 1) as u128, (nodes - 1) as u128);
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul(n - i) / (i + 1);
    }
    c
}

/// All compositions of `population` into `parts` non-negative parts, in
/// ascending lexicographic order.
#[derive(Clone, Debug)]
pub struct Compositions {
    current: Option<Vec<usize>>,
}

impl Compositions {
    pub fn new(population: usize, parts: usize) -> Self {
        let current = (parts > 0).then(|| {
            let mut v = vec![0; parts];
            v[parts - 1] = population;
            v
        });
        Self { current }
    }
}

impl Iterator for Compositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        let mut suffix = next[k - 1];
        for i in (0..k.saturating_sub(1)).rev() {
            if suffix > 0 {
                next[i] += 1;
                for v in &mut next[i + 1..k - 1] {
                    *v = 0;
                }
                next[k - 1] = suffix - 1;
                self.current = Some(next);
                break;
            }
            suffix += next[i];
        }
        Some(out)
    }
}

#[derive(Clone, Debug)]
pub struct EnumerationResult {
    /// Normalization constant for the visit ratios supplied.
    pub g: f64,
    pub states: Vec<Vec<usize>>,
    pub probabilities: Vec<f64>,
}

impl EnumerationResult {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// `P(n_node = k)` for `k = 0..=N`.
    pub fn marginal(&self, node: usize) -> Vec<f64> {
        let n: usize = self.states.first().map_or(0, |s| s.iter().sum());
        let mut p = vec![0.0; n + 1];
        for (s, q) in self.states.iter().zip(&self.probabilities) {
            p[s[node]] += q;
        }
        p
    }
}

/// Sums the unnormalized product form `Π_j g_j(n_j)` over every state.
pub fn enumerate_product_form(net: &ClosedNetwork, visits: &VisitRatios) -> Result<EnumerationResult, OracleError> {
    let (n, i) = (net.population(), net.len());
    if visits.len() != i {
        return Err(NetworkError::Dimension(format!("{} visit ratios for {} nodes", visits.len(), i)).into());
    }
    let states = state_count(n, i);
    if states > ENUMERATION_STATE_LIMIT {
        return Err(OracleError::StateSpaceTooLarge { states, limit: ENUMERATION_STATE_LIMIT });
    }
    // factors[j][k] = Π_{m≤k} η_j/μ_j(m)
    let factors: Vec<Vec<f64>> = net
        .stations()
        .iter()
        .zip(visits.values())
        .map(|(rate, &eta)| {
            let mut f = vec![1.0];
            for m in 1..=n {
                f.push(f[m - 1] * rate.demand_ratio(eta, m));
            }
            f
        })
        .collect();
    let mut all = Vec::with_capacity(states as usize);
    let mut weights = Vec::with_capacity(states as usize);
    for s in Compositions::new(n, i) {
        weights.push(s.iter().enumerate().map(|(j, &k)| factors[j][k]).product::<f64>());
        all.push(s);
    }
    let g: f64 = weights.iter().sum();
    let probabilities = weights.iter().map(|w| w / g).collect();
    Ok(EnumerationResult { g, states: all, probabilities })
}
