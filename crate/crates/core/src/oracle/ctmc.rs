use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::network::ClosedNetwork;

use super::enumerate::{state_count, Compositions};
use super::OracleError;

pub const CTMC_STATE_LIMIT: u128 = 100_000;
const DENSE_LIMIT: usize = 2500;
const RESIDUAL_TOL: f64 = 1e-10;
// under-relaxation; plain Gauss-Seidel can cycle on periodic routing
const RELAXATION: f64 = 0.9;

#[derive(Clone, Debug)]
pub struct CtmcResult {
    pub states: Vec<Vec<usize>>,
    pub stationary: Vec<f64>,
    /// Service completions per time unit at each node.
    pub throughputs: Vec<f64>,
    /// `‖πQ‖∞`.
    pub residual: f64,
}

struct Generator {
    // (source, rate) pairs per target state, self-transitions excluded
    incoming: Vec<Vec<(usize, f64)>>,
    outflow: Vec<f64>,
}

/// Stationary distribution of the network's Markov chain, solved directly
/// from the global balance equations.
pub fn ctmc_throughput(net: &ClosedNetwork) -> Result<CtmcResult, OracleError> {
    let (n, k) = (net.population(), net.len());
    let count = state_count(n, k);
    if count > CTMC_STATE_LIMIT {
        return Err(OracleError::StateSpaceTooLarge { states: count, limit: CTMC_STATE_LIMIT });
    }
    for (i, s) in net.stations().iter().enumerate() {
        if s.is_infinite_server() && n > 0 && !s.rate(1).is_finite() {
            return Err(OracleError::ZeroMeanInfiniteServer(i));
        }
    }
    let states: Vec<Vec<usize>> = Compositions::new(n, k).collect();
    let index: HashMap<Vec<usize>, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let gen = build_generator(net, &states, &index);
    let stationary = if states.len() <= DENSE_LIMIT { dense_solve(&gen)? } else { gauss_seidel(&gen)? };
    let residual = balance_residual(&gen, &stationary);
    if residual >= RESIDUAL_TOL {
        return Err(OracleError::Solve(format!("balance residual {residual:e}")));
    }
    let throughputs = (0..k)
        .map(|j| states.iter().zip(&stationary).map(|(s, p)| p * net.stations()[j].rate(s[j])).sum())
        .collect();
    Ok(CtmcResult { states, stationary, throughputs, residual })
}

fn build_generator(net: &ClosedNetwork, states: &[Vec<usize>], index: &HashMap<Vec<usize>, usize>) -> Generator {
    let r = net.routing();
    let mut incoming = vec![Vec::new(); states.len()];
    let mut outflow = vec![0.0; states.len()];
    for (from, s) in states.iter().enumerate() {
        for i in 0..s.len() {
            if s[i] == 0 {
                continue;
            }
            let mu = net.stations()[i].rate(s[i]);
            for j in 0..s.len() {
                let p = r[(i, j)];
                if j == i || p == 0.0 {
                    continue;
                }
                let mut t = s.clone();
                t[i] -= 1;
                t[j] += 1;
                let to = index[&t];
                incoming[to].push((from, mu * p));
                outflow[from] += mu * p;
            }
        }
    }
    Generator { incoming, outflow }
}

/// `Qᵀπ = 0` with the last equation replaced by `Σπ = 1`.
fn dense_solve(gen: &Generator) -> Result<Vec<f64>, OracleError> {
    let m = gen.outflow.len();
    let mut a = DMatrix::zeros(m, m);
    for (to, inc) in gen.incoming.iter().enumerate() {
        a[(to, to)] -= gen.outflow[to];
        for &(from, rate) in inc {
            a[(to, from)] += rate;
        }
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(m);
    b[m - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or_else(|| OracleError::Solve("singular generator".into()))?;
    Ok(x.iter().map(|v| v.max(0.0)).collect())
}

fn gauss_seidel(gen: &Generator) -> Result<Vec<f64>, OracleError> {
    let m = gen.outflow.len();
    let mut pi = vec![1.0 / m as f64; m];
    let scale = gen.outflow.iter().copied().fold(0.0, f64::max);
    for sweep in 1..=100_000 {
        for s in 0..m {
            if gen.outflow[s] > 0.0 {
                let update = gen.incoming[s].iter().map(|&(t, q)| pi[t] * q).sum::<f64>() / gen.outflow[s];
                pi[s] += RELAXATION * (update - pi[s]);
            }
        }
        let sum: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|v| *v /= sum);
        if sweep % 10 == 0 && balance_residual(gen, &pi) < 1e-14 * scale {
            return Ok(pi);
        }
    }
    Err(OracleError::Solve("Gauss-Seidel did not converge".into()))
}

fn balance_residual(gen: &Generator, pi: &[f64]) -> f64 {
    (0..pi.len())
        .map(|s| {
            let inflow: f64 = gen.incoming[s].iter().map(|&(t, q)| pi[t] * q).sum();
            (inflow - pi[s] * gen.outflow[s]).abs()
        })
        .fold(0.0, f64::max)
}
