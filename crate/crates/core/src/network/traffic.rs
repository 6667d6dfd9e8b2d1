use nalgebra::{DMatrix, DVector};

use super::{is_irreducible, NetworkError};

const DIRECT_SOLVE_LIMIT: usize = 1000;
const RESIDUAL_TOL: f64 = 1e-10;

/// Relative visit frequencies, a left fixed point `η = ηR` of the routing
/// matrix. Any positive multiple is admissible for the product form.
#[derive(Clone, Debug, PartialEq)]
pub struct VisitRatios {
    values: Vec<f64>,
    normalized: bool,
}

impl VisitRatios {
    /// Wraps user-scaled ratios without checking the traffic equation.
    pub fn unnormalized(values: Vec<f64>) -> Result<Self, NetworkError> {
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(NetworkError::InvalidVisits("ratios must be non-negative and finite".into()));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(NetworkError::InvalidVisits("ratios must not all be zero".into()));
        }
        Ok(Self { values, normalized: false })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn normalize(&self) -> VisitRatios {
        let sum: f64 = self.values.iter().sum();
        VisitRatios { values: self.values.iter().map(|v| v / sum).collect(), normalized: true }
    }

    pub fn scaled(&self, factor: f64) -> VisitRatios {
        VisitRatios { values: self.values.iter().map(|v| v * factor).collect(), normalized: false }
    }

    /// `max_j |η_j - Σ_i η_i r(i,j)|`.
    pub fn residual(&self, routing: &DMatrix<f64>) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|j| {
                let inflow: f64 = (0..n).map(|i| self.values[i] * routing[(i, j)]).sum();
                (self.values[j] - inflow).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Probability solution of the traffic equation `η = ηR`.
pub fn solve_traffic(routing: &DMatrix<f64>) -> Result<VisitRatios, NetworkError> {
    let n = routing.nrows();
    if n == 0 || routing.ncols() != n {
        return Err(NetworkError::Dimension("routing must be a non-empty square matrix".into()));
    }
    if !is_irreducible(routing) {
        return Err(NetworkError::Reducible);
    }
    let values = if n <= DIRECT_SOLVE_LIMIT { direct(routing)? } else { power_iteration(routing) };
    let ratios = VisitRatios { values, normalized: true };
    let residual = ratios.residual(routing);
    if residual >= RESIDUAL_TOL {
        return Err(NetworkError::InvalidVisits(format!("traffic residual {residual:e}")));
    }
    Ok(ratios)
}

/// Solves `(Rᵀ - I) η = 0` with the last equation replaced by `Σ η = 1`.
fn direct(routing: &DMatrix<f64>) -> Result<Vec<f64>, NetworkError> {
    let n = routing.nrows();
    let mut a = routing.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let sol = a.lu().solve(&b).ok_or(NetworkError::Reducible)?;
    // clip round-off negatives then renormalize
    let mut values: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
    let sum: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= sum);
    Ok(values)
}

/// Iterates the lazy chain `(I + R) / 2`, which is aperiodic.
fn power_iteration(routing: &DMatrix<f64>) -> Vec<f64> {
    let n = routing.nrows();
    let edges: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| (0..n).filter_map(|j| (routing[(i, j)] > 0.0).then(|| (j, routing[(i, j)]))).collect())
        .collect();
    let mut eta = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..1_000_000 {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, out) in edges.iter().enumerate() {
            let half = 0.5 * eta[i];
            next[i] += half;
            for &(j, p) in out {
                next[j] += half * p;
            }
        }
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= sum);
        let delta = next.iter().zip(&eta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = next.iter().copied().fold(0.0, f64::max);
        std::mem::swap(&mut eta, &mut next);
        if delta <= 1e-14 * scale {
            break;
        }
    }
    eta
}
