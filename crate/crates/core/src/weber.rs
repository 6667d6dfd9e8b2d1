//! Weighted planar Weber problem: minimize `Σ w_j · d(a_j, x)`.
//!
//! Solved by Weiszfeld's fixed-point iteration. Anchors are handled with
//! Kuhn's subgradient test: an anchor `a_k` is optimal iff
//! `‖Σ_{j≠k} w_j (a_j − a_k)/‖a_j − a_k‖‖ ≤ w_k`. Every anchor is tested
//! before iterating, and an iterate that lands on a non-optimal anchor is
//! moved off it along the steepest-descent direction (Ostresh's step), so
//! the iteration never divides by zero.
//!
//! When the anchors are collinear the minimizer may be a whole segment; the
//! solver returns whichever point the iteration reaches.

use thiserror::Error;

use crate::geometry::{DistanceMetric, Point};
use crate::scenario::Scenario;

/// Distance below which an iterate is treated as sitting on an anchor.
const ANCHOR_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeberError {
    #[error("the Weiszfeld iteration requires the Euclidean metric")]
    UnsupportedMetric,
    #[error("at least one anchor is required")]
    NoAnchors,
    #[error("{anchors} anchors but {weights} weights")]
    LengthMismatch { anchors: usize, weights: usize },
    #[error("weight {index} must be positive and finite, got {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("anchor {0} has a non-finite coordinate")]
    InvalidAnchor(usize),
}

#[derive(Clone, Debug)]
pub struct WeberProblem {
    pub anchors: Vec<Point>,
    pub weights: Vec<f64>,
    pub metric: DistanceMetric,
}

impl WeberProblem {
    pub fn new(anchors: Vec<Point>, weights: Vec<f64>) -> Result<Self, WeberError> {
        Self::with_metric(anchors, weights, DistanceMetric::Euclidean)
    }

    pub fn with_metric(anchors: Vec<Point>, weights: Vec<f64>, metric: DistanceMetric) -> Result<Self, WeberError> {
        if anchors.is_empty() {
            return Err(WeberError::NoAnchors);
        }
        if anchors.len() != weights.len() {
            return Err(WeberError::LengthMismatch { anchors: anchors.len(), weights: weights.len() });
        }
        if let Some(i) = anchors.iter().position(|a| !a.is_finite()) {
            return Err(WeberError::InvalidAnchor(i));
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(WeberError::InvalidWeight { index, value });
        }
        Ok(Self { anchors, weights, metric })
    }

    /// Warehouses weighted by demand share, or all with weight 1.
    pub fn from_scenario(s: &Scenario, weighted: bool) -> Self {
        let weights = if weighted { s.demand_fractions() } else { vec![1.0; s.warehouses.len()] };
        Self { anchors: s.anchors(), weights, metric: s.metric.clone() }
    }

    pub fn weighted_centroid(&self) -> Point {
        let total: f64 = self.weights.iter().sum();
        let sum = self.anchors.iter().zip(&self.weights).fold(Point::default(), |acc, (a, w)| acc + *a * *w);
        sum * (1.0 / total)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WeberOptions {
    /// Bound on the relative movement between successive iterates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WeberOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeberSolution {
    pub location: Point,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the anchor the solution coincides with, if any.
    pub at_anchor: Option<usize>,
}

/// `Σ_j w_j · d(a_j, x)` under the problem's metric.
pub fn weber_objective(p: &WeberProblem, x: &Point) -> f64 {
    p.anchors.iter().zip(&p.weights).map(|(a, w)| w * p.metric.distance(a, x)).sum()
}

/// Norm of the objective's gradient divided by the total weight. Zero at a
/// smooth optimum; only meaningful away from the anchors.
pub fn optimality_residual(p: &WeberProblem, x: &Point) -> f64 {
    let total: f64 = p.weights.iter().sum();
    let g = p.anchors.iter().zip(&p.weights).fold(Point::default(), |acc, (a, w)| {
        let d = a.distance(x);
        if d > ANCHOR_EPS {
            acc + (*x - *a) * (w / d)
        } else {
            acc
        }
    });
    g.norm() / total
}

pub fn solve_weber(p: &WeberProblem, opts: WeberOptions) -> Result<WeberSolution, WeberError> {
    run(p, opts, None)
}

/// As [`solve_weber`], also returning the objective after every iterate
/// (starting point first).
pub fn solve_weber_traced(p: &WeberProblem, opts: WeberOptions) -> Result<(WeberSolution, Vec<f64>), WeberError> {
    let mut trace = Vec::new();
    let sol = run(p, opts, Some(&mut trace))?;
    Ok((sol, trace))
}

/// Kuhn's test at anchor `k`: the resultant pull of the other anchors and
/// the weight sitting at `a_k` itself.
struct AnchorPull {
    resultant: Point,
    own_weight: f64,
    // Σ_{j: a_j ≠ a_k} w_j / ‖a_j − a_k‖
    inverse_distance_sum: f64,
}

impl AnchorPull {
    fn at(p: &WeberProblem, k: usize) -> Self {
        let ak = p.anchors[k];
        let mut pull = AnchorPull { resultant: Point::default(), own_weight: 0.0, inverse_distance_sum: 0.0 };
        for (a, w) in p.anchors.iter().zip(&p.weights) {
            let d = a.distance(&ak);
            if d <= ANCHOR_EPS {
                pull.own_weight += w;
            } else {
                pull.resultant = pull.resultant + (*a - ak) * (w / d);
                pull.inverse_distance_sum += w / d;
            }
        }
        pull
    }

    fn is_optimal(&self) -> bool {
        self.resultant.norm() <= self.own_weight
    }

    /// Descent step off a non-optimal anchor.
    fn step_off(&self, ak: Point) -> Point {
        let r = self.resultant.norm();
        let length = (r - self.own_weight) / self.inverse_distance_sum;
        ak + self.resultant * (length / r)
    }
}

fn run(p: &WeberProblem, opts: WeberOptions, mut trace: Option<&mut Vec<f64>>) -> Result<WeberSolution, WeberError> {
    if !p.metric.is_euclidean() {
        return Err(WeberError::UnsupportedMetric);
    }
    WeberProblem::new(p.anchors.clone(), p.weights.clone())?;

    for k in 0..p.anchors.len() {
        if AnchorPull::at(p, k).is_optimal() {
            let location = p.anchors[k];
            if let Some(t) = trace.as_deref_mut() {
                t.push(weber_objective(p, &location));
            }
            return Ok(WeberSolution {
                location,
                objective: weber_objective(p, &location),
                iterations: 0,
                converged: true,
                at_anchor: Some(k),
            });
        }
    }

    let centroid = p.weighted_centroid();
    let spread = p.anchors.iter().map(|a| a.distance(&centroid)).fold(0.0, f64::max);
    let mut x = leave_anchor(p, centroid);
    let mut objective = weber_objective(p, &x);
    if let Some(t) = trace.as_deref_mut() {
        t.push(objective);
    }
    let mut best = (x, objective);

    for iter in 1..=opts.max_iter {
        let next = leave_anchor(p, weiszfeld_step(p, &x));
        let moved = next.distance(&x) / next.norm().max(spread);
        x = next;
        objective = weber_objective(p, &x);
        if let Some(t) = trace.as_deref_mut() {
            t.push(objective);
        }
        if objective <= best.1 {
            best = (x, objective);
        }
        if moved < opts.tol && optimality_residual(p, &x) <= 10.0 * opts.tol {
            return Ok(WeberSolution { location: x, objective, iterations: iter, converged: true, at_anchor: None });
        }
    }
    Ok(WeberSolution {
        location: best.0,
        objective: best.1,
        iterations: opts.max_iter,
        converged: false,
        at_anchor: None,
    })
}

fn weiszfeld_step(p: &WeberProblem, x: &Point) -> Point {
    let mut num = Point::default();
    let mut den = 0.0;
    for (a, w) in p.anchors.iter().zip(&p.weights) {
        let coef = w / a.distance(x);
        num = num + *a * coef;
        den += coef;
    }
    num * (1.0 / den)
}

/// Moves `x` off any anchor it sits on. Only called once every anchor has
/// failed Kuhn's test.
fn leave_anchor(p: &WeberProblem, x: Point) -> Point {
    match p.anchors.iter().position(|a| a.distance(&x) <= ANCHOR_EPS) {
        Some(k) => AnchorPull::at(p, k).step_off(p.anchors[k]),
        None => x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn objective_examples() {
        let single = WeberProblem::new(pts(&[(3.0, 4.0)]), vec![7.0]).unwrap();
        assert_eq!(weber_objective(&single, &Point::new(3.0, 4.0)), 0.0);
        let pair = WeberProblem::new(pts(&[(0.0, 0.0), (2.0, 0.0)]), vec![1.0, 1.0]).unwrap();
        assert_eq!(weber_objective(&pair, &Point::new(1.0, 0.0)), 2.0);
    }

    #[test]
    fn objective_with_callback_metric() {
        let manhattan = DistanceMetric::Convex(Arc::new(|a: &Point, x: &Point| (a.x - x.x).abs() + (a.y - x.y).abs()));
        let p = WeberProblem::with_metric(pts(&[(0.0, 0.0), (2.0, 2.0)]), vec![1.0, 2.0], manhattan).unwrap();
        assert_eq!(weber_objective(&p, &Point::new(1.0, 1.0)), 2.0 + 4.0);
        assert_eq!(solve_weber(&p, WeberOptions::default()).unwrap_err(), WeberError::UnsupportedMetric);
    }

    #[test]
    fn equilateral_triangle_gives_centroid() {
        let h = 3f64.sqrt() / 2.0;
        let p = WeberProblem::new(pts(&[(0.0, 0.0), (1.0, 0.0), (0.5, h)]), vec![1.0; 3]).unwrap();
        let sol = solve_weber(&p, WeberOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.location.distance(&Point::new(0.5, h / 3.0)) < 1e-9);
        assert_eq!(sol.at_anchor, None);
    }

    #[test]
    fn dominant_weight_wins() {
        let p = WeberProblem::new(pts(&[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (5.0, 5.0)]), vec![1.0, 1.0, 1.0, 3.5])
            .unwrap();
        let sol = solve_weber(&p, WeberOptions::default()).unwrap();
        assert_eq!(sol.at_anchor, Some(3));
        assert_eq!(sol.location, Point::new(5.0, 5.0));
        assert!(sol.converged);
    }

    #[test]
    fn single_anchor_is_returned_directly() {
        let p = WeberProblem::new(pts(&[(4.0, -2.0)]), vec![1.0]).unwrap();
        let sol = solve_weber(&p, WeberOptions::default()).unwrap();
        assert_eq!(sol.location, Point::new(4.0, -2.0));
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn centroid_on_non_optimal_anchor_steps_off() {
        // centroid coincides with the middle anchor, which fails Kuhn's test
        let p = WeberProblem::new(pts(&[(-1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 3.0), (0.0, -3.0)]), vec![
            2.0, 2.0, 0.1, 1.0, 1.0,
        ])
        .unwrap();
        let (sol, trace) = solve_weber_traced(&p, WeberOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(trace.iter().all(|v| v.is_finite()));
        assert!(optimality_residual(&p, &sol.location) < 1e-8);
    }

    #[test]
    fn invalid_input() {
        assert_eq!(WeberProblem::new(vec![], vec![]).unwrap_err(), WeberError::NoAnchors);
        assert!(matches!(
            WeberProblem::new(pts(&[(0.0, 0.0)]), vec![0.0]),
            Err(WeberError::InvalidWeight { index: 0, .. })
        ));
        assert!(matches!(WeberProblem::new(pts(&[(0.0, 0.0)]), vec![1.0, 2.0]), Err(WeberError::LengthMismatch { .. })));
    }

    #[test]
    fn max_iter_exhaustion_reports_best_iterate() {
        let p = WeberProblem::new(pts(&[(0.0, 0.0), (10.0, 0.0), (3.0, 8.0), (9.0, 9.0)]), vec![1.0, 2.0, 3.0, 1.5])
            .unwrap();
        let start = weber_objective(&p, &p.weighted_centroid());
        let sol = solve_weber(&p, WeberOptions { tol: 1e-9, max_iter: 2 }).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 2);
        assert!(sol.objective <= start);
    }
}
