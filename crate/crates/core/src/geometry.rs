//! Planar points and distance metrics.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A position in the plane, in kilometres.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{:.*}, {:.*}", p, self.x, p, self.y),
            None => write!(f, "{}, {}", self.x, self.y),
        }
    }
}

/// User-supplied distance `d(anchor, x)`.
///
/// The function must be non-negative, vanish on the diagonal and be convex in
/// `x`. None of this is checked.
pub type DistanceFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;

/// Distance between a warehouse and the center.
#[derive(Clone, Default)]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    Convex(DistanceFn),
}

impl DistanceMetric {
    pub fn distance(&self, anchor: &Point, x: &Point) -> f64 {
        match self {
            DistanceMetric::Euclidean => anchor.distance(x),
            DistanceMetric::Convex(d) => d(anchor, x),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, DistanceMetric::Euclidean)
    }
}

impl fmt::Debug for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceMetric::Euclidean => f.write_str("Euclidean"),
            DistanceMetric::Convex(_) => f.write_str("Convex(<fn>)"),
        }
    }
}
