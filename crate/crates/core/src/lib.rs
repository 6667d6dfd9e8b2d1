//! Joint center location and fleet sizing for a star-shaped logistics
//! network with congestion.
//!
//! A production center ships truckloads to warehouses. Trucks queue for
//! loading at the center and for unloading at the warehouses, and travel
//! along infinite-server lanes in between. The network is a closed
//! product-form queueing network, which gives:
//!
//! * [`weber`]: the throughput-optimal center is the demand-weighted Weber
//!   point of the warehouses, for every fleet size.
//! * [`star`]: throughput, congestion and round-trip time of the star network
//!   via an aggregated convolution.
//! * [`fleet`]: the smallest fleet meeting total demand, bottleneck
//!   feasibility and center capacity search.
//! * [`oracle`]: brute-force, Markov chain and simulation cross-checks.

pub mod experiments;
pub mod fleet;
pub mod geometry;
pub mod network;
pub mod oracle;
pub mod scenario;
pub mod star;
pub mod weber;

pub use geometry::{DistanceMetric, Point};
pub use scenario::{load_scenario, Scenario, ScenarioError};
