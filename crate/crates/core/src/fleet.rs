//! Fleet sizing: the smallest number of trucks whose delivery rate covers
//! total demand, and the smallest center loading rate that makes a demand
//! level reachable at all.

use std::fmt;

use thiserror::Error;

use crate::geometry::Point;
use crate::network::NetworkError;
use crate::scenario::Scenario;
use crate::star::{analyze, bottleneck, build_star, warehouse_throughput, StarAnalysis};
use crate::weber::{solve_weber, WeberError, WeberOptions, WeberProblem, WeberSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FleetError {
    #[error(transparent)]
    Weber(#[from] WeberError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("rate grid step must be positive, got {0}")]
    InvalidStep(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Infeasibility {
    /// The throughput ceiling of the network does not exceed demand.
    CeilingBelowDemand,
    /// The warehouses alone cap throughput below demand, whatever the center does.
    WarehouseBound,
    /// Demand is below the ceiling but not reached within `max_trucks`.
    MaxTrucksExhausted,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Infeasibility::CeilingBelowDemand => "throughput ceiling does not exceed demand",
            Infeasibility::WarehouseBound => "warehouse capacity does not exceed demand",
            Infeasibility::MaxTrucksExhausted => "demand not met within the truck limit",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FleetResult {
    pub feasible: bool,
    pub trucks: Option<usize>,
    /// Warehouse throughput per day at `trucks`, or at `max_trucks` when
    /// infeasible.
    pub throughput: f64,
    /// Total demand per day.
    pub demand: f64,
    /// Throughput ceiling per day.
    pub ceiling: f64,
    /// Fleet sizes examined.
    pub iterations: usize,
    pub infeasibility: Option<Infeasibility>,
    /// Warehouse throughput per day for `N = 1..=iterations`.
    pub trace: Vec<f64>,
}

/// Smallest `N` with `C · TH_w(N) ≥ D` per day, building the normalization
/// constants one population at a time.
pub fn min_trucks(s: &Scenario, x: Point) -> Result<FleetResult, NetworkError> {
    let net = build_star(s, x);
    let hpd = s.hours_per_day;
    let demand = s.total_demand_per_day();
    let ceiling = bottleneck(&net).ceiling_per_day();
    let mut conv = net.aggregated_convolver()?;
    let meets = |th_per_day: f64| s.truck_capacity * th_per_day >= demand;

    if s.truck_capacity * ceiling <= demand {
        conv.extend_to(s.max_trucks)?;
        return Ok(FleetResult {
            feasible: false,
            trucks: None,
            throughput: warehouse_throughput(&conv, s.max_trucks) * hpd,
            demand,
            ceiling,
            iterations: 0,
            infeasibility: Some(Infeasibility::CeilingBelowDemand),
            trace: Vec::new(),
        });
    }

    let mut trace = Vec::new();
    for n in 1..=s.max_trucks {
        conv.push()?;
        let th = warehouse_throughput(&conv, n) * hpd;
        trace.push(th);
        if meets(th) {
            return Ok(FleetResult {
                feasible: true,
                trucks: Some(n),
                throughput: th,
                demand,
                ceiling,
                iterations: n,
                infeasibility: None,
                trace,
            });
        }
    }
    Ok(FleetResult {
        feasible: false,
        trucks: None,
        throughput: *trace.last().expect("max_trucks >= 1"),
        demand,
        ceiling,
        iterations: s.max_trucks,
        infeasibility: Some(Infeasibility::MaxTrucksExhausted),
        trace,
    })
}

/// Loading rate the center needs per server before demand can be met:
/// `D / (C · s_1 · hours_per_day)`. Feasibility requires a strictly larger rate.
pub fn center_rate_lower_bound(s: &Scenario) -> f64 {
    s.total_demand_per_day() / (s.truck_capacity * s.center.servers as f64 * s.hours_per_day)
}

/// Smallest multiple of `step` strictly above `bound`.
pub fn first_grid_point_above(bound: f64, step: f64) -> (u64, f64) {
    let mut k = (bound / step).floor().max(0.0) as u64 + 1;
    while k > 1 && (k - 1) as f64 * step > bound {
        k -= 1;
    }
    while k as f64 * step <= bound {
        k += 1;
    }
    (k, k as f64 * step)
}

/// Smallest center loading rate on the grid `{k · step}` for which
/// [`min_trucks`] is feasible, with its fleet result. Returns the current
/// rate unchanged if it is already feasible.
pub fn min_center_rate(s: &Scenario, x: Point, step: f64) -> Result<(f64, FleetResult), FleetError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(FleetError::InvalidStep(step));
    }
    let current = min_trucks(s, x)?;
    if current.feasible {
        return Ok((s.center.load_rate, current));
    }

    let net = build_star(s, x);
    let warehouse_cap = bottleneck(&net).caps[1..].iter().map(|c| c.1).fold(f64::INFINITY, f64::min) / 4.0;
    if s.truck_capacity * warehouse_cap * s.hours_per_day <= current.demand {
        let result = FleetResult { infeasibility: Some(Infeasibility::WarehouseBound), ..current };
        return Ok((s.center.load_rate, result));
    }

    let (k0, _) = first_grid_point_above(center_rate_lower_bound(s), step);
    let at = |k: u64| -> Result<FleetResult, NetworkError> { min_trucks(&s.with_center_rate(k as f64 * step), x) };

    // past this rate the center is effectively never busy; if the fleet is
    // still too small there, no rate helps
    let k_max = k0.max(1).saturating_mul(1_000_000);
    let top = at(k_max)?;
    if !top.feasible {
        return Ok((k_max as f64 * step, top));
    }

    // feasibility is monotone in the rate: gallop up from k0, then bisect
    let mut lo = k0 - 1; // infeasible (at or below the bound)
    let mut hi = k0;
    let mut span = 1u64;
    let mut best = at(hi)?;
    while !best.feasible {
        lo = hi;
        hi = (k0 + span).min(k_max);
        span = span.saturating_mul(2);
        best = if hi == k_max { top.clone() } else { at(hi)? };
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let r = at(mid)?;
        if r.feasible {
            hi = mid;
            best = r;
        } else {
            lo = mid;
        }
    }
    Ok((hi as f64 * step, best))
}

/// Fleet plan for one center location.
#[derive(Clone, Debug)]
pub struct LocationPlan {
    pub weber: WeberSolution,
    pub fleet: FleetResult,
    /// Analysis at the minimal fleet, or at `max_trucks` when infeasible.
    pub analysis: StarAnalysis,
}

impl LocationPlan {
    pub fn center(&self) -> Point {
        self.weber.location
    }
}

#[derive(Clone, Debug)]
pub struct LocationComparison {
    /// Center at the demand-weighted Weber point.
    pub weighted: LocationPlan,
    /// Center at the unweighted Weber point.
    pub unweighted: LocationPlan,
    /// Distance between the two centers.
    pub dist_loc: f64,
}

pub fn plan_at(s: &Scenario, weber: WeberSolution) -> Result<LocationPlan, FleetError> {
    let fleet = min_trucks(s, weber.location)?;
    let n = fleet.trucks.unwrap_or(s.max_trucks);
    let analysis = analyze(&build_star(s, weber.location), n)?;
    Ok(LocationPlan { weber, fleet, analysis })
}

pub fn compare_locations(s: &Scenario) -> Result<LocationComparison, FleetError> {
    let plan = |weighted: bool| -> Result<LocationPlan, FleetError> {
        let w = solve_weber(&WeberProblem::from_scenario(s, weighted), WeberOptions::default())?;
        plan_at(s, w)
    };
    let (weighted, unweighted) = rayon::join(|| plan(true), || plan(false));
    let (weighted, unweighted) = (weighted?, unweighted?);
    let dist_loc = s.metric.distance(&weighted.center(), &unweighted.center());
    Ok(LocationComparison { weighted, unweighted, dist_loc })
}
