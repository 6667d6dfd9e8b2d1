//! The full pipeline for one scenario: center location, fleet size and
//! performance figures.

use crate::fleet::{min_trucks, FleetError, FleetResult};
use crate::geometry::Point;
use crate::scenario::Scenario;
use crate::star::{analyze, bottleneck, build_star, BottleneckReport, StarAnalysis};
use crate::weber::{solve_weber, WeberOptions, WeberProblem, WeberSolution};

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub center: Point,
    /// Present when the center was located by the solver.
    pub weber: Option<WeberSolution>,
    pub fleet: FleetResult,
    /// Fleet size the analysis refers to.
    pub trucks: usize,
    pub analysis: StarAnalysis,
    pub bottleneck: BottleneckReport,
    /// Mean travel term `Σ_j ρ_j d_j / (4S)`, hours.
    pub travel_term: f64,
}

/// Where the center goes: an explicit point, else the scenario's fixed
/// location, else the Weber point (demand-weighted unless `weighted` is false).
pub fn locate(s: &Scenario, center: Option<Point>, weighted: bool) -> Result<(Point, Option<WeberSolution>), FleetError> {
    if let Some(x) = center.or(s.center.location) {
        return Ok((x, None));
    }
    let w = solve_weber(&WeberProblem::from_scenario(s, weighted), WeberOptions::default())?;
    Ok((w.location, Some(w)))
}

/// Analyzes at `trucks` if given, else at the minimal fleet (or at
/// `max_trucks` when demand cannot be met).
pub fn solve(s: &Scenario, center: Option<Point>, trucks: Option<usize>, weighted: bool) -> Result<SolveReport, FleetError> {
    let (x, weber) = locate(s, center, weighted)?;
    let fleet = min_trucks(s, x)?;
    let n = trucks.or(fleet.trucks).unwrap_or(s.max_trucks);
    let net = build_star(s, x);
    let analysis = analyze(&net, n)?;
    Ok(SolveReport {
        center: x,
        weber,
        fleet,
        trucks: n,
        analysis,
        bottleneck: bottleneck(&net),
        travel_term: net.h(),
    })
}
