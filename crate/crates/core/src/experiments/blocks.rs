//! Blocks of random twelve-warehouse instances, each solved with the center
//! at the demand-weighted and at the unweighted Weber point.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::random::{below, between, stream};
use crate::fleet::{compare_locations, FleetError, LocationComparison};
use crate::geometry::{DistanceMetric, Point};
use crate::scenario::{Center, Scenario, Warehouse};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockId {
    I,
    II,
    III,
    IV,
}

impl BlockId {
    pub const ALL: [BlockId; 4] = [BlockId::I, BlockId::II, BlockId::III, BlockId::IV];

    pub fn demand_set(&self) -> Vec<u32> {
        match self {
            BlockId::I => (1..=8).collect(),
            BlockId::II => (1..=16).collect(),
            BlockId::III => (1..=21).collect(),
            BlockId::IV => vec![1, 11, 21],
        }
    }

    pub fn center_rate(&self) -> f64 {
        match self {
            BlockId::I => 4.0,
            BlockId::II => 5.0,
            BlockId::III | BlockId::IV => 7.0,
        }
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockId::I => "I",
            BlockId::II => "II",
            BlockId::III => "III",
            BlockId::IV => "IV",
        })
    }
}

impl FromStr for BlockId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(BlockId::I),
            "II" | "2" => Ok(BlockId::II),
            "III" | "3" => Ok(BlockId::III),
            "IV" | "4" => Ok(BlockId::IV),
            other => Err(format!("unknown block `{other}`, expected I, II, III or IV")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentBlock {
    pub id: BlockId,
    /// Daily demands are drawn uniformly from this set.
    pub demand_set: Vec<u32>,
    pub center_rate: f64,
    pub count: usize,
    pub seed: u64,
    pub warehouses: usize,
    /// Inclusive integer lattice bounds for positions.
    pub x_range: (i64, i64),
    pub y_range: (i64, i64),
    pub unload_rate: f64,
    pub truck_speed: f64,
}

impl ExperimentBlock {
    pub fn standard(id: BlockId, count: usize, seed: u64) -> Self {
        Self {
            id,
            demand_set: id.demand_set(),
            center_rate: id.center_rate(),
            count,
            seed,
            warehouses: 12,
            x_range: (10, 410),
            y_range: (10, 270),
            unload_rate: 2.0,
            truck_speed: 50.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.demand_set.is_empty() {
            return Err("demand set is empty".into());
        }
        if self.demand_set.contains(&0) {
            return Err("demands must be positive, the demand set contains 0".into());
        }
        if !(self.center_rate > 0.0 && self.center_rate.is_finite()) {
            return Err("center rate must be positive".into());
        }
        if self.warehouses == 0 {
            return Err("at least one warehouse is required".into());
        }
        if self.x_range.0 > self.x_range.1 || self.y_range.0 > self.y_range.1 {
            return Err("empty position lattice".into());
        }
        Ok(())
    }

    /// Instance `i`, drawn from its own stream: per warehouse `x`, `y`, then
    /// the demand index.
    pub fn instance(&self, i: usize) -> Scenario {
        let mut rng = stream(self.seed, i as u64);
        let warehouses = (0..self.warehouses)
            .map(|j| {
                let x = between(&mut rng, self.x_range.0, self.x_range.1) as f64;
                let y = between(&mut rng, self.y_range.0, self.y_range.1) as f64;
                let d = self.demand_set[below(&mut rng, self.demand_set.len() as u64) as usize];
                Warehouse {
                    id: j as u32 + 2,
                    position: Point::new(x, y),
                    demand_per_day: d as f64,
                    servers: 1,
                    unload_rate: self.unload_rate,
                }
            })
            .collect();
        Scenario {
            warehouses,
            center: Center { servers: 1, load_rate: self.center_rate, location: None },
            truck_speed: self.truck_speed,
            truck_capacity: 1.0,
            hours_per_day: 24.0,
            max_trucks: 100,
            metric: DistanceMetric::Euclidean,
        }
    }

    pub fn instances(&self) -> Vec<Scenario> {
        (0..self.count).map(|i| self.instance(i)).collect()
    }

    /// Solves every instance, in parallel, keeping instance order.
    pub fn run(&self) -> Result<BlockResult, FleetError> {
        let scenarios = self.instances();
        let comparisons: Vec<LocationComparison> =
            scenarios.par_iter().map(compare_locations).collect::<Result<_, _>>()?;
        let rows: Vec<ResultRow> = scenarios.iter().zip(&comparisons).map(|(s, c)| ResultRow::new(s, c)).collect();
        let summary = BlockSummary::from_rows(&rows);
        Ok(BlockResult { block: self.clone(), scenarios, comparisons, rows, summary })
    }
}

/// One line of a block table. `+` fields refer to the weighted center, `-`
/// fields to the unweighted one.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub dist_loc: f64,
    pub demand_total: f64,
    pub demand_min: f64,
    pub demand_max: f64,
    pub trucks_weighted: Option<usize>,
    pub trucks_unweighted: Option<usize>,
    pub throughput_weighted: f64,
    pub throughput_unweighted: f64,
    pub busy_weighted: f64,
    pub busy_unweighted: f64,
}

impl ResultRow {
    pub fn new(s: &Scenario, c: &LocationComparison) -> Self {
        let demands = s.warehouses.iter().map(|w| w.demand_per_day);
        ResultRow {
            dist_loc: c.dist_loc,
            demand_total: s.total_demand_per_day(),
            demand_min: demands.clone().fold(f64::INFINITY, f64::min),
            demand_max: demands.fold(f64::NEG_INFINITY, f64::max),
            trucks_weighted: c.weighted.fleet.trucks,
            trucks_unweighted: c.unweighted.fleet.trucks,
            throughput_weighted: c.weighted.fleet.throughput,
            throughput_unweighted: c.unweighted.fleet.throughput,
            busy_weighted: c.weighted.analysis.busy_center,
            busy_unweighted: c.unweighted.analysis.busy_center,
        }
    }

    pub fn both_feasible(&self) -> bool {
        self.trucks_weighted.is_some() && self.trucks_unweighted.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSummary {
    pub min_dist: f64,
    pub max_dist: f64,
    pub min_demand: f64,
    pub max_demand: f64,
    /// Rows where the weighted center needs fewer trucks.
    pub fewer_trucks: usize,
    /// Rows where demand cannot be met at one of the centers.
    pub infeasible: usize,
}

impl BlockSummary {
    pub fn from_rows(rows: &[ResultRow]) -> Self {
        let fold = |f: fn(&ResultRow) -> f64, init: f64, op: fn(f64, f64) -> f64| rows.iter().map(f).fold(init, op);
        BlockSummary {
            min_dist: fold(|r| r.dist_loc, f64::INFINITY, f64::min),
            max_dist: fold(|r| r.dist_loc, f64::NEG_INFINITY, f64::max),
            min_demand: fold(|r| r.demand_total, f64::INFINITY, f64::min),
            max_demand: fold(|r| r.demand_total, f64::NEG_INFINITY, f64::max),
            fewer_trucks: rows
                .iter()
                .filter(|r| matches!((r.trucks_weighted, r.trucks_unweighted), (Some(a), Some(b)) if a < b))
                .count(),
            infeasible: rows.iter().filter(|r| !r.both_feasible()).count(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BlockResult {
    pub block: ExperimentBlock,
    pub scenarios: Vec<Scenario>,
    pub comparisons: Vec<LocationComparison>,
    pub rows: Vec<ResultRow>,
    pub summary: BlockSummary,
}

impl BlockResult {
    /// Rows that break the weighted center's advantage: more trucks than the
    /// unweighted center, or as many trucks with less throughput.
    pub fn dominance_violations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| match (r.trucks_weighted, r.trucks_unweighted) {
                (Some(a), Some(b)) => a > b || (a == b && r.throughput_weighted < r.throughput_unweighted),
                _ => false,
            })
            .map(|(i, _)| i)
            .collect()
    }
}
