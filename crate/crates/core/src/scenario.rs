//! Problem instances: warehouses, the production center and the truck fleet.
//!
//! Demands are supplied in truckloads per day and rates in truckloads per
//! hour. Internally all rates are per hour; [`Warehouse::demand_per_hour`]
//! performs the conversion using the scenario's `hours_per_day`.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{DistanceMetric, Point};
use crate::network::ServiceRate;

/// Station index of the production center.
pub const CENTER_NODE: u32 = 1;

const DEFAULT_TRUCK_CAPACITY: f64 = 1.0;
const DEFAULT_HOURS_PER_DAY: f64 = 24.0;
const DEFAULT_MAX_TRUCKS: usize = 100;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown node index {0}")]
    UnknownNode(u32),
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid { field: field.into(), message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Warehouse {
    /// Station index, at least 2 (index 1 is the center).
    pub id: u32,
    pub position: Point,
    pub demand_per_day: f64,
    pub servers: u32,
    /// Unloading rate of a single server, truckloads per hour.
    pub unload_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Center {
    pub servers: u32,
    /// Loading rate of a single server, truckloads per hour.
    pub load_rate: f64,
    pub location: Option<Point>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub warehouses: Vec<Warehouse>,
    pub center: Center,
    /// km per hour.
    pub truck_speed: f64,
    pub truck_capacity: f64,
    pub hours_per_day: f64,
    pub max_trucks: usize,
    pub metric: DistanceMetric,
}

impl Scenario {
    /// Checks every instance invariant. Constructors call this; callers that
    /// mutate fields directly should call it again.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.warehouses.is_empty() {
            return Err(ScenarioError::invalid("warehouses", "at least one warehouse is required"));
        }
        let mut seen = HashSet::new();
        for (i, w) in self.warehouses.iter().enumerate() {
            let field = |name: &str| format!("warehouses[{i}].{name}");
            if w.id <= CENTER_NODE {
                return Err(ScenarioError::invalid(field("id"), "warehouse ids must be at least 2"));
            }
            if !seen.insert(w.id) {
                return Err(ScenarioError::invalid(field("id"), format!("duplicate warehouse id {}", w.id)));
            }
            if !w.position.is_finite() {
                return Err(ScenarioError::invalid(field("x"), "position must be finite"));
            }
            if !(w.demand_per_day > 0.0 && w.demand_per_day.is_finite()) {
                return Err(ScenarioError::invalid(field("demand_per_day"), "demand must be positive"));
            }
            if w.servers < 1 {
                return Err(ScenarioError::invalid(field("servers"), "servers must be at least 1"));
            }
            if !(w.unload_rate > 0.0 && w.unload_rate.is_finite()) {
                return Err(ScenarioError::invalid(field("unload_rate_per_hour"), "unload rate must be positive"));
            }
        }
        if self.center.servers < 1 {
            return Err(ScenarioError::invalid("center.servers", "servers must be at least 1"));
        }
        if !(self.center.load_rate > 0.0 && self.center.load_rate.is_finite()) {
            return Err(ScenarioError::invalid("center.load_rate_per_hour", "load rate must be positive"));
        }
        if let Some(loc) = self.center.location {
            if !loc.is_finite() {
                return Err(ScenarioError::invalid("center.location", "location must be finite"));
            }
        }
        positive("truck_speed_kmh", self.truck_speed)?;
        positive("truck_capacity", self.truck_capacity)?;
        positive("hours_per_day", self.hours_per_day)?;
        if self.max_trucks < 1 {
            return Err(ScenarioError::invalid("max_trucks", "max_trucks must be at least 1"));
        }
        let sum: f64 = self.demand_fractions().iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ScenarioError::invalid("warehouses", format!("demand fractions sum to {sum}")));
        }
        Ok(())
    }

    /// Number of stations `J` (center plus warehouses).
    pub fn stations(&self) -> usize {
        self.warehouses.len() + 1
    }

    pub fn total_demand_per_day(&self) -> f64 {
        self.warehouses.iter().map(|w| w.demand_per_day).sum()
    }

    pub fn total_demand_per_hour(&self) -> f64 {
        self.total_demand_per_day() / self.hours_per_day
    }

    /// Share `D_j / D` of the total demand per warehouse, in warehouse order.
    pub fn demand_fractions(&self) -> Vec<f64> {
        let total = self.total_demand_per_day();
        self.warehouses.iter().map(|w| w.demand_per_day / total).collect()
    }

    pub fn anchors(&self) -> Vec<Point> {
        self.warehouses.iter().map(|w| w.position).collect()
    }

    /// Load-dependent service rate of station `node`: 1 is the center, any
    /// other index is looked up among the warehouse ids.
    pub fn rate_function(&self, node: u32) -> Result<ServiceRate, ScenarioError> {
        if node == CENTER_NODE {
            return Ok(ServiceRate::multi_server(self.center.load_rate, self.center.servers));
        }
        self.warehouses
            .iter()
            .find(|w| w.id == node)
            .map(|w| ServiceRate::multi_server(w.unload_rate, w.servers))
            .ok_or(ScenarioError::UnknownNode(node))
    }

    /// Copy with a different center loading rate.
    pub fn with_center_rate(&self, load_rate: f64) -> Scenario {
        let mut s = self.clone();
        s.center.load_rate = load_rate;
        s
    }

    pub fn from_json_str(text: &str) -> Result<Scenario, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        let scenario = Scenario::from(file);
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from(self)).expect("scenario serialization cannot fail")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }
}

impl Warehouse {
    pub fn demand_per_hour(&self, hours_per_day: f64) -> f64 {
        self.demand_per_day / hours_per_day
    }
}

fn positive(field: &str, value: f64) -> Result<(), ScenarioError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, "must be positive"))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path)?;
    Scenario::from_json_str(&text)
}

pub fn demand_fractions(s: &Scenario) -> Vec<f64> {
    s.demand_fractions()
}

// On-disk layout.

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    warehouses: Vec<WarehouseFile>,
    center: CenterFile,
    truck_speed_kmh: f64,
    #[serde(default = "default_capacity")]
    truck_capacity: f64,
    #[serde(default = "default_hours")]
    hours_per_day: f64,
    #[serde(default = "default_max_trucks")]
    max_trucks: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WarehouseFile {
    id: u32,
    x: f64,
    y: f64,
    demand_per_day: f64,
    servers: u32,
    unload_rate_per_hour: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CenterFile {
    servers: u32,
    load_rate_per_hour: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    location: Option<[f64; 2]>,
}

fn default_capacity() -> f64 {
    DEFAULT_TRUCK_CAPACITY
}
fn default_hours() -> f64 {
    DEFAULT_HOURS_PER_DAY
}
fn default_max_trucks() -> usize {
    DEFAULT_MAX_TRUCKS
}

impl From<ScenarioFile> for Scenario {
    fn from(f: ScenarioFile) -> Self {
        Scenario {
            warehouses: f
                .warehouses
                .into_iter()
                .map(|w| Warehouse {
                    id: w.id,
                    position: Point::new(w.x, w.y),
                    demand_per_day: w.demand_per_day,
                    servers: w.servers,
                    unload_rate: w.unload_rate_per_hour,
                })
                .collect(),
            center: Center {
                servers: f.center.servers,
                load_rate: f.center.load_rate_per_hour,
                location: f.center.location.map(|[x, y]| Point::new(x, y)),
            },
            truck_speed: f.truck_speed_kmh,
            truck_capacity: f.truck_capacity,
            hours_per_day: f.hours_per_day,
            max_trucks: f.max_trucks,
            metric: DistanceMetric::Euclidean,
        }
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            warehouses: s
                .warehouses
                .iter()
                .map(|w| WarehouseFile {
                    id: w.id,
                    x: w.position.x,
                    y: w.position.y,
                    demand_per_day: w.demand_per_day,
                    servers: w.servers,
                    unload_rate_per_hour: w.unload_rate,
                })
                .collect(),
            center: CenterFile {
                servers: s.center.servers,
                load_rate_per_hour: s.center.load_rate,
                location: s.center.location.map(|p| [p.x, p.y]),
            },
            truck_speed_kmh: s.truck_speed,
            truck_capacity: s.truck_capacity,
            hours_per_day: s.hours_per_day,
            max_trucks: s.max_trucks,
        }
    }
}

/// The twelve-town instance with demands proportional to population.
pub const TOWNS_PRO_JSON: &str = include_str!("../fixtures/towns_pro.json");
/// The twelve-town instance with log-population demands.
pub const TOWNS_LOG_JSON: &str = include_str!("../fixtures/towns_log.json");

pub fn towns_pro() -> Scenario {
    Scenario::from_json_str(TOWNS_PRO_JSON).expect("bundled fixture is valid")
}

pub fn towns_log() -> Scenario {
    Scenario::from_json_str(TOWNS_LOG_JSON).expect("bundled fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(demand: f64) -> String {
        format!(
            r#"{{"warehouses":[{{"id":2,"x":0,"y":0,"demand_per_day":{demand},"servers":1,"unload_rate_per_hour":1}}],
            "center":{{"servers":1,"load_rate_per_hour":1}},"truck_speed_kmh":1}}"#
        )
    }

    #[test]
    fn log_fixture_totals() {
        let s = towns_log();
        assert_eq!(s.stations(), 13);
        assert_eq!(s.total_demand_per_day(), 66.0);
        assert_eq!(s.hours_per_day, 24.0);
        assert_eq!(s.max_trucks, 100);
    }

    #[test]
    fn pro_fixture_fraction_of_largest_town() {
        let s = towns_pro();
        assert_eq!(s.total_demand_per_day(), 81.0);
        let rho = s.demand_fractions();
        // warehouse 6 carries 36 of 81 truckloads
        let idx = s.warehouses.iter().position(|w| w.id == 6).unwrap();
        assert!((rho[idx] - 36.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn single_warehouse_defaults() {
        let s = Scenario::from_json_str(&single(1.0)).unwrap();
        assert_eq!(s.demand_fractions(), vec![1.0]);
        assert_eq!(s.truck_capacity, 1.0);
        assert_eq!(s.hours_per_day, 24.0);
        assert_eq!(s.max_trucks, 100);
        assert!(s.center.location.is_none());
    }

    #[test]
    fn zero_demand_rejected() {
        let err = Scenario::from_json_str(&single(0.0)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("demand must be positive"), "{msg}");
        assert!(msg.contains("demand_per_day"), "{msg}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = r#"{"warehouses":[
            {"id":2,"x":0,"y":0,"demand_per_day":1,"servers":1,"unload_rate_per_hour":1},
            {"id":2,"x":1,"y":0,"demand_per_day":1,"servers":1,"unload_rate_per_hour":1}],
            "center":{"servers":1,"load_rate_per_hour":1},"truck_speed_kmh":1}"#;
        assert!(matches!(Scenario::from_json_str(text), Err(ScenarioError::Invalid { .. })));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(Scenario::from_json_str("{"), Err(ScenarioError::Parse(_))));
        let missing_speed = r#"{"warehouses":[],"center":{"servers":1,"load_rate_per_hour":1}}"#;
        assert!(matches!(Scenario::from_json_str(missing_speed), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn fractions_for_two_warehouses() {
        let mut s = towns_log();
        s.warehouses.truncate(2);
        s.warehouses[0].demand_per_day = 10.0;
        s.warehouses[1].demand_per_day = 20.0;
        let rho = s.demand_fractions();
        assert!((rho[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((rho[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rate_function_examples() {
        let s = towns_log();
        let w = s.rate_function(2).unwrap();
        assert_eq!(w.rate(3), 2.0);
        assert_eq!(w.rate(0), 0.0);
        let mut multi = s.clone();
        multi.warehouses[0].servers = 3;
        let r = multi.rate_function(2).unwrap();
        assert_eq!(r.rate(2), 4.0);
        assert_eq!(r.rate(7), 6.0);
        assert_eq!(s.rate_function(1).unwrap().rate(5), 4.0);
        assert!(matches!(s.rate_function(99), Err(ScenarioError::UnknownNode(99))));
    }

    proptest! {
        #[test]
        fn fractions_sum_to_one(demands in prop::collection::vec(0.001f64..1000.0, 1..40)) {
            let mut s = towns_log();
            s.warehouses = demands.iter().enumerate().map(|(i, &d)| Warehouse {
                id: i as u32 + 2,
                position: Point::new(i as f64, 0.0),
                demand_per_day: d,
                servers: 1,
                unload_rate: 1.0,
            }).collect();
            let sum: f64 = s.demand_fractions().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(s.validate().is_ok());
        }

        #[test]
        fn rate_saturates(rate in 0.01f64..100.0, servers in 1u32..10, n in 0usize..50) {
            let r = ServiceRate::multi_server(rate, servers);
            prop_assert!(r.rate(n + 1) >= r.rate(n));
            if n >= servers as usize {
                prop_assert_eq!(r.rate(n), rate * servers as f64);
            }
        }

        #[test]
        fn json_round_trip(
            xs in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4, 0.01f64..100.0, 1u32..5, 0.1f64..10.0), 1..15),
            speed in 1.0f64..200.0,
            hours in 1.0f64..24.0,
            located in any::<bool>(),
        ) {
            let s = Scenario {
                warehouses: xs.iter().enumerate().map(|(i, &(x, y, d, srv, mu))| Warehouse {
                    id: i as u32 + 2, position: Point::new(x, y), demand_per_day: d, servers: srv, unload_rate: mu,
                }).collect(),
                center: Center { servers: 2, load_rate: 3.5, location: located.then(|| Point::new(1.25, -7.5)) },
                truck_speed: speed,
                truck_capacity: 1.5,
                hours_per_day: hours,
                max_trucks: 42,
                metric: DistanceMetric::Euclidean,
            };
            let back = Scenario::from_json_str(&s.to_json_string()).unwrap();
            prop_assert_eq!(&back.warehouses, &s.warehouses);
            prop_assert_eq!(&back.center, &s.center);
            prop_assert_eq!(back.truck_speed, s.truck_speed);
            prop_assert_eq!(back.truck_capacity, s.truck_capacity);
            prop_assert_eq!(back.hours_per_day, s.hours_per_day);
            prop_assert_eq!(back.max_trucks, s.max_trucks);
        }
    }
}
