//! Speed sweep over the bundled twelve-town instance. Truck speed is not
//! part of the reference results, so this finds the speeds under which the
//! reference fleet sizes, throughputs and busy probabilities come out.

use rayon::prelude::*;

use crate::fleet::{compare_locations, FleetError};
use crate::scenario::{towns_log, towns_pro, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemandRow {
    Logistics,
    Production,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationCase {
    pub label: String,
    pub demand: DemandRow,
    pub center_rate: f64,
    /// Weighted / unweighted center; `None` when demand cannot be met.
    pub trucks: (Option<usize>, Option<usize>),
    pub throughput: (f64, f64),
    pub throughput_tol: f64,
    pub busy: (f64, f64),
    pub busy_tol: f64,
}

impl CalibrationCase {
    fn new(
        demand: DemandRow,
        center_rate: f64,
        trucks: (Option<usize>, Option<usize>),
        throughput: (f64, f64),
        busy: (f64, f64),
        busy_tol: f64,
    ) -> Self {
        let row = match demand {
            DemandRow::Logistics => "log",
            DemandRow::Production => "pro",
        };
        Self {
            label: format!("{row} mu1={center_rate}"),
            demand,
            center_rate,
            trucks,
            throughput,
            throughput_tol: 5e-4,
            busy,
            busy_tol,
        }
    }

    pub fn scenario(&self, speed: f64) -> Scenario {
        let mut s = match self.demand {
            DemandRow::Logistics => towns_log(),
            DemandRow::Production => towns_pro(),
        };
        s.truck_speed = speed;
        s.with_center_rate(self.center_rate)
    }
}

/// Reference results for the twelve-town instance.
pub fn reference_cases() -> Vec<CalibrationCase> {
    use DemandRow::*;
    vec![
        CalibrationCase::new(Logistics, 4.0, (Some(19), Some(19)), (67.871, 67.841), (0.706990, 0.706676), 1e-5),
        CalibrationCase::new(Production, 4.0, (Some(28), Some(29)), (82.261, 81.342), (0.857, 0.847), 5e-4),
        CalibrationCase::new(Logistics, 3.0, (Some(22), Some(22)), (67.054, 67.040), (0.931308, 0.931110), 1e-5),
        CalibrationCase::new(Production, 3.0, (None, None), (72.000, 72.000), (1.000, 1.000), 5e-4),
        CalibrationCase::new(Production, 3.38, (Some(43), Some(45)), (81.013, 81.021), (0.998676, 0.998780), 1e-5),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub trucks: (Option<usize>, Option<usize>),
    pub throughput: (f64, f64),
    pub busy: (f64, f64),
    pub trucks_match: bool,
    /// Trucks, throughput and busy probability all match.
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRow {
    pub speed: f64,
    pub outcomes: Vec<CaseOutcome>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationReport {
    pub cases: Vec<CalibrationCase>,
    pub rows: Vec<CalibrationRow>,
}

impl CalibrationReport {
    pub fn matching_speeds(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.outcomes.iter().all(|o| o.matches)).map(|r| r.speed).collect()
    }

    /// Speeds under which every case reproduces its fleet sizes.
    pub fn truck_matching_speeds(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.outcomes.iter().all(|o| o.trucks_match)).map(|r| r.speed).collect()
    }
}

fn evaluate(case: &CalibrationCase, speed: f64) -> Result<CaseOutcome, FleetError> {
    let c = compare_locations(&case.scenario(speed))?;
    let trucks = (c.weighted.fleet.trucks, c.unweighted.fleet.trucks);
    let throughput = (c.weighted.fleet.throughput, c.unweighted.fleet.throughput);
    let busy = (c.weighted.analysis.busy_center, c.unweighted.analysis.busy_center);
    let close = |a: (f64, f64), b: (f64, f64), tol: f64| (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol;
    let trucks_match = trucks == case.trucks;
    let matches = trucks_match
        && close(throughput, case.throughput, case.throughput_tol)
        && close(busy, case.busy, case.busy_tol);
    Ok(CaseOutcome { trucks, throughput, busy, trucks_match, matches })
}

pub fn calibrate(speeds: &[f64]) -> Result<CalibrationReport, FleetError> {
    let cases = reference_cases();
    let rows = speeds
        .par_iter()
        .map(|&speed| {
            let outcomes = cases.iter().map(|c| evaluate(c, speed)).collect::<Result<Vec<_>, _>>()?;
            Ok(CalibrationRow { speed, outcomes })
        })
        .collect::<Result<Vec<_>, FleetError>>()?;
    Ok(CalibrationReport { cases, rows })
}

/// `from, from + step, …` up to and including `to`.
pub fn speed_range(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| from + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifty_kmh_matches_every_case() {
        let r = calibrate(&[50.0]).unwrap();
        for (c, o) in r.cases.iter().zip(&r.rows[0].outcomes) {
            assert!(o.matches, "{}: {:?}", c.label, o);
        }
        assert_eq!(r.matching_speeds(), vec![50.0]);
    }

    #[test]
    fn other_speeds_miss() {
        let r = calibrate(&[30.0, 70.0]).unwrap();
        assert!(r.matching_speeds().is_empty());
    }

    #[test]
    fn range_includes_endpoint() {
        assert_eq!(speed_range(40.0, 41.0, 0.5), vec![40.0, 40.5, 41.0]);
    }
}
