//! Self-check suite: analytic results against brute-force enumeration, the
//! Markov chain and simulation, plus the structural properties of the star
//! network.

use super::blocks::{BlockId, ExperimentBlock};
use super::random::{small_instance, stream, SmallInstance};
use crate::geometry::Point;
use crate::network::NetworkError;
use crate::oracle::{ctmc_throughput, enumerate_product_form, simulate, DesConfig, Horizon, TravelDistribution};
use crate::scenario::Scenario;
use crate::star::{aggregated_norm_constants, analyze, bottleneck, build_star, StarNetwork};
use crate::weber::{solve_weber, WeberOptions, WeberProblem};

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Random small instances for the oracle comparisons.
    pub instances: usize,
    pub max_population: usize,
    /// Random twelve-warehouse instances for the structural checks.
    pub location_instances: usize,
    pub des_replications: usize,
    pub des_events: u64,
    /// Perturbs the aggregated normalization constants by a relative 1e-6
    /// so that the suite can be seen to fail.
    pub corrupt_convolution: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            instances: 50,
            max_population: 5,
            location_instances: 10,
            des_replications: 20,
            des_events: 100_000,
            corrupt_convolution: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

pub fn run_validation(opts: &ValidateOptions) -> Result<ValidationReport, NetworkError> {
    let small: Vec<(Scenario, Point)> = {
        let mut rng = stream(opts.seed, 0);
        (0..opts.instances).map(|_| small_instance(&mut rng, &SmallInstance::default())).collect()
    };
    let block = ExperimentBlock::standard(BlockId::I, opts.location_instances, opts.seed);
    let located: Vec<(Scenario, Point)> = block
        .instances()
        .into_iter()
        .map(|s| {
            let x = weighted_weber(&s);
            (s, x)
        })
        .collect();

    let checks = vec![
        enumeration_check(&small, opts)?,
        ctmc_check(&small, opts)?,
        location_check(&located)?,
        monotonicity_check(&located)?,
        passage_time_check(&located)?,
        insensitivity_check(&small, opts),
        stability_check(opts.seed)?,
    ];
    Ok(ValidationReport { checks })
}

pub fn weighted_weber(s: &Scenario) -> Point {
    solve_weber(&WeberProblem::from_scenario(s, true), WeberOptions::default())
        .expect("generated scenarios use the Euclidean metric")
        .location
}

/// `x` and its eight neighbours on a square grid with spacing `radius`.
pub fn grid_around(x: Point, radius: f64) -> Vec<Point> {
    let mut g = vec![x];
    for dx in [-1.0, 0.0, 1.0] {
        for dy in [-1.0, 0.0, 1.0] {
            if dx != 0.0 || dy != 0.0 {
                g.push(Point::new(x.x + dx * radius, x.y + dy * radius));
            }
        }
    }
    g
}

/// Pairs `(h, throughput)` where a smaller travel term does not give a
/// strictly larger throughput. Pairs with travel terms equal to 1e-12
/// relative are skipped.
pub fn rank_violations(points: &[(f64, f64)]) -> usize {
    let mut bad = 0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if (a.0 - b.0).abs() <= 1e-12 * a.0.abs().max(b.0.abs()) {
                continue;
            }
            let (lo, hi) = if a.0 < b.0 { (a, b) } else { (b, a) };
            if lo.1 <= hi.1 {
                bad += 1;
            }
        }
    }
    bad
}

fn aggregated_g(net: &StarNetwork, n: usize, corrupt: bool) -> Result<Vec<f64>, NetworkError> {
    let t = aggregated_norm_constants(net, n)?;
    Ok((0..=n).map(|m| if corrupt && m > 0 { t.g(m) * (1.0 + 1e-6) } else { t.g(m) }).collect())
}

fn enumeration_check(instances: &[(Scenario, Point)], opts: &ValidateOptions) -> Result<CheckResult, NetworkError> {
    let mut worst: f64 = 0.0;
    for (s, x) in instances {
        let net = build_star(s, *x);
        let n = opts.max_population;
        let g = aggregated_g(&net, n, opts.corrupt_convolution)?;
        for (m, gm) in g.iter().enumerate() {
            let full = net.explicit_network(m)?;
            let e = enumerate_product_form(&full, &net.explicit_visits()).map_err(oracle_to_network)?;
            worst = worst.max((gm / e.g - 1.0).abs());
        }
    }
    Ok(CheckResult {
        name: "enumeration_matches_aggregated_convolution",
        passed: worst < 1e-10,
        detail: format!("max relative error {worst:.3e} over {} instances", instances.len()),
    })
}

fn ctmc_check(instances: &[(Scenario, Point)], opts: &ValidateOptions) -> Result<CheckResult, NetworkError> {
    let mut worst: f64 = 0.0;
    for (s, x) in instances {
        let net = build_star(s, *x);
        let g = aggregated_g(&net, opts.max_population, opts.corrupt_convolution)?;
        for n in 1..=opts.max_population {
            let chain = ctmc_throughput(&net.explicit_network(n)?).map_err(oracle_to_network)?;
            // center departures = η_1 · G(N-1)/G(N)
            let analytic = 0.25 * g[n - 1] / g[n];
            worst = worst.max((chain.throughputs[0] / analytic - 1.0).abs());
        }
    }
    Ok(CheckResult {
        name: "ctmc_matches_convolution_throughput",
        passed: worst < 1e-9,
        detail: format!("max relative error {worst:.3e}"),
    })
}

fn location_check(instances: &[(Scenario, Point)]) -> Result<CheckResult, NetworkError> {
    let mut off_center = 0;
    let mut violations = 0;
    for (s, x) in instances {
        let grid = grid_around(*x, 10.0);
        for n in [1, 5, 20] {
            let pts: Vec<(f64, f64)> = grid
                .iter()
                .map(|p| {
                    let net = build_star(s, *p);
                    let t = aggregated_norm_constants(&net, n)?;
                    Ok((net.h(), t.ratio(n - 1, n) / 4.0))
                })
                .collect::<Result<_, NetworkError>>()?;
            if pts[1..].iter().any(|p| p.1 >= pts[0].1) {
                off_center += 1;
            }
            violations += rank_violations(&pts);
        }
    }
    Ok(CheckResult {
        name: "weber_point_maximizes_throughput",
        passed: off_center == 0 && violations == 0,
        detail: format!("{off_center} grids with a better neighbour, {violations} rank violations"),
    })
}

fn monotonicity_check(instances: &[(Scenario, Point)]) -> Result<CheckResult, NetworkError> {
    let mut violations = 0;
    for (s, x) in instances {
        let net = build_star(s, *x);
        let ceiling = bottleneck(&net).ceiling;
        let t = aggregated_norm_constants(&net, 31)?;
        let th: Vec<f64> = (1..=31).map(|n| t.ratio(n - 1, n) / 4.0).collect();
        violations += th.windows(2).filter(|w| w[1] <= w[0]).count();
        violations += th.iter().filter(|v| **v >= ceiling).count();
    }
    Ok(CheckResult {
        name: "throughput_increases_with_fleet",
        passed: violations == 0,
        detail: format!("{violations} violations for N = 1..30"),
    })
}

fn passage_time_check(instances: &[(Scenario, Point)]) -> Result<CheckResult, NetworkError> {
    let mut worst: f64 = 0.0;
    for (s, x) in instances {
        let net = build_star(s, *x);
        for n in [1, 7, 25] {
            let a = analyze(&net, n)?;
            worst = worst.max((a.passage_time * a.throughput / (4.0 * n as f64) - 1.0).abs());
        }
    }
    Ok(CheckResult {
        name: "passage_time_identity",
        passed: worst < 1e-12,
        detail: format!("max relative error {worst:.3e}"),
    })
}

fn insensitivity_check(instances: &[(Scenario, Point)], opts: &ValidateOptions) -> CheckResult {
    let mut failures = Vec::new();
    for (i, (s, x)) in instances.iter().take(3).enumerate() {
        let net = build_star(s, *x);
        let n = 3;
        let exact = match analyze(&net, n) {
            Ok(a) => a.warehouse_throughput,
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let run = |travel| {
            let cfg = DesConfig::new(n, travel, Horizon::Events(opts.des_events), opts.des_replications, opts.seed + i as u64);
            simulate(&net, &cfg).warehouse_throughput
        };
        let (e, d) = (run(TravelDistribution::Exponential), run(TravelDistribution::Deterministic));
        if (e.mean - d.mean).abs() >= e.half_width + d.half_width {
            failures.push(format!("instance {i}: exponential {:.5} vs deterministic {:.5}", e.mean, d.mean));
        }
        if !e.covers(exact) || !d.covers(exact) {
            failures.push(format!("instance {i}: interval misses {exact:.5}"));
        }
    }
    CheckResult {
        name: "travel_time_insensitivity",
        passed: failures.is_empty(),
        detail: if failures.is_empty() { "3 instances agree".into() } else { failures.join("; ") },
    }
}

fn stability_check(seed: u64) -> Result<CheckResult, NetworkError> {
    let s = ExperimentBlock::standard(BlockId::IV, 1, seed).instance(0);
    let net = build_star(&s, weighted_weber(&s));
    let t = aggregated_norm_constants(&net, 100)?;
    let d = t.log_discrepancy();
    Ok(CheckResult {
        name: "log_and_scaled_constants_agree",
        passed: d < 1e-8,
        detail: format!("max relative discrepancy {d:.3e} up to N = 100"),
    })
}

fn oracle_to_network(e: crate::oracle::OracleError) -> NetworkError {
    match e {
        crate::oracle::OracleError::Network(n) => n,
        other => NetworkError::InvalidVisits(other.to_string()),
    }
}
