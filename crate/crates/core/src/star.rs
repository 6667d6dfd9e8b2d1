//! The star-shaped distribution network around a production center.
//!
//! Trucks load at the center (station 1), travel to warehouse `j` (chosen
//! with probability `ρ_j`), unload, and travel back. Visit ratios are
//! `η_1 = 1/4` and `η_j = ρ_j/4` for every station and both of its lanes.
//!
//! All lanes together behave like a single infinite server whose product-form
//! factor is `κ^n/n!` with `κ = 2·h(x)` and `h(x) = Σ_j η_j d_j(x)/S`. The
//! production path convolves the `J` stations with that one aggregated node;
//! [`StarNetwork::explicit_network`] builds the full `3(J-1)+1` node network
//! for cross-checks.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::geometry::Point;
use crate::network::{
    marginal_distribution, ClosedNetwork, ConvolutionTable, Convolver, NetworkError, ServiceRate, VisitRatios,
};
use crate::scenario::{Scenario, CENTER_NODE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StationId {
    Center,
    /// Warehouse by its scenario id.
    Warehouse(u32),
}

impl StationId {
    pub fn node(&self) -> u32 {
        match self {
            StationId::Center => CENTER_NODE,
            StationId::Warehouse(id) => *id,
        }
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StationId::Center => write!(f, "center"),
            StationId::Warehouse(id) => write!(f, "warehouse {id}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StarNetwork<'a> {
    scenario: &'a Scenario,
    center: Point,
    distances: Vec<f64>,
    rho: Vec<f64>,
    // stations in order [center, warehouses...]
    rates: Vec<ServiceRate>,
    visits: Vec<f64>,
    h: f64,
}

pub fn build_star(s: &Scenario, x: Point) -> StarNetwork<'_> {
    let distances: Vec<f64> = s.warehouses.iter().map(|w| s.metric.distance(&w.position, &x)).collect();
    let rho = s.demand_fractions();
    let mut rates = vec![ServiceRate::multi_server(s.center.load_rate, s.center.servers)];
    rates.extend(s.warehouses.iter().map(|w| ServiceRate::multi_server(w.unload_rate, w.servers)));
    let mut visits = vec![0.25];
    visits.extend(rho.iter().map(|r| r / 4.0));
    let h = rho.iter().zip(&distances).map(|(r, d)| r / 4.0 * d / s.truck_speed).sum();
    StarNetwork { scenario: s, center: x, distances, rho, rates, visits, h }
}

impl<'a> StarNetwork<'a> {
    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// `d_j(x)` in warehouse order.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// Mean one-way travel time `d_j(x)/S` in hours, warehouse order.
    pub fn travel_means(&self) -> Vec<f64> {
        self.distances.iter().map(|d| d / self.scenario.truck_speed).collect()
    }

    /// Visit ratios of the stations, center first.
    pub fn visits(&self) -> &[f64] {
        &self.visits
    }

    /// Service rates of the stations, center first.
    pub fn rates(&self) -> &[ServiceRate] {
        &self.rates
    }

    pub fn stations(&self) -> usize {
        self.rates.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn kappa(&self) -> f64 {
        2.0 * self.h
    }

    /// The aggregated lane node as an infinite server with visit ratio 1/2
    /// and mean `Σ ρ_j d_j/S`, so that its factor is `κ^n/n!`.
    fn lane_node(&self) -> (ServiceRate, f64) {
        (ServiceRate::infinite_server(4.0 * self.h), 0.5)
    }

    /// Stations plus the aggregated lane node (last), with visit ratios.
    pub fn aggregated_nodes(&self) -> (Vec<ServiceRate>, Vec<f64>) {
        let (lane, visit) = self.lane_node();
        let mut rates = self.rates.clone();
        rates.push(lane);
        let mut visits = self.visits.clone();
        visits.push(visit);
        (rates, visits)
    }

    /// Incremental convolution over the aggregated network, population 0.
    pub fn aggregated_convolver(&self) -> Result<Convolver, NetworkError> {
        let (rates, visits) = self.aggregated_nodes();
        Convolver::new(&rates, &visits)
    }

    /// `J + 1` node network: every station routes to the lane node, which
    /// routes to the center with probability 1/2 and to warehouse `j` with
    /// probability `ρ_j/2`.
    pub fn aggregated_network(&self, population: usize) -> Result<ClosedNetwork, NetworkError> {
        let (rates, _) = self.aggregated_nodes();
        let n = rates.len();
        let lane = n - 1;
        let mut routing = DMatrix::zeros(n, n);
        for i in 0..lane {
            routing[(i, lane)] = 1.0;
        }
        routing[(lane, 0)] = 0.5;
        for (j, r) in self.rho.iter().enumerate() {
            routing[(lane, 1 + j)] = r / 2.0;
        }
        ClosedNetwork::new(rates, routing, population)
    }

    /// Visit ratios matching [`Self::aggregated_network`].
    pub fn aggregated_visits(&self) -> VisitRatios {
        VisitRatios::unnormalized(self.aggregated_nodes().1).expect("star visits are positive")
    }

    /// Full network with nodes `[center, warehouses, outbound lanes, return lanes]`.
    pub fn explicit_network(&self, population: usize) -> Result<ClosedNetwork, NetworkError> {
        let k = self.rho.len();
        let n = 3 * k + 1;
        let mut rates = self.rates.clone();
        let means = self.travel_means();
        for _ in 0..2 {
            rates.extend(means.iter().map(|m| ServiceRate::infinite_server(*m)));
        }
        let mut routing = DMatrix::zeros(n, n);
        for (j, r) in self.rho.iter().enumerate() {
            let (w, a, b) = (1 + j, 1 + k + j, 1 + 2 * k + j);
            routing[(0, a)] = *r;
            routing[(a, w)] = 1.0;
            routing[(w, b)] = 1.0;
            routing[(b, 0)] = 1.0;
        }
        ClosedNetwork::new(rates, routing, population)
    }

    /// Visit ratios matching [`Self::explicit_network`].
    pub fn explicit_visits(&self) -> VisitRatios {
        let mut v = self.visits.clone();
        for _ in 0..2 {
            v.extend(self.rho.iter().map(|r| r / 4.0));
        }
        VisitRatios::unnormalized(v).expect("star visits are positive")
    }
}

/// `G(0..=N)` of the aggregated network, i.e. `Σ_n G(m-n, J) κ^n/n!`.
pub fn aggregated_norm_constants(net: &StarNetwork, population: usize) -> Result<ConvolutionTable, NetworkError> {
    let mut conv = net.aggregated_convolver()?;
    conv.extend_to(population)?;
    Ok(conv.table())
}

/// Warehouse throughput per hour `G(N-1)/(4·G(N))` from a convolver that
/// has reached at least `population`.
pub fn warehouse_throughput(conv: &Convolver, population: usize) -> f64 {
    if population == 0 {
        return 0.0;
    }
    conv.value(population - 1).ratio(conv.value(population)) / 4.0
}

#[derive(Clone, Debug)]
pub struct StarAnalysis {
    pub population: usize,
    pub table: ConvolutionTable,
    /// `G(N-1)/G(N)` per hour.
    pub throughput: f64,
    /// Truckloads delivered per hour over all warehouses.
    pub warehouse_throughput: f64,
    /// Per warehouse, in warehouse order.
    pub warehouse_throughputs: Vec<f64>,
    /// Expected time between two departures of the same truck from the
    /// center, hours.
    pub passage_time: f64,
    pub busy_center: f64,
    /// Queue-length distributions of the stations, center first.
    pub marginals: Vec<Vec<f64>>,
    pub hours_per_day: f64,
}

impl StarAnalysis {
    pub fn warehouse_throughput_per_day(&self) -> f64 {
        self.warehouse_throughput * self.hours_per_day
    }

    pub fn throughput_per_day(&self) -> f64 {
        self.throughput * self.hours_per_day
    }

    /// Mean number of trucks at each station, center first.
    pub fn mean_queue_lengths(&self) -> Vec<f64> {
        self.marginals.iter().map(|p| p.iter().enumerate().map(|(k, q)| k as f64 * q).sum()).collect()
    }
}

pub fn analyze(net: &StarNetwork, population: usize) -> Result<StarAnalysis, NetworkError> {
    if population == 0 {
        return Err(NetworkError::ZeroPopulation);
    }
    let table = aggregated_norm_constants(net, population)?;
    let throughput = table.ratio(population - 1, population);
    let agg = net.aggregated_network(population)?;
    let visits = net.aggregated_visits();
    let marginals = (0..net.stations())
        .map(|node| marginal_distribution(&agg, &visits, &table, node))
        .collect::<Result<Vec<_>, _>>()?;
    let busy_center = (1.0 - marginals[0][0]).clamp(0.0, 1.0);
    Ok(StarAnalysis {
        population,
        throughput,
        warehouse_throughput: throughput / 4.0,
        warehouse_throughputs: net.visits()[1..].iter().map(|v| v * throughput).collect(),
        passage_time: 4.0 * population as f64 / throughput,
        busy_center,
        marginals,
        hours_per_day: net.scenario().hours_per_day,
        table,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BottleneckReport {
    /// `μ_j s_j / η_j` per station, center first: the cap on `G(N-1)/G(N)`.
    pub caps: Vec<(StationId, f64)>,
    pub binding: StationId,
    /// Limit of the warehouse throughput as the fleet grows, per hour.
    pub ceiling: f64,
    pub hours_per_day: f64,
}

impl BottleneckReport {
    pub fn ceiling_per_day(&self) -> f64 {
        self.ceiling * self.hours_per_day
    }
}

pub fn bottleneck(net: &StarNetwork) -> BottleneckReport {
    let s = net.scenario();
    let ids = std::iter::once(StationId::Center).chain(s.warehouses.iter().map(|w| StationId::Warehouse(w.id)));
    let caps: Vec<(StationId, f64)> = ids
        .zip(net.rates().iter().zip(net.visits()))
        .map(|(id, (rate, visit))| (id, rate.saturation_rate() / visit))
        .collect();
    let (binding, cap) = caps.iter().fold(caps[0], |best, c| if c.1 < best.1 { *c } else { best });
    BottleneckReport { caps, binding, ceiling: cap / 4.0, hours_per_day: s.hours_per_day }
}

/// Warehouse throughput per hour with the center placed at each grid point.
pub fn throughput_vs_location(
    s: &Scenario,
    population: usize,
    grid: &[Point],
) -> Result<Vec<(Point, f64)>, NetworkError> {
    if population == 0 {
        return Err(NetworkError::ZeroPopulation);
    }
    grid.par_iter()
        .map(|&x| {
            let net = build_star(s, x);
            let table = aggregated_norm_constants(&net, population)?;
            Ok((x, table.ratio(population - 1, population) / 4.0))
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::DistanceMetric;
    use crate::network::buzen_convolve;
    use crate::scenario::{towns_log, towns_pro, Center, Warehouse};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// One warehouse 1 km from the center, all rates 1/h, speed 1 km/h.
    pub(crate) fn toy(demand_per_day: f64) -> Scenario {
        Scenario {
            warehouses: vec![Warehouse {
                id: 2,
                position: Point::new(1.0, 0.0),
                demand_per_day,
                servers: 1,
                unload_rate: 1.0,
            }],
            center: Center { servers: 1, load_rate: 1.0, location: None },
            truck_speed: 1.0,
            truck_capacity: 1.0,
            hours_per_day: 24.0,
            max_trucks: 100,
            metric: DistanceMetric::Euclidean,
        }
    }

    #[test]
    fn visit_ratios_follow_demand_shares() {
        let mut s = toy(2.0);
        s.warehouses.push(Warehouse { id: 3, position: Point::new(0.0, 1.0), demand_per_day: 3.0, servers: 1, unload_rate: 1.0 });
        let net = build_star(&s, Point::new(0.0, 0.0));
        assert_eq!(net.visits()[0], 0.25);
        assert_relative_eq!(net.visits()[1], 0.1, epsilon = 1e-15);
        assert_relative_eq!(net.visits()[2], 0.15, epsilon = 1e-15);
        assert_relative_eq!(net.visits()[1..].iter().sum::<f64>(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn center_on_warehouse_has_zero_lanes() {
        let s = toy(1.0);
        let net = build_star(&s, Point::new(1.0, 0.0));
        assert_eq!(net.distances(), &[0.0]);
        assert_eq!(net.h(), 0.0);
        let a = analyze(&net, 3).unwrap();
        assert!(a.throughput.is_finite());
    }

    #[test]
    fn toy_constants() {
        let s = toy(1.0);
        let net = build_star(&s, Point::new(0.0, 0.0));
        assert_eq!(net.h(), 0.25);
        assert_eq!(net.kappa(), 0.5);
        let t = aggregated_norm_constants(&net, 2).unwrap();
        assert_eq!(t.g(0), 1.0);
        assert_relative_eq!(t.g(1), 1.0, epsilon = 1e-15);
        assert_relative_eq!(t.g(2), 9.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn toy_analysis() {
        let s = toy(1.0);
        let net = build_star(&s, Point::new(0.0, 0.0));
        let one = analyze(&net, 1).unwrap();
        assert_relative_eq!(one.warehouse_throughput, 0.25, epsilon = 1e-15);
        assert_eq!(one.passage_time, 4.0);
        assert_relative_eq!(one.busy_center, 0.25, epsilon = 1e-15);
        let two = analyze(&net, 2).unwrap();
        assert_relative_eq!(two.throughput, 16.0 / 9.0, epsilon = 1e-14);
        assert_relative_eq!(two.warehouse_throughput, 4.0 / 9.0, epsilon = 1e-14);
        assert!(matches!(analyze(&net, 0), Err(NetworkError::ZeroPopulation)));
    }

    #[test]
    fn toy_bottleneck() {
        let s = toy(1.0);
        let b = bottleneck(&build_star(&s, Point::new(0.0, 0.0)));
        assert_eq!(b.ceiling, 1.0);
        assert_eq!(b.binding, StationId::Center);
    }

    #[test]
    fn slow_warehouse_binds() {
        let mut s = towns_pro().with_center_rate(1e6);
        s.warehouses[4].unload_rate = 0.5;
        let b = bottleneck(&build_star(&s, Point::new(0.0, 0.0)));
        assert_eq!(b.binding, StationId::Warehouse(6));
        assert_relative_eq!(b.ceiling, 0.5 * 81.0 / 36.0, epsilon = 1e-12);
    }

    #[test]
    fn production_ceiling_is_72_per_day() {
        let s = towns_pro().with_center_rate(3.0);
        let b = bottleneck(&build_star(&s, Point::new(288.156, 112.283)));
        assert_eq!(b.ceiling_per_day(), 72.0);
        assert_eq!(b.binding, StationId::Center);
    }

    #[test]
    fn aggregated_network_visits_solve_traffic() {
        let s = towns_log();
        let net = build_star(&s, Point::new(100.0, 100.0));
        let agg = net.aggregated_network(5).unwrap();
        assert!(net.aggregated_visits().residual(agg.routing()) < 1e-15);
        let exp = net.explicit_network(5).unwrap();
        assert!(net.explicit_visits().residual(exp.routing()) < 1e-15);
    }

    #[test]
    fn logistics_table_row() {
        let s = towns_log();
        let net = build_star(&s, Point::new(179.75636, 155.90504));
        let a = analyze(&net, 19).unwrap();
        assert!((a.warehouse_throughput_per_day() - 67.871).abs() < 5e-4);
        assert!((a.busy_center - 0.706990).abs() < 1e-5);
        // single server: P(busy) = TH_1/μ_1
        assert_relative_eq!(a.busy_center, a.warehouse_throughput / 4.0, max_relative = 1e-10);
        let q: f64 = a.mean_queue_lengths().iter().sum();
        assert!(q < 19.0);
    }

    fn random_scenario() -> impl Strategy<Value = (Scenario, Point)> {
        let wh = (0.0f64..5.0, 0.0f64..5.0, 0.1f64..3.0, 1u32..3, 0.5f64..4.0);
        (prop::collection::vec(wh, 1..4), 0.5f64..4.0, 1u32..3, 0.5f64..3.0, 0.0f64..5.0, 0.0f64..5.0).prop_map(
            |(ws, mu1, s1, speed, cx, cy)| {
                let s = Scenario {
                    warehouses: ws
                        .into_iter()
                        .enumerate()
                        .map(|(i, (x, y, d, srv, mu))| Warehouse {
                            id: i as u32 + 2,
                            position: Point::new(x, y),
                            demand_per_day: d,
                            servers: srv,
                            unload_rate: mu,
                        })
                        .collect(),
                    center: Center { servers: s1, load_rate: mu1, location: None },
                    truck_speed: speed,
                    truck_capacity: 1.0,
                    hours_per_day: 24.0,
                    max_trucks: 100,
                    metric: DistanceMetric::Euclidean,
                };
                (s, Point::new(cx, cy))
            },
        )
    }

    proptest! {
        #[test]
        fn aggregation_matches_explicit_network((s, x) in random_scenario(), n in 0usize..9) {
            let net = build_star(&s, x);
            let agg = aggregated_norm_constants(&net, n).unwrap();
            let full = buzen_convolve(&net.explicit_network(n).unwrap(), &net.explicit_visits()).unwrap();
            for m in 0..=n {
                prop_assert!((agg.g(m) / full.g(m) - 1.0).abs() < 1e-10, "m={} {} vs {}", m, agg.g(m), full.g(m));
            }
        }

        #[test]
        fn analysis_identities((s, x) in random_scenario(), n in 1usize..25) {
            let net = build_star(&s, x);
            let a = analyze(&net, n).unwrap();
            prop_assert!((a.passage_time * a.throughput / (4.0 * n as f64) - 1.0).abs() < 1e-12);
            let sum: f64 = a.warehouse_throughputs.iter().sum();
            prop_assert!((sum / a.warehouse_throughput - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a.busy_center));
            for p in &a.marginals {
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
            // the gap to the cap can drop below one ulp
            prop_assert!(a.warehouse_throughput <= bottleneck(&net).ceiling * (1.0 + 1e-12));
            // per-warehouse demand constraint reduces to the total one
            let rho = s.demand_fractions();
            for (th, r) in a.warehouse_throughputs.iter().zip(&rho) {
                prop_assert!((th / a.warehouse_throughput - r).abs() < 1e-12);
            }
        }

        #[test]
        fn throughput_decreases_in_travel_term((s, x) in random_scenario(), n in 1usize..12, dx in -2.0f64..2.0) {
            let y = Point::new(x.x + dx, x.y - dx / 2.0);
            let (hx, hy) = (build_star(&s, x).h(), build_star(&s, y).h());
            prop_assume!((hx - hy).abs() > 1e-9);
            let th = throughput_vs_location(&s, n, &[x, y]).unwrap();
            prop_assert_eq!(hx < hy, th[0].1 > th[1].1);
        }
    }
}
