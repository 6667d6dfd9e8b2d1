//! Event-driven simulation of the explicit star network.
//!
//! Stations are FCFS with exponential service; lanes are infinite servers
//! with a configurable travel-time distribution. Routing, service and travel
//! draws come from separate ChaCha8 streams so that two runs differing only
//! in the travel distribution see the same routing decisions.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::network::ServiceRate;
use crate::star::StarNetwork;

const Z_95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TravelDistribution {
    Exponential,
    Deterministic,
    /// Sum of `k` exponential phases.
    Erlang(u32),
    /// Uniform on `[0, 2·mean]`.
    Uniform,
}

impl TravelDistribution {
    fn sample(&self, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
        if mean == 0.0 {
            // keep the stream aligned across distributions
            let _: f64 = rng.gen();
            return 0.0;
        }
        match *self {
            TravelDistribution::Exponential => exponential(mean, rng),
            TravelDistribution::Deterministic => {
                let _: f64 = rng.gen();
                mean
            }
            TravelDistribution::Erlang(k) => (0..k.max(1)).map(|_| exponential(mean / k.max(1) as f64, rng)).sum(),
            TravelDistribution::Uniform => 2.0 * mean * rng.gen::<f64>(),
        }
    }
}

fn exponential(mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    // gen() is in [0, 1), so 1 - u is in (0, 1]
    -mean * (1.0 - rng.gen::<f64>()).ln()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    /// Simulated hours per replication.
    Time(f64),
    /// Processed events per replication.
    Events(u64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesConfig {
    pub population: usize,
    pub travel: TravelDistribution,
    pub horizon: Horizon,
    pub replications: usize,
    pub seed: u64,
    /// Share of each replication discarded before statistics are collected.
    pub warmup_fraction: f64,
}

impl DesConfig {
    pub fn new(population: usize, travel: TravelDistribution, horizon: Horizon, replications: usize, seed: u64) -> Self {
        Self { population, travel, horizon, replications, seed, warmup_fraction: 0.2 }
    }
}

/// Mean over replications with a 95% normal-approximation half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    /// NaN samples (replications without observations) are skipped.
    pub fn from_samples(samples: &[f64]) -> Estimate {
        let v: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
        let r = v.len() as f64;
        if v.is_empty() {
            return Estimate { mean: f64::NAN, half_width: f64::INFINITY };
        }
        let mean = v.iter().sum::<f64>() / r;
        if v.len() < 2 {
            return Estimate { mean, half_width: f64::INFINITY };
        }
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
        Estimate { mean, half_width: Z_95 * (var / r).sqrt() }
    }

    pub fn covers(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

#[derive(Clone, Debug)]
pub struct DesEstimate {
    /// Truckloads delivered per hour over all warehouses.
    pub warehouse_throughput: Estimate,
    /// Departures per hour, nodes ordered `[center, warehouses, outbound
    /// lanes, return lanes]`.
    pub node_throughputs: Vec<Estimate>,
    /// Mean sojourn time per visit, same node order.
    pub sojourn_times: Vec<Estimate>,
    /// `Σ_i η_i W_i · TH / N`, which equals 1 by Little's law.
    pub little_ratio: Estimate,
    pub replications: usize,
    /// Warm-up discarded per replication, in the horizon's unit.
    pub warmup: f64,
    pub travel: TravelDistribution,
}

pub fn simulate(net: &StarNetwork, cfg: &DesConfig) -> DesEstimate {
    let model = Model::new(net);
    let warmup = match cfg.horizon {
        Horizon::Time(t) => t * cfg.warmup_fraction,
        Horizon::Events(e) => (e as f64 * cfg.warmup_fraction).floor(),
    };
    let runs: Vec<Replication> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            if cfg.population == 0 {
                Replication::idle(model.nodes())
            } else {
                model.run(cfg, rep as u64)
            }
        })
        .collect();
    let column = |f: &dyn Fn(&Replication) -> f64| Estimate::from_samples(&runs.iter().map(f).collect::<Vec<_>>());
    let nodes = model.nodes();
    let k = model.warehouses;
    DesEstimate {
        warehouse_throughput: column(&|r| r.throughput[1..=k].iter().sum()),
        node_throughputs: (0..nodes).map(|i| column(&|r| r.throughput[i])).collect(),
        sojourn_times: (0..nodes).map(|i| column(&|r| r.sojourn[i])).collect(),
        little_ratio: column(&|r| {
            if cfg.population == 0 {
                return f64::NAN;
            }
            let cycle: f64 = model.visits.iter().zip(&r.sojourn).filter(|(_, w)| !w.is_nan()).map(|(e, w)| e * w).sum();
            cycle * 4.0 * r.throughput[0] / cfg.population as f64
        }),
        replications: cfg.replications,
        warmup,
        travel: cfg.travel,
    }
}

struct Replication {
    throughput: Vec<f64>,
    sojourn: Vec<f64>,
}

impl Replication {
    fn idle(nodes: usize) -> Self {
        Replication { throughput: vec![0.0; nodes], sojourn: vec![f64::NAN; nodes] }
    }
}

struct Model {
    warehouses: usize,
    // stations: center then warehouses
    rates: Vec<(f64, u32)>,
    travel_means: Vec<f64>,
    cumulative_rho: Vec<f64>,
    // visit ratios of all explicit nodes
    visits: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    seq: u64,
    node: usize,
    truck: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

struct Streams {
    routing: ChaCha8Rng,
    service: ChaCha8Rng,
    travel: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64, rep: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(rep * 3 + k);
            r
        };
        Streams { routing: stream(0), service: stream(1), travel: stream(2) }
    }
}

impl Model {
    fn new(net: &StarNetwork) -> Self {
        let rates = net
            .rates()
            .iter()
            .map(|r| match r {
                ServiceRate::MultiServer { rate, servers } => (*rate, *servers),
                other => panic!("star stations are multi-server, got {other:?}"),
            })
            .collect();
        let k = net.distances().len();
        let rho: Vec<f64> = net.visits()[1..].iter().map(|v| v * 4.0).collect();
        let mut cumulative_rho: Vec<f64> = rho
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect();
        cumulative_rho[k - 1] = 1.0;
        let mut visits = net.visits().to_vec();
        for _ in 0..2 {
            visits.extend(rho.iter().map(|r| r / 4.0));
        }
        Model { warehouses: k, rates, travel_means: net.travel_means(), cumulative_rho, visits }
    }

    fn nodes(&self) -> usize {
        3 * self.warehouses + 1
    }

    fn is_station(&self, node: usize) -> bool {
        node <= self.warehouses
    }

    fn run(&self, cfg: &DesConfig, rep: u64) -> Replication {
        let k = self.warehouses;
        let nodes = self.nodes();
        let mut rng = Streams::new(cfg.seed, rep);
        let mut events = BinaryHeap::new();
        let mut seq = 0u64;
        let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); k + 1];
        let mut busy = vec![0u32; k + 1];
        let mut arrived = vec![0.0; cfg.population];

        let mut departures = vec![0u64; nodes];
        let mut sojourn_sum = vec![0.0; nodes];

        let (time_limit, event_limit) = match cfg.horizon {
            Horizon::Time(t) => (t, u64::MAX),
            Horizon::Events(e) => (f64::INFINITY, e),
        };
        let warmup_events = (event_limit as f64 * cfg.warmup_fraction).floor() as u64;
        let mut warmup_time = match cfg.horizon {
            Horizon::Time(t) => Some(t * cfg.warmup_fraction),
            Horizon::Events(_) => None,
        };

        macro_rules! arrive {
            ($node:expr, $truck:expr, $t:expr) => {{
                let (node, truck, t): (usize, usize, f64) = ($node, $truck, $t);
                arrived[truck] = t;
                if self.is_station(node) {
                    let (mu, servers) = self.rates[node];
                    if busy[node] < servers {
                        busy[node] += 1;
                        seq += 1;
                        let time = t + exponential(1.0 / mu, &mut rng.service);
                        events.push(Reverse(Event { time, seq, node, truck }));
                    } else {
                        queues[node].push_back(truck);
                    }
                } else {
                    let mean = self.travel_means[(node - k - 1) % k];
                    seq += 1;
                    let time = t + cfg.travel.sample(mean, &mut rng.travel);
                    events.push(Reverse(Event { time, seq, node, truck }));
                }
            }};
        }

        for truck in 0..cfg.population {
            arrive!(0, truck, 0.0);
        }

        let mut processed = 0u64;
        let mut now = 0.0;
        while let Some(Reverse(ev)) = events.pop() {
            if ev.time > time_limit || processed >= event_limit {
                break;
            }
            now = ev.time;
            processed += 1;
            if warmup_time.is_none() && processed > warmup_events {
                warmup_time = Some(now);
            }
            let measuring = warmup_time.is_some_and(|w| now >= w);
            if measuring {
                departures[ev.node] += 1;
                sojourn_sum[ev.node] += now - arrived[ev.truck];
            }

            let next = if ev.node == 0 {
                let u: f64 = rng.routing.gen();
                let j = self.cumulative_rho.partition_point(|c| *c <= u).min(k - 1);
                k + 1 + j
            } else if ev.node <= k {
                2 * k + ev.node
            } else if ev.node <= 2 * k {
                ev.node - k
            } else {
                0
            };

            if self.is_station(ev.node) {
                busy[ev.node] -= 1;
                if let Some(waiting) = queues[ev.node].pop_front() {
                    let (mu, _) = self.rates[ev.node];
                    busy[ev.node] += 1;
                    seq += 1;
                    let time = now + exponential(1.0 / mu, &mut rng.service);
                    events.push(Reverse(Event { time, seq, node: ev.node, truck: waiting }));
                }
            }
            arrive!(next, ev.truck, now);
        }

        let end = if time_limit.is_finite() { time_limit } else { now };
        let span = end - warmup_time.unwrap_or(end);
        let throughput = departures.iter().map(|&d| if span > 0.0 { d as f64 / span } else { 0.0 }).collect();
        let sojourn = departures.iter().zip(&sojourn_sum).map(|(&d, s)| if d > 0 { s / d as f64 } else { f64::NAN }).collect();
        Replication { throughput, sojourn }
    }
}
