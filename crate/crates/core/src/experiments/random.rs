//! Seeded sampling shared by the experiment blocks and the validation suite.
//!
//! Streams are ChaCha8 keyed by the 64-bit seed in little-endian order
//! (remaining key bytes zero) with the stream number selecting an
//! instance. Integers in `[0, n)` are drawn as the high 64 bits of
//! `next_u64() * n`.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::geometry::{DistanceMetric, Point};
use crate::scenario::{Center, Scenario, Warehouse};

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Uniform integer in `[0, n)`.
pub fn below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

/// Uniform integer in `[lo, hi]`.
pub fn between(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    lo + below(rng, (hi - lo + 1) as u64) as i64
}

/// Uniform real in `[lo, hi)` with 53 random bits.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (hi - lo) * u
}

/// Ranges for small random star instances.
#[derive(Clone, Copy, Debug)]
pub struct SmallInstance {
    pub warehouses: (usize, usize),
    pub rates: (f64, f64),
    pub distances: (f64, f64),
    pub max_servers: u32,
}

impl Default for SmallInstance {
    fn default() -> Self {
        Self { warehouses: (1, 2), rates: (0.5, 4.0), distances: (0.5, 5.0), max_servers: 1 }
    }
}

/// Center at the origin, warehouses at random bearings whose distance lies
/// in `distances`, speed 1 so travel means equal distances.
pub fn small_instance(rng: &mut ChaCha8Rng, spec: &SmallInstance) -> (Scenario, Point) {
    let k = between(rng, spec.warehouses.0 as i64, spec.warehouses.1 as i64) as usize;
    let servers = |rng: &mut ChaCha8Rng| between(rng, 1, spec.max_servers as i64) as u32;
    let center = Center { servers: servers(rng), load_rate: uniform(rng, spec.rates.0, spec.rates.1), location: None };
    let warehouses = (0..k)
        .map(|j| {
            let r = uniform(rng, spec.distances.0, spec.distances.1);
            let theta = uniform(rng, 0.0, std::f64::consts::TAU);
            Warehouse {
                id: j as u32 + 2,
                position: Point::new(r * theta.cos(), r * theta.sin()),
                demand_per_day: between(rng, 1, 10) as f64,
                servers: servers(rng),
                unload_rate: uniform(rng, spec.rates.0, spec.rates.1),
            }
        })
        .collect();
    let s = Scenario {
        warehouses,
        center,
        truck_speed: 1.0,
        truck_capacity: 1.0,
        hours_per_day: 24.0,
        max_trucks: 100,
        metric: DistanceMetric::Euclidean,
    };
    (s, Point::new(0.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream(7, 0).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(stream(7, 0).next_u64(), stream(7, 1).next_u64());
        assert_ne!(stream(7, 0).next_u64(), stream(8, 0).next_u64());
    }

    #[test]
    fn ranges_respected() {
        let mut rng = stream(1, 0);
        for _ in 0..1000 {
            let v = between(&mut rng, 10, 410);
            assert!((10..=410).contains(&v));
            let u = uniform(&mut rng, 0.5, 4.0);
            assert!((0.5..4.0).contains(&u));
        }
        assert_eq!(below(&mut rng, 1), 0);
    }

    #[test]
    fn small_instances_are_valid() {
        let mut rng = stream(3, 0);
        for _ in 0..50 {
            let (s, x) = small_instance(&mut rng, &SmallInstance::default());
            s.validate().unwrap();
            assert!((1..=2).contains(&s.warehouses.len()));
            for w in &s.warehouses {
                let d = w.position.distance(&x);
                assert!((0.5..5.0 + 1e-12).contains(&d));
            }
        }
    }
}
