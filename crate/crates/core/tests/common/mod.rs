#![allow(dead_code)]

use rand::Rng;
use vortexlab_core::{Vec2, VortexSystem};

/// Intensities `±U(0.5, 1.5)` and positions in `[−1, 1]²`, redrawn until every
/// pair is at least `min_separation` apart.
pub fn random_system<R: Rng>(rng: &mut R, n: usize, min_separation: f64) -> VortexSystem {
    loop {
        let a: Vec<f64> = (0..n)
            .map(|_| {
                let m = rng.random_range(0.5..1.5);
                if rng.random_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let x: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let s = VortexSystem::new(a, x).unwrap();
        if s.min_pair_distance().is_none_or(|(d, _)| d >= min_separation) {
            return s;
        }
    }
}

pub fn max_speed(v: &[Vec2]) -> f64 {
    v.iter().map(|p| p.norm()).fold(0.0, f64::max)
}
