//! Randomized search for three-vortex configurations with `C = 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conserved::collapse_constraint;
use crate::dynamics::{integrate, velocity, IntegratorConfig, TrajectoryRecord, VortexSystem};
use crate::error::{invalid, Result, VortexError};
use crate::geometry::Vec2;
use crate::kernels::KernelProfile;

/// Random directions tried before giving up.
pub const SEARCH_BUDGET: usize = 10_000;

/// `|C|` accepted as zero.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

/// Smallest normalized contraction rate accepted; configurations below it are
/// treated as (near-)relative equilibria that rotate rigidly.
const MIN_CONTRACTION: f64 = 0.05;

/// A `C = 0` triangle oriented so that it contracts under the Euler flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseCandidate {
    pub system: VortexSystem,
    pub collapse_constraint: f64,
    /// `−r²/(d r²/dt)` for the first pair: the collapse time if `r²` decays
    /// linearly, as it does for self-similar motion.
    pub collapse_time_estimate: f64,
}

/// Places two vortices at `(∓1/2, 0)` and the third at `λu` for a random unit
/// `u`, then brackets and bisects `C(λ) = 0`. The returned triangle has
/// `|C| ≤ 1e−10` and is reflected if necessary so that it shrinks.
pub fn find_collapse_candidate<R: Rng + ?Sized>(intensities: &[f64], rng: &mut R) -> Result<CollapseCandidate> {
    if intensities.len() != 3 {
        return Err(invalid(
            "intensities",
            format!("the collapse search needs exactly 3 intensities, got {}", intensities.len()),
        ));
    }
    crate::dynamics::validate_intensities(intensities)?;
    let positive = intensities.iter().filter(|a| **a > 0.0).count();
    if positive == 0 || positive == 3 {
        return Err(VortexError::NotFound(
            "C > 0 for every configuration of same-sign intensities".into(),
        ));
    }
    let euler = KernelProfile::euler();

    for _ in 0..SEARCH_BUDGET {
        // Random role for the scaled vortex, random direction.
        let lead = rng.random_range(0..3);
        let order = [(lead + 1) % 3, (lead + 2) % 3, lead];
        let a: Vec<f64> = order.iter().map(|&k| intensities[k]).collect();
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let u = Vec2::new(angle.cos(), angle.sin());
        let c = |lambda: f64| {
            let x = [Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0), lambda * u];
            let mut total = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        total += a[i] * a[j] * (x[i] - x[j]).norm_sq();
                    }
                }
            }
            total
        };

        let Some((mut lo, mut hi)) = bracket(&c) else { continue };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (c(mid) > 0.0) == (c(lo) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lambda = if c(lo).abs() <= c(hi).abs() { lo } else { hi };

        let mut positions = vec![Vec2::ZERO; 3];
        positions[order[0]] = Vec2::new(-0.5, 0.0);
        positions[order[1]] = Vec2::new(0.5, 0.0);
        positions[order[2]] = lambda * u;
        let mut system = VortexSystem::new(intensities.to_vec(), positions)?;
        let constraint = collapse_constraint(&system).value;
        if constraint.abs() > CONSTRAINT_TOLERANCE || system.check_separated().is_err() {
            continue;
        }

        let Some(rate) = contraction_rate(&system, &euler) else { continue };
        let diameter = crate::conserved::diameter(&system);
        let speed = velocity(&system, &euler)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if rate.abs() < MIN_CONTRACTION * speed / diameter {
            continue;
        }
        // Reflection reverses the direction of motion.
        if rate > 0.0 {
            system = system.reflected();
        }
        let rate = rate.abs();
        return Ok(CollapseCandidate {
            collapse_constraint: collapse_constraint(&system).value,
            collapse_time_estimate: 1.0 / rate,
            system,
        });
    }
    Err(VortexError::NotFound(format!(
        "no contracting C = 0 triangle within {SEARCH_BUDGET} random trials"
    )))
}

/// Horizon of [`integrate_candidate`] as a multiple of the collapse-time estimate.
pub const DEMO_HORIZON_FACTOR: f64 = 1.5;

/// Integrates a candidate under the Euler kernel past its estimated collapse
/// time; the run is expected to end in step-size underflow.
pub fn integrate_candidate(candidate: &CollapseCandidate, config: &IntegratorConfig) -> Result<TrajectoryRecord> {
    integrate(
        &candidate.system,
        &KernelProfile::euler(),
        DEMO_HORIZON_FACTOR * candidate.collapse_time_estimate,
        config,
    )
}

/// Scale interval `[λ_lo, λ_hi]` on which `C` changes sign.
fn bracket(c: &impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    let mut prev = (0.0, c(0.0));
    let mut lambda = 1e-3;
    while lambda < 1e3 {
        let value = c(lambda);
        if value == 0.0 {
            return Some((lambda, lambda));
        }
        if (value > 0.0) != (prev.1 > 0.0) {
            return Some((prev.0, lambda));
        }
        prev = (lambda, value);
        lambda *= 1.1;
    }
    None
}

/// `(d r²/dt) / r²` for the pair `(0, 1)`.
fn contraction_rate(system: &VortexSystem, kernel: &KernelProfile) -> Option<f64> {
    let v = velocity(system, kernel).ok()?;
    let x = system.positions();
    let d = x[0] - x[1];
    Some(2.0 * d.dot(v[0] - v[1]) / d.norm_sq())
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn finds_zero_constraint_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cand = find_collapse_candidate(&[1.0, 1.0, -0.5], &mut rng).unwrap();
        assert!(cand.collapse_constraint.abs() <= CONSTRAINT_TOLERANCE);
        assert!(cand.collapse_time_estimate > 0.0);
        let rate = contraction_rate(&cand.system, &KernelProfile::euler()).unwrap();
        assert!(rate < 0.0);

        let rec = integrate_candidate(&cand, &IntegratorConfig::default()).unwrap();
        assert!(matches!(rec.termination, crate::dynamics::Termination::StepUnderflow { .. }));
        assert!(*rec.min_pair_distance.last().unwrap() < 1e-4);
    }

    #[test]
    fn same_signs_never_reach_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(matches!(
            find_collapse_candidate(&[1.0, 1.0, 1.0], &mut rng),
            Err(VortexError::NotFound(_))
        ));
        assert!(find_collapse_candidate(&[1.0, -1.0], &mut rng).is_err());
    }
}
