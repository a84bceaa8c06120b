//! Recorded integrations of the absolute and relative systems.

use serde::{Deserialize, Serialize};

use super::integrator::{self, IntegrationStats, IntegratorConfig, OdeSystem, Outcome, Termination};
use super::{absolute_field, relative_field, RelativeSystem, VortexSystem};
use crate::conserved::{invariant_snapshot, InvariantSnapshot};
use crate::error::{invalid, Result};
use crate::geometry::Vec2;
use crate::kernels::RadialKernel;

/// Coordinates in which a record's states are expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "frame", rename_all = "lowercase")]
pub enum Frame {
    /// States are the positions `x_1, ..., x_N`.
    Absolute,
    /// States are the differences `y_ij`, `j ≠ anchor`, in increasing `j`.
    Relative { anchor: usize },
}

/// Time-stamped states of one integration, with the minimum pairwise distance
/// and all invariants at every accepted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub frame: Frame,
    pub intensities: Vec<f64>,
    pub final_time: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<Vec2>>,
    pub min_pair_distance: Vec<f64>,
    /// For relative records the invariants are those of the representative
    /// with the anchor at the origin.
    pub invariant_log: Vec<InvariantSnapshot>,
    pub termination: Termination,
    pub stats: IntegrationStats,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Absolute configuration at snapshot `k`; relative states are placed
    /// with the anchor at the origin.
    pub fn system_at(&self, k: usize) -> VortexSystem {
        let intensities = self.intensities.clone();
        match self.frame {
            Frame::Absolute => VortexSystem {
                intensities,
                positions: self.states[k].clone(),
            },
            Frame::Relative { anchor } => RelativeSystem {
                anchor,
                intensities,
                differences: self.states[k].clone(),
            }
            .to_absolute(Vec2::ZERO),
        }
    }

    pub fn final_system(&self) -> VortexSystem {
        self.system_at(self.len() - 1)
    }

    /// Relative state at snapshot `k`, for relative-frame records.
    pub fn relative_at(&self, k: usize) -> Option<RelativeSystem> {
        match self.frame {
            Frame::Absolute => None,
            Frame::Relative { anchor } => Some(RelativeSystem {
                anchor,
                intensities: self.intensities.clone(),
                differences: self.states[k].clone(),
            }),
        }
    }

    /// Time at which the integration stopped.
    pub fn end_time(&self) -> f64 {
        self.termination.time(self.final_time)
    }
}

pub(crate) struct AbsoluteOde<'a, K: ?Sized> {
    pub kernel: &'a K,
    pub intensities: &'a [f64],
    pub compensated: bool,
}

impl<K: RadialKernel + ?Sized> OdeSystem for AbsoluteOde<'_, K> {
    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        absolute_field(self.kernel, self.intensities, y, dy, self.compensated);
    }

    fn event_distance(&self, y: &[f64]) -> (f64, (usize, usize)) {
        let n = self.intensities.len();
        let mut best = (f64::INFINITY, (0, 0));
        for i in 0..n {
            for j in i + 1..n {
                let d = (y[2 * i] - y[2 * j]).hypot(y[2 * i + 1] - y[2 * j + 1]);
                if d < best.0 {
                    best = (d, (i, j));
                }
            }
        }
        best
    }
}

/// The modified system. Events monitor only the anchor distances `|y_ij|`.
pub(crate) struct RelativeOde<'a, K: ?Sized> {
    pub kernel: &'a K,
    pub anchor: usize,
    pub anchor_intensity: f64,
    pub others: Vec<f64>,
    pub compensated: bool,
}

impl<'a, K: RadialKernel + ?Sized> RelativeOde<'a, K> {
    pub fn new(rel: &RelativeSystem, kernel: &'a K, compensated: bool) -> Self {
        RelativeOde {
            kernel,
            anchor: rel.anchor,
            anchor_intensity: rel.intensities[rel.anchor],
            others: rel.other_intensities(),
            compensated,
        }
    }

    fn vortex_index(&self, m: usize) -> usize {
        if m < self.anchor {
            m
        } else {
            m + 1
        }
    }
}

impl<K: RadialKernel + ?Sized> OdeSystem for RelativeOde<'_, K> {
    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        relative_field(self.kernel, self.anchor_intensity, &self.others, y, dy, self.compensated);
    }

    fn event_distance(&self, y: &[f64]) -> (f64, (usize, usize)) {
        let mut best = (f64::INFINITY, 0);
        for (m, c) in y.chunks_exact(2).enumerate() {
            let d = c[0].hypot(c[1]);
            if d < best.0 {
                best = (d, m);
            }
        }
        (best.0, (self.anchor, self.vortex_index(best.1)))
    }
}

fn check_horizon(final_time: f64) -> Result<()> {
    if final_time > 0.0 && final_time.is_finite() {
        Ok(())
    } else {
        Err(invalid("final_time", format!("must be positive and finite, got {final_time}")))
    }
}

/// Smallest distance among all vortices of a relative state:
/// `min(|y_ij|, |y_ij − y_ik|)`.
fn relative_min_distance(d: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for (m, a) in d.iter().enumerate() {
        best = best.min(a.norm());
        for b in &d[m + 1..] {
            best = best.min((*a - *b).norm());
        }
    }
    best
}

/// Integrates the vortex equation over `[0, final_time]`, recording every
/// accepted step.
pub fn integrate<K: RadialKernel + ?Sized>(
    system: &VortexSystem,
    kernel: &K,
    final_time: f64,
    config: &IntegratorConfig,
) -> Result<TrajectoryRecord> {
    check_horizon(final_time)?;
    config.validate()?;
    if kernel.singular_at_zero() {
        system.check_separated()?;
    }
    let ode = AbsoluteOde {
        kernel,
        intensities: &system.intensities,
        compensated: config.compensated,
    };
    let mut record = TrajectoryRecord {
        frame: Frame::Absolute,
        intensities: system.intensities.clone(),
        final_time,
        times: Vec::new(),
        states: Vec::new(),
        min_pair_distance: Vec::new(),
        invariant_log: Vec::new(),
        termination: Termination::ReachedFinalTime,
        stats: IntegrationStats::default(),
    };
    let outcome = integrator::run(&ode, &system.flat_state(), final_time, config, |t, y| {
        let snapshot = system.from_flat(y);
        record.times.push(t);
        record
            .min_pair_distance
            .push(snapshot.min_pair_distance().map_or(f64::INFINITY, |(d, _)| d));
        record.invariant_log.push(invariant_snapshot(&snapshot, kernel));
        record.states.push(snapshot.positions);
    });
    record.termination = outcome.termination;
    record.stats = outcome.stats;
    Ok(record)
}

/// Integrates the modified system; the ε-collapse event watches `min_j |y_ij|`.
pub fn integrate_relative<K: RadialKernel + ?Sized>(
    rel: &RelativeSystem,
    kernel: &K,
    final_time: f64,
    config: &IntegratorConfig,
) -> Result<TrajectoryRecord> {
    check_horizon(final_time)?;
    config.validate()?;
    if kernel.singular_at_zero() {
        rel.check_separated()?;
    }
    let ode = RelativeOde::new(rel, kernel, config.compensated);
    let mut record = TrajectoryRecord {
        frame: Frame::Relative { anchor: rel.anchor },
        intensities: rel.intensities.clone(),
        final_time,
        times: Vec::new(),
        states: Vec::new(),
        min_pair_distance: Vec::new(),
        invariant_log: Vec::new(),
        termination: Termination::ReachedFinalTime,
        stats: IntegrationStats::default(),
    };
    let outcome = integrator::run(&ode, &rel.flat_state(), final_time, config, |t, y| {
        let snapshot = rel.from_flat(y);
        record.times.push(t);
        record.min_pair_distance.push(relative_min_distance(&snapshot.differences));
        record
            .invariant_log
            .push(invariant_snapshot(&snapshot.to_absolute(Vec2::ZERO), kernel));
        record.states.push(snapshot.differences);
    });
    record.termination = outcome.termination;
    record.stats = outcome.stats;
    Ok(record)
}

/// Unrecorded run of the modified system.
pub(crate) fn run_relative<K: RadialKernel + ?Sized>(
    rel: &RelativeSystem,
    kernel: &K,
    final_time: f64,
    config: &IntegratorConfig,
) -> Outcome {
    let ode = RelativeOde::new(rel, kernel, config.compensated);
    integrator::run(&ode, &rel.flat_state(), final_time, config, |_, _| {})
}

/// The flow `S^T` applied to `system`, without recording.
pub fn flow_map<K: RadialKernel + ?Sized>(
    system: &VortexSystem,
    kernel: &K,
    final_time: f64,
    config: &IntegratorConfig,
) -> Result<(VortexSystem, Termination)> {
    check_horizon(final_time)?;
    config.validate()?;
    if kernel.singular_at_zero() {
        system.check_separated()?;
    }
    let ode = AbsoluteOde {
        kernel,
        intensities: &system.intensities,
        compensated: config.compensated,
    };
    let out = integrator::run(&ode, &system.flat_state(), final_time, config, |_, _| {});
    Ok((system.from_flat(&out.state), out.termination))
}

/// The flow of the modified system, without recording.
pub fn relative_flow_map<K: RadialKernel + ?Sized>(
    rel: &RelativeSystem,
    kernel: &K,
    final_time: f64,
    config: &IntegratorConfig,
) -> Result<(RelativeSystem, Termination)> {
    check_horizon(final_time)?;
    config.validate()?;
    if kernel.singular_at_zero() {
        rel.check_separated()?;
    }
    let out = run_relative(rel, kernel, final_time, config);
    Ok((rel.from_flat(&out.state), out.termination))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};

    use super::*;
    use crate::kernels::KernelProfile;

    fn pair(a1: f64, a2: f64) -> VortexSystem {
        VortexSystem::new(vec![a1, a2], vec![Vec2::new(0.5, 0.0), Vec2::new(-0.5, 0.0)]).unwrap()
    }

    #[test]
    fn circular_orbit() {
        let cfg = IntegratorConfig::default();
        let rec = integrate(&pair(2.0 * PI, 2.0 * PI), &KernelProfile::euler(), FRAC_PI_4, &cfg).unwrap();
        assert_eq!(rec.termination, Termination::ReachedFinalTime);
        // Clockwise rotation by ω t = π/2.
        let end = rec.final_system();
        assert!((end.positions()[0] - Vec2::new(0.0, -0.5)).norm() < 1e-6);
        assert!((end.positions()[1] - Vec2::new(0.0, 0.5)).norm() < 1e-6);
        assert!(rec.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*rec.times.last().unwrap(), FRAC_PI_4);
    }

    #[test]
    fn translating_pair() {
        let cfg = IntegratorConfig::default();
        let rec = integrate(&pair(2.0 * PI, -2.0 * PI), &KernelProfile::euler(), 5.0, &cfg).unwrap();
        let end = rec.final_system();
        assert!((end.positions()[0] - Vec2::new(0.5, 5.0)).norm() < 1e-8);
        assert!((end.positions()[1] - Vec2::new(-0.5, 5.0)).norm() < 1e-8);
        assert!(rec.min_pair_distance.iter().all(|d| (d - 1.0).abs() < 1e-8));

        let rel = pair(2.0 * PI, -2.0 * PI).relative(0).unwrap();
        let rec = integrate_relative(&rel, &KernelProfile::euler(), 5.0, &cfg).unwrap();
        for s in &rec.states {
            assert!((s[0] - Vec2::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn threshold_zero_reaches_final_time() {
        let sys = VortexSystem::new(
            vec![1.0, -0.7, 0.4],
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.2), Vec2::new(-0.3, 0.9)],
        )
        .unwrap();
        let rec = integrate(&sys, &KernelProfile::euler(), 0.5, &IntegratorConfig::default()).unwrap();
        assert_eq!(rec.termination, Termination::ReachedFinalTime);
    }

    #[test]
    fn relative_event_names_anchor_pair() {
        let rel = RelativeSystem::new(1, vec![1.0, 1.0, 1.0], vec![Vec2::new(1.0, 0.0), Vec2::new(0.05, 0.0)]).unwrap();
        let cfg = IntegratorConfig {
            collapse_threshold: 0.1,
            ..Default::default()
        };
        let kernel = KernelProfile::euler().regularize(0.1).unwrap();
        let rec = integrate_relative(&rel, &kernel, 1.0, &cfg).unwrap();
        assert_eq!(rec.termination, Termination::EpsCollapse { time: 0.0, pair: (1, 2) });
    }

    #[test]
    fn rejects_bad_horizon() {
        let e = KernelProfile::euler();
        assert!(integrate(&pair(1.0, 1.0), &e, 0.0, &IntegratorConfig::default()).is_err());
        assert!(integrate(&pair(1.0, 1.0), &e, f64::NAN, &IntegratorConfig::default()).is_err());
    }
}
