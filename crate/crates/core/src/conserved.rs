//! Conserved quantities of the vortex flow and cluster diagnostics of the
//! intensities.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Frame, TrajectoryRecord, VortexSystem};
use crate::error::{invalid, Result, VortexError};
use crate::geometry::Vec2;
use crate::kernels::RadialKernel;

/// Largest `N` accepted by [`cluster_diagnostics`].
pub const MAX_ENUMERATION_SIZE: usize = 24;

/// All invariants of a configuration at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSnapshot {
    pub hamiltonian: f64,
    pub vorticity_vector: Vec2,
    pub moment_of_inertia: f64,
    pub collapse_constraint: f64,
    /// Relative mismatch between `C` and `2(Σa_i)I − 2|M|²`.
    pub identity_residual: f64,
    pub diameter: f64,
    /// Absent for neutral systems.
    pub center_of_vorticity: Option<Vec2>,
}

/// `H = Σ_{i≠j} a_i a_j G(|x_i − x_j|)`, over ordered pairs.
pub fn hamiltonian<K: RadialKernel + ?Sized>(system: &VortexSystem, kernel: &K) -> Result<f64> {
    if kernel.singular_at_zero() {
        system.check_separated()?;
    }
    Ok(hamiltonian_unchecked(system, kernel))
}

fn hamiltonian_unchecked<K: RadialKernel + ?Sized>(system: &VortexSystem, kernel: &K) -> f64 {
    let a = system.intensities();
    let x = system.positions();
    let mut h = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i != j {
                h += a[i] * a[j] * kernel.value((x[i] - x[j]).norm());
            }
        }
    }
    h
}

/// `M = Σ a_i x_i`.
pub fn vorticity_vector(system: &VortexSystem) -> Vec2 {
    system
        .intensities()
        .iter()
        .zip(system.positions())
        .map(|(a, x)| *a * *x)
        .sum()
}

/// `I = Σ a_i |x_i|²`.
pub fn moment_of_inertia(system: &VortexSystem) -> f64 {
    system
        .intensities()
        .iter()
        .zip(system.positions())
        .map(|(a, x)| a * x.norm_sq())
        .sum()
}

/// `B = M / Σa_i`; [`VortexError::NeutralSystem`] when `Σa_i = 0`.
pub fn center_of_vorticity(system: &VortexSystem) -> Result<Vec2> {
    let total = system.total_intensity();
    if total == 0.0 {
        return Err(VortexError::NeutralSystem);
    }
    Ok(vorticity_vector(system) / total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseConstraint {
    /// `C = Σ_{i≠j} a_i a_j |x_i − x_j|²`.
    pub value: f64,
    /// `2(Σa_i)I − 2|M|²`.
    pub via_identity: f64,
    /// `|value − via_identity|` relative to the magnitude of the terms
    /// cancelling in either route.
    pub residual: f64,
}

pub fn collapse_constraint(system: &VortexSystem) -> CollapseConstraint {
    let a = system.intensities();
    let x = system.positions();
    let mut value = 0.0;
    let mut direct_scale = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i != j {
                let d2 = (x[i] - x[j]).norm_sq();
                value += a[i] * a[j] * d2;
                direct_scale += (a[i] * a[j]).abs() * d2;
            }
        }
    }
    let m = vorticity_vector(system);
    let via_identity = 2.0 * system.total_intensity() * moment_of_inertia(system) - 2.0 * m.norm_sq();
    let abs_total: f64 = a.iter().map(|v| v.abs()).sum();
    let abs_inertia: f64 = a.iter().zip(x).map(|(v, p)| v.abs() * p.norm_sq()).sum();
    let scale = direct_scale.max(2.0 * abs_total * abs_inertia).max(f64::MIN_POSITIVE);
    CollapseConstraint {
        value,
        via_identity,
        residual: (value - via_identity).abs() / scale,
    }
}

/// `max_{i≠j} |x_i − x_j|`; zero for a single vortex.
pub fn diameter(system: &VortexSystem) -> f64 {
    let x = system.positions();
    let mut d: f64 = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            d = d.max((x[i] - x[j]).norm());
        }
    }
    d
}

/// Every invariant of `system`. Coincident vortices under a singular kernel
/// give an infinite Hamiltonian rather than an error.
pub fn invariant_snapshot<K: RadialKernel + ?Sized>(system: &VortexSystem, kernel: &K) -> InvariantSnapshot {
    let c = collapse_constraint(system);
    InvariantSnapshot {
        hamiltonian: hamiltonian_unchecked(system, kernel),
        vorticity_vector: vorticity_vector(system),
        moment_of_inertia: moment_of_inertia(system),
        collapse_constraint: c.value,
        identity_residual: c.residual,
        diameter: diameter(system),
        center_of_vorticity: center_of_vorticity(system).ok(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterClass {
    /// Every nonempty subset has nonzero total intensity.
    NonNeutralClusters,
    /// Every proper nonempty subset is non-neutral, the whole system is neutral.
    NonNeutralSubClusters,
    /// Some proper subset is neutral.
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterDiagnostics {
    /// `a = Σ|a_i|`.
    pub total_abs: f64,
    /// `A0 = min |Σ_{i∈P} a_i|` over nonempty proper subsets `P`.
    pub min_proper_subset_sum: f64,
    /// `A = min(A0, |Σa_i|)`.
    pub min_subset_sum: f64,
    pub classification: ClusterClass,
}

/// Subset sums at or below this fraction of `Σ|a_i|` count as zero, absorbing
/// rounding in the partial sums.
pub const NEUTRAL_TOLERANCE: f64 = 1e-12;

/// Exact minima over all subsets, by exhaustive enumeration (`N ≤ 24`).
pub fn cluster_diagnostics(intensities: &[f64]) -> Result<ClusterDiagnostics> {
    crate::dynamics::validate_intensities(intensities)?;
    let n = intensities.len();
    if n > MAX_ENUMERATION_SIZE {
        return Err(VortexError::TooLarge(n));
    }
    let total: f64 = intensities.iter().sum();
    let total_abs: f64 = intensities.iter().map(|a| a.abs()).sum();

    // Depth-first over include/exclude decisions; each subset sum is built by
    // adding its members in index order.
    fn walk(a: &[f64], k: usize, sum: f64, taken: usize, best: &mut f64) {
        if k == a.len() {
            if taken > 0 && taken < a.len() {
                *best = best.min(sum.abs());
            }
            return;
        }
        walk(a, k + 1, sum, taken, best);
        walk(a, k + 1, sum + a[k], taken + 1, best);
    }
    let mut a0 = f64::INFINITY;
    walk(intensities, 0, 0.0, 0, &mut a0);
    let min_subset = a0.min(total.abs());

    let zero = NEUTRAL_TOLERANCE * total_abs;
    let classification = if min_subset > zero {
        ClusterClass::NonNeutralClusters
    } else if a0 > zero {
        ClusterClass::NonNeutralSubClusters
    } else {
        ClusterClass::Neutral
    };
    Ok(ClusterDiagnostics {
        total_abs,
        min_proper_subset_sum: a0,
        min_subset_sum: min_subset,
        classification,
    })
}

/// Largest relative drift `|Q(t) − Q(0)| / max(|Q(0)|, 1)` of each invariant.
/// The vorticity vector and moment of inertia depend on the absolute frame and
/// are omitted for relative-coordinate records.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub hamiltonian: f64,
    pub vorticity_vector: Option<f64>,
    pub moment_of_inertia: Option<f64>,
    pub collapse_constraint: f64,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.hamiltonian
            .max(self.collapse_constraint)
            .max(self.vorticity_vector.unwrap_or(0.0))
            .max(self.moment_of_inertia.unwrap_or(0.0))
    }
}

pub fn drift_audit(record: &TrajectoryRecord) -> Result<DriftReport> {
    let log = &record.invariant_log;
    if log.len() < 2 {
        return Err(invalid("record", "drift audit needs at least two snapshots"));
    }
    let first = log[0];
    let drift = |f: &dyn Fn(&InvariantSnapshot) -> f64| {
        let q0 = f(&first);
        let norm = q0.abs().max(1.0);
        log.iter().map(|s| (f(s) - q0).abs() / norm).fold(0.0, f64::max)
    };
    let m_drift = || {
        let m0 = first.vorticity_vector;
        let norm = m0.norm().max(1.0);
        log.iter().map(|s| (s.vorticity_vector - m0).norm() / norm).fold(0.0, f64::max)
    };
    let absolute = matches!(record.frame, Frame::Absolute);
    Ok(DriftReport {
        hamiltonian: drift(&|s| s.hamiltonian),
        vorticity_vector: absolute.then(m_drift),
        moment_of_inertia: absolute.then(|| drift(&|s| s.moment_of_inertia)),
        collapse_constraint: drift(&|s| s.collapse_constraint),
    })
}
