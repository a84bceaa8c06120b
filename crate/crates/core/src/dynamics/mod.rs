//! Point-vortex equations of motion, in absolute coordinates and in the
//! relative coordinates `y_ij = x_i − x_j` anchored at one vortex.

mod integrator;
mod liouville;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VortexError};
use crate::geometry::Vec2;
use crate::kernels::RadialKernel;

pub use integrator::{IntegrationStats, IntegratorConfig, Termination};
pub use liouville::{
    flow_jacobian_determinant, phase_space_divergence, relative_phase_space_divergence,
};
pub(crate) use trajectory::run_relative;
pub use trajectory::{
    flow_map, integrate, integrate_relative, relative_flow_map, Frame, TrajectoryRecord,
};

/// `N` vortices: signed intensities `a_i` and planar positions `x_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct VortexSystem {
    intensities: Vec<f64>,
    positions: Vec<Vec2>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    intensities: Vec<f64>,
    positions: Vec<Vec2>,
}

impl TryFrom<RawSystem> for VortexSystem {
    type Error = VortexError;
    fn try_from(raw: RawSystem) -> Result<Self> {
        VortexSystem::new(raw.intensities, raw.positions)
    }
}

pub(crate) fn validate_intensities(intensities: &[f64]) -> Result<()> {
    if intensities.is_empty() {
        return Err(invalid("intensities", "at least one vortex is required"));
    }
    if let Some(i) = intensities.iter().position(|a| *a == 0.0 || !a.is_finite()) {
        return Err(invalid(
            "intensities",
            format!("intensity {} of vortex {} must be finite and nonzero", intensities[i], i + 1),
        ));
    }
    Ok(())
}

impl VortexSystem {
    pub fn new(intensities: Vec<f64>, positions: Vec<Vec2>) -> Result<Self> {
        validate_intensities(&intensities)?;
        if positions.len() != intensities.len() {
            return Err(invalid(
                "positions",
                format!("{} positions for {} intensities", positions.len(), intensities.len()),
            ));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(invalid("positions", format!("position of vortex {} is not finite", i + 1)));
        }
        Ok(VortexSystem {
            intensities,
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn total_intensity(&self) -> f64 {
        self.intensities.iter().sum()
    }

    /// Same intensities at new positions.
    pub fn with_positions(&self, positions: Vec<Vec2>) -> Result<Self> {
        VortexSystem::new(self.intensities.clone(), positions)
    }

    pub fn translated(&self, by: Vec2) -> Self {
        VortexSystem {
            intensities: self.intensities.clone(),
            positions: self.positions.iter().map(|p| *p + by).collect(),
        }
    }

    /// Rigid rotation about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        VortexSystem {
            intensities: self.intensities.clone(),
            positions: self.positions.iter().map(|p| p.rotated(angle)).collect(),
        }
    }

    /// Mirror image through the horizontal axis; reverses the sense of motion.
    pub fn reflected(&self) -> Self {
        VortexSystem {
            intensities: self.intensities.clone(),
            positions: self.positions.iter().map(|p| Vec2::new(p.x, -p.y)).collect(),
        }
    }

    /// Negated intensities: the flow of the result runs the original flow
    /// backwards in time.
    pub fn time_reversed(&self) -> Self {
        VortexSystem {
            intensities: self.intensities.iter().map(|a| -a).collect(),
            positions: self.positions.clone(),
        }
    }

    /// Smallest pairwise distance and the pair attaining it, `None` for `N = 1`.
    pub fn min_pair_distance(&self) -> Option<(f64, (usize, usize))> {
        let mut best: Option<(f64, (usize, usize))> = None;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = (self.positions[i] - self.positions[j]).norm();
                if best.is_none_or(|(b, _)| d < b) {
                    best = Some((d, (i, j)));
                }
            }
        }
        best
    }

    /// Fails with [`VortexError::Singularity`] naming the first coincident pair.
    pub fn check_separated(&self) -> Result<()> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.positions[i] == self.positions[j] {
                    return Err(VortexError::Singularity(i, j));
                }
            }
        }
        Ok(())
    }

    /// Relative coordinates anchored at vortex `anchor` (0-based).
    pub fn relative(&self, anchor: usize) -> Result<RelativeSystem> {
        if anchor >= self.len() {
            return Err(invalid("anchor", format!("index {anchor} out of range for N = {}", self.len())));
        }
        let xi = self.positions[anchor];
        let differences = (0..self.len())
            .filter(|&j| j != anchor)
            .map(|j| xi - self.positions[j])
            .collect();
        RelativeSystem::new(anchor, self.intensities.clone(), differences)
    }

    pub(crate) fn flat_state(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub(crate) fn from_flat(&self, y: &[f64]) -> Self {
        VortexSystem {
            intensities: self.intensities.clone(),
            positions: y.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect(),
        }
    }
}

/// The modified system: anchor `i` and the `N − 1` differences `y_ij = x_i − x_j`,
/// stored in increasing order of `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeSystem {
    anchor: usize,
    intensities: Vec<f64>,
    differences: Vec<Vec2>,
}

impl RelativeSystem {
    pub fn new(anchor: usize, intensities: Vec<f64>, differences: Vec<Vec2>) -> Result<Self> {
        validate_intensities(&intensities)?;
        if anchor >= intensities.len() {
            return Err(invalid(
                "anchor",
                format!("index {anchor} out of range for N = {}", intensities.len()),
            ));
        }
        if differences.len() + 1 != intensities.len() {
            return Err(invalid(
                "differences",
                format!("{} differences for N = {}", differences.len(), intensities.len()),
            ));
        }
        if differences.iter().any(|d| !d.is_finite()) {
            return Err(invalid("differences", "differences must be finite"));
        }
        Ok(RelativeSystem {
            anchor,
            intensities,
            differences,
        })
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn differences(&self) -> &[Vec2] {
        &self.differences
    }

    /// Vortex indices `j ≠ anchor`, in the storage order of the differences.
    pub fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&j| j != self.anchor)
    }

    /// `y_ij` for `j ≠ anchor`.
    pub fn difference(&self, j: usize) -> Option<Vec2> {
        if j == self.anchor || j >= self.len() {
            return None;
        }
        Some(self.differences[if j < self.anchor { j } else { j - 1 }])
    }

    /// An absolute configuration with the anchor placed at `origin`.
    pub fn to_absolute(&self, origin: Vec2) -> VortexSystem {
        let mut positions = Vec::with_capacity(self.len());
        let mut d = self.differences.iter();
        for j in 0..self.len() {
            if j == self.anchor {
                positions.push(origin);
            } else {
                positions.push(origin - *d.next().expect("N - 1 differences"));
            }
        }
        VortexSystem {
            intensities: self.intensities.clone(),
            positions,
        }
    }

    /// `min_j |y_ij|` and the minimizing `j`; `None` for `N = 1`.
    pub fn min_anchor_distance(&self) -> Option<(f64, usize)> {
        self.others()
            .zip(&self.differences)
            .map(|(j, d)| (d.norm(), j))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Fails when some `y_ij` or `y_ij − y_ik` vanishes.
    pub fn check_separated(&self) -> Result<()> {
        let others: Vec<usize> = self.others().collect();
        for (m, &j) in others.iter().enumerate() {
            if self.differences[m] == Vec2::ZERO {
                return Err(VortexError::Singularity(self.anchor, j));
            }
            for n in m + 1..others.len() {
                if self.differences[m] == self.differences[n] {
                    return Err(VortexError::Singularity(j, others[n]));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn flat_state(&self) -> Vec<f64> {
        self.differences.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub(crate) fn from_flat(&self, y: &[f64]) -> Self {
        RelativeSystem {
            anchor: self.anchor,
            intensities: self.intensities.clone(),
            differences: y.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect(),
        }
    }

    /// Intensities of the non-anchor vortices, in storage order.
    pub(crate) fn other_intensities(&self) -> Vec<f64> {
        self.others().map(|j| self.intensities[j]).collect()
    }
}

/// Running sum of planar vectors, optionally Neumaier-compensated.
#[derive(Clone, Copy)]
struct VecSum {
    sum: Vec2,
    carry: Vec2,
    compensated: bool,
}

impl VecSum {
    #[inline]
    fn new(compensated: bool) -> Self {
        VecSum {
            sum: Vec2::ZERO,
            carry: Vec2::ZERO,
            compensated,
        }
    }

    #[inline]
    fn add(&mut self, v: Vec2) {
        if self.compensated {
            self.sum.x = neumaier(self.sum.x, v.x, &mut self.carry.x);
            self.sum.y = neumaier(self.sum.y, v.y, &mut self.carry.y);
        } else {
            self.sum += v;
        }
    }

    #[inline]
    fn value(self) -> Vec2 {
        self.sum + self.carry
    }
}

#[inline]
fn neumaier(sum: f64, x: f64, carry: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *carry += (sum - t) + x;
    } else {
        *carry += (x - t) + sum;
    }
    t
}

#[inline]
fn perp_grad<K: RadialKernel + ?Sized>(kernel: &K, d: Vec2) -> Vec2 {
    let r = d.norm();
    if r == 0.0 && !kernel.singular_at_zero() {
        return Vec2::ZERO;
    }
    d.perp() * kernel.derivative_over_r(r)
}

/// Absolute vector field on a flat state `[x1, y1, x2, y2, ...]`.
pub(crate) fn absolute_field<K: RadialKernel + ?Sized>(
    kernel: &K,
    intensities: &[f64],
    y: &[f64],
    dy: &mut [f64],
    compensated: bool,
) {
    let n = intensities.len();
    for i in 0..n {
        let xi = Vec2::new(y[2 * i], y[2 * i + 1]);
        let mut acc = VecSum::new(compensated);
        for j in 0..n {
            if j != i {
                let xj = Vec2::new(y[2 * j], y[2 * j + 1]);
                acc.add(intensities[j] * perp_grad(kernel, xi - xj));
            }
        }
        let v = acc.value();
        dy[2 * i] = v.x;
        dy[2 * i + 1] = v.y;
    }
}

/// Relative vector field on a flat state of the `N − 1` differences.
/// `others` holds the intensities of the non-anchor vortices in storage order.
pub(crate) fn relative_field<K: RadialKernel + ?Sized>(
    kernel: &K,
    anchor_intensity: f64,
    others: &[f64],
    y: &[f64],
    dy: &mut [f64],
    compensated: bool,
) {
    let m = others.len();
    for j in 0..m {
        let yj = Vec2::new(y[2 * j], y[2 * j + 1]);
        let mut acc = VecSum::new(compensated);
        acc.add((anchor_intensity + others[j]) * perp_grad(kernel, yj));
        for k in 0..m {
            if k != j {
                let yk = Vec2::new(y[2 * k], y[2 * k + 1]);
                acc.add(others[k] * (perp_grad(kernel, yk) + perp_grad(kernel, yj - yk)));
            }
        }
        let v = acc.value();
        dy[2 * j] = v.x;
        dy[2 * j + 1] = v.y;
    }
}

/// `dx_i/dt = Σ_{j≠i} a_j ∇⊥G(|x_i − x_j|)` for every vortex.
pub fn velocity<K: RadialKernel + ?Sized>(system: &VortexSystem, kernel: &K) -> Result<Vec<Vec2>> {
    if kernel.singular_at_zero() {
        system.check_separated()?;
    }
    let y = system.flat_state();
    let mut dy = vec![0.0; y.len()];
    absolute_field(kernel, &system.intensities, &y, &mut dy, false);
    Ok(dy.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect())
}

/// `dy_ij/dt = (a_i + a_j)∇⊥G(|y_ij|) + Σ_{k≠i,j} a_k [∇⊥G(|y_ik|) + ∇⊥G(|y_ij − y_ik|)]`,
/// in the storage order of the differences.
pub fn relative_velocity<K: RadialKernel + ?Sized>(rel: &RelativeSystem, kernel: &K) -> Result<Vec<Vec2>> {
    if kernel.singular_at_zero() {
        rel.check_separated()?;
    }
    let y = rel.flat_state();
    let mut dy = vec![0.0; y.len()];
    relative_field(
        kernel,
        rel.intensities[rel.anchor],
        &rel.other_intensities(),
        &y,
        &mut dy,
        false,
    );
    Ok(dy.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect())
}
