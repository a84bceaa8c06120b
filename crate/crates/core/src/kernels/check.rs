//! Sampled verification of the four regularization conditions:
//!
//! 1. `G_ε(q) = G(q)` for `q ≥ ε`;
//! 2. `|G_ε(q)| ≤ |G(q)|` for all `q > 0`;
//! 3. `|G_ε'(q)| ≤ |G'(ε)|` for `q ≤ ε`;
//! 4. `|G_ε(q)| ≤ 2|G(ε)|` for all `q ≥ 0`;
//!
//! plus C¹ continuity at the junction `q = ε`.

use serde::{Deserialize, Serialize};

use super::Regularization;

/// Inequalities are accepted up to this many ulps of the right-hand side.
const ROUNDING_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionOutcome {
    /// Grid points at which the condition applies.
    pub checked: usize,
    pub violations: usize,
    /// Smallest `rhs − lhs` over the checked points (negative when violated).
    pub worst_margin: f64,
    /// Grid value of `q` where `worst_margin` is attained.
    pub worst_at: f64,
}

impl ConditionOutcome {
    fn new() -> Self {
        ConditionOutcome {
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_at: f64::NAN,
        }
    }

    fn record(&mut self, q: f64, margin: f64, slack: f64) {
        self.checked += 1;
        if margin < -slack || margin.is_nan() {
            self.violations += 1;
        }
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.worst_at = q;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub epsilon: f64,
    pub grid_points: usize,
    pub conditions: [ConditionOutcome; 4],
    /// Largest relative mismatch at the junction between left and right
    /// values, left and right slopes, and the central finite-difference slope
    /// against `G'(ε)`.
    pub junction_residual: f64,
}

impl ConditionReport {
    pub const JUNCTION_TOLERANCE: f64 = 1e-6;

    pub fn passed(&self) -> bool {
        self.conditions.iter().all(ConditionOutcome::passed)
            && self.junction_residual <= Self::JUNCTION_TOLERANCE
    }
}

/// `n` evenly spaced points on `[0, 10ε]`.
pub fn default_grid(epsilon: f64, n: usize) -> Vec<f64> {
    let top = 10.0 * epsilon;
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| top * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn check_conditions<R: Regularization + ?Sized>(kernel: &R, grid: &[f64]) -> ConditionReport {
    let eps = kernel.epsilon();
    let base_eps = kernel.base_value(eps).abs();
    let base_slope_eps = kernel.base_radial_derivative(eps).abs();
    let mut out = [ConditionOutcome::new(); 4];

    for &q in grid {
        let v = kernel.value(q);
        if q >= eps {
            let diff = (v - kernel.base_value(q)).abs();
            out[0].record(q, -diff, 0.0);
        }
        if q > 0.0 {
            let rhs = kernel.base_value(q).abs();
            out[1].record(q, rhs - v.abs(), ROUNDING_SLACK * rhs);
        }
        if q <= eps {
            let d = kernel.radial_derivative(q).abs();
            out[2].record(q, base_slope_eps - d, ROUNDING_SLACK * base_slope_eps);
        }
        let rhs = 2.0 * base_eps;
        out[3].record(q, rhs - v.abs(), ROUNDING_SLACK * rhs);
    }

    ConditionReport {
        epsilon: eps,
        grid_points: grid.len(),
        conditions: out,
        junction_residual: junction_residual(kernel),
    }
}

fn junction_residual<R: Regularization + ?Sized>(kernel: &R) -> f64 {
    let eps = kernel.epsilon();
    let below = eps * (1.0 - 1e-12);
    let g = kernel.base_value(eps);
    let dg = kernel.base_radial_derivative(eps);
    let value_scale = g.abs().max(eps * dg.abs());
    let value_jump = (kernel.value(below) - kernel.value(eps)).abs() / value_scale;
    let slope_jump = (kernel.radial_derivative(below) - kernel.radial_derivative(eps)).abs() / dg.abs();
    let h = 1e-7 * eps;
    let fd = (kernel.value(eps + h) - kernel.value(eps - h)) / (2.0 * h);
    let fd_mismatch = (fd - dg).abs() / dg.abs();
    value_jump.max(slope_jump).max(fd_mismatch)
}
