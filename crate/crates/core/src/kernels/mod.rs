//! Radial interaction kernels: the Euler (logarithmic) and SQG (power-law)
//! Green-function profiles, user-supplied profiles, and their
//! ε-regularizations.

mod check;
mod regularized;
mod spec;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VortexError};
use crate::geometry::Vec2;

pub use check::{check_conditions, default_grid, ConditionOutcome, ConditionReport};
pub use regularized::{regularize, AuxiliaryKernel, Regularization, RegularizedKernel};
pub use spec::{Kernel, KernelFamily, KernelSpec};

/// A radial profile `G(r)` whose perp-gradient drives the vortex motion.
pub trait RadialKernel: Send + Sync {
    /// `G(r)`. Callers guarantee `r >= 0`, and `r > 0` for singular kernels.
    fn value(&self, r: f64) -> f64;

    /// `dG/dr` at `r`.
    fn radial_derivative(&self, r: f64) -> f64;

    /// Whether the profile blows up at the origin.
    fn singular_at_zero(&self) -> bool;

    /// `(dG/dr)(r) / r`, the factor multiplying `x⊥` in the perp-gradient.
    /// Regularized kernels return a finite value at `r = 0`.
    #[inline]
    fn derivative_over_r(&self, r: f64) -> f64 {
        self.radial_derivative(r) / r
    }

    /// `∇⊥ G(|x|) = (dG/dr)(|x|) · x⊥ / |x|`.
    fn perp_gradient(&self, x: Vec2) -> Result<Vec2> {
        let r = x.norm();
        if !r.is_finite() {
            return Err(VortexError::Domain(format!("non-finite position {x:?}")));
        }
        if r == 0.0 {
            if self.singular_at_zero() {
                return Err(VortexError::Domain(
                    "perp-gradient of a singular kernel at the origin".into(),
                ));
            }
            return Ok(Vec2::ZERO);
        }
        Ok(x.perp() * self.derivative_over_r(r))
    }
}

/// Which family a [`KernelProfile`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    /// `G_1(r) = (1/2π) log(1/r)`.
    Euler,
    /// `G_s(r) = Γ(1−s) / (2^{2s} π Γ(s)) · r^{−2(1−s)}` with `0 < s < 1`.
    Sqg { s: f64 },
    Custom,
}

type RadialFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Repr {
    Log,
    Power { coefficient: f64, exponent: f64 },
    Custom {
        value: Arc<RadialFn>,
        derivative: Arc<RadialFn>,
        singular: bool,
    },
}

/// An interaction kernel profile. Immutable and cheap to clone.
#[derive(Clone)]
pub struct KernelProfile {
    kind: KernelKind,
    repr: Repr,
}

impl fmt::Debug for KernelProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelProfile").field("kind", &self.kind).finish()
    }
}

/// Coefficient `Γ(1−s) / (2^{2s} π Γ(s))` of the fractional Green function.
pub fn sqg_coefficient(s: f64) -> f64 {
    use statrs::function::gamma::gamma;
    gamma(1.0 - s) / (2f64.powf(2.0 * s) * PI * gamma(s))
}

impl KernelProfile {
    pub fn euler() -> Self {
        KernelProfile {
            kind: KernelKind::Euler,
            repr: Repr::Log,
        }
    }

    /// Fractional kernel for `0 < s < 1`.
    pub fn sqg(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", format!("SQG order must lie in (0, 1), got {s}")));
        }
        Ok(KernelProfile {
            kind: KernelKind::Sqg { s },
            repr: Repr::Power {
                coefficient: sqg_coefficient(s),
                exponent: 2.0 * (1.0 - s),
            },
        })
    }

    /// Kernel of order `s ∈ (0, 1]`; `s = 1` is the Euler kernel.
    pub fn from_order(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(Self::euler())
        } else {
            Self::sqg(s)
        }
    }

    /// A user-supplied profile. The derivative is checked against central
    /// finite differences of `value` on log-spaced radii in `[1e-3, 1e3]`.
    pub fn custom<V, D>(value: V, derivative: D, singular_at_zero: bool) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        const SAMPLES: usize = 61;
        const TOL: f64 = 1e-5;
        for k in 0..SAMPLES {
            let r = 10f64.powf(-3.0 + 6.0 * k as f64 / (SAMPLES - 1) as f64);
            let h = 1e-5 * r;
            let fd = (value(r + h) - value(r - h)) / (2.0 * h);
            let d = derivative(r);
            let scale = d.abs().max(value(r).abs() / r).max(f64::MIN_POSITIVE);
            if !d.is_finite() || !fd.is_finite() || (fd - d).abs() > TOL * scale {
                return Err(VortexError::InconsistentKernel {
                    r,
                    derivative: d,
                    finite_difference: fd,
                });
            }
        }
        Ok(KernelProfile {
            kind: KernelKind::Custom,
            repr: Repr::Custom {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
                singular: singular_at_zero,
            },
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// The SQG order `s`, with the Euler kernel reported as `s = 1`.
    pub fn order(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Euler => Some(1.0),
            KernelKind::Sqg { s } => Some(s),
            KernelKind::Custom => None,
        }
    }

    /// Returns `G(r)`, rejecting `r <= 0`.
    pub fn green_value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(VortexError::Domain(format!(
                "kernel evaluated at r = {r}, must be positive and finite"
            )));
        }
        Ok(self.value(r))
    }

    pub fn regularize(&self, epsilon: f64) -> Result<RegularizedKernel> {
        regularize(self, epsilon)
    }
}

impl RadialKernel for KernelProfile {
    #[inline]
    fn value(&self, r: f64) -> f64 {
        match &self.repr {
            Repr::Log => -r.ln() / (2.0 * PI),
            Repr::Power {
                coefficient,
                exponent,
            } => coefficient * r.powf(-exponent),
            Repr::Custom { value, .. } => value(r),
        }
    }

    #[inline]
    fn radial_derivative(&self, r: f64) -> f64 {
        match &self.repr {
            Repr::Log => -1.0 / (2.0 * PI * r),
            Repr::Power {
                coefficient,
                exponent,
            } => -exponent * coefficient * r.powf(-exponent - 1.0),
            Repr::Custom { derivative, .. } => derivative(r),
        }
    }

    #[inline]
    fn derivative_over_r(&self, r: f64) -> f64 {
        match &self.repr {
            Repr::Log => -1.0 / (2.0 * PI * r * r),
            Repr::Power {
                coefficient,
                exponent,
            } => -exponent * coefficient * r.powf(-exponent - 2.0),
            Repr::Custom { derivative, .. } => derivative(r) / r,
        }
    }

    fn singular_at_zero(&self) -> bool {
        match &self.repr {
            Repr::Log | Repr::Power { .. } => true,
            Repr::Custom { singular, .. } => *singular,
        }
    }
}

/// `G(r)` for a profile; domain error when `r <= 0`.
pub fn green_value(profile: &KernelProfile, r: f64) -> Result<f64> {
    profile.green_value(r)
}

/// `∇⊥G(|x|)` for any kernel; domain error at `x = 0` for singular kernels.
pub fn perp_gradient<K: RadialKernel + ?Sized>(kernel: &K, x: Vec2) -> Result<Vec2> {
    kernel.perp_gradient(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Reference values of Γ (Abramowitz & Stegun, Table 6.1 / DLMF).
    const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_3;
    const GAMMA_THREE_QUARTERS: f64 = 1.225_416_702_465_177_6;
    const SQRT_PI: f64 = 1.772_453_850_905_516;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn euler_value_at_one_is_zero() {
        assert_eq!(green_value(&KernelProfile::euler(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sqg_half_is_inverse_distance() {
        let k = KernelProfile::sqg(0.5).unwrap();
        assert!(rel(k.green_value(1.0).unwrap(), 1.0 / (2.0 * PI)) < 1e-12);
        // Γ(1/2) = √π in the coefficient.
        assert!(rel(sqg_coefficient(0.5), SQRT_PI / (2.0 * PI * SQRT_PI)) < 1e-12);
    }

    #[test]
    fn sqg_three_quarters_against_tabulated_gamma() {
        let k = KernelProfile::sqg(0.75).unwrap();
        let expected = GAMMA_QUARTER / (2f64.powf(1.5) * PI * GAMMA_THREE_QUARTERS) * 2f64.powf(-0.5);
        assert!(rel(k.green_value(2.0).unwrap(), expected) < 1e-12);
    }

    #[test]
    fn rejects_non_positive_radius() {
        let k = KernelProfile::euler();
        assert!(matches!(k.green_value(0.0), Err(VortexError::Domain(_))));
        assert!(matches!(k.green_value(-1.0), Err(VortexError::Domain(_))));
    }

    #[test]
    fn rejects_bad_order() {
        assert!(KernelProfile::sqg(0.0).is_err());
        assert!(KernelProfile::sqg(1.0).is_err());
        assert!(KernelProfile::from_order(1.2).is_err());
        assert_eq!(KernelProfile::from_order(1.0).unwrap().kind(), KernelKind::Euler);
    }

    #[test]
    fn perp_gradient_examples() {
        let e = KernelProfile::euler();
        let v = perp_gradient(&e, Vec2::new(1.0, 0.0)).unwrap();
        assert!(v.x.abs() < 1e-15 && (v.y + 1.0 / (2.0 * PI)).abs() < 1e-15);
        let v = perp_gradient(&e, Vec2::new(0.0, 1.0)).unwrap();
        assert!((v.x - 1.0 / (2.0 * PI)).abs() < 1e-15 && v.y.abs() < 1e-15);

        let k = KernelProfile::sqg(0.5).unwrap();
        let v = perp_gradient(&k, Vec2::new(2.0, 0.0)).unwrap();
        // central differences of G_{1/2} at r = 2
        let h = 1e-5;
        let fd = (k.value(2.0 + h) - k.value(2.0 - h)) / (2.0 * h);
        assert!(rel(fd, -1.0 / (8.0 * PI)) < 1e-8);
        assert!(v.x.abs() < 1e-15 && rel(v.y, -1.0 / (8.0 * PI)) < 1e-12);
    }

    #[test]
    fn perp_gradient_at_origin() {
        let e = KernelProfile::euler();
        assert!(perp_gradient(&e, Vec2::ZERO).is_err());
        let reg = e.regularize(0.1).unwrap();
        assert_eq!(perp_gradient(&reg, Vec2::ZERO).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let profiles = [
            KernelProfile::euler(),
            KernelProfile::sqg(0.1).unwrap(),
            KernelProfile::sqg(0.5).unwrap(),
            KernelProfile::sqg(0.9).unwrap(),
        ];
        for p in &profiles {
            for k in 0..=60 {
                let r = 10f64.powf(-3.0 + 0.1 * k as f64);
                let h = 1e-5 * r;
                let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
                assert!(rel(fd, p.radial_derivative(r)) < 1e-6, "{p:?} r={r}");
            }
        }
    }

    #[test]
    fn custom_kernel_checked() {
        let ok = KernelProfile::custom(|r: f64| r.powi(-3), |r: f64| -3.0 * r.powi(-4), true);
        assert!(ok.is_ok());
        let bad = KernelProfile::custom(|r: f64| r.powi(-3), |r: f64| -2.0 * r.powi(-4), true);
        assert!(matches!(bad, Err(VortexError::InconsistentKernel { .. })));
    }
}
