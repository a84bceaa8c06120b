use crate::error::{invalid, Result};

use super::{KernelProfile, RadialKernel};

/// A kernel whose singularity has been removed below a cutoff `ε`, matching
/// an underlying profile exactly for `q >= ε`.
pub trait Regularization: RadialKernel {
    fn epsilon(&self) -> f64;
    fn base_value(&self, q: f64) -> f64;
    fn base_radial_derivative(&self, q: f64) -> f64;
}

/// `G_ε`: equal to the base profile above `ε`, and below it the quadratic cap
///
/// ```text
/// G_ε(q) = G(ε) − (ε G'(ε) / 2) · (1 − q²/ε²)
/// ```
///
/// which is C¹ at the junction. For `G_s` this reads
/// `G(ε)·[1 + (1−s)(1 − q²/ε²)]`, and for `G_1` it is
/// `G_1(ε) + (1/4π)(1 − q²/ε²)`.
#[derive(Clone, Debug)]
pub struct RegularizedKernel {
    base: KernelProfile,
    epsilon: f64,
    value_at_eps: f64,
    slope_at_eps: f64,
}

/// Regularizes `profile` below `epsilon`, with `0 < epsilon <= 1/2`.
pub fn regularize(profile: &KernelProfile, epsilon: f64) -> Result<RegularizedKernel> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(invalid(
            "epsilon",
            format!("regularization cutoff must lie in (0, 1/2], got {epsilon}"),
        ));
    }
    Ok(RegularizedKernel {
        base: profile.clone(),
        epsilon,
        value_at_eps: profile.value(epsilon),
        slope_at_eps: profile.radial_derivative(epsilon),
    })
}

impl RegularizedKernel {
    pub fn base(&self) -> &KernelProfile {
        &self.base
    }
}

impl RadialKernel for RegularizedKernel {
    #[inline]
    fn value(&self, q: f64) -> f64 {
        if q >= self.epsilon {
            self.base.value(q)
        } else {
            let u = q / self.epsilon;
            self.value_at_eps - 0.5 * self.epsilon * self.slope_at_eps * (1.0 - u * u)
        }
    }

    #[inline]
    fn radial_derivative(&self, q: f64) -> f64 {
        if q >= self.epsilon {
            self.base.radial_derivative(q)
        } else {
            self.slope_at_eps * q / self.epsilon
        }
    }

    #[inline]
    fn derivative_over_r(&self, q: f64) -> f64 {
        if q >= self.epsilon {
            self.base.derivative_over_r(q)
        } else {
            self.slope_at_eps / self.epsilon
        }
    }

    fn singular_at_zero(&self) -> bool {
        false
    }
}

impl Regularization for RegularizedKernel {
    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn base_value(&self, q: f64) -> f64 {
        self.base.value(q)
    }

    fn base_radial_derivative(&self, q: f64) -> f64 {
        self.base.radial_derivative(q)
    }
}

/// `L_{a,ε}`: the regularization of `L_a(q) = q^{−2−a}`.
///
/// A quadratic cap cannot satisfy `|L_{a,ε}| ≤ 2 L_a(ε)` once the exponent
/// exceeds 2, so below `ε` the profile saturates instead: with
/// `w = 1 − q/ε` and `w₀ = 2/(2+a)`,
///
/// ```text
/// L_{a,ε}(q) = L_a(ε) · (2 − (1 − w/w₀)²)   for w < w₀
///            = 2 L_a(ε)                      for w ≥ w₀
/// ```
///
/// The slope at `ε` matches `L_a'(ε)` and decays linearly to zero at `w₀`.
#[derive(Clone, Copy, Debug)]
pub struct AuxiliaryKernel {
    a_param: f64,
    epsilon: f64,
    exponent: f64,
    value_at_eps: f64,
    plateau_width: f64,
}

impl AuxiliaryKernel {
    pub fn new(a_param: f64, epsilon: f64) -> Result<Self> {
        if !(a_param > 0.0 && a_param.is_finite()) {
            return Err(invalid("a_param", format!("must be positive, got {a_param}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        let exponent = 2.0 + a_param;
        Ok(AuxiliaryKernel {
            a_param,
            epsilon,
            exponent,
            value_at_eps: epsilon.powf(-exponent),
            plateau_width: 2.0 / exponent,
        })
    }

    pub fn a_param(&self) -> f64 {
        self.a_param
    }
}

impl RadialKernel for AuxiliaryKernel {
    fn value(&self, q: f64) -> f64 {
        if q >= self.epsilon {
            return q.powf(-self.exponent);
        }
        let w = 1.0 - q / self.epsilon;
        if w >= self.plateau_width {
            2.0 * self.value_at_eps
        } else {
            let t = 1.0 - w / self.plateau_width;
            self.value_at_eps * (2.0 - t * t)
        }
    }

    fn radial_derivative(&self, q: f64) -> f64 {
        if q >= self.epsilon {
            return -self.exponent * q.powf(-self.exponent - 1.0);
        }
        let w = 1.0 - q / self.epsilon;
        if w >= self.plateau_width {
            0.0
        } else {
            let t = 1.0 - w / self.plateau_width;
            -2.0 * self.value_at_eps * t / (self.plateau_width * self.epsilon)
        }
    }

    fn derivative_over_r(&self, q: f64) -> f64 {
        if q == 0.0 {
            0.0
        } else {
            self.radial_derivative(q) / q
        }
    }

    fn singular_at_zero(&self) -> bool {
        false
    }
}

impl Regularization for AuxiliaryKernel {
    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn base_value(&self, q: f64) -> f64 {
        q.powf(-self.exponent)
    }

    fn base_radial_derivative(&self, q: f64) -> f64 {
        -self.exponent * q.powf(-self.exponent - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::error::VortexError;

    #[test]
    fn above_cutoff_matches_base() {
        let k = KernelProfile::sqg(0.5).unwrap();
        let r = k.regularize(0.1).unwrap();
        assert_eq!(r.value(0.2), 1.0 / (0.4 * PI));
        assert_eq!(r.value(0.2), k.value(0.2));
    }

    #[test]
    fn cap_value_at_origin() {
        let k = KernelProfile::sqg(0.5).unwrap();
        let r = k.regularize(0.1).unwrap();
        let expected = 1.5 / (0.2 * PI);
        assert!((r.value(0.0) - expected).abs() < 1e-13 * expected);
        // the cap is the quadratic G(ε)[1 + (1−s)(1 − q²/ε²)]
        let q = 0.04;
        let quad = k.value(0.1) * (1.0 + 0.5 * (1.0 - q * q / 0.01));
        assert!((r.value(q) - quad).abs() < 1e-13 * quad);
    }

    #[test]
    fn euler_cap_formula() {
        let e = KernelProfile::euler();
        let r = e.regularize(0.05).unwrap();
        let q = 0.02;
        let expected = e.value(0.05) + (1.0 - q * q / 0.0025) / (4.0 * PI);
        assert!((r.value(q) - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_large_cutoff() {
        let e = KernelProfile::euler();
        assert!(matches!(e.regularize(0.6), Err(VortexError::InvalidParameter { .. })));
        assert!(e.regularize(0.0).is_err());
        assert!(e.regularize(0.5).is_ok());
    }

    #[test]
    fn auxiliary_kernel_above_cutoff_is_power_law() {
        let l = AuxiliaryKernel::new(1.0, 0.1).unwrap();
        assert_eq!(l.value(0.5), 0.5f64.powf(-3.0));
        assert_eq!(l.value(0.0), 2.0 * 0.1f64.powf(-3.0));
        // slope continuity at the cutoff
        let left = l.radial_derivative(0.1 * (1.0 - 1e-12));
        let right = l.radial_derivative(0.1);
        assert!((left - right).abs() < 1e-8 * right.abs());
    }
}
