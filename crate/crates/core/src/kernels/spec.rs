//! Kernel selection from configuration: `{"kind": "euler"}`,
//! `{"kind": "sqg", "s": 0.75}`, optionally with `"epsilon"` for the
//! regularized variant.

use serde::{Deserialize, Serialize};

use super::{KernelProfile, RadialKernel, RegularizedKernel};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Euler,
    Sqg,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub kind: KernelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl KernelSpec {
    pub fn euler() -> Self {
        KernelSpec {
            kind: KernelFamily::Euler,
            s: None,
            epsilon: None,
        }
    }

    /// SQG kernel of order `s`, with `s = 1` meaning Euler.
    pub fn order(s: f64) -> Self {
        if s == 1.0 {
            Self::euler()
        } else {
            KernelSpec {
                kind: KernelFamily::Sqg,
                s: Some(s),
                epsilon: None,
            }
        }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        KernelSpec {
            epsilon: Some(epsilon),
            ..self
        }
    }

    /// The unregularized profile.
    pub fn profile(&self) -> Result<KernelProfile> {
        match (self.kind, self.s) {
            (KernelFamily::Euler, None) => Ok(KernelProfile::euler()),
            (KernelFamily::Euler, Some(_)) => Err(invalid("s", "the euler kernel takes no order `s`")),
            (KernelFamily::Sqg, Some(s)) => KernelProfile::sqg(s),
            (KernelFamily::Sqg, None) => Err(invalid("s", "the sqg kernel needs an order `s` in (0, 1)")),
        }
    }

    pub fn build(&self) -> Result<Kernel> {
        let profile = self.profile()?;
        match self.epsilon {
            None => Ok(Kernel::Exact(profile)),
            Some(eps) => Ok(Kernel::Regularized(profile.regularize(eps)?)),
        }
    }
}

/// Either an exact profile or its regularization.
#[derive(Clone, Debug)]
pub enum Kernel {
    Exact(KernelProfile),
    Regularized(RegularizedKernel),
}

impl RadialKernel for Kernel {
    #[inline]
    fn value(&self, r: f64) -> f64 {
        match self {
            Kernel::Exact(k) => k.value(r),
            Kernel::Regularized(k) => k.value(r),
        }
    }

    #[inline]
    fn radial_derivative(&self, r: f64) -> f64 {
        match self {
            Kernel::Exact(k) => k.radial_derivative(r),
            Kernel::Regularized(k) => k.radial_derivative(r),
        }
    }

    #[inline]
    fn derivative_over_r(&self, r: f64) -> f64 {
        match self {
            Kernel::Exact(k) => k.derivative_over_r(r),
            Kernel::Regularized(k) => k.derivative_over_r(r),
        }
    }

    fn singular_at_zero(&self) -> bool {
        match self {
            Kernel::Exact(k) => k.singular_at_zero(),
            Kernel::Regularized(k) => k.singular_at_zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_configuration_forms() {
        let k: KernelSpec = serde_json::from_str(r#"{"kind": "euler"}"#).unwrap();
        assert_eq!(k, KernelSpec::euler());
        let k: KernelSpec = serde_json::from_str(r#"{"kind": "sqg", "s": 0.75, "epsilon": 0.05}"#).unwrap();
        assert_eq!(k, KernelSpec::order(0.75).with_epsilon(0.05));
        assert!(matches!(k.build().unwrap(), Kernel::Regularized(_)));
        assert!(serde_json::from_str::<KernelSpec>(r#"{"kind": "euler", "sigma": 1}"#).is_err());
    }

    #[test]
    fn rejects_inconsistent_specs() {
        assert!(KernelSpec::euler().with_epsilon(0.6).build().is_err());
        let bad = KernelSpec {
            kind: KernelFamily::Euler,
            s: Some(0.5),
            epsilon: None,
        };
        assert!(bad.build().is_err());
        let bad = KernelSpec {
            kind: KernelFamily::Sqg,
            s: None,
            epsilon: None,
        };
        assert!(bad.build().is_err());
        assert!(KernelSpec::order(1.5).build().is_err());
    }
}
