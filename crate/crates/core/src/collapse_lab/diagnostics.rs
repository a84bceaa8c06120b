//! The Φ/Ψ functionals: Φ grows without bound as the anchor approaches
//! another vortex, and Ψ dominates its time derivative along the regularized
//! relative flow.

use serde::{Deserialize, Serialize};

use crate::dynamics::RelativeSystem;
use crate::error::Result;
use crate::kernels::{AuxiliaryKernel, KernelProfile, RadialKernel, RegularizedKernel};

/// Default exponent offset `a` of `L_a(q) = q^{−2−a}`.
pub const DEFAULT_A_PARAM: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiDiagnostics {
    pub phi: f64,
    pub psi: f64,
    pub a_param: f64,
    pub epsilon: f64,
}

/// `Φ = Σ_j L_{a,ε}(|y_ij|)` and
/// `Ψ = Σ_j |L'_{a,ε}(|y_ij|)| Σ_{k≠i,j} |a_k| (|∇G_{s,ε}(y_ik)| + |∇G_{s,ε}(y_ij − y_ik)|)`.
pub fn phi_psi(rel: &RelativeSystem, s: f64, epsilon: f64, a_param: f64) -> Result<PhiDiagnostics> {
    let g = KernelProfile::from_order(s)?.regularize(epsilon)?;
    let l = AuxiliaryKernel::new(a_param, epsilon)?;
    Ok(phi_psi_with(rel, &g, &l, epsilon, a_param))
}

pub(crate) fn phi_psi_with(
    rel: &RelativeSystem,
    g: &RegularizedKernel,
    l: &AuxiliaryKernel,
    epsilon: f64,
    a_param: f64,
) -> PhiDiagnostics {
    let y = rel.differences();
    let weights: Vec<f64> = rel.others().map(|k| rel.intensities()[k].abs()).collect();
    let grad = |q: f64| g.radial_derivative(q).abs();
    let mut phi = 0.0;
    let mut psi = 0.0;
    for (m, yj) in y.iter().enumerate() {
        let r = yj.norm();
        phi += l.value(r);
        let mut inner = 0.0;
        for (n, yk) in y.iter().enumerate() {
            if n != m {
                inner += weights[n] * (grad(yk.norm()) + grad((*yj - *yk).norm()));
            }
        }
        psi += l.radial_derivative(r).abs() * inner;
    }
    PhiDiagnostics {
        phi,
        psi,
        a_param,
        epsilon,
    }
}
