//! Finite-difference checks of phase-space volume preservation.

use nalgebra::DMatrix;

use super::trajectory::{AbsoluteOde, RelativeOde};
use super::integrator::{self, IntegratorConfig, OdeSystem, Termination};
use super::{RelativeSystem, VortexSystem};
use crate::error::{invalid, Result, VortexError};
use crate::kernels::RadialKernel;

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(invalid("h", format!("must be positive and finite, got {h}")))
    }
}

fn divergence<S: OdeSystem>(ode: &S, y0: &[f64], h: f64) -> f64 {
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut div = 0.0;
    for k in 0..n {
        y[k] = y0[k] + h;
        ode.rhs(&y, &mut plus);
        y[k] = y0[k] - h;
        ode.rhs(&y, &mut minus);
        y[k] = y0[k];
        div += (plus[k] - minus[k]) / (2.0 * h);
    }
    div
}

/// Central-difference divergence of the velocity field on `R^{2N}` at `system`.
pub fn phase_space_divergence<K: RadialKernel + ?Sized>(system: &VortexSystem, kernel: &K, h: f64) -> Result<f64> {
    check_step(h)?;
    if kernel.singular_at_zero() {
        system.check_separated()?;
    }
    let ode = AbsoluteOde {
        kernel,
        intensities: system.intensities(),
        compensated: false,
    };
    Ok(divergence(&ode, &system.flat_state(), h))
}

/// Divergence of the modified vector field on `R^{2(N−1)}`.
pub fn relative_phase_space_divergence<K: RadialKernel + ?Sized>(
    rel: &RelativeSystem,
    kernel: &K,
    h: f64,
) -> Result<f64> {
    check_step(h)?;
    if kernel.singular_at_zero() {
        rel.check_separated()?;
    }
    let ode = RelativeOde::new(rel, kernel, false);
    Ok(divergence(&ode, &rel.flat_state(), h))
}

/// Determinant of the central-difference Jacobian of the flow map `S^T` at
/// `system`, from the images of the `2·2N` faces of a cube of half-width `h`.
pub fn flow_jacobian_determinant<K: RadialKernel + ?Sized>(
    system: &VortexSystem,
    kernel: &K,
    final_time: f64,
    h: f64,
    config: &IntegratorConfig,
) -> Result<f64> {
    check_step(h)?;
    if !(final_time > 0.0 && final_time.is_finite()) {
        return Err(invalid("final_time", format!("must be positive and finite, got {final_time}")));
    }
    config.validate()?;
    if kernel.singular_at_zero() {
        system.check_separated()?;
    }
    let ode = AbsoluteOde {
        kernel,
        intensities: system.intensities(),
        compensated: config.compensated,
    };
    let y0 = system.flat_state();
    let n = y0.len();
    let flow = |y: &[f64]| -> Result<Vec<f64>> {
        let out = integrator::run(&ode, y, final_time, config, |_, _| {});
        match out.termination {
            Termination::ReachedFinalTime => Ok(out.state),
            other => Err(VortexError::Domain(format!(
                "flow map did not reach the final time: {other:?}"
            ))),
        }
    };
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let mut y = y0.clone();
    for k in 0..n {
        y[k] = y0[k] + h;
        let plus = flow(&y)?;
        y[k] = y0[k] - h;
        let minus = flow(&y)?;
        y[k] = y0[k];
        for r in 0..n {
            jac[(r, k)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    Ok(jac.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::kernels::KernelProfile;

    fn triple() -> VortexSystem {
        VortexSystem::new(
            vec![1.0, -0.6, 1.3],
            vec![Vec2::new(0.1, 0.0), Vec2::new(0.9, 0.3), Vec2::new(-0.4, 0.8)],
        )
        .unwrap()
    }

    #[test]
    fn single_vortex_divergence_is_zero() {
        let one = VortexSystem::new(vec![1.0], vec![Vec2::new(0.3, 0.2)]).unwrap();
        assert_eq!(phase_space_divergence(&one, &KernelProfile::euler(), 1e-5).unwrap(), 0.0);
    }

    #[test]
    fn divergence_vanishes() {
        let d = phase_space_divergence(&triple(), &KernelProfile::euler(), 1e-5).unwrap();
        assert!(d.abs() < 1e-6, "{d}");
        let rel = triple().relative(0).unwrap();
        let d = relative_phase_space_divergence(&rel, &KernelProfile::sqg(0.5).unwrap(), 1e-5).unwrap();
        assert!(d.abs() < 1e-6, "{d}");
    }

    #[test]
    fn flow_preserves_volume() {
        let cfg = IntegratorConfig::with_tolerance(1e-12, 1e-14);
        let det = flow_jacobian_determinant(&triple(), &KernelProfile::euler(), 1.0, 1e-5, &cfg).unwrap();
        assert!((det - 1.0).abs() < 1e-4, "{det}");
    }
}
