//! Point-vortex dynamics under logarithmic and fractional Green kernels:
//! equations of motion, conserved quantities, regularized kernels and Monte
//! Carlo estimates of the measure of near-collapse initial data.

pub mod collapse_lab;
pub mod conserved;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod geometry;
pub mod kernels;

pub use collapse_lab::{
    eps_collapse_probe, find_collapse_candidate, phi_psi, scan, CollapseScanResult, PhiDiagnostics, ProbeOutcome,
    ScanConfig,
};
pub use conserved::{
    cluster_diagnostics, collapse_constraint, drift_audit, hamiltonian, invariant_snapshot, ClusterClass,
    ClusterDiagnostics, DriftReport, InvariantSnapshot,
};
pub use dynamics::{
    integrate, integrate_relative, relative_velocity, velocity, Frame, IntegratorConfig, RelativeSystem, Termination,
    TrajectoryRecord, VortexSystem,
};
pub use error::{Result, VortexError};
pub use geometry::Vec2;
pub use kernels::{AuxiliaryKernel, Kernel, KernelKind, KernelSpec, KernelProfile, RadialKernel, RegularizedKernel};
