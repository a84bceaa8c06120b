//! Monte Carlo estimates of the measure of initial data that ε-collapse
//! under the regularized relative dynamics, and the supporting diagnostics.

mod diagnostics;
mod search;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_relative, IntegratorConfig, RelativeSystem, Termination};
use crate::error::{invalid, Result};
use crate::geometry::Vec2;
use crate::kernels::{KernelProfile, RegularizedKernel};

pub use diagnostics::{phi_psi, PhiDiagnostics, DEFAULT_A_PARAM};
pub use search::{
    find_collapse_candidate, integrate_candidate, CollapseCandidate, CONSTRAINT_TOLERANCE, DEMO_HORIZON_FACTOR,
    SEARCH_BUDGET,
};
pub use stats::{fit_loglog, wilson_interval, LogLogFit, RateLaw, Z_95};

/// Smallest accepted `samples_per_epsilon`.
pub const MIN_SAMPLES: usize = 100;

/// Cells with fewer hits are excluded from the exponent fit.
pub const MIN_FIT_HITS: u64 = 10;

/// A Monte Carlo scan over a list of cutoffs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Kernel order in `(0, 1]`; `1` is the Euler kernel.
    pub s: f64,
    /// 0-based index of the anchor vortex.
    pub anchor: usize,
    pub intensities: Vec<f64>,
    /// Radius of the disk each `y_ij` is drawn from.
    pub rho: f64,
    pub horizon: f64,
    /// Strictly decreasing cutoffs in `(0, 1/2]`.
    pub epsilons: Vec<f64>,
    pub samples_per_epsilon: usize,
    pub rng_seed: u64,
    /// `collapse_threshold` is replaced by each cell's ε.
    pub integrator: IntegratorConfig,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(invalid("s", format!("must lie in (0, 1], got {}", self.s)));
        }
        crate::dynamics::validate_intensities(&self.intensities)?;
        if self.intensities.len() < 2 {
            return Err(invalid("intensities", "a scan needs at least two vortices"));
        }
        if self.anchor >= self.intensities.len() {
            return Err(invalid(
                "anchor",
                format!("index {} out of range for N = {}", self.anchor, self.intensities.len()),
            ));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(invalid("rho", format!("must be positive, got {}", self.rho)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be positive, got {}", self.horizon)));
        }
        if self.epsilons.is_empty() {
            return Err(invalid("epsilons", "at least one cutoff is required"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e <= 0.5)) {
            return Err(invalid("epsilons", format!("cutoffs must lie in (0, 1/2], got {e}")));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("epsilons", "cutoffs must be strictly decreasing"));
        }
        if self.samples_per_epsilon < MIN_SAMPLES {
            return Err(invalid(
                "samples_per_epsilon",
                format!("must be at least {MIN_SAMPLES}, got {}", self.samples_per_epsilon),
            ));
        }
        self.integrator.validate()
    }

    pub fn rate_law(&self) -> RateLaw {
        RateLaw::for_order(self.s)
    }
}

/// Independent generator for sample `sample` of cell `cell`.
pub fn probe_rng(seed: u64, cell: usize, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cell as u64) << 40) | sample as u64);
    rng
}

/// Draws every `y_ij` independently and uniformly from the disk of radius
/// `rho`, by rejection from the bounding square.
pub fn sample_initial_relative<R: Rng + ?Sized>(config: &ScanConfig, rng: &mut R) -> Result<RelativeSystem> {
    let n = config.intensities.len();
    let differences = (0..n - 1).map(|_| sample_disk(config.rho, rng)).collect();
    RelativeSystem::new(config.anchor, config.intensities.clone(), differences)
}

fn sample_disk<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Vec2 {
    loop {
        let p = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if p.norm_sq() <= 1.0 {
            return rho * p;
        }
    }
}

/// Result of integrating one sample under the regularized dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ProbeOutcome {
    /// `min_j |y_ij| ≤ ε` first at `first_time`.
    Hit { first_time: f64 },
    Miss,
    /// Step-size underflow at `time` with all anchor distances above ε.
    Inconclusive { time: f64 },
}

impl ProbeOutcome {
    pub fn is_hit(&self) -> bool {
        matches!(self, ProbeOutcome::Hit { .. })
    }

    pub fn first_time(&self) -> Option<f64> {
        match *self {
            ProbeOutcome::Hit { first_time } => Some(first_time),
            _ => None,
        }
    }
}

/// Integrates `rel` under `G_{s,ε}` over `[0, horizon]`, stopping at the first
/// passage of `min_j |y_ij|` below `epsilon`.
pub fn eps_collapse_probe(
    rel: &RelativeSystem,
    s: f64,
    epsilon: f64,
    horizon: f64,
    integrator: &IntegratorConfig,
) -> Result<ProbeOutcome> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", format!("must be positive, got {horizon}")));
    }
    integrator.validate()?;
    let kernel = KernelProfile::from_order(s)?.regularize(epsilon)?;
    Ok(probe_with(rel, &kernel, epsilon, horizon, integrator))
}

fn probe_with(
    rel: &RelativeSystem,
    kernel: &RegularizedKernel,
    epsilon: f64,
    horizon: f64,
    integrator: &IntegratorConfig,
) -> ProbeOutcome {
    let cfg = IntegratorConfig {
        collapse_threshold: epsilon,
        ..*integrator
    };
    match run_relative(rel, kernel, horizon, &cfg).termination {
        Termination::EpsCollapse { time, .. } => ProbeOutcome::Hit { first_time: time },
        Termination::ReachedFinalTime => ProbeOutcome::Miss,
        Termination::StepUnderflow { time } => ProbeOutcome::Inconclusive { time },
    }
}

/// Tallies for one cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCell {
    pub epsilon: f64,
    pub hit_count: u64,
    /// Hits already within ε at `t = 0`.
    pub initial_hits: u64,
    /// Hits with a positive first-passage time.
    pub dynamical_hits: u64,
    pub inconclusive_count: u64,
    pub sample_count: u64,
    pub measure_fraction: f64,
    pub wilson_ci_95: (f64, f64),
    /// `measure_fraction / rate(ε)`.
    pub rate_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseScanResult {
    pub s: f64,
    pub rate_law: RateLaw,
    pub cells: Vec<EpsilonCell>,
    /// Slope of `log measure_fraction` against `log ε` over cells with at
    /// least [`MIN_FIT_HITS`] hits; absent if fewer than two cells qualify.
    pub fitted_exponent: Option<f64>,
    pub exponent_std_error: Option<f64>,
    /// Cutoffs left out of the fit for having too few hits.
    pub insufficient_hits: Vec<f64>,
    /// Smallest `C` with `measure_fraction(ε) ≤ C · rate(ε)` for every ε.
    pub bound_constant: f64,
}

impl CollapseScanResult {
    /// Whether fractions are non-increasing as ε decreases, allowing overlap
    /// of the 95% intervals of consecutive cells.
    pub fn monotone_within_ci(&self) -> bool {
        self.cells.windows(2).all(|w| w[1].wilson_ci_95.0 <= w[0].wilson_ci_95.1)
    }
}

pub fn scan(config: &ScanConfig) -> Result<CollapseScanResult> {
    scan_with_progress(config, |_, _| {})
}

/// Runs the scan, calling `progress(k, cell)` as each cell completes. Probes
/// run on the current rayon pool; each owns the generator
/// [`probe_rng`]`(seed, cell, sample)`, so results do not depend on scheduling.
pub fn scan_with_progress<F: FnMut(usize, &EpsilonCell)>(config: &ScanConfig, mut progress: F) -> Result<CollapseScanResult> {
    config.validate()?;
    let profile = KernelProfile::from_order(config.s)?;
    let law = config.rate_law();
    let mut cells = Vec::with_capacity(config.epsilons.len());
    for (k, &epsilon) in config.epsilons.iter().enumerate() {
        let kernel = profile.regularize(epsilon)?;
        let outcomes: Vec<ProbeOutcome> = (0..config.samples_per_epsilon)
            .into_par_iter()
            .map(|m| {
                let mut rng = probe_rng(config.rng_seed, k, m);
                let rel = sample_initial_relative(config, &mut rng)?;
                Ok(probe_with(&rel, &kernel, epsilon, config.horizon, &config.integrator))
            })
            .collect::<Result<_>>()?;
        let cell = tally(epsilon, &outcomes, &law);
        progress(k, &cell);
        cells.push(cell);
    }

    let (fit_cells, thin): (Vec<&EpsilonCell>, Vec<&EpsilonCell>) =
        cells.iter().partition(|c| c.hit_count >= MIN_FIT_HITS);
    let fit = fit_loglog(&fit_cells.iter().map(|c| (c.epsilon, c.measure_fraction)).collect::<Vec<_>>());
    let bound_constant = cells.iter().map(|c| c.rate_ratio).fold(0.0, f64::max);
    Ok(CollapseScanResult {
        s: config.s,
        rate_law: law,
        fitted_exponent: fit.map(|f| f.slope),
        exponent_std_error: fit.and_then(|f| f.slope_std_error),
        insufficient_hits: thin.iter().map(|c| c.epsilon).collect(),
        bound_constant,
        cells,
    })
}

fn tally(epsilon: f64, outcomes: &[ProbeOutcome], law: &RateLaw) -> EpsilonCell {
    let mut hits = 0;
    let mut initial = 0;
    let mut inconclusive = 0;
    for o in outcomes {
        match o {
            ProbeOutcome::Hit { first_time } => {
                hits += 1;
                if *first_time == 0.0 {
                    initial += 1;
                }
            }
            ProbeOutcome::Inconclusive { .. } => inconclusive += 1,
            ProbeOutcome::Miss => {}
        }
    }
    let n = outcomes.len() as u64;
    let fraction = hits as f64 / n as f64;
    EpsilonCell {
        epsilon,
        hit_count: hits,
        initial_hits: initial,
        dynamical_hits: hits - initial,
        inconclusive_count: inconclusive,
        sample_count: n,
        measure_fraction: fraction,
        wilson_ci_95: wilson_interval(hits, n, Z_95),
        rate_ratio: fraction / law.rate(epsilon),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ScanConfig {
        ScanConfig {
            s: 0.75,
            anchor: 0,
            intensities: vec![1.0, 1.0, -0.5],
            rho: 1.0,
            horizon: 0.5,
            epsilons: vec![0.2, 0.1],
            samples_per_epsilon: 100,
            rng_seed: 11,
            integrator: IntegratorConfig::with_tolerance(1e-6, 1e-9),
        }
    }

    #[test]
    fn disk_samples_stay_inside() {
        let cfg = config();
        let mut rng = probe_rng(3, 0, 0);
        let mut second_moment = 0.0;
        let n = 100_000;
        for _ in 0..n {
            let p = sample_disk(1.0, &mut rng);
            assert!(p.norm() <= 1.0);
            second_moment += p.norm_sq();
        }
        assert!((second_moment / n as f64 - 0.5).abs() < 0.01);
        let rel = sample_initial_relative(&cfg, &mut rng).unwrap();
        assert!(rel.differences().iter().all(|d| d.norm() <= cfg.rho));
    }

    #[test]
    fn streams_are_reproducible() {
        let cfg = config();
        let a = sample_initial_relative(&cfg, &mut probe_rng(5, 2, 9)).unwrap();
        let b = sample_initial_relative(&cfg, &mut probe_rng(5, 2, 9)).unwrap();
        let c = sample_initial_relative(&cfg, &mut probe_rng(5, 2, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn same_sign_pair_never_hits() {
        let rel = RelativeSystem::new(0, vec![1.0, 1.0], vec![Vec2::new(1.0, 0.0)]).unwrap();
        let cfg = IntegratorConfig::default();
        let out = eps_collapse_probe(&rel, 1.0, 0.1, 3.0, &cfg).unwrap();
        assert_eq!(out, ProbeOutcome::Miss);
    }

    #[test]
    fn initial_overlap_hits_at_zero() {
        let rel = RelativeSystem::new(0, vec![1.0, 1.0, -0.5], vec![Vec2::new(0.05, 0.0), Vec2::new(0.5, 0.5)]).unwrap();
        let out = eps_collapse_probe(&rel, 0.75, 0.1, 1.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(out, ProbeOutcome::Hit { first_time: 0.0 });
    }

    #[test]
    fn validation() {
        let mut cfg = config();
        cfg.samples_per_epsilon = 50;
        assert!(cfg.validate().is_err());
        let mut cfg = config();
        cfg.epsilons = vec![0.1, 0.2];
        assert!(cfg.validate().is_err());
        let mut cfg = config();
        cfg.epsilons = vec![0.6];
        assert!(cfg.validate().is_err());
        let mut cfg = config();
        cfg.anchor = 3;
        assert!(cfg.validate().is_err());
        assert!(config().validate().is_ok());
    }

    #[test]
    fn scan_is_deterministic() {
        let cfg = config();
        let a = scan(&cfg).unwrap();
        let b = scan(&cfg).unwrap();
        assert_eq!(a, b);
        for c in &a.cells {
            assert_eq!(c.sample_count, 100);
            assert!(c.wilson_ci_95.0 <= c.measure_fraction && c.measure_fraction <= c.wilson_ci_95.1);
            assert_eq!(c.hit_count, c.initial_hits + c.dynamical_hits);
        }
    }
}
