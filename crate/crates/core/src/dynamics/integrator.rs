//! Dormand–Prince 5(4) with PI step-size control and first-passage event
//! localization.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Distance at or below which the run stops with an ε-collapse; `0` disables.
    #[serde(default)]
    pub collapse_threshold: f64,
    /// Neumaier-compensated pairwise sums in the vector field.
    #[serde(default)]
    pub compensated: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            min_step: 1e-12,
            collapse_threshold: 0.0,
            compensated: false,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorConfig {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(invalid("rel_tol", format!("must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(invalid("abs_tol", format!("must be positive, got {}", self.abs_tol)));
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step && self.max_step.is_finite()) {
            return Err(invalid(
                "min_step",
                format!("need 0 < min_step < max_step, got {} and {}", self.min_step, self.max_step),
            ));
        }
        if !(self.collapse_threshold >= 0.0 && self.collapse_threshold.is_finite()) {
            return Err(invalid(
                "collapse_threshold",
                format!("must be non-negative, got {}", self.collapse_threshold),
            ));
        }
        Ok(())
    }
}

/// Why an integration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cause")]
pub enum Termination {
    ReachedFinalTime,
    /// First passage of the monitored distance below the collapse threshold.
    EpsCollapse { time: f64, pair: (usize, usize) },
    /// The controller asked for a step below `min_step`.
    StepUnderflow { time: f64 },
}

impl Termination {
    pub fn time(&self, final_time: f64) -> f64 {
        match *self {
            Termination::ReachedFinalTime => final_time,
            Termination::EpsCollapse { time, .. } | Termination::StepUnderflow { time } => time,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub field_evaluations: u64,
}

/// An autonomous ODE with a monitored distance.
pub(crate) trait OdeSystem {
    fn rhs(&self, y: &[f64], dy: &mut [f64]);

    /// Monitored distance for event detection and the pair attaining it.
    fn event_distance(&self, y: &[f64]) -> (f64, (usize, usize));
}

// Dormand–Prince tableau (autonomous systems only, so no stage nodes).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - 0.75 * BETA;
const EVENT_TOLERANCE: f64 = 1e-3;

struct Workspace {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }
}

pub(crate) struct Outcome {
    pub termination: Termination,
    pub state: Vec<f64>,
    pub stats: IntegrationStats,
}

/// Integrates `sys` from `y0` over `[0, final_time]`. `observe(t, y)` is called
/// at the start and after every accepted step, including the event point.
pub(crate) fn run<S: OdeSystem, F: FnMut(f64, &[f64])>(
    sys: &S,
    y0: &[f64],
    final_time: f64,
    cfg: &IntegratorConfig,
    mut observe: F,
) -> Outcome {
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    observe(t, &y);

    let threshold = cfg.collapse_threshold;
    if threshold > 0.0 {
        let (d, pair) = sys.event_distance(&y);
        if d <= threshold {
            return Outcome {
                termination: Termination::EpsCollapse { time: 0.0, pair },
                state: y,
                stats,
            };
        }
    }
    if n == 0 {
        observe(final_time, &y);
        return Outcome {
            termination: Termination::ReachedFinalTime,
            state: y,
            stats,
        };
    }

    let mut ws = Workspace::new(n);
    sys.rhs(&y, &mut ws.k[0]);
    stats.field_evaluations += 1;
    let mut h = initial_step(sys, &y, &ws.k[0], cfg, final_time, &mut stats);
    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;

    loop {
        let remaining = final_time - t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let err = attempt(sys, &y, h, cfg, &mut ws);
        stats.field_evaluations += 6;

        if err <= 1.0 {
            stats.accepted_steps += 1;
            if threshold > 0.0 {
                if sys.event_distance(&ws.y_new).0 <= threshold {
                    let (dt, state) = locate_crossing(sys, &y, h, cfg, &mut ws, threshold, &mut stats);
                    let time = t + dt;
                    observe(time, &state);
                    let (_, pair) = sys.event_distance(&state);
                    return Outcome {
                        termination: Termination::EpsCollapse { time, pair },
                        state,
                        stats,
                    };
                }
            }
            t = if last { final_time } else { t + h };
            std::mem::swap(&mut y, &mut ws.y_new);
            ws.k.swap(0, 6);
            observe(t, &y);
            if last {
                return Outcome {
                    termination: Termination::ReachedFinalTime,
                    state: y,
                    stats,
                };
            }
            let mut fac = err.max(1e-300).powf(EXPO) / err_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            err_old = err.max(1e-4);
            rejected_last = false;
            h = h_new.min(cfg.max_step);
        } else {
            stats.rejected_steps += 1;
            rejected_last = true;
            let shrink = if err.is_finite() {
                (err.powf(EXPO) / SAFETY).min(1.0 / FAC_MIN)
            } else {
                1.0 / FAC_MIN
            };
            h /= shrink;
            if h < cfg.min_step {
                return Outcome {
                    termination: Termination::StepUnderflow { time: t },
                    state: y,
                    stats,
                };
            }
        }
        if h < cfg.min_step && final_time - t > cfg.min_step {
            return Outcome {
                termination: Termination::StepUnderflow { time: t },
                state: y,
                stats,
            };
        }
    }
}

/// One Dormand–Prince step of size `h` from `y` whose field is `ws.k[0]`.
/// Leaves the 5th-order solution in `ws.y_new`, its field in `ws.k[6]`, and
/// returns the scaled RMS error estimate (non-finite states yield infinity).
fn attempt<S: OdeSystem>(sys: &S, y: &[f64], h: f64, cfg: &IntegratorConfig, ws: &mut Workspace) -> f64 {
    let n = y.len();
    let Workspace { k, tmp, y_new } = ws;
    let [k1, k2, k3, k4, k5, k6, k7] = k;

    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    sys.rhs(tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    sys.rhs(tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    sys.rhs(tmp, k4);
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    sys.rhs(tmp, k5);
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    sys.rhs(tmp, k6);
    for i in 0..n {
        y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    sys.rhs(y_new, k7);

    let mut acc = 0.0;
    for i in 0..n {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        acc += (e / sc) * (e / sc);
    }
    let err = (acc / n as f64).sqrt();
    if err.is_finite() && y_new.iter().all(|v| v.is_finite()) {
        err
    } else {
        f64::INFINITY
    }
}

fn initial_step<S: OdeSystem>(
    sys: &S,
    y: &[f64],
    f0: &[f64],
    cfg: &IntegratorConfig,
    final_time: f64,
    stats: &mut IntegrationStats,
) -> f64 {
    let n = y.len();
    let scale = |v: f64| cfg.abs_tol + cfg.rel_tol * v.abs();
    let rms = |f: &dyn Fn(usize) -> f64| (((0..n).map(|i| f(i) * f(i)).sum::<f64>()) / n as f64).sqrt();
    let d0 = rms(&|i| y[i] / scale(y[i]));
    let d1 = rms(&|i| f0[i] / scale(y[i]));
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step).min(final_time);

    let y1: Vec<f64> = (0..n).map(|i| y[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(&y1, &mut f1);
    stats.field_evaluations += 1;
    let d2 = rms(&|i| (f1[i] - f0[i]) / scale(y[i])) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax.is_finite() && dmax > 1e-15 {
        (0.01 / dmax).powf(0.2)
    } else {
        (h0 * 1e-3).max(1e-6)
    };
    (100.0 * h0).min(h1).min(cfg.max_step).max(cfg.min_step)
}

/// Bisects the accepted step `[0, h]` for the first point where the monitored
/// distance drops to the threshold, to within `EVENT_TOLERANCE·threshold`.
fn locate_crossing<S: OdeSystem>(
    sys: &S,
    y: &[f64],
    h: f64,
    cfg: &IntegratorConfig,
    ws: &mut Workspace,
    threshold: f64,
    stats: &mut IntegrationStats,
) -> (f64, Vec<f64>) {
    let mut lo = 0.0;
    let mut hi = h;
    let mut best = ws.y_new.clone();
    let mut best_d = sys.event_distance(&best).0;
    for _ in 0..200 {
        if best_d >= threshold * (1.0 - EVENT_TOLERANCE) || hi - lo <= f64::EPSILON * h {
            break;
        }
        let mid = 0.5 * (lo + hi);
        attempt(sys, y, mid, cfg, ws);
        stats.field_evaluations += 6;
        let d = sys.event_distance(&ws.y_new).0;
        if d <= threshold {
            hi = mid;
            best.copy_from_slice(&ws.y_new);
            best_d = d;
        } else {
            lo = mid;
        }
    }
    (hi, best)
}
