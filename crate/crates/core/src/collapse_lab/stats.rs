//! Binomial intervals, rate laws and log-log slope fits.

use serde::{Deserialize, Serialize};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for `hits` successes out of `n` trials.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The bounds are exactly 0 and 1 at the extremes; avoid rounding residue.
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Decay law bounding the ε-collapse measure, selected by the kernel order `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law")]
pub enum RateLaw {
    /// `ε`, for `s > 1/2`.
    Linear,
    /// `ε log(1/ε)`, for `s = 1/2`.
    LinearLog,
    /// `ε^{2s}`, for `s < 1/2`.
    Power2s { s: f64 },
}

impl RateLaw {
    pub fn for_order(s: f64) -> Self {
        if s > 0.5 {
            RateLaw::Linear
        } else if s == 0.5 {
            RateLaw::LinearLog
        } else {
            RateLaw::Power2s { s }
        }
    }

    pub fn rate(&self, epsilon: f64) -> f64 {
        match *self {
            RateLaw::Linear => epsilon,
            RateLaw::LinearLog => epsilon * (1.0 / epsilon).ln(),
            RateLaw::Power2s { s } => epsilon.powf(2.0 * s),
        }
    }

    /// Leading power of `ε` (the logarithm is ignored).
    pub fn exponent(&self) -> f64 {
        match *self {
            RateLaw::Linear | RateLaw::LinearLog => 1.0,
            RateLaw::Power2s { s } => 2.0 * s,
        }
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; absent with fewer than three points.
    pub slope_std_error: Option<f64>,
    pub points: usize,
}

/// Fits `log y = intercept + slope · log x`. Needs at least two points with
/// distinct positive `x` and positive `y`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<LogLogFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_std_error = (n > 2).then(|| {
        let rss: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    });
    Some(LogLogFit {
        slope,
        intercept,
        slope_std_error,
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_estimate() {
        let (lo, hi) = wilson_interval(30, 100, Z_95);
        assert!(lo < 0.3 && 0.3 < hi);
        // Reference interval for 30/100 from an independent statistics package.
        assert!((lo - 0.218_948_852_949_327_56).abs() < 1e-12, "{lo}");
        assert!((hi - 0.395_848_546_333_466_67).abs() < 1e-12, "{hi}");
        let (lo, hi) = wilson_interval(0, 100, Z_95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.03 && hi < 0.04);
    }

    #[test]
    fn recovers_power_law() {
        let pts: Vec<(f64, f64)> = [0.1f64, 0.05, 0.025, 0.0125].iter().map(|&e| (e, 3.0 * e.powf(1.5))).collect();
        let fit = fit_loglog(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.slope_std_error.unwrap() < 1e-10);
        assert!(fit_loglog(&pts[..1]).is_none());
    }

    #[test]
    fn rate_laws() {
        assert_eq!(RateLaw::for_order(0.75), RateLaw::Linear);
        assert_eq!(RateLaw::for_order(1.0), RateLaw::Linear);
        assert_eq!(RateLaw::for_order(0.5), RateLaw::LinearLog);
        assert_eq!(RateLaw::for_order(0.25).exponent(), 0.5);
        assert!((RateLaw::LinearLog.rate(0.1) - 0.1 * 10f64.ln()).abs() < 1e-15);
        assert!((RateLaw::for_order(0.25).rate(0.01) - 0.1).abs() < 1e-15);
    }
}
