//! Interval estimates and small regression helpers.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

impl EstimateWithCI {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize, z: f64) -> EstimateWithCI {
    if n == 0 {
        return EstimateWithCI {
            mean: f64::NAN,
            lower: 0.0,
            upper: 1.0,
            n: 0,
        };
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    EstimateWithCI {
        mean: p,
        lower: (center - half).max(0.0).min(p),
        upper: (center + half).min(1.0).max(p),
        n,
    }
}

/// Normal-approximation interval for the mean of real samples.
pub fn mean_ci(xs: &[f64], z: f64) -> EstimateWithCI {
    let n = xs.len();
    let (m, v) = mean_var(xs);
    let se = (v / n as f64).sqrt();
    EstimateWithCI {
        mean: m,
        lower: m - z * se,
        upper: m + z * se,
        n,
    }
}

/// Sample mean and unbiased variance (0 for fewer than two samples).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (m, v)
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Weighted least squares for y = intercept + slope·x with weights w (inverse variances).
/// With unit weights the slope error is the classical residual-based one; otherwise it is
/// derived from the weights.
pub fn weighted_fit(x: &[f64], y: &[f64], w: Option<&[f64]>) -> LinearFit {
    let n = x.len();
    assert!(n >= 2 && y.len() == n);
    let ones = vec![1.0; n];
    let w = w.unwrap_or(&ones);
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx) * (a - mx)).sum();
    let sxy: f64 = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((a, c), b)| b * (a - mx) * (c - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let uniform = w.iter().all(|&v| v == w[0]);
    let slope_stderr = if uniform {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, c)| (c - intercept - slope * a).powi(2))
            .sum();
        if n > 2 {
            (rss / (n - 2) as f64 / (sxx / w[0])).sqrt()
        } else {
            0.0
        }
    } else {
        (1.0 / sxx).sqrt()
    };
    LinearFit {
        slope,
        intercept,
        slope_stderr,
    }
}
