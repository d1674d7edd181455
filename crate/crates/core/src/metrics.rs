//! Per-class performance figures and Monte Carlo estimates.

/// Throughput (packet/slot) and packet success rate of both service classes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ServiceMetrics {
    pub r_c: f64,
    pub r_cbar: f64,
    pub gamma_c: f64,
    pub gamma_cbar: f64,
}

impl ServiceMetrics {
    pub const ZERO: ServiceMetrics = ServiceMetrics {
        r_c: 0.0,
        r_cbar: 0.0,
        gamma_c: 0.0,
        gamma_cbar: 0.0,
    };

    /// Values in the fixed order `(R_c, R_cbar, Gamma_c, Gamma_cbar)`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.r_c, self.r_cbar, self.gamma_c, self.gamma_cbar]
    }

    /// Checks the structural invariants: non-negative throughputs whose sum
    /// does not exceed one and success rates in `[0, 1]`, up to `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let prob = |p: f64| p >= -tol && p <= 1.0 + tol;
        self.r_c >= -tol
            && self.r_cbar >= -tol
            && self.r_c + self.r_cbar <= 1.0 + tol
            && prob(self.gamma_c)
            && prob(self.gamma_cbar)
    }
}

/// Metric names in the order used by [`ServiceMetrics::as_array`].
pub const METRIC_NAMES: [&str; 4] = ["R_c", "R_cbar", "Gamma_c", "Gamma_cbar"];

/// Monte Carlo estimate of a mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_samples)`.
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl SimEstimate {
    /// Estimate from the sum and sum of squares of `n` samples. Samples are
    /// rationals `x / scale` with integer `x`, so the sums are exact integers
    /// and the estimate does not depend on summation order.
    pub fn from_integer_sums(sum: u64, sum_sq: u64, n: u64, scale: f64, seed: u64) -> Self {
        if n == 0 {
            return SimEstimate {
                mean: 0.0,
                std_error: 0.0,
                n_samples: 0,
                seed,
            };
        }
        let nf = n as f64;
        let mean_raw = sum as f64 / nf;
        let var_raw = if n > 1 {
            // exact integer numerator n*sum_sq - sum^2
            let num = u128::from(n) * u128::from(sum_sq) - u128::from(sum) * u128::from(sum);
            num as f64 / (nf * (nf - 1.0))
        } else {
            0.0
        };
        SimEstimate {
            mean: mean_raw / scale,
            std_error: (var_raw / nf).sqrt() / scale,
            n_samples: n,
            seed,
        }
    }

    /// Estimate of a Bernoulli success probability.
    pub fn from_bernoulli(successes: u64, n: u64, seed: u64) -> Self {
        Self::from_integer_sums(successes, successes, n, 1.0, seed)
    }

    /// Normal-approximation confidence interval at the given z quantile.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_error, self.mean + z * self.std_error)
    }

    /// 95% confidence interval.
    pub fn ci95(&self) -> (f64, f64) {
        self.interval(1.959_963_984_540_054)
    }

    /// `|mean - value|` in units of standard error; the comparison is exact
    /// when the standard error is zero.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = self.mean - value;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }

    /// `true` when `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

/// Monte Carlo estimates of the four class metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimMetrics {
    pub r_c: SimEstimate,
    pub r_cbar: SimEstimate,
    pub gamma_c: SimEstimate,
    pub gamma_cbar: SimEstimate,
}

impl SimMetrics {
    pub fn as_array(&self) -> [SimEstimate; 4] {
        [self.r_c, self.r_cbar, self.gamma_c, self.gamma_cbar]
    }

    pub fn means(&self) -> ServiceMetrics {
        ServiceMetrics {
            r_c: self.r_c.mean,
            r_cbar: self.r_cbar.mean,
            gamma_c: self.gamma_c.mean,
            gamma_cbar: self.gamma_cbar.mean,
        }
    }

    pub fn max_std_error(&self) -> f64 {
        self.as_array().iter().map(|e| e.std_error).fold(0.0, f64::max)
    }
}
