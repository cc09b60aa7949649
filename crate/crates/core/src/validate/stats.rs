use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{erfc, regularized_upper_gamma};

/// Smallest sample accepted by the Kolmogorov–Smirnov tests.
pub const MIN_KS_SAMPLES: usize = 10;

/// Right-continuous step function of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the sample at or below `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&s| s <= x);
        k as f64 / self.sorted.len().max(1) as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

pub fn empirical_cdf(samples: &[f64]) -> EmpiricalCdf {
    EmpiricalCdf::new(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov tail `P[K > x]`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Jacobi-transformed series, fast for small x
        let y = -PI * PI / (8.0 * x * x);
        let s: f64 = (1..=6).map(|k| ((2 * k - 1) as f64).powi(2) * y).map(f64::exp).sum();
        (1.0 - (2.0 * PI).sqrt() / x * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * x * x).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// p-value for a KS distance `d` at effective sample size `n`, with
/// Stephens' finite-sample correction.
fn ks_p_value(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// One-sample Kolmogorov–Smirnov test against a continuous cdf.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<TestOutcome> {
    let n = samples.len();
    if n < MIN_KS_SAMPLES {
        return Err(Error::SampleSize {
            n,
            min: MIN_KS_SAMPLES,
        });
    }
    let ecdf = EmpiricalCdf::new(samples);
    let values: Vec<f64> = ecdf.sorted().iter().map(|&x| cdf(x)).collect();
    Ok(ks_from_sorted_cdf_values(&values))
}

/// KS test given the analytic cdf evaluated at the sorted sample.
pub fn ks_from_sorted_cdf_values(values: &[f64]) -> TestOutcome {
    let n = values.len() as f64;
    let d = values
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    TestOutcome {
        statistic: d,
        p_value: ks_p_value(d, n),
    }
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    for s in [a, b] {
        if s.len() < MIN_KS_SAMPLES {
            return Err(Error::SampleSize {
                n: s.len(),
                min: MIN_KS_SAMPLES,
            });
        }
    }
    let ea = EmpiricalCdf::new(a);
    let eb = EmpiricalCdf::new(b);
    let (xa, xb) = (ea.sorted(), eb.sorted());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(TestOutcome {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
    })
}

/// Pearson chi-square test; `dof = bins - 1 - fitted`.
pub fn chi_square(observed: &[u64], expected: &[f64], fitted: usize) -> Result<TestOutcome> {
    if observed.len() != expected.len() || observed.len() < 2 + fitted {
        return Err(Error::SampleSize {
            n: observed.len(),
            min: 2 + fitted,
        });
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = (observed.len() - 1 - fitted) as f64;
    Ok(TestOutcome {
        statistic: stat,
        p_value: regularized_upper_gamma(dof / 2.0, stat / 2.0)?,
    })
}

/// Two-sided normal p-value of `z`.
pub fn z_test_p_value(z: f64) -> f64 {
    erfc(z.abs() / SQRT_2)
}

/// Sample mean and its standard error.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}
