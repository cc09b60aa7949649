//! Monte-Carlo cross-checks of the closed forms against simulated skylines.
//!
//! Every check draws its replications through [`crate::process::replicate`]
//! and reduces them in replication order, so a report depends only on its
//! inputs and seed.

mod stats;

use std::fmt::Write as _;
use std::io::Write;

use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stats::{
    chi_square, empirical_cdf, kolmogorov_survival, ks_from_sorted_cdf_values, ks_test, ks_two_sample,
    mean_stderr, z_test_p_value, EmpiricalCdf, TestOutcome, MIN_KS_SAMPLES,
};

use crate::analytic::{AngleDistribution, AngleVariant, BlockingJointDensity};
use crate::coverage::{tau_conditional, tau_unconditional, visible_length, CoverageScenario};
use crate::error::{Error, Result};
use crate::params::{EnvParams, ModelKind};
use crate::process::{default_t_min, replicate, replication_rng, Lane, Observer, SamplingConfig, Skyline};
use crate::ris::{cdf_floor_tan, trans_cdf_tan, refl_cdf_tan, trans_moment, RisCondition, RisMode};

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Two-sided level of a three-standard-error band, `erfc(3/√2)`.
pub const THREE_SIGMA_ALPHA: f64 = 0.002_699_796_063_260_207;

/// Equal-probability cells in the joint chi-square test.
pub const JOINT_CELLS: (usize, usize) = (5, 4);

/// Conditional mass left below the truncation tangent of a simulation.
pub const FLOOR_MASS: f64 = 1e-7;

/// Strata of `H⁺` used by the unconditional connectivity estimate.
pub const TAU_STRATA: usize = 100;

/// Smallest expected count per chi-square cell after pooling.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Ks,
    ChiSquare,
    ZTest,
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            TestKind::Ks => "ks",
            TestKind::ChiSquare => "chi2",
            TestKind::ZTest => "z",
        })
    }
}

/// Conditioning window around a blocker position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub x_lo: f64,
    pub x_hi: f64,
    pub h_lo: f64,
    pub h_hi: f64,
}

impl Bin {
    /// Box around `(x, h)` whose relative half-width is
    /// `0.5 (n / 10⁴)^{-1/5}`, capped at one half.
    pub fn around(x: f64, h: f64, n: usize) -> Result<Self> {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::InvalidParameter {
                name: "x",
                value: x,
                reason: "bin centre must be finite and nonzero",
            });
        }
        crate::params::check_positive("h", h)?;
        let r = (0.5 * (n.max(1) as f64 / 1e4).powf(-0.2)).min(0.5);
        let wx = r * x.abs();
        Ok(Self {
            x_lo: x - wx,
            x_hi: x + wx,
            h_lo: h * (1.0 - r),
            h_hi: h * (1.0 + r),
        })
    }

    pub fn contains(&self, x: f64, h: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi && h >= self.h_lo && h <= self.h_hi
    }
}

/// Outcome of one Monte-Carlo check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Name of the checked quantity.
    pub target: String,
    pub test: TestKind,
    /// Samples entering the test.
    pub n: usize,
    /// Simulated replications, including those outside a conditioning bin.
    pub replications: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// `p_value > alpha`.
    pub pass: bool,
    pub mc_estimate: Option<f64>,
    pub stderr: Option<f64>,
    /// Analytic value the estimate is compared with.
    pub reference: Option<f64>,
    pub seed: u64,
    pub bin: Option<Bin>,
}

impl ValidationReport {
    fn new(target: String, test: TestKind, outcome: TestOutcome, alpha: f64, seed: u64) -> Self {
        Self {
            target,
            test,
            n: 0,
            replications: 0,
            statistic: outcome.statistic,
            p_value: outcome.p_value,
            alpha,
            pass: outcome.p_value > alpha,
            mc_estimate: None,
            stderr: None,
            reference: None,
            seed,
            bin: None,
        }
    }

    fn sizes(mut self, n: usize, replications: usize) -> Self {
        self.n = n;
        self.replications = replications;
        self
    }

    fn estimate(mut self, mc: f64, stderr: f64, reference: f64) -> Self {
        self.mc_estimate = Some(mc);
        self.stderr = Some(stderr);
        self.reference = Some(reference);
        self
    }

    fn in_bin(mut self, bin: Bin) -> Self {
        self.bin = Some(bin);
        self
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in (0, 1)",
        })
    }
}

/// z-test of a mean against a reference value.
fn z_report(target: String, values: &[f64], reference: f64, seed: u64, replications: usize) -> ValidationReport {
    let (mean, se) = mean_stderr(values);
    let z = (mean - reference) / se;
    let outcome = TestOutcome {
        statistic: z,
        p_value: z_test_p_value(z),
    };
    ValidationReport::new(target, TestKind::ZTest, outcome, THREE_SIGMA_ALPHA, seed)
        .sizes(values.len(), replications)
        .estimate(mean, se, reference)
}

/// Largest tangent at or below `tan 0.5°` where `cdf_tan` is at most
/// [`FLOOR_MASS`].
fn angle_floor(dist: &AngleDistribution) -> Result<f64> {
    let mut hi = default_t_min();
    if dist.cdf_tan(hi)? <= FLOOR_MASS {
        return Ok(hi);
    }
    let mut lo = hi;
    while dist.cdf_tan(lo)? > FLOOR_MASS {
        hi = lo;
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::domain("angle_floor", lo, "law has an atom at zero"));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf_tan(mid)? > FLOOR_MASS {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

fn ground_config(params: &EnvParams) -> Result<SamplingConfig> {
    let dist = AngleDistribution::new(*params, AngleVariant::MM)?;
    Ok(SamplingConfig {
        t_min: angle_floor(&dist)?,
        ..SamplingConfig::default()
    })
}

/// Skyline model and observer height behind a ground or elevated variant.
fn simulated_model(variant: AngleVariant) -> Result<(ModelKind, f64)> {
    match variant {
        AngleVariant::MM => Ok((ModelKind::MM, 0.0)),
        AngleVariant::MD => Ok((ModelKind::MD, 0.0)),
        AngleVariant::DM => Ok((ModelKind::DM, 0.0)),
        AngleVariant::Weibull => Ok((ModelKind::Weibull, 0.0)),
        AngleVariant::Elevated { h } => Ok((ModelKind::MM, h)),
        AngleVariant::Transmissive { .. } | AngleVariant::Reflective { .. } => Err(Error::InvalidParameter {
            name: "variant",
            value: f64::NAN,
            reason: "surface laws are conditional; use validate_ris",
        }),
    }
}

/// Blockage angles of `n` simulated skylines, in replication order.
///
/// Each skyline is scanned until the running maximum is certified down to the
/// tangent below which the analytic law leaves mass [`FLOOR_MASS`]; an angle
/// below that floor is reported as 0.
pub fn simulate_angles(params: &EnvParams, variant: AngleVariant, n: usize, seed: u64) -> Result<Vec<f64>> {
    let (model, observer_h) = simulated_model(variant)?;
    let dist = AngleDistribution::new(*params, variant)?;
    let cfg = SamplingConfig {
        t_min: angle_floor(&dist)?,
        ..SamplingConfig::default()
    };
    let observer = Observer::at_height(observer_h);
    replicate(n, |rep| {
        let mut sky = Skyline::new(*params, model, replication_rng(seed, rep, Lane::Primary));
        Ok(sky.steepest_from(observer, 0, &cfg)?.map_or(0.0, |(_, s)| s.atan()))
    })
}

/// Simulates `n` skylines of the variant's model and tests the sampled
/// blockage angles against the analytic cdf with a one-sample KS test.
///
/// The surface variants are conditional laws; check them with
/// [`validate_ris`].
pub fn validate_angle(
    params: &EnvParams,
    variant: AngleVariant,
    n: usize,
    seed: u64,
    alpha: f64,
) -> Result<ValidationReport> {
    check_alpha(alpha)?;
    simulated_model(variant)?;
    if n < MIN_KS_SAMPLES {
        return Err(Error::SampleSize {
            n,
            min: MIN_KS_SAMPLES,
        });
    }
    let dist = AngleDistribution::new(*params, variant)?;
    let mut thetas = simulate_angles(params, variant, n, seed)?;
    let (mean, se) = mean_stderr(&thetas);
    thetas.sort_by(f64::total_cmp);
    let values = thetas.par_iter().map(|&t| dist.cdf(t)).collect::<Result<Vec<_>>>()?;
    let outcome = ks_from_sorted_cdf_values(&values);
    Ok(
        ValidationReport::new(format!("theta[{variant}]"), TestKind::Ks, outcome, alpha, seed)
            .sizes(n, n)
            .estimate(mean, se, dist.mean()?),
    )
}

/// Blocking building `(X⁺, H⁺)` of a ground observer in one replication.
fn ground_blocker(params: &EnvParams, cfg: &SamplingConfig, seed: u64, rep: u64) -> Result<(f64, f64, usize)> {
    let mut sky = Skyline::new(*params, ModelKind::MM, replication_rng(seed, rep, Lane::Primary));
    let (k, _) = sky
        .steepest_from(Observer::ORIGIN, 0, cfg)?
        .expect("a ground observer always sees the first rooftop");
    let b = sky.get(k);
    Ok((b.x, b.h, k + 1))
}

/// Chi-square of `(X⁺, H⁺)` over equal-probability cells of the joint law,
/// followed by z-tests of the two means against `(2/λ, 2/μ)`.
///
/// Cells are products of `H⁺`-quantile bands (Gamma(2, μ)) and bands of the
/// ratio `X⁺/H⁺`, which is Exp(ρ) and independent of `H⁺`.
pub fn validate_joint(params: &EnvParams, n: usize, seed: u64) -> Result<Vec<ValidationReport>> {
    let (nh, nr) = JOINT_CELLS;
    if n < 5 * nh * nr {
        return Err(Error::SampleSize { n, min: 5 * nh * nr });
    }
    let joint = BlockingJointDensity::new(*params);
    let cfg = ground_config(params)?;
    let blockers = replicate(n, |rep| ground_blocker(params, &cfg, seed, rep))?;

    let h_edges = (1..nh)
        .map(|j| joint.quantile_h(j as f64 / nh as f64))
        .collect::<Result<Vec<_>>>()?;
    let r_edges: Vec<f64> = (1..nr)
        .map(|j| -(1.0 - j as f64 / nr as f64).ln() / params.rho())
        .collect();
    let mut observed = vec![0u64; nh * nr];
    for &(x, h, _) in &blockers {
        let i = h_edges.partition_point(|&e| e < h);
        let j = r_edges.partition_point(|&e| e < x / h);
        observed[i * nr + j] += 1;
    }
    let expected = vec![n as f64 / (nh * nr) as f64; nh * nr];
    let chi = chi_square(&observed, &expected, 0)?;

    let (mean_h, mean_x) = joint.means();
    let xs: Vec<f64> = blockers.iter().map(|b| b.0).collect();
    let hs: Vec<f64> = blockers.iter().map(|b| b.1).collect();
    Ok(vec![
        ValidationReport::new("joint(x+,h+)".into(), TestKind::ChiSquare, chi, DEFAULT_ALPHA, seed).sizes(n, n),
        z_report("mean(x+)".into(), &xs, mean_x, seed, n),
        z_report("mean(h+)".into(), &hs, mean_h, seed, n),
    ])
}

/// Groups adjacent cells until every group expects at least five counts.
fn pool_cells(observed: &[u64], expected: &[f64]) -> (Vec<u64>, Vec<f64>) {
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o, mut e) = (0u64, 0.0);
    for (&oi, &ei) in observed.iter().zip(expected) {
        o += oi;
        e += ei;
        if e >= MIN_EXPECTED {
            obs.push(o);
            exp.push(e);
            (o, e) = (0, 0.0);
        }
    }
    if e > 0.0 || o > 0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(lo), Some(le)) => {
                *lo += o;
                *le += e;
            }
            _ => {
                obs.push(o);
                exp.push(e);
            }
        }
    }
    (obs, exp)
}

/// Chi-square of the blocker's 1-based index among replications whose
/// blocker falls in a bin around `(x, h)`.
///
/// Each sample contributes its own shifted-Poisson pmf to the expected
/// counts, so the bin only focuses the check.
pub fn validate_index(params: &EnvParams, x: f64, h: f64, n: usize, seed: u64) -> Result<ValidationReport> {
    let bin = Bin::around(x, h, n)?;
    let joint = BlockingJointDensity::new(*params);
    let cfg = ground_config(params)?;
    let hits: Vec<(f64, f64, usize)> = replicate(n, |rep| ground_blocker(params, &cfg, seed, rep))?
        .into_iter()
        .filter(|&(bx, bh, _)| bin.contains(bx, bh))
        .collect();
    let m_max = joint.index_mean(bin.x_hi, bin.h_hi)?;
    let top = hits.iter().map(|b| b.2).max().unwrap_or(1);
    let cells = top.max((m_max + 10.0 * m_max.sqrt() + 20.0).ceil() as usize);

    let mut observed = vec![0u64; cells];
    let mut expected = vec![0.0; cells];
    for &(bx, bh, k) in &hits {
        observed[k - 1] += 1;
        let mut total = 0.0;
        for (i, e) in expected.iter_mut().enumerate().take(cells - 1) {
            let p = joint.index_pmf(bx, bh, i + 1)?;
            *e += p;
            total += p;
        }
        expected[cells - 1] += (1.0 - total).max(0.0);
    }
    let (obs, exp) = pool_cells(&observed, &expected);
    let chi = chi_square(&obs, &exp, 0)?;
    let ks: Vec<f64> = hits.iter().map(|b| b.2 as f64).collect();
    let (mean, se) = mean_stderr(&ks);
    let reference = hits
        .iter()
        .map(|&(bx, bh, _)| joint.index_mean(bx, bh).map(|m| m + 1.0))
        .sum::<Result<f64>>()?
        / hits.len().max(1) as f64;
    Ok(
        ValidationReport::new(format!("index|({x},{h})"), TestKind::ChiSquare, chi, DEFAULT_ALPHA, seed)
            .sizes(hits.len(), n)
            .estimate(mean, se, reference)
            .in_bin(bin),
    )
}

/// Surface angle from the blocker of one replication when that blocker lands
/// in `bin`: `(condition, tan Θ)`.
fn surface_sample(
    params: &EnvParams,
    mode: RisMode,
    bin: &Bin,
    cfg: &SamplingConfig,
    seed: u64,
    rep: u64,
) -> Result<Option<(RisCondition, f64)>> {
    let mut right = Skyline::new(*params, ModelKind::MM, replication_rng(seed, rep, Lane::Primary));
    let (observer, start, cond) = match mode {
        RisMode::Transmissive => {
            let (k, _) = right
                .steepest_from(Observer::ORIGIN, 0, cfg)?
                .expect("a ground observer always sees the first rooftop");
            let b = right.get(k);
            if !bin.contains(b.x, b.h) {
                return Ok(None);
            }
            (Observer::new(b.x, b.h), k + 1, RisCondition::transmissive(b.x, b.h)?)
        }
        RisMode::Reflective => {
            let mut left = Skyline::new(*params, ModelKind::MM, replication_rng(seed, rep, Lane::Mirror));
            let (j, _) = left
                .steepest_from(Observer::ORIGIN, 0, cfg)?
                .expect("a ground observer always sees the first rooftop");
            let b = left.get(j);
            if !bin.contains(-b.x, b.h) {
                return Ok(None);
            }
            (Observer::new(-b.x, b.h), 0, RisCondition::reflective(-b.x, b.h)?)
        }
    };
    let scan = SamplingConfig {
        t_min: cdf_floor_tan(params, &cond, FLOOR_MASS)?,
        ..*cfg
    };
    let t = right.steepest_from(observer, start, &scan)?.map_or(0.0, |(_, s)| s);
    Ok(Some((cond, t)))
}

/// Checks the conditional law of the surface's blockage angle given the
/// carrying building, over replications whose carrier falls in a bin around
/// `cond`.
///
/// Each sample is mapped through its own conditional cdf and the results are
/// tested for uniformity by KS. Transmissive runs also z-test the second
/// moment of `tan Θᵀ` against its closed form.
pub fn validate_ris(params: &EnvParams, cond: &RisCondition, n: usize, seed: u64) -> Result<Vec<ValidationReport>> {
    let bin = Bin::around(cond.x, cond.h, n)?;
    let cfg = ground_config(params)?;
    let samples: Vec<(RisCondition, f64)> =
        replicate(n, |rep| surface_sample(params, cond.mode, &bin, &cfg, seed, rep))?
            .into_iter()
            .flatten()
            .collect();
    let pit = samples
        .iter()
        .map(|(c, t)| match cond.mode {
            RisMode::Transmissive => trans_cdf_tan(params, c, *t),
            RisMode::Reflective => refl_cdf_tan(params, c, *t),
        })
        .collect::<Result<Vec<_>>>()?;
    let ks = ks_test(&pit, |u| u.clamp(0.0, 1.0))?;
    let label = match cond.mode {
        RisMode::Transmissive => "theta_T",
        RisMode::Reflective => "theta_R",
    };
    let mut reports = vec![ValidationReport::new(
        format!("{label}|({},{})", cond.x, cond.h),
        TestKind::Ks,
        ks,
        DEFAULT_ALPHA,
        seed,
    )
    .sizes(samples.len(), n)
    .in_bin(bin)];

    if cond.mode == RisMode::Transmissive {
        let residuals = samples
            .iter()
            .map(|(c, t)| Ok(t * t - trans_moment(params, c, 2)?))
            .collect::<Result<Vec<_>>>()?;
        let squares: Vec<f64> = samples.iter().map(|(_, t)| t * t).collect();
        let (mean_sq, _) = mean_stderr(&squares);
        let (mean_res, se) = mean_stderr(&residuals);
        let z = mean_res / se;
        let outcome = TestOutcome {
            statistic: z,
            p_value: z_test_p_value(z),
        };
        reports.push(
            ValidationReport::new(
                format!("tan2_theta_T|({},{})", cond.x, cond.h),
                TestKind::ZTest,
                outcome,
                THREE_SIGMA_ALPHA,
                seed,
            )
            .sizes(samples.len(), n)
            .estimate(mean_sq, se, mean_sq - mean_res)
            .in_bin(bin),
        );
    }
    Ok(reports)
}

/// One connectivity replication.
#[derive(Debug, Clone, Copy)]
struct LinkSample {
    x: f64,
    h: f64,
    /// No aerial node in the user's direct view.
    blind: bool,
    /// An aerial node inside the surface's view.
    rescued: bool,
}

fn link_sample(scenario: &CoverageScenario, cfg: &SamplingConfig, seed: u64, rep: u64) -> Result<LinkSample> {
    let params = &scenario.env;
    let big_h = scenario.altitude();
    let mut right = Skyline::new(*params, ModelKind::MM, replication_rng(seed, rep, Lane::Primary));
    let (k, _) = right
        .steepest_from(Observer::ORIGIN, 0, cfg)?
        .expect("a ground observer always sees the first rooftop");
    let b = right.get(k);
    let first_node: f64 = Exp::new(scenario.nu())
        .expect("nu is positive")
        .sample(&mut replication_rng(seed, rep, Lane::Aerial));
    let blind = first_node > visible_length(b.x, b.h, big_h)?;
    if !blind {
        return Ok(LinkSample {
            x: b.x,
            h: b.h,
            blind,
            rescued: false,
        });
    }
    // below this tangent the surface's reach exceeds the first node with
    // probability at least 1 - e^{-40}
    let floor = 1.0 / (b.x / b.h + 40.0 / scenario.h_nu());
    let scan = SamplingConfig { t_min: floor, ..*cfg };
    let reach = match right.steepest_from(Observer::new(b.x, b.h), k + 1, &scan)? {
        Some((_, s)) if s >= floor => b.x + big_h / s,
        _ => f64::INFINITY,
    };
    Ok(LinkSample {
        x: b.x,
        h: b.h,
        blind,
        rescued: first_node <= reach,
    })
}

/// Connectivity through a transmissive surface against simulated skylines and
/// aerial nodes.
///
/// The first report z-tests the rescue indicator against `τ_H(x, h)` over
/// blind replications with the blocker in a bin around `(1/λ, 1/μ)`. The
/// second estimates the unconditional probability by averaging the rescue
/// rate over [`TAU_STRATA`] equal-probability strata of `H⁺`, which weights
/// blockers by their law rather than by their chance of leaving the user
/// blind, and z-tests it against the closed form.
pub fn validate_tau(scenario: &CoverageScenario, n: usize, seed: u64) -> Result<Vec<ValidationReport>> {
    let params = &scenario.env;
    let bin = Bin::around(1.0 / params.lambda(), 1.0 / params.mu(), n)?;
    let cfg = ground_config(params)?;
    let links = replicate(n, |rep| link_sample(scenario, &cfg, seed, rep))?;
    let blind: Vec<&LinkSample> = links.iter().filter(|s| s.blind).collect();

    let in_bin: Vec<&&LinkSample> = blind.iter().filter(|s| bin.contains(s.x, s.h)).collect();
    if in_bin.len() < 2 {
        return Err(Error::SampleSize {
            n: in_bin.len(),
            min: 2,
        });
    }
    let (mut excess, mut var, mut hits, mut expected) = (0.0, 0.0, 0.0, 0.0);
    for s in &in_bin {
        let tau = tau_conditional(scenario, s.x, s.h)?;
        let r = if s.rescued { 1.0 } else { 0.0 };
        excess += r - tau;
        var += tau * (1.0 - tau);
        hits += r;
        expected += tau;
    }
    let m = in_bin.len() as f64;
    let z = excess / var.sqrt();
    let conditional = ValidationReport::new(
        "tau|bin".into(),
        TestKind::ZTest,
        TestOutcome {
            statistic: z,
            p_value: z_test_p_value(z),
        },
        THREE_SIGMA_ALPHA,
        seed,
    )
    .sizes(in_bin.len(), n)
    .estimate(hits / m, var.sqrt() / m, expected / m)
    .in_bin(bin);

    let joint = BlockingJointDensity::new(*params);
    let edges = (1..TAU_STRATA)
        .map(|j| joint.quantile_h(j as f64 / TAU_STRATA as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![(0u64, 0u64); TAU_STRATA];
    for s in &blind {
        let c = &mut counts[edges.partition_point(|&e| e < s.h)];
        c.0 += 1;
        c.1 += u64::from(s.rescued);
    }
    let (mut estimate, mut variance) = (0.0, 0.0);
    for &(total, rescued) in &counts {
        if total < 2 {
            return Err(Error::SampleSize {
                n: total as usize,
                min: 2,
            });
        }
        let p = rescued as f64 / total as f64;
        estimate += p;
        variance += p * (1.0 - p) / total as f64;
    }
    let k = TAU_STRATA as f64;
    estimate /= k;
    let se = variance.sqrt() / k;
    let reference = tau_unconditional(scenario)?;
    let z = (estimate - reference) / se;
    let unconditional = ValidationReport::new(
        "tau".into(),
        TestKind::ZTest,
        TestOutcome {
            statistic: z,
            p_value: z_test_p_value(z),
        },
        THREE_SIGMA_ALPHA,
        seed,
    )
    .sizes(blind.len(), n)
    .estimate(estimate, se, reference);
    Ok(vec![conditional, unconditional])
}

/// Settings of [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Replications per check.
    pub n: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n: 100_000,
            seed: 7,
            alpha: DEFAULT_ALPHA,
        }
    }
}

/// Runs every check on its reference setting.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<ValidationReport>> {
    let sparse = EnvParams::new(0.1, 2.0)?;
    let unit = EnvParams::new(1.0, 1.0)?;
    let (n, seed) = (cfg.n, cfg.seed);
    let mut out = Vec::new();
    for variant in [AngleVariant::MM, AngleVariant::MD, AngleVariant::DM] {
        out.push(validate_angle(&sparse, variant, n, seed, cfg.alpha)?);
    }
    for k in [0.5, 2.0] {
        let p = EnvParams::with_shape(0.1, 2.0, k)?;
        let mut r = validate_angle(&p, AngleVariant::Weibull, n, seed, cfg.alpha)?;
        r.target = format!("theta[weibull(k={k})]");
        out.push(r);
    }
    for h in [1.0, 2.0] {
        out.push(validate_angle(&unit, AngleVariant::Elevated { h }, n, seed, cfg.alpha)?);
    }
    out.extend(validate_joint(&unit, n, seed)?);
    out.push(validate_index(&unit, 2.0, 2.0, n, seed)?);
    out.extend(validate_ris(&unit, &RisCondition::transmissive(1.0, 1.0)?, n, seed)?);
    out.extend(validate_ris(&unit, &RisCondition::reflective(-1.0, 1.0)?, n, seed)?);
    let scenario = CoverageScenario::new(EnvParams::new(0.6, 1.0)?, 1.0, 0.5)?;
    out.extend(validate_tau(&scenario, n, seed)?);
    Ok(out)
}

/// Writes one JSON object per report and line.
pub fn write_json_lines<W: Write>(reports: &[ValidationReport], mut writer: W) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Fixed-width summary, one line per report.
pub fn summary_table(reports: &[ValidationReport]) -> String {
    let mut s = format!(
        "{:<34} {:>5} {:>9} {:>12} {:>10} {:>6}  {}\n",
        "target", "test", "n", "statistic", "p", "result", "estimate"
    );
    for r in reports {
        let estimate = match (r.mc_estimate, r.stderr, r.reference) {
            (Some(m), Some(se), Some(rf)) => format!("{m:.6} ± {se:.2e} (ref {rf:.6})"),
            _ => String::new(),
        };
        let _ = writeln!(
            s,
            "{:<34} {:>5} {:>9} {:>12.6} {:>10.4} {:>6}  {}",
            r.target,
            r.test,
            r.n,
            r.statistic,
            r.p_value,
            if r.pass { "PASS" } else { "FAIL" },
            estimate
        );
    }
    s
}
