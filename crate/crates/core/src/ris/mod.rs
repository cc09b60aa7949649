//! Blockage seen from a reconfigurable surface mounted on a blocking building,
//! and the angular gains it buys the ground user.
//!
//! A transmissive surface sits on the right blocker `(X⁺, H⁺)` and looks
//! further right over the buildings behind it. A reflective surface sits on
//! the left blocker `(X⁻, H⁻)` of an independent left half-line and looks
//! right, over the user, at the right skyline.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{AngleDistribution, AngleVariant};
use crate::error::{Error, Result};
use crate::numerics::{try_integrate, upper_incomplete_gamma, QuadratureSpec};
use crate::params::{EnvParams, ModelKind};
use crate::process::{replicate, replication_rng, Lane, Observer, SamplingConfig, Skyline};

/// Quantile defining the deconditioning box.
pub const BOX_QUANTILE: f64 = 1.0 - 1e-8;
/// Below this many replications a Monte-Carlo gain estimate is flagged.
pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RisMode {
    Transmissive,
    Reflective,
}

impl std::str::FromStr for RisMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "trans" | "transmissive" | "t" => Ok(RisMode::Transmissive),
            "refl" | "reflective" | "r" => Ok(RisMode::Reflective),
            other => Err(format!("unknown surface mode `{other}` (expected trans or refl)")),
        }
    }
}

impl std::fmt::Display for RisMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RisMode::Transmissive => "trans",
            RisMode::Reflective => "refl",
        })
    }
}

/// Location `(x, h)` of the building carrying the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisCondition {
    pub mode: RisMode,
    pub x: f64,
    pub h: f64,
}

impl RisCondition {
    /// `x ≥ 0`; `x = 0` is the degenerate limit of an observer at height `h`.
    pub fn transmissive(x: f64, h: f64) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "x",
                value: x,
                reason: "transmissive surface needs x >= 0",
            });
        }
        Self::checked(RisMode::Transmissive, x, h)
    }

    /// `x ≤ 0`.
    pub fn reflective(x: f64, h: f64) -> Result<Self> {
        if !(x <= 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "x",
                value: x,
                reason: "reflective surface needs x <= 0",
            });
        }
        Self::checked(RisMode::Reflective, x, h)
    }

    pub fn new(mode: RisMode, x: f64, h: f64) -> Result<Self> {
        match mode {
            RisMode::Transmissive => Self::transmissive(x, h),
            RisMode::Reflective => Self::reflective(x, h),
        }
    }

    fn checked(mode: RisMode, x: f64, h: f64) -> Result<Self> {
        crate::params::check_positive("h", h)?;
        Ok(Self { mode, x, h })
    }

    pub fn variant(&self) -> AngleVariant {
        match self.mode {
            RisMode::Transmissive => AngleVariant::Transmissive { x: self.x, h: self.h },
            RisMode::Reflective => AngleVariant::Reflective { x: self.x, h: self.h },
        }
    }

    fn expect(&self, mode: RisMode, function: &'static str) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::domain(function, self.x, "surface mode does not match"))
        }
    }
}

fn check_tangent(function: &'static str, t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(function, t, "tangent must be non-negative"))
    }
}

/// `α = ρ e^{-μh}`.
fn alpha(p: &EnvParams, h: f64) -> f64 {
    p.rho() * (-p.mu() * h).exp()
}

/// `P[tan Θᵀ ≤ t | (X⁺, H⁺) = (x, h)]`.
pub fn trans_cdf_tan(params: &EnvParams, cond: &RisCondition, t: f64) -> Result<f64> {
    cond.expect(RisMode::Transmissive, "trans_cdf_tan")?;
    check_tangent("trans_cdf_tan", t)?;
    let (x, h) = (cond.x, cond.h);
    if t == 0.0 {
        return Ok(0.0);
    }
    if x * t >= h {
        return Ok(1.0);
    }
    Ok((-alpha(params, h) * (1.0 / t - x / h)).exp())
}

pub fn trans_pdf_tan(params: &EnvParams, cond: &RisCondition, t: f64) -> Result<f64> {
    cond.expect(RisMode::Transmissive, "trans_pdf_tan")?;
    check_tangent("trans_pdf_tan", t)?;
    let (x, h) = (cond.x, cond.h);
    if t == 0.0 || x * t > h {
        return Ok(0.0);
    }
    let a = alpha(params, h);
    Ok(a / (t * t) * (-a * (1.0 / t - x / h)).exp())
}

/// `E[(tan Θᵀ)^k | (x, h)] = e^{z} α^k Γ(1 - k, z)` with `z = αx/h`.
///
/// Infinite for `k ≥ 1` when `x = 0`.
pub fn trans_moment(params: &EnvParams, cond: &RisCondition, k: u32) -> Result<f64> {
    cond.expect(RisMode::Transmissive, "trans_moment")?;
    if k == 0 {
        return Ok(1.0);
    }
    if cond.x == 0.0 {
        return Ok(f64::INFINITY);
    }
    let a = alpha(params, cond.h);
    let z = a * cond.x / cond.h;
    let s = 1.0 - k as f64;
    Ok(z.exp() * a.powi(k as i32) * upper_incomplete_gamma(s, z)?)
}

/// Draws `tan Θᵀ` given `(x, h)` by inversion.
pub fn sample_trans_tan<R: Rng + ?Sized>(params: &EnvParams, cond: &RisCondition, rng: &mut R) -> Result<f64> {
    cond.expect(RisMode::Transmissive, "sample_trans_tan")?;
    let a = alpha(params, cond.h);
    let u: f64 = 1.0 - rng.random::<f64>();
    Ok(1.0 / (cond.x / cond.h - u.ln() / a))
}

pub fn trans_angle_distribution(params: &EnvParams, cond: &RisCondition) -> Result<AngleDistribution> {
    cond.expect(RisMode::Transmissive, "trans_angle_distribution")?;
    AngleDistribution::new(*params, cond.variant())
}

/// `P[tan Θᴿ ≤ t | (X⁻, H⁻) = (x, h)]`.
pub fn refl_cdf_tan(params: &EnvParams, cond: &RisCondition, t: f64) -> Result<f64> {
    cond.expect(RisMode::Reflective, "refl_cdf_tan")?;
    check_tangent("refl_cdf_tan", t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(1.0);
    }
    Ok((-refl_exponent(params, cond, t)).exp())
}

fn refl_exponent(params: &EnvParams, cond: &RisCondition, t: f64) -> f64 {
    alpha(params, cond.h) / t * (params.mu() * t * cond.x).exp()
}

pub fn refl_pdf_tan(params: &EnvParams, cond: &RisCondition, t: f64) -> Result<f64> {
    cond.expect(RisMode::Reflective, "refl_pdf_tan")?;
    check_tangent("refl_pdf_tan", t)?;
    if t == 0.0 || t.is_infinite() {
        return Ok(0.0);
    }
    let g = refl_exponent(params, cond, t);
    Ok((-g).exp() * g * (1.0 / t - params.mu() * cond.x))
}

pub fn refl_angle_distribution(params: &EnvParams, cond: &RisCondition) -> Result<AngleDistribution> {
    cond.expect(RisMode::Reflective, "refl_angle_distribution")?;
    AngleDistribution::new(*params, cond.variant())
}

/// Tangent below which the conditional law puts mass `p`.
pub fn cdf_floor_tan(params: &EnvParams, cond: &RisCondition, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("cdf_floor_tan", p, "probability must lie in (0, 1)"));
    }
    let a = alpha(params, cond.h);
    let target = -p.ln();
    match cond.mode {
        RisMode::Transmissive => Ok(1.0 / (cond.x / cond.h + target / a)),
        RisMode::Reflective => {
            // the exponent (α/t)e^{μtx} decreases in t
            let (mut lo, mut hi) = (0.0, a / target);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if refl_exponent(params, cond, mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * hi {
                    break;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

/// `E[Θ^mode_{x,h}]`.
pub fn conditional_mean(params: &EnvParams, cond: &RisCondition) -> Result<f64> {
    AngleDistribution::new(*params, cond.variant())?.mean()
}

/// `P[tan Θ^mode ≤ t | H = h]` with the blocker offset integrated out:
/// given `H = h`, `|X| / h ~ Exp(ρ)`.
pub fn height_conditional_cdf_tan(params: &EnvParams, mode: RisMode, h: f64, t: f64) -> Result<f64> {
    check_tangent("height_conditional_cdf_tan", t)?;
    crate::params::check_positive("h", h)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(1.0);
    }
    let rho = params.rho();
    let a = alpha(params, h);
    match mode {
        RisMode::Transmissive => {
            // offsets beyond h/t force the cap; below it the cdf is exp(-α(1/t - r))
            let d = rho - a;
            let base = (-rho / t).exp();
            let z = d / t;
            if z < 1.0 {
                let ratio = if d == 0.0 { 1.0 / t } else { (z).exp_m1() / d };
                Ok(base * (1.0 + rho * ratio))
            } else {
                Ok(base + rho / d * ((-a / t).exp() - base))
            }
        }
        RisMode::Reflective => {
            // E[exp(-c v)] with v = e^{-μthR}, which is Beta(β, 1)
            let beta = rho / (params.mu() * t * h);
            let c = a / t;
            Ok(beta_exponential_mean(beta, c)?)
        }
    }
}

/// `β ∫₀¹ v^{β-1} e^{-cv} dv`.
fn beta_exponential_mean(beta: f64, c: f64) -> Result<f64> {
    if c < beta + 1.0 {
        // e^{-c} Σ cⁿ / ((β+1)(β+2)…(β+n))
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..10_000 {
            term *= c / (beta + n as f64);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        Ok((-c).exp() * sum)
    } else {
        let lower = 1.0 - crate::numerics::regularized_upper_gamma(beta, c)?;
        let log_scale = crate::numerics::ln_gamma(beta + 1.0)? - beta * c.ln();
        Ok(log_scale.exp() * lower)
    }
}

/// `E[Θ^mode]`: the surface angle averaged over the law of the blocker.
///
/// Integrates `1 - P[Θ ≤ φ | H = h]` over angles, then over
/// `H ~ Gamma(2, μ)` truncated at its [`BOX_QUANTILE`] quantile.
pub fn deconditioned_mean(params: &EnvParams, mode: RisMode) -> Result<f64> {
    let joint = crate::analytic::BlockingJointDensity::new(*params);
    let h_top = joint.quantile_h(BOX_QUANTILE)?;
    let spec = QuadratureSpec::with_tolerances(1e-9, 1e-13);
    let outer = |h: f64| {
        if h == 0.0 {
            return Ok(0.0);
        }
        let cdf = |phi: f64| height_conditional_cdf_tan(params, mode, h, phi.tan());
        let m = crate::analytic::mean_from_cdf(cdf, 0.0, FRAC_PI_2)?;
        Ok(joint.marginal_h(h)? * m)
    };
    Ok(try_integrate(outer, 0.0, h_top, &spec)?.value)
}

/// [`deconditioned_mean`] computed the long way: conditional means
/// `E[Θ^mode_{x,h}]` integrated against the joint law of `(X, H)` on the
/// [`BOX_QUANTILE`] box. Much slower; kept as a cross-check.
pub fn deconditioned_mean_nested(params: &EnvParams, mode: RisMode) -> Result<f64> {
    let joint = crate::analytic::BlockingJointDensity::new(*params);
    let h_top = joint.quantile_h(BOX_QUANTILE)?;
    let rho = params.rho();
    let ratio_top = -(1.0 - BOX_QUANTILE).ln() / rho;
    let spec = QuadratureSpec::with_tolerances(1e-8, 1e-12);
    let outer = |h: f64| {
        if h == 0.0 {
            return Ok(0.0);
        }
        let inner = |r: f64| {
            let x = h * r;
            let cond = match mode {
                RisMode::Transmissive => RisCondition::transmissive(x, h)?,
                RisMode::Reflective => RisCondition::reflective(-x, h)?,
            };
            Ok(rho * (-rho * r).exp() * conditional_mean(params, &cond)?)
        };
        let m = try_integrate(inner, 0.0, ratio_top, &spec)?.value;
        Ok(joint.marginal_h(h)? * m)
    };
    Ok(try_integrate(outer, 0.0, h_top, &spec)?.value)
}

/// How a gain is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainMethod {
    /// Nested quadrature; yields `γ₁` only.
    Quadrature,
    /// Same-skyline Monte Carlo with `n` replications.
    MonteCarlo { n: usize, seed: u64 },
}

/// `γ₁ = E[Ψ]/E[ψ]` and `γ₂ = E[Ψ/ψ]`, where `ψ = π/2 - θ` is the user's
/// visibility angle and `Ψ = π/2 - Θ` the surface's.
///
/// `ψ` has positive density at 0, so `E[1/ψ]` and with it `γ₂` diverge
/// logarithmically. The Monte-Carlo `γ₂` is therefore a finite-sample
/// statistic that creeps up with `n`, and its standard error is only
/// indicative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularGains {
    pub mode: RisMode,
    pub gamma1: f64,
    pub gamma2: Option<f64>,
    pub gamma1_stderr: Option<f64>,
    pub gamma2_stderr: Option<f64>,
    pub samples: usize,
    /// Set when a Monte-Carlo estimate rests on fewer than
    /// [`MIN_MC_SAMPLES`] replications.
    pub low_sample_warning: bool,
}

pub fn angular_gains(params: &EnvParams, mode: RisMode, method: GainMethod) -> Result<AngularGains> {
    match method {
        GainMethod::Quadrature => {
            let plain = crate::analytic::mean_psi(params, AngleVariant::MM)?;
            let ris = FRAC_PI_2 - deconditioned_mean(params, mode)?;
            Ok(AngularGains {
                mode,
                gamma1: ris / plain,
                gamma2: None,
                gamma1_stderr: None,
                gamma2_stderr: None,
                samples: 0,
                low_sample_warning: false,
            })
        }
        GainMethod::MonteCarlo { n, seed } => {
            if n < 2 {
                return Err(Error::SampleSize { n, min: 2 });
            }
            let samples = sample_angle_pairs(params, mode, n, seed)?;
            Ok(gains_from_pairs(mode, &samples))
        }
    }
}

/// Truncation used by the same-skyline simulations: the ground angle falls
/// below `t_min` with probability under `1e-7`.
pub fn mc_sampling_config(params: &EnvParams) -> SamplingConfig {
    let t_min = crate::process::default_t_min().min(params.rho() / 16.2);
    SamplingConfig {
        t_min,
        ..SamplingConfig::default()
    }
}

/// Blockage angles from one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    /// User's blockage angle `θ`.
    pub theta: f64,
    /// Surface's blockage angle `Θ`.
    pub theta_ris: f64,
    /// Position of the building carrying the surface (`x < 0` when reflective).
    pub x: f64,
    pub h: f64,
    /// 1-based index of the right blocker.
    pub index_k: usize,
}

/// One replication: the user's angle and the surface's angle on the same
/// right skyline. Reflective replications also draw an independent left
/// skyline.
pub fn simulate_pair(
    params: &EnvParams,
    mode: RisMode,
    cfg: &SamplingConfig,
    seed: u64,
    replication: u64,
) -> Result<AnglePair> {
    let mut right = Skyline::new(*params, ModelKind::MM, replication_rng(seed, replication, Lane::Primary));
    let (k, s) = right
        .steepest_from(Observer::ORIGIN, 0, cfg)?
        .expect("a ground observer always sees the first rooftop");
    let blocker = right.get(k);
    match mode {
        RisMode::Transmissive => {
            let ris = right.steepest_from(Observer::new(blocker.x, blocker.h), k + 1, cfg)?;
            Ok(AnglePair {
                theta: s.atan(),
                theta_ris: ris.map_or(0.0, |(_, t)| t.atan()),
                x: blocker.x,
                h: blocker.h,
                index_k: k + 1,
            })
        }
        RisMode::Reflective => {
            let mut left =
                Skyline::new(*params, ModelKind::MM, replication_rng(seed, replication, Lane::Mirror));
            let (j, _) = left
                .steepest_from(Observer::ORIGIN, 0, cfg)?
                .expect("a ground observer always sees the first rooftop");
            let mounted = left.get(j);
            let ris = right.steepest_from(Observer::new(-mounted.x, mounted.h), 0, cfg)?;
            Ok(AnglePair {
                theta: s.atan(),
                theta_ris: ris.map_or(0.0, |(_, t)| t.atan()),
                x: -mounted.x,
                h: mounted.h,
                index_k: k + 1,
            })
        }
    }
}

pub fn sample_angle_pairs(params: &EnvParams, mode: RisMode, n: usize, seed: u64) -> Result<Vec<AnglePair>> {
    let cfg = mc_sampling_config(params);
    replicate(n, |rep| simulate_pair(params, mode, &cfg, seed, rep))
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Gains from same-skyline angle pairs. The standard error of `γ₁` uses the
/// delta method for a ratio of means.
pub fn gains_from_pairs(mode: RisMode, pairs: &[AnglePair]) -> AngularGains {
    let n = pairs.len() as f64;
    let psi = pairs.iter().map(|p| FRAC_PI_2 - p.theta);
    let big_psi = pairs.iter().map(|p| FRAC_PI_2 - p.theta_ris);
    let (m_psi, _) = mean_and_stderr(psi.clone());
    let (m_big, _) = mean_and_stderr(big_psi.clone());
    let gamma1 = m_big / m_psi;
    // linearized ratio residuals
    let resid = psi.zip(big_psi).map(|(a, b)| (b - gamma1 * a) / m_psi);
    let var1 = resid.map(|r| r * r).sum::<f64>() / (n - 1.0);
    let ratios = pairs.iter().map(|p| (FRAC_PI_2 - p.theta_ris) / (FRAC_PI_2 - p.theta));
    let (gamma2, se2) = mean_and_stderr(ratios);
    AngularGains {
        mode,
        gamma1,
        gamma2: Some(gamma2),
        gamma1_stderr: Some((var1 / n).sqrt()),
        gamma2_stderr: Some(se2),
        samples: pairs.len(),
        low_sample_warning: pairs.len() < MIN_MC_SAMPLES,
    }
}

/// One row of a gain curve. Gains depend on `(λ, μ)` only through `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub rho: f64,
    pub gamma1_t: f64,
    pub gamma1_r: f64,
    pub gamma2_t: f64,
    pub gamma2_r: f64,
    /// Largest standard error among the Monte-Carlo columns.
    pub mc_stderr: f64,
}

/// `γ₁` by quadrature and `γ₂` by Monte Carlo for each `ρ` (with `μ = 1`).
pub fn gain_curve(rhos: &[f64], n: usize, seed: u64) -> Result<Vec<GainRow>> {
    rhos.iter()
        .map(|&rho| {
            let p = EnvParams::new(rho, 1.0)?;
            let q_t = angular_gains(&p, RisMode::Transmissive, GainMethod::Quadrature)?;
            let q_r = angular_gains(&p, RisMode::Reflective, GainMethod::Quadrature)?;
            let mc_t = angular_gains(&p, RisMode::Transmissive, GainMethod::MonteCarlo { n, seed })?;
            let mc_r = angular_gains(&p, RisMode::Reflective, GainMethod::MonteCarlo { n, seed })?;
            Ok(GainRow {
                rho,
                gamma1_t: q_t.gamma1,
                gamma1_r: q_r.gamma1,
                gamma2_t: mc_t.gamma2.unwrap_or(f64::NAN),
                gamma2_r: mc_r.gamma2.unwrap_or(f64::NAN),
                mc_stderr: mc_t.gamma2_stderr.unwrap_or(0.0).max(mc_r.gamma2_stderr.unwrap_or(0.0)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
