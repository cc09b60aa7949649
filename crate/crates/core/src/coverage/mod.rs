//! Visible sky segments at the altitude of an aerial tier, and the chance
//! that a surface on the blocking building restores a link.
//!
//! The user's direct view at altitude `H` above the blocker's roof covers the
//! segment `l`; the transmissive surface on the blocker covers `L ⊇ l`.
//! Aerial nodes form a Poisson process of intensity `ν` at that altitude.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::{mean_theta, AngleVariant, BlockingJointDensity};
use crate::error::Result;
use crate::numerics::dilog;
use crate::params::{check_positive, EnvParams};
use crate::ris::{deconditioned_mean, RisMode};

/// City parameters plus an aerial tier at altitude offset `altitude` with
/// node intensity `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageScenario {
    pub env: EnvParams,
    altitude: f64,
    nu: f64,
}

impl CoverageScenario {
    pub fn new(env: EnvParams, altitude: f64, nu: f64) -> Result<Self> {
        check_positive("H", altitude)?;
        check_positive("nu", nu)?;
        Ok(Self { env, altitude, nu })
    }

    /// `H`.
    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Mean number of aerial nodes per unit of altitude offset, `Hν`.
    pub fn h_nu(&self) -> f64 {
        self.altitude * self.nu
    }
}

/// An expected length that may diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExpectedLength {
    Finite(f64),
    Infinite,
}

impl ExpectedLength {
    pub fn value(&self) -> Option<f64> {
        match self {
            ExpectedLength::Finite(v) => Some(*v),
            ExpectedLength::Infinite => None,
        }
    }
}

impl fmt::Display for ExpectedLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectedLength::Finite(v) => write!(f, "{v}"),
            ExpectedLength::Infinite => f.write_str("∞"),
        }
    }
}

fn check_blocker(x: f64, h: f64) -> Result<()> {
    check_positive("x", x)?;
    check_positive("h", h)
}

/// `|l| = x + Hx/h`: the user's direct view at altitude `H` above a blocker
/// at `(x, h)`.
pub fn visible_length(x: f64, h: f64, altitude: f64) -> Result<f64> {
    check_blocker(x, h)?;
    check_positive("H", altitude)?;
    Ok(x + altitude * x / h)
}

/// `E[|L|] = x + H(x/h + e^{μh}/ρ)`: the expected reach through a
/// transmissive surface on the blocker at `(x, h)`.
pub fn expected_ris_length(params: &EnvParams, x: f64, h: f64, altitude: f64) -> Result<f64> {
    Ok(visible_length(x, h, altitude)? + ris_extension(params, h, altitude)?)
}

/// `E[|L| - |l|] = e^{μh} H / ρ`.
pub fn ris_extension(params: &EnvParams, h: f64, altitude: f64) -> Result<f64> {
    check_positive("h", h)?;
    check_positive("H", altitude)?;
    Ok((params.mu() * h).exp() * altitude / params.rho())
}

/// `E[|l|] = (2 + Hμ)/λ` over the law of the blocker.
pub fn mean_l(scenario: &CoverageScenario) -> f64 {
    let p = &scenario.env;
    (2.0 + scenario.altitude * p.mu()) / p.lambda()
}

/// `E[|L|]` over the law of the blocker: `E[e^{μH⁺}]` diverges for
/// `H⁺ ~ Gamma(2, μ)`.
pub fn mean_big_l(_scenario: &CoverageScenario) -> ExpectedLength {
    ExpectedLength::Infinite
}

/// Probability that the surface sees an aerial node given the user sees none,
/// for a blocker at `(x, h)`: `1 - ρ/(e^{μh}Hν + ρ)`. Independent of `x`.
pub fn tau_conditional(scenario: &CoverageScenario, x: f64, h: f64) -> Result<f64> {
    check_blocker(x, h)?;
    Ok(tau_given_height(scenario, h))
}

fn tau_given_height(scenario: &CoverageScenario, h: f64) -> f64 {
    let p = &scenario.env;
    // 1 / (1 + ρ e^{-μh} / (Hν))
    1.0 / (1.0 + p.rho() * (-p.mu() * h).exp() / scenario.h_nu())
}

/// `τ_H` averaged over the blocker: `-Li₂(-a)/a` with `a = ρ/(Hν)`.
pub fn tau_unconditional(scenario: &CoverageScenario) -> Result<f64> {
    let a = scenario.env.rho() / scenario.h_nu();
    if a < 1e-8 {
        // -Li₂(-a)/a = 1 - a/4 + a²/9 - …
        return Ok(1.0 - a / 4.0 + a * a / 9.0);
    }
    Ok(-dilog(-a)? / a)
}

/// The same average written with `Li₂(Hν/(Hν+ρ))` and logarithms. Loses
/// accuracy when `Hν ≫ ρ`; kept for cross-checking.
pub fn tau_unconditional_log_form(scenario: &CoverageScenario) -> Result<f64> {
    let rho = scenario.env.rho();
    let hn = scenario.h_nu();
    let r = rho / hn;
    let l1 = r.ln_1p();
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok(hn / (6.0 * rho) * (pi2 + 6.0 * r.ln() * l1 - 3.0 * l1 * l1 - 6.0 * dilog(hn / (hn + rho))?))
}

/// `E[τ_H(X⁺, H⁺)]` by quadrature over the height marginal.
pub fn tau_unconditional_quadrature(scenario: &CoverageScenario) -> Result<f64> {
    let joint = BlockingJointDensity::new(scenario.env);
    let spec = crate::numerics::QuadratureSpec::with_tolerances(1e-12, 1e-15);
    let f = |h: f64| Ok(joint.marginal_h(h)? * tau_given_height(scenario, h));
    Ok(crate::numerics::try_integrate(f, 0.0, f64::INFINITY, &spec)?.value)
}

/// Aerial tier used in the case study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AerialTier {
    pub altitude: f64,
    pub nu: f64,
}

/// High-altitude platforms: 10 km, one per 20 km.
pub const HAP: AerialTier = AerialTier {
    altitude: 1e4,
    nu: 5e-5,
};

/// Satellites: 500 km.
pub const SATELLITE: AerialTier = AerialTier {
    altitude: 5e5,
    nu: 2.3163e-6,
};

/// The three case-study cities `(name, λ, μ)`.
pub const CASE_STUDY: [(&str, f64, f64); 3] = [
    ("dense_urban", 0.012, 0.02),
    ("urban", 0.007, 0.02),
    ("suburban", 0.001, 0.02),
];

/// One column of the case-study table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case: String,
    pub lambda: f64,
    pub mu: f64,
    pub e_theta: f64,
    pub e_theta_t: f64,
    pub e_theta_r: f64,
    pub e_l_hap: f64,
    pub e_l_sat: f64,
    pub tau_hap: f64,
    pub tau_sat: f64,
}

pub fn case_summary(name: &str, env: EnvParams, hap: AerialTier, sat: AerialTier) -> Result<CaseSummary> {
    let hap_s = CoverageScenario::new(env, hap.altitude, hap.nu)?;
    let sat_s = CoverageScenario::new(env, sat.altitude, sat.nu)?;
    Ok(CaseSummary {
        case: name.to_string(),
        lambda: env.lambda(),
        mu: env.mu(),
        e_theta: mean_theta(&env, AngleVariant::MM)?,
        e_theta_t: deconditioned_mean(&env, RisMode::Transmissive)?,
        e_theta_r: deconditioned_mean(&env, RisMode::Reflective)?,
        e_l_hap: mean_l(&hap_s),
        e_l_sat: mean_l(&sat_s),
        tau_hap: tau_unconditional(&hap_s)?,
        tau_sat: tau_unconditional(&sat_s)?,
    })
}

/// The case-study table for the three reference cities.
pub fn case_study() -> Result<Vec<CaseSummary>> {
    CASE_STUDY
        .iter()
        .map(|&(name, l, m)| case_summary(name, EnvParams::new(l, m)?, HAP, SATELLITE))
        .collect()
}

#[cfg(test)]
mod tests;
