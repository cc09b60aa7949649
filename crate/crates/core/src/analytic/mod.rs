//! Closed-form laws of the blockage angle `θ`, the visibility angle
//! `ψ = π/2 - θ`, and the blocking building `(X⁺, H⁺)`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bessel_k, bessel_k1, gamma_fn, ln_gamma, try_integrate, QuadratureSpec};
use crate::params::{EnvParams, ModelKind};
use crate::ris::{self, RisCondition};

/// Default log-tail tolerance for the grid-model product.
pub const DEFAULT_DM_TOL: f64 = 1e-10;
/// Hard cap on the number of product factors.
pub const DM_MAX_FACTORS: usize = 1_000_000;

/// Which blockage angle a distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleVariant {
    /// Poisson locations, exponential heights, ground observer.
    MM,
    /// Poisson locations, constant heights.
    MD,
    /// Grid locations, exponential heights.
    DM,
    /// Poisson locations, Weibull heights.
    Weibull,
    /// M/M with the observer raised to height `h`.
    Elevated { h: f64 },
    /// Seen from a transmissive surface on the blocker at `(x, h)`, `x ≥ 0`.
    Transmissive { x: f64, h: f64 },
    /// Seen from a reflective surface on the left blocker at `(x, h)`, `x ≤ 0`.
    Reflective { x: f64, h: f64 },
}

impl From<ModelKind> for AngleVariant {
    fn from(model: ModelKind) -> Self {
        match model {
            ModelKind::MM => AngleVariant::MM,
            ModelKind::MD => AngleVariant::MD,
            ModelKind::DM => AngleVariant::DM,
            ModelKind::Weibull => AngleVariant::Weibull,
        }
    }
}

impl std::fmt::Display for AngleVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AngleVariant::MM => f.write_str("mm"),
            AngleVariant::MD => f.write_str("md"),
            AngleVariant::DM => f.write_str("dm"),
            AngleVariant::Weibull => f.write_str("weibull"),
            AngleVariant::Elevated { h } => write!(f, "elevated(h={h})"),
            AngleVariant::Transmissive { x, h } => write!(f, "trans(x={x},h={h})"),
            AngleVariant::Reflective { x, h } => write!(f, "refl(x={x},h={h})"),
        }
    }
}

/// Law of a blockage angle on `[lo, hi]` (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleDistribution {
    pub variant: AngleVariant,
    pub params: EnvParams,
    support: (f64, f64),
    dm_tol: f64,
}

impl AngleDistribution {
    pub fn new(params: EnvParams, variant: AngleVariant) -> Result<Self> {
        let hi = match variant {
            AngleVariant::Elevated { h } => {
                check_height(h)?;
                FRAC_PI_2
            }
            AngleVariant::Transmissive { x, h } => {
                RisCondition::transmissive(x, h)?;
                if x == 0.0 {
                    FRAC_PI_2
                } else {
                    (h / x).atan()
                }
            }
            AngleVariant::Reflective { x, h } => {
                RisCondition::reflective(x, h)?;
                FRAC_PI_2
            }
            _ => FRAC_PI_2,
        };
        Ok(Self {
            variant,
            params,
            support: (0.0, hi),
            dm_tol: DEFAULT_DM_TOL,
        })
    }

    /// Overrides the grid-model product tolerance.
    pub fn with_dm_tolerance(mut self, tol: f64) -> Result<Self> {
        crate::params::check_positive("tol", tol)?;
        self.dm_tol = tol;
        Ok(self)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// `P[tan θ ≤ t]`.
    pub fn cdf_tan(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::domain("cdf_tan", t, "tangent must be non-negative"));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let p = &self.params;
        match self.variant {
            AngleVariant::MM | AngleVariant::MD | AngleVariant::Weibull => {
                Ok((-frechet_scale(p, self.variant)? / t).exp())
            }
            AngleVariant::DM => dm_cdf_tan_theta(p, t, self.dm_tol),
            AngleVariant::Elevated { h } => Ok((-elevated_scale(p, h) / t).exp()),
            AngleVariant::Transmissive { x, h } => {
                ris::trans_cdf_tan(p, &RisCondition::transmissive(x, h)?, t)
            }
            AngleVariant::Reflective { x, h } => {
                ris::refl_cdf_tan(p, &RisCondition::reflective(x, h)?, t)
            }
        }
    }

    /// Density of `tan θ`.
    pub fn pdf_tan(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::domain("pdf_tan", t, "tangent must be non-negative"));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let p = &self.params;
        match self.variant {
            AngleVariant::MM | AngleVariant::MD | AngleVariant::Weibull => {
                Ok(frechet_pdf(frechet_scale(p, self.variant)?, t))
            }
            AngleVariant::DM => dm_pdf_tan_theta(p, t, self.dm_tol),
            AngleVariant::Elevated { h } => Ok(frechet_pdf(elevated_scale(p, h), t)),
            AngleVariant::Transmissive { x, h } => {
                ris::trans_pdf_tan(p, &RisCondition::transmissive(x, h)?, t)
            }
            AngleVariant::Reflective { x, h } => {
                ris::refl_pdf_tan(p, &RisCondition::reflective(x, h)?, t)
            }
        }
    }

    /// `P[θ ≤ φ]` for `φ ∈ [0, π/2)`.
    pub fn cdf(&self, phi: f64) -> Result<f64> {
        check_angle("cdf", phi)?;
        if phi >= self.support.1 {
            return Ok(1.0);
        }
        self.cdf_tan(phi.tan())
    }

    /// Density of `θ` for `φ ∈ [0, π/2)`.
    pub fn pdf(&self, phi: f64) -> Result<f64> {
        check_angle("pdf", phi)?;
        if phi == 0.0 || phi > self.support.1 {
            return Ok(0.0);
        }
        let c = phi.cos();
        Ok(self.pdf_tan(phi.tan())? / (c * c))
    }

    /// `P[ψ ≤ φ] = 1 - P[θ ≤ π/2 - φ]` for `φ ∈ (0, π/2]`.
    pub fn cdf_psi(&self, phi: f64) -> Result<f64> {
        if !(phi > 0.0 && phi <= FRAC_PI_2) {
            return Err(Error::domain("cdf_psi", phi, "angle must lie in (0, π/2]"));
        }
        Ok(1.0 - self.cdf(FRAC_PI_2 - phi)?)
    }

    pub fn pdf_psi(&self, phi: f64) -> Result<f64> {
        if !(phi > 0.0 && phi <= FRAC_PI_2) {
            return Err(Error::domain("pdf_psi", phi, "angle must lie in (0, π/2]"));
        }
        self.pdf(FRAC_PI_2 - phi)
    }

    /// `E[θ] = ∫ (1 - F(φ)) dφ` over the support.
    pub fn mean(&self) -> Result<f64> {
        mean_from_cdf(|phi| self.cdf(phi), self.support.0, self.support.1)
    }

    pub fn mean_psi(&self) -> Result<f64> {
        Ok(FRAC_PI_2 - self.mean()?)
    }

    /// `(φ, cdf, pdf)` on `n` evenly spaced angles from 0 to `min(hi, π/2 - 1e-6)`.
    pub fn table(&self, n: usize) -> Result<Vec<[f64; 3]>> {
        let top = self.support.1.min(FRAC_PI_2 - 1e-6);
        let step = top / (n.max(2) - 1) as f64;
        (0..n.max(2))
            .map(|i| {
                let phi = if i + 1 == n.max(2) { top } else { i as f64 * step };
                Ok([phi, self.cdf(phi)?, self.pdf(phi)?])
            })
            .collect()
    }
}

/// `∫ (1 - F(φ)) dφ` over `[lo, hi]` for a nondecreasing cdf `F`.
///
/// The integral is restricted to where `F` is in transition: below `a` it is
/// under `e^-40`, above `b` its complement is under `1e-17`.
pub(crate) fn mean_from_cdf<F>(cdf: F, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let a = last_angle_where(&cdf, |f| f < (-40.0f64).exp(), lo, hi)?;
    let b = last_angle_where(&cdf, |f| 1.0 - f > 1e-17, a, hi)?;
    let spec = QuadratureSpec::with_tolerances(1e-10, 1e-13);
    let tail = |phi: f64| Ok(1.0 - cdf(phi)?);
    Ok(a - lo + try_integrate(tail, a, b, &spec)?.value)
}

/// End of the initial stretch of `[lo, hi]` on which `keep(F)` holds.
fn last_angle_where<F, P>(cdf: &F, keep: P, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    P: Fn(f64) -> bool,
{
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if keep(cdf(mid)?) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn check_angle(function: &'static str, phi: f64) -> Result<()> {
    if (0.0..FRAC_PI_2).contains(&phi) {
        Ok(())
    } else {
        Err(Error::domain(function, phi, "angle must lie in [0, π/2)"))
    }
}

fn check_height(h: f64) -> Result<()> {
    if h >= 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("observer height", h, "must be non-negative"))
    }
}

/// Scale `s` in `P[tan θ ≤ t] = exp(-s/t)`.
fn frechet_scale(p: &EnvParams, variant: AngleVariant) -> Result<f64> {
    Ok(match variant {
        AngleVariant::Weibull => p.rho() * gamma_fn(1.0 + 1.0 / p.weibull_shape())?,
        _ => p.rho(),
    })
}

fn elevated_scale(p: &EnvParams, h: f64) -> f64 {
    p.rho() * (-p.mu() * h).exp()
}

fn frechet_pdf(scale: f64, t: f64) -> f64 {
    (-scale / t).exp() * scale / (t * t)
}

/// `P[tan θ ≤ t]` for the M/M, M/D and Weibull variants (the grid variant is
/// evaluated with [`DEFAULT_DM_TOL`]).
pub fn cdf_tan_theta(params: &EnvParams, model: ModelKind, t: f64) -> Result<f64> {
    AngleDistribution::new(*params, model.into())?.cdf_tan(t)
}

pub fn cdf_theta(params: &EnvParams, variant: AngleVariant, phi: f64) -> Result<f64> {
    AngleDistribution::new(*params, variant)?.cdf(phi)
}

pub fn pdf_theta(params: &EnvParams, variant: AngleVariant, phi: f64) -> Result<f64> {
    AngleDistribution::new(*params, variant)?.pdf(phi)
}

pub fn mean_theta(params: &EnvParams, variant: AngleVariant) -> Result<f64> {
    AngleDistribution::new(*params, variant)?.mean()
}

pub fn mean_psi(params: &EnvParams, variant: AngleVariant) -> Result<f64> {
    AngleDistribution::new(*params, variant)?.mean_psi()
}

/// `P[θ_{x,h} ≤ φ]` for an M/M observer at height `h`; independent of `x`.
pub fn cdf_theta_xh(params: &EnvParams, h: f64, phi: f64) -> Result<f64> {
    cdf_theta(params, AngleVariant::Elevated { h }, phi)
}

pub fn pdf_theta_xh(params: &EnvParams, h: f64, phi: f64) -> Result<f64> {
    pdf_theta(params, AngleVariant::Elevated { h }, phi)
}

pub fn cdf_tan_theta_xh(params: &EnvParams, h: f64, t: f64) -> Result<f64> {
    AngleDistribution::new(*params, AngleVariant::Elevated { h })?.cdf_tan(t)
}

/// Probability that a user at height `h` sees the sky at elevation `zeta`,
/// i.e. that the blockage angle stays below `zeta`.
pub fn los_probability(params: &EnvParams, h: f64, zeta: f64) -> Result<f64> {
    check_height(h)?;
    if !(zeta > 0.0 && zeta < FRAC_PI_2) {
        return Err(Error::domain("los_probability", zeta, "elevation must lie in (0, π/2)"));
    }
    Ok((-elevated_scale(params, h) / zeta.tan()).exp())
}

/// Log of the product over grid buildings for phase `u`, and the sum of the
/// logarithmic derivatives in `t`. `None` once the product underflows.
fn dm_log_product(params: &EnvParams, u: f64, t: f64, tol: f64) -> Result<Option<(f64, f64)>> {
    let (lambda, mu) = (params.lambda(), params.mu());
    let spacing = 1.0 / lambda;
    // ratio of successive factors' tails
    let q = (-mu * t * spacing).exp();
    let mut log_p = 0.0;
    let mut dlog = 0.0;
    for i in 0..DM_MAX_FACTORS {
        let a = u + i as f64 * spacing;
        let z = mu * a * t;
        let e = (-z).exp();
        // ln(1 - e^{-z})
        log_p += (-e).ln_1p();
        if z > 0.0 {
            dlog += mu * a * e / -(-z).exp_m1();
        } else {
            dlog += 1.0 / t;
        }
        if log_p < -745.0 {
            return Ok(None);
        }
        // Σ_{j>i} -ln(1 - e^{-z_j}) ≤ e_next / ((1 - q)(1 - e_next))
        let e_next = e * q;
        if e_next / ((1.0 - q) * (1.0 - e_next)) < tol {
            return Ok(Some((log_p, dlog)));
        }
    }
    Err(Error::ProductTruncation {
        cap: DM_MAX_FACTORS,
    })
}

fn dm_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-13, 1e-16)
}

fn dm_integral(params: &EnvParams, t: f64, tol: f64, derivative: bool) -> Result<f64> {
    let f = |u: f64| {
        Ok(match dm_log_product(params, u, t, tol)? {
            Some((lp, dl)) if derivative => {
                if u == 0.0 {
                    0.0
                } else {
                    lp.exp() * dl
                }
            }
            Some((lp, _)) => lp.exp(),
            None => 0.0,
        })
    };
    // the nearest factor switches on within a few 1/(μt) of the origin
    let top = 1.0 / params.lambda();
    let knee = (40.0 / (params.mu() * t)).min(top);
    let v = try_integrate(f, 0.0, knee, &dm_spec())?.value + try_integrate(f, knee, top, &dm_spec())?.value;
    Ok(params.lambda() * v.max(0.0))
}

/// `P[tan θ ≤ t]` for grid locations with spacing `1/λ`, uniform phase and
/// exponential heights.
pub fn dm_cdf_tan_theta(params: &EnvParams, t: f64, tol: f64) -> Result<f64> {
    crate::params::check_positive("tol", tol)?;
    if t < 0.0 || t.is_nan() {
        return Err(Error::domain("dm_cdf_tan_theta", t, "tangent must be non-negative"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(1.0);
    }
    Ok(dm_integral(params, t, tol, false)?.min(1.0))
}

/// Density of `tan θ` for the grid model.
pub fn dm_pdf_tan_theta(params: &EnvParams, t: f64, tol: f64) -> Result<f64> {
    crate::params::check_positive("tol", tol)?;
    if t < 0.0 || t.is_nan() {
        return Err(Error::domain("dm_pdf_tan_theta", t, "tangent must be non-negative"));
    }
    if t == 0.0 || t.is_infinite() {
        return Ok(0.0);
    }
    dm_integral(params, t, tol, true)
}

/// Joint law of the blocking building `(X⁺, H⁺)` for the M/M model.
///
/// Given `H⁺ = h`, `X⁺ / h` is exponential with rate `ρ`; `H⁺` is
/// Gamma(2, μ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockingJointDensity {
    pub params: EnvParams,
}

impl BlockingJointDensity {
    pub fn new(params: EnvParams) -> Self {
        Self { params }
    }

    pub fn density(&self, x: f64, h: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("joint_density", x, "x must be positive"));
        }
        if !(h >= 0.0) {
            return Err(Error::domain("joint_density", h, "h must be non-negative"));
        }
        if h == 0.0 {
            return Ok(0.0);
        }
        let (l, m) = (self.params.lambda(), self.params.mu());
        Ok(l * m * (-m * h - l * x / (m * h)).exp())
    }

    pub fn marginal_h(&self, h: f64) -> Result<f64> {
        if !(h >= 0.0) {
            return Err(Error::domain("marginal_h", h, "h must be non-negative"));
        }
        let m = self.params.mu();
        Ok(m * m * h * (-m * h).exp())
    }

    pub fn marginal_x(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("marginal_x", x, "x must be positive"));
        }
        let l = self.params.lambda();
        let u = 2.0 * (l * x).sqrt();
        Ok(l * u * bessel_k1(u)?)
    }

    /// `P[H⁺ > h]`.
    pub fn survival_h(&self, h: f64) -> f64 {
        let z = self.params.mu() * h.max(0.0);
        (1.0 + z) * (-z).exp()
    }

    /// `P[X⁺ > x] = U² K₂(U) / 2` with `U = 2√(λx)`.
    pub fn survival_x(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        let u = 2.0 * (self.params.lambda() * x).sqrt();
        if u < 1e-6 {
            return Ok(1.0);
        }
        Ok(0.5 * u * u * bessel_k(2.0, u)?)
    }

    /// `h` with `P[H⁺ ≤ h] = p`.
    pub fn quantile_h(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let z = bisect(|z| 1.0 - (1.0 + z) * (-z).exp() - p, 0.0, 1.0)?;
        Ok(z / self.params.mu())
    }

    /// `x` with `P[X⁺ ≤ x] = p`.
    pub fn quantile_x(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let mut bad = None;
        let x = bisect(
            |x| match self.survival_x(x) {
                Ok(s) => 1.0 - s - p,
                Err(e) => {
                    bad.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0 / self.params.lambda(),
        )?;
        match bad {
            Some(e) => Err(e),
            None => Ok(x),
        }
    }

    /// `(E[H⁺], E[X⁺]) = (2/μ, 2/λ)`.
    pub fn means(&self) -> (f64, f64) {
        (2.0 / self.params.mu(), 2.0 / self.params.lambda())
    }

    /// Mean of the Poisson law of `k - 1` given `(X⁺, H⁺) = (x, h)`.
    pub fn index_mean(&self, x: f64, h: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("blocking_index_pmf", x, "x must be positive"));
        }
        if !(h > 0.0) {
            return Err(Error::domain("blocking_index_pmf", h, "h must be positive"));
        }
        let z = self.params.mu() * h;
        // 1 - (1 - e^{-z}) / z, with its series near 0
        let shortfall = if z < 1e-4 {
            z / 2.0 - z * z / 6.0 + z * z * z / 24.0
        } else {
            1.0 + (-z).exp_m1() / z
        };
        Ok(self.params.lambda() * x * shortfall)
    }

    /// `P[k = i | X⁺ = x, H⁺ = h]`: Poisson(`m`) at `i - 1`.
    pub fn index_pmf(&self, x: f64, h: f64, i: usize) -> Result<f64> {
        if i < 1 {
            return Err(Error::domain("blocking_index_pmf", i as f64, "index starts at 1"));
        }
        let m = self.index_mean(x, h)?;
        let n = (i - 1) as f64;
        if m == 0.0 {
            return Ok(if i == 1 { 1.0 } else { 0.0 });
        }
        Ok((-m + n * m.ln() - ln_gamma(n + 1.0)?).exp())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("quantile", p, "probability must lie in (0, 1)"))
    }
}

/// Root of an increasing function on `[lo, ∞)`, starting from `hi`.
fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::domain("quantile", hi, "no root below overflow"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn joint_density(params: &EnvParams, x: f64, h: f64) -> Result<f64> {
    BlockingJointDensity::new(*params).density(x, h)
}

pub fn marginal_h(params: &EnvParams, h: f64) -> Result<f64> {
    BlockingJointDensity::new(*params).marginal_h(h)
}

pub fn marginal_x(params: &EnvParams, x: f64) -> Result<f64> {
    BlockingJointDensity::new(*params).marginal_x(x)
}

/// `(E[H⁺], E[X⁺])`.
pub fn blocking_means(params: &EnvParams) -> (f64, f64) {
    BlockingJointDensity::new(*params).means()
}

pub fn blocking_index_pmf(params: &EnvParams, x: f64, h: f64, i: usize) -> Result<f64> {
    BlockingJointDensity::new(*params).index_pmf(x, h, i)
}
