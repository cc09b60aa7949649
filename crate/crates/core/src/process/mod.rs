//! Skyline sampling and blockage geometry.
//!
//! A [`Realization`] is a finite window `(0, x_max]` of the building process.
//! `x_max` is chosen so that, with probability at least `1 - epsilon`, no
//! building beyond the window subtends a tangent above `t_min` from the
//! observer. The same bound drives [`Skyline`], a lazily extended skyline used
//! by the Monte-Carlo code, which stops as soon as the running maximum is
//! certified.

mod mc;
mod stream;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use mc::{replicate, replication_rng, Lane};
pub use stream::{BuildingStream, Skyline};

use crate::error::{Error, Result};
use crate::params::{check_positive, EnvParams, ModelKind};

/// Default truncation tangent, `tan(0.5°)`.
pub fn default_t_min() -> f64 {
    0.5f64.to_radians().tan()
}

pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_X_CAP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub x: f64,
    pub h: f64,
}

/// A viewing position `(x, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observer {
    pub x: f64,
    pub h: f64,
}

impl Observer {
    pub const ORIGIN: Observer = Observer { x: 0.0, h: 0.0 };

    pub fn new(x: f64, h: f64) -> Self {
        Self { x, h }
    }

    pub fn at_height(h: f64) -> Self {
        Self { x: 0.0, h }
    }
}

/// Which half-line a realization lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Positive,
    Negative,
}

/// Truncation settings shared by the sampler and the streaming simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Smallest tangent the window must certify.
    pub t_min: f64,
    /// Probability budget for a building beyond the window beating `t_min`.
    pub epsilon: f64,
    /// Largest admissible window.
    pub x_cap: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            t_min: default_t_min(),
            epsilon: DEFAULT_EPSILON,
            x_cap: DEFAULT_X_CAP,
        }
    }
}

impl SamplingConfig {
    pub fn new(t_min: f64, epsilon: f64) -> Result<Self> {
        let cfg = Self {
            t_min,
            epsilon,
            ..Self::default()
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub(crate) fn check(&self) -> Result<()> {
        check_positive("t_min", self.t_min)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "must lie in (0, 1)",
            });
        }
        check_positive("x_cap", self.x_cap)
    }
}

/// One sampled skyline window, nearest building first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub buildings: Vec<Building>,
    pub x_max: f64,
    pub seed: u64,
    pub model: ModelKind,
    pub params: EnvParams,
    pub side: Side,
    /// Observer height the window was certified for.
    pub observer_height: f64,
    pub t_min: f64,
    pub epsilon: f64,
}

impl Realization {
    pub fn len(&self) -> usize {
        self.buildings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buildings.is_empty()
    }

    /// Writes the buildings as CSV with header `index,x,h` (1-based index).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "x", "h"])?;
        for (i, b) in self.buildings.iter().enumerate() {
            w.write_record([(i + 1).to_string(), b.x.to_string(), b.h.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Outcome of a blockage computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockageResult {
    /// Blockage angle in radians, in `[0, π/2)`.
    pub theta: f64,
    pub x_plus: f64,
    pub h_plus: f64,
    /// 1-based position of the blocking building; 0 when nothing rises
    /// above the observer.
    pub index_k: usize,
    pub truncation_warning: bool,
}

impl BlockageResult {
    pub fn has_blocker(&self) -> bool {
        self.index_k > 0
    }

    pub fn tan_theta(&self) -> f64 {
        self.theta.tan()
    }

    pub(crate) fn none(truncation_warning: bool) -> Self {
        Self {
            theta: 0.0,
            x_plus: 0.0,
            h_plus: 0.0,
            index_k: 0,
            truncation_warning,
        }
    }
}

/// Integral of the height survival function over `[y, ∞)`.
fn survival_integral(params: &EnvParams, model: ModelKind, y: f64) -> f64 {
    let mu = params.mu();
    match model {
        ModelKind::MM | ModelKind::DM => {
            if y >= 0.0 {
                (-mu * y).exp() / mu
            } else {
                -y + 1.0 / mu
            }
        }
        ModelKind::MD => (params.mean_height() - y).max(0.0),
        ModelKind::Weibull => {
            let k = params.weibull_shape();
            if y >= 0.0 {
                let tail = crate::numerics::upper_incomplete_gamma(1.0 / k, (mu * y).powf(k))
                    .unwrap_or(f64::INFINITY);
                tail / (mu * k)
            } else {
                let mean = crate::numerics::gamma_fn(1.0 + 1.0 / k).unwrap_or(f64::INFINITY) / mu;
                -y + mean
            }
        }
    }
}

fn height_survival(params: &EnvParams, model: ModelKind, y: f64) -> f64 {
    if y < 0.0 {
        return 1.0;
    }
    let mu = params.mu();
    match model {
        ModelKind::MM | ModelKind::DM => (-mu * y).exp(),
        ModelKind::MD => {
            if y < params.mean_height() {
                1.0
            } else {
                0.0
            }
        }
        ModelKind::Weibull => (-(mu * y).powf(params.weibull_shape())).exp(),
    }
}

/// Upper bound on the expected number of buildings located beyond distance
/// `from` (measured from the observer along the viewing direction) whose
/// rooftop lies above the ray of tangent `slope` from the observer.
///
/// For the Poisson variants the excess process beyond any point is again
/// Poisson; for the grid variant the sum over future grid points is bounded
/// by the same integral since the height survival is decreasing.
pub fn tail_count_bound(params: &EnvParams, model: ModelKind, observer_h: f64, slope: f64, from: f64) -> f64 {
    let y = observer_h + slope * from;
    params.lambda() / slope * survival_integral(params, model, y)
}

/// Truncation distance for a window starting at the observer.
pub fn truncation_distance(
    params: &EnvParams,
    model: ModelKind,
    observer_height: f64,
    cfg: &SamplingConfig,
) -> Result<f64> {
    cfg.check()?;
    if !(observer_height >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "observer_height",
            value: observer_height,
            reason: "must be non-negative",
        });
    }
    let bound = |v: f64| {
        let grid_extra = if model == ModelKind::DM {
            // the first grid point past the window may sit right at its edge
            height_survival(params, model, observer_height + cfg.t_min * v)
        } else {
            0.0
        };
        tail_count_bound(params, model, observer_height, cfg.t_min, v) + grid_extra
    };
    let floor = 1.0 / params.lambda();
    if bound(0.0) <= cfg.epsilon {
        return Ok(floor);
    }
    let mut hi = floor;
    while bound(hi) > cfg.epsilon {
        hi *= 2.0;
        if hi > cfg.x_cap {
            return Err(Error::Truncation {
                x_max: hi,
                cap: cfg.x_cap,
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) > cfg.epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi.max(floor))
}

/// Samples the buildings in `(0, x_max]` for one skyline.
///
/// Deterministic in `(seed, model, params)`.
pub fn sample_realization(
    params: &EnvParams,
    model: ModelKind,
    observer_height: f64,
    t_min: f64,
    epsilon: f64,
    seed: u64,
) -> Result<Realization> {
    let cfg = SamplingConfig::new(t_min, epsilon)?;
    sample_realization_with(params, model, observer_height, &cfg, seed)
}

pub fn sample_realization_with(
    params: &EnvParams,
    model: ModelKind,
    observer_height: f64,
    cfg: &SamplingConfig,
    seed: u64,
) -> Result<Realization> {
    let x_max = truncation_distance(params, model, observer_height, cfg)?;
    let rng = replication_rng(seed, 0, Lane::Primary);
    let buildings = BuildingStream::new(*params, model, rng)
        .take_while(|b| b.x <= x_max)
        .collect();
    Ok(Realization {
        buildings,
        x_max,
        seed,
        model,
        params: *params,
        side: Side::Positive,
        observer_height,
        t_min: cfg.t_min,
        epsilon: cfg.epsilon,
    })
}

/// Index and tangent of the steepest rooftop seen from `observer`, ties to the
/// nearest. Only rooftops strictly above the observer count.
pub(crate) fn steepest<'a, I>(buildings: I, observer: Observer) -> Option<(usize, f64)>
where
    I: IntoIterator<Item = &'a Building>,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, b) in buildings.into_iter().enumerate() {
        let rise = b.h - observer.h;
        if rise <= 0.0 {
            continue;
        }
        let slope = rise / (b.x - observer.x).abs();
        if best.is_none_or(|(_, s)| slope > s) {
            best = Some((i, slope));
        }
    }
    best
}

/// Blockage angle seen from `observer` over every building in the realization.
pub fn blockage_angle(realization: &Realization, observer: Observer) -> Result<BlockageResult> {
    if realization.is_empty() {
        return Err(Error::EmptyRealization);
    }
    let ahead = |b: &Building| match realization.side {
        Side::Positive => b.x > observer.x,
        Side::Negative => b.x < observer.x,
    };
    if !realization.buildings.iter().all(ahead) {
        return Err(Error::ObserverPlacement {
            observer_x: observer.x,
        });
    }

    let best = steepest(&realization.buildings, observer);
    let slope = best.map_or(0.0, |(_, s)| s);
    let warning = {
        let s_eff = slope.max(realization.t_min);
        let remaining = realization.x_max - observer.x * side_sign(realization.side);
        let tail = if remaining > 0.0 {
            tail_count_bound(&realization.params, realization.model, observer.h, s_eff, remaining)
        } else {
            f64::INFINITY
        };
        slope < 1.01 * realization.t_min || tail > realization.epsilon
    };
    Ok(match best {
        None => BlockageResult::none(warning),
        Some((i, s)) => {
            let b = realization.buildings[i];
            BlockageResult {
                theta: s.atan(),
                x_plus: b.x,
                h_plus: b.h,
                index_k: i + 1,
                truncation_warning: warning,
            }
        }
    })
}

fn side_sign(side: Side) -> f64 {
    match side {
        Side::Positive => 1.0,
        Side::Negative => -1.0,
    }
}

/// Reflects a realization through the observer's vertical: every location is
/// negated, order (nearest first) is kept.
pub fn mirror_realization(realization: &Realization) -> Realization {
    let mut out = realization.clone();
    for b in &mut out.buildings {
        b.x = -b.x;
    }
    out.side = match realization.side {
        Side::Positive => Side::Negative,
        Side::Negative => Side::Positive,
    };
    out
}

#[cfg(test)]
mod tests;
