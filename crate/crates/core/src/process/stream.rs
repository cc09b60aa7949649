use rand::Rng;
use rand_distr::{Distribution, Exp, Weibull};

use super::{steepest, tail_count_bound, Building, Observer, SamplingConfig};
use crate::error::{Error, Result};
use crate::params::{EnvParams, ModelKind};

#[derive(Debug, Clone)]
enum Heights {
    Exp(Exp<f64>),
    Weibull(Weibull<f64>),
    Constant(f64),
}

/// Infinite, nearest-first stream of buildings on the positive half-line.
///
/// Each building consumes the location draw (Poisson variants only) followed
/// by the height draw; the grid phase is drawn once up front.
#[derive(Debug, Clone)]
pub struct BuildingStream<R> {
    rng: R,
    lambda: f64,
    heights: Heights,
    grid_phase: Option<f64>,
    gaps: Exp<f64>,
    last_x: f64,
    emitted: usize,
}

impl<R: Rng> BuildingStream<R> {
    pub fn new(params: EnvParams, model: ModelKind, mut rng: R) -> Self {
        let mu = params.mu();
        let heights = match model {
            ModelKind::MM | ModelKind::DM => Heights::Exp(Exp::new(mu).expect("validated rate")),
            ModelKind::MD => Heights::Constant(1.0 / mu),
            ModelKind::Weibull => Heights::Weibull(
                Weibull::new(1.0 / mu, params.weibull_shape()).expect("validated shape"),
            ),
        };
        let grid_phase = (model == ModelKind::DM).then(|| loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u / params.lambda();
            }
        });
        Self {
            rng,
            lambda: params.lambda(),
            heights,
            grid_phase,
            gaps: Exp::new(params.lambda()).expect("validated rate"),
            last_x: 0.0,
            emitted: 0,
        }
    }
}

impl<R: Rng> Iterator for BuildingStream<R> {
    type Item = Building;

    fn next(&mut self) -> Option<Building> {
        let x = match self.grid_phase {
            Some(phase) => phase + self.emitted as f64 / self.lambda,
            None => self.last_x + self.gaps.sample(&mut self.rng),
        };
        let h = match &self.heights {
            Heights::Exp(d) => d.sample(&mut self.rng),
            Heights::Weibull(d) => d.sample(&mut self.rng),
            Heights::Constant(c) => *c,
        };
        self.last_x = x;
        self.emitted += 1;
        Some(Building { x, h })
    }
}

/// A skyline materialized on demand.
///
/// Buildings are generated only as far as needed to certify a maximum, so the
/// materialized prefix is identical to the window [`super::sample_realization`]
/// produces from the same generator.
#[derive(Debug, Clone)]
pub struct Skyline<R> {
    params: EnvParams,
    model: ModelKind,
    stream: BuildingStream<R>,
    buildings: Vec<Building>,
}

impl<R: Rng> Skyline<R> {
    pub fn new(params: EnvParams, model: ModelKind, rng: R) -> Self {
        Self {
            params,
            model,
            stream: BuildingStream::new(params, model, rng),
            buildings: Vec::new(),
        }
    }

    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }

    pub fn get(&mut self, i: usize) -> Building {
        while self.buildings.len() <= i {
            let b = self.stream.next().expect("stream is infinite");
            self.buildings.push(b);
        }
        self.buildings[i]
    }

    /// Steepest rooftop among buildings `start..` as seen from `observer`,
    /// which must stand before building `start`. Returns the index into the
    /// skyline and the tangent.
    ///
    /// Extends the skyline until the expected number of unseen buildings that
    /// could beat `max(current best, t_min)` drops to `cfg.epsilon`.
    pub fn steepest_from(
        &mut self,
        observer: Observer,
        start: usize,
        cfg: &SamplingConfig,
    ) -> Result<Option<(usize, f64)>> {
        let mut best: Option<(usize, f64)> = None;
        let mut i = start;
        loop {
            let b = self.get(i);
            if let Some((_, s)) = steepest(std::iter::once(&b), observer) {
                if best.is_none_or(|(_, t)| s > t) {
                    best = Some((i, s));
                }
            }
            let dist = b.x - observer.x;
            let s_eff = best.map_or(cfg.t_min, |(_, s)| s.max(cfg.t_min));
            if tail_count_bound(&self.params, self.model, observer.h, s_eff, dist) <= cfg.epsilon {
                return Ok(best);
            }
            if dist > cfg.x_cap {
                return Err(Error::Truncation {
                    x_max: dist,
                    cap: cfg.x_cap,
                });
            }
            i += 1;
        }
    }
}
