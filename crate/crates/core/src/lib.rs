//! Sky-visibility statistics for a ground user in a one-dimensional
//! marked point-process city model.
//!
//! Buildings sit on a half-line at the points of a point process, each with
//! an i.i.d. height mark. The crate provides
//!
//! - [`process`]: seeded skyline sampling for the M/M, M/D, D/M and Weibull
//!   variants, and exact blockage geometry on a sampled skyline;
//! - [`numerics`]: the special functions and adaptive quadrature used by the
//!   closed forms;
//! - [`analytic`]: blockage/visibility angle laws, the joint law of the
//!   blocking building, and the law of its index;
//! - [`ris`]: blockage angles seen from a transmissive or reflective surface
//!   mounted on the blocking building, and the angular gains;
//! - [`coverage`]: visible lengths at altitude and the connectivity
//!   probability recovered through the surface;
//! - [`validate`]: Monte-Carlo cross-checks of all of the above.
//!
//! ```
//! use skyline_core::{analytic, EnvParams, AngleVariant};
//!
//! let env = EnvParams::new(1.0, 1.0).unwrap();
//! let mean = analytic::mean_theta(&env, AngleVariant::MM).unwrap();
//! assert!((mean - 0.9493).abs() < 1e-3);
//! ```

pub mod analytic;
pub mod coverage;
mod error;
pub mod export;
pub mod numerics;
mod params;
pub mod process;
pub mod ris;
pub mod validate;

pub use analytic::{AngleDistribution, AngleVariant};
pub use error::{Error, Result};
pub use params::{EnvParams, ModelKind};
