use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// City-model parameters.
///
/// `lambda` is the building intensity along the line, `mu` the inverse mean
/// building height, and `weibull_shape` the shape of the height law for the
/// Weibull variant (1 recovers exponential heights).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvParams {
    lambda: f64,
    mu: f64,
    weibull_shape: f64,
}

impl EnvParams {
    /// Exponential heights (`weibull_shape = 1`).
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        Self::with_shape(lambda, mu, 1.0)
    }

    pub fn with_shape(lambda: f64, mu: f64, weibull_shape: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        check_positive("mu", mu)?;
        check_positive("weibull_shape", weibull_shape)?;
        Ok(Self {
            lambda,
            mu,
            weibull_shape,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn weibull_shape(&self) -> f64 {
        self.weibull_shape
    }

    /// Density-height product `lambda / mu`.
    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    /// Mean building height `1 / mu` (also the constant height of the M/D variant).
    pub fn mean_height(&self) -> f64 {
        1.0 / self.mu
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

/// Building location / height model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Poisson locations, exponential heights.
    MM,
    /// Poisson locations, constant height `1/mu`.
    MD,
    /// Grid with spacing `1/lambda` and uniform phase, exponential heights.
    DM,
    /// Poisson locations, Weibull heights with scale `1/mu`.
    Weibull,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mm" => Ok(ModelKind::MM),
            "md" => Ok(ModelKind::MD),
            "dm" => Ok(ModelKind::DM),
            "weibull" => Ok(ModelKind::Weibull),
            other => Err(format!("unknown model `{other}` (expected mm, md, dm or weibull)")),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::MM => "mm",
            ModelKind::MD => "md",
            ModelKind::DM => "dm",
            ModelKind::Weibull => "weibull",
        };
        f.write_str(s)
    }
}
