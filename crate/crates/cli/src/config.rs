use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use skyline_core::export::Format;
use skyline_core::ris::RisMode;
use skyline_core::{EnvParams, ModelKind};

use crate::error::CliError;

/// Weibull shape used when neither the file nor the flags set one.
pub const DEFAULT_SHAPE: f64 = 2.0;
pub const DEFAULT_SEED: u64 = 7;

/// Options shared by every command. Each one may also come from the config
/// file under the same name; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat TOML file with any of the options below as keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Building density λ (buildings per unit length).
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Height rate μ (mean height 1/μ).
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Weibull shape k.
    #[arg(long, global = true)]
    pub shape: Option<f64>,
    /// Height/location model: mm, md, dm or weibull.
    #[arg(long, global = true)]
    pub model: Option<ModelKind>,
    /// Observer height.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Surface mode: trans or refl.
    #[arg(long, global = true)]
    pub ris: Option<RisMode>,
    /// Offset of the building carrying the surface (negative for refl).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Height of the building carrying the surface.
    #[arg(long, global = true)]
    pub height: Option<f64>,
    /// Altitude of the aerial tier above the blocker's roof.
    #[arg(long = "H", global = true)]
    pub big_h: Option<f64>,
    /// Aerial node intensity per unit length.
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    /// Monte-Carlo replications.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format: csv or json.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Output directory; one file per table. Tables go to stdout otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Exit nonzero when any validation check fails.
    #[arg(long, global = true)]
    pub strict: bool,
}

/// Keys accepted in the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub shape: Option<f64>,
    pub model: Option<String>,
    pub h: Option<f64>,
    pub ris: Option<String>,
    pub x: Option<f64>,
    pub height: Option<f64>,
    #[serde(rename = "H")]
    pub big_h: Option<f64>,
    pub nu: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub strict: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string().trim_end().to_owned())
    }
}

/// Fully validated settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda: f64,
    pub mu: f64,
    pub shape: f64,
    /// Restricts the angle tables to one model.
    pub model: Option<ModelKind>,
    pub observer_h: Option<f64>,
    pub ris: Option<RisMode>,
    /// Carrier `(x, h)` of the surface, when given.
    pub carrier: Option<(f64, f64)>,
    pub big_h: Option<f64>,
    pub nu: Option<f64>,
    pub n: Option<usize>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub strict: bool,
}

fn parsed<T: std::str::FromStr<Err = String>>(key: &str, v: Option<String>) -> Result<Option<T>, CliError> {
    v.map(|s| s.parse::<T>().map_err(|e| CliError::Usage(format!("{key}: {e}"))))
        .transpose()
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{key} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Merges the config file (if any) with the flags and checks every value.
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::merge(file, flags)
    }

    pub fn merge(file: FileConfig, flags: &Flags) -> Result<Self, CliError> {
        let lambda = positive("lambda", flags.lambda.or(file.lambda).unwrap_or(1.0))?;
        let mu = positive("mu", flags.mu.or(file.mu).unwrap_or(1.0))?;
        let shape = positive("shape", flags.shape.or(file.shape).unwrap_or(DEFAULT_SHAPE))?;
        let model = match flags.model {
            Some(m) => Some(m),
            None => parsed::<ModelKind>("model", file.model)?,
        };
        let observer_h = flags.h.or(file.h);
        if let Some(h) = observer_h {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(CliError::Usage(format!("h must be non-negative, got {h}")));
            }
        }
        let ris = match flags.ris {
            Some(r) => Some(r),
            None => parsed::<RisMode>("ris", file.ris)?,
        };
        let carrier = match (flags.x.or(file.x), flags.height.or(file.height)) {
            (None, None) => None,
            (Some(x), Some(height)) => {
                let height = positive("height", height)?;
                let mode = ris.unwrap_or(if x < 0.0 {
                    RisMode::Reflective
                } else {
                    RisMode::Transmissive
                });
                let ok = match mode {
                    RisMode::Transmissive => x >= 0.0,
                    RisMode::Reflective => x <= 0.0,
                };
                if !ok || !x.is_finite() {
                    return Err(CliError::Usage(format!(
                        "x = {x} does not fit the {mode} surface (trans needs x >= 0, refl x <= 0)"
                    )));
                }
                Some((x, height))
            }
            _ => return Err(CliError::Usage("x and height must be given together".into())),
        };
        let big_h = flags.big_h.or(file.big_h).map(|v| positive("H", v)).transpose()?;
        let nu = flags.nu.or(file.nu).map(|v| positive("nu", v)).transpose()?;
        let n = flags.n.or(file.n);
        if n == Some(0) {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        let format = match flags.format {
            Some(f) => f,
            None => parsed::<Format>("format", file.format)?.unwrap_or_default(),
        };
        Ok(Self {
            lambda,
            mu,
            shape,
            model,
            observer_h,
            ris,
            carrier,
            big_h,
            nu,
            n,
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            format,
            out: flags.out.clone().or(file.out),
            strict: flags.strict || file.strict.unwrap_or(false),
        })
    }

    /// City parameters; the Weibull shape only matters to the Weibull model.
    pub fn env(&self) -> EnvParams {
        EnvParams::with_shape(self.lambda, self.mu, self.shape).expect("validated in merge")
    }
}
