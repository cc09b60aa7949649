use std::f64::consts::FRAC_PI_2;

use skyline_core::analytic::{self, BlockingJointDensity};
use skyline_core::coverage::{self, AerialTier, CoverageScenario, CASE_STUDY, HAP};
use skyline_core::export::{linear_grid, log_grid, Cell, Table};
use skyline_core::ris::{self, RisCondition, RisMode};
use skyline_core::validate::{self, empirical_cdf, SuiteConfig, ValidationReport, DEFAULT_ALPHA};
use skyline_core::{AngleDistribution, AngleVariant, EnvParams, ModelKind};

use crate::config::RunConfig;
use crate::error::{CliError, Quantity};

/// Points per angle grid; the last one sits at `π/2 - 1e-6`.
pub const ANGLE_GRID: usize = 512;
/// `ρ` grid of the mean-angle table.
pub const MEANS_RHO: (f64, f64, usize) = (0.01, 10.0, 61);
/// `ρ` grid of the gain table (with `μ = 1`).
pub const GAIN_RHO: (f64, f64, usize) = (0.1, 2.0, 10);
/// `Hν` grid of the connectivity curve.
pub const TAU_HNU: (f64, f64, usize) = (0.01, 100.0, 81);
/// Densities of the LOS-probability curves.
pub const LOS_RHO: [f64; 3] = [0.05, 0.35, 0.57];
/// Replications used by the gain table and the validation suite by default.
pub const DEFAULT_MC: usize = 100_000;

const SURFACE_CARRIERS: [(RisMode, f64, f64); 6] = [
    (RisMode::Transmissive, 1.0, 1.0),
    (RisMode::Transmissive, 1.0, 2.0),
    (RisMode::Transmissive, 2.0, 2.0),
    (RisMode::Reflective, -1.0, 1.0),
    (RisMode::Reflective, -1.0, 2.0),
    (RisMode::Reflective, -2.0, 2.0),
];

pub enum Output {
    Tables(Vec<Table>),
    Reports(Vec<ValidationReport>),
}

fn push(table: &mut Table, row: Vec<Cell>) {
    table.push(row).expect("row matches header");
}

fn env_for(cfg: &RunConfig, model: ModelKind) -> EnvParams {
    let env = cfg.env();
    match model {
        ModelKind::Weibull => env,
        _ => EnvParams::new(env.lambda(), env.mu()).expect("validated"),
    }
}

/// Ground variants selected by `--model`, then elevated observers.
fn variants(cfg: &RunConfig, default_heights: &[f64]) -> Vec<(EnvParams, AngleVariant, String)> {
    let models = match cfg.model {
        Some(m) => vec![m],
        None => vec![ModelKind::MM, ModelKind::MD, ModelKind::DM, ModelKind::Weibull],
    };
    let mut out: Vec<_> = models
        .into_iter()
        .map(|m| {
            let env = env_for(cfg, m);
            let label = match m {
                ModelKind::Weibull => format!("weibull(k={})", env.weibull_shape()),
                _ => m.to_string(),
            };
            (env, AngleVariant::from(m), label)
        })
        .collect();
    let heights = match cfg.observer_h {
        Some(h) if h > 0.0 => vec![h],
        Some(_) => vec![],
        None => default_heights.to_vec(),
    };
    let mm = env_for(cfg, ModelKind::MM);
    for h in heights {
        let v = AngleVariant::Elevated { h };
        out.push((mm, v, v.to_string()));
    }
    out
}

/// cdf and pdf of `θ` and `ψ = π/2 - θ` on the angle grid, with an empirical
/// cdf column when `--n` is set.
pub fn cmd_angles(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut columns = vec!["variant", "angle", "phi", "cdf", "pdf"];
    if cfg.n.is_some() {
        columns.push("ecdf");
    }
    let mut table = Table::new("angles", columns);
    for (env, variant, label) in variants(cfg, &[1.0, 2.0]) {
        let dist = AngleDistribution::new(env, variant).quantity(format!("angle law {label}"))?;
        let grid = dist.table(ANGLE_GRID).quantity(format!("cdf of θ for {label}"))?;
        let ecdf = match cfg.n {
            Some(n) => Some(empirical_cdf(
                &validate::simulate_angles(&env, variant, n, cfg.seed).quantity(format!("simulated θ for {label}"))?,
            )),
            None => None,
        };
        for &[phi, cdf, pdf] in &grid {
            let mut row: Vec<Cell> = vec![label.clone().into(), "theta".into(), phi.into(), cdf.into(), pdf.into()];
            if let Some(e) = &ecdf {
                row.push(e.eval(phi).into());
            }
            push(&mut table, row);
        }
        // ψ = π/2 - θ on the mirrored grid, ascending from 1e-6 to π/2
        for &[phi_theta, _, _] in grid.iter().rev() {
            let phi = FRAC_PI_2 - phi_theta;
            let cdf = dist.cdf_psi(phi).quantity(format!("cdf of ψ for {label}"))?;
            let pdf = dist.pdf_psi(phi).quantity(format!("pdf of ψ for {label}"))?;
            let mut row: Vec<Cell> = vec![label.clone().into(), "psi".into(), phi.into(), cdf.into(), pdf.into()];
            if let Some(e) = &ecdf {
                // continuous law: P[ψ ≤ φ] = 1 - P[θ < π/2 - φ]
                row.push((1.0 - e.eval(phi_theta)).into());
            }
            push(&mut table, row);
        }
    }
    Ok(Output::Tables(vec![table]))
}

/// `E[θ]` and `E[ψ]` over a `ρ` grid at the configured `μ`.
pub fn cmd_means(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut table = Table::new("means", ["variant", "rho", "lambda", "mu", "mean_theta", "mean_psi"]);
    let (lo, hi, n) = MEANS_RHO;
    for (env, variant, label) in variants(cfg, &[]) {
        for rho in log_grid(lo, hi, n) {
            let p = EnvParams::with_shape(rho * env.mu(), env.mu(), env.weibull_shape())
                .quantity(format!("parameters at rho={rho}"))?;
            let mean = analytic::mean_theta(&p, variant).quantity(format!("E[θ] for {label} at rho={rho}"))?;
            push(
                &mut table,
                vec![
                    label.clone().into(),
                    rho.into(),
                    p.lambda().into(),
                    p.mu().into(),
                    mean.into(),
                    (FRAC_PI_2 - mean).into(),
                ],
            );
        }
    }
    Ok(Output::Tables(vec![table]))
}

/// Marginal laws of the blocking building, its means, and the law of its
/// index at `(--x, --height)` when given.
pub fn cmd_joint(cfg: &RunConfig) -> Result<Output, CliError> {
    let env = env_for(cfg, ModelKind::MM);
    let joint = BlockingJointDensity::new(env);
    let mut marginals = Table::new("marginals", ["variable", "value", "density", "survival"]);
    let h_top = joint.quantile_h(1.0 - 1e-6).quantity("upper quantile of H+")?;
    for h in linear_grid(0.0, h_top, ANGLE_GRID) {
        let g = joint.marginal_h(h).quantity(format!("g({h})"))?;
        push(&mut marginals, vec!["h".into(), h.into(), g.into(), joint.survival_h(h).into()]);
    }
    let x_top = joint.quantile_x(1.0 - 1e-6).quantity("upper quantile of X+")?;
    for x in linear_grid(x_top / ANGLE_GRID as f64, x_top, ANGLE_GRID) {
        let k = joint.marginal_x(x).quantity(format!("k({x})"))?;
        let s = joint.survival_x(x).quantity(format!("P[X+ > {x}]"))?;
        push(&mut marginals, vec!["x".into(), x.into(), k.into(), s.into()]);
    }
    let mut means = Table::new("joint_means", ["quantity", "value"]);
    let (mean_h, mean_x) = joint.means();
    push(&mut means, vec!["E_x".into(), mean_x.into()]);
    push(&mut means, vec!["E_h".into(), mean_h.into()]);
    let mut tables = vec![marginals, means];

    if let Some((x, h)) = cfg.carrier {
        let mut index = Table::new("index_pmf", ["x", "h", "k", "pmf"]);
        let m = joint.index_mean(x.abs(), h).quantity("index mean")?;
        let top = (m + 10.0 * m.sqrt() + 10.0).ceil() as usize;
        for k in 1..=top {
            let p = joint.index_pmf(x.abs(), h, k).quantity(format!("P[k={k}]"))?;
            push(&mut index, vec![x.abs().into(), h.into(), k.into(), p.into()]);
        }
        tables.push(index);
    }
    Ok(Output::Tables(tables))
}

/// Conditional surface laws and means, and the gain curves.
pub fn cmd_ris(cfg: &RunConfig) -> Result<Output, CliError> {
    let env = env_for(cfg, ModelKind::MM);
    let carriers: Vec<(RisMode, f64, f64)> = match cfg.carrier {
        Some((x, h)) => {
            let mode = cfg.ris.unwrap_or(if x < 0.0 {
                RisMode::Reflective
            } else {
                RisMode::Transmissive
            });
            vec![(mode, x, h)]
        }
        None => SURFACE_CARRIERS
            .iter()
            .copied()
            .filter(|(m, _, _)| cfg.ris.is_none_or(|r| r == *m))
            .collect(),
    };
    let mut cdfs = Table::new("ris_cdf", ["mode", "x", "h", "phi", "cdf", "pdf"]);
    let mut means = Table::new("ris_means", ["mode", "x", "h", "mean"]);
    for (mode, x, h) in carriers {
        let label = format!("{mode} surface at ({x}, {h})");
        let cond = RisCondition::new(mode, x, h).quantity(&label)?;
        let dist = AngleDistribution::new(env, cond.variant()).quantity(&label)?;
        for [phi, cdf, pdf] in dist.table(ANGLE_GRID).quantity(format!("cdf of the {label}"))? {
            push(
                &mut cdfs,
                vec![mode.to_string().into(), x.into(), h.into(), phi.into(), cdf.into(), pdf.into()],
            );
        }
        let mean = dist.mean().quantity(format!("mean of the {label}"))?;
        push(&mut means, vec![mode.to_string().into(), x.into(), h.into(), mean.into()]);
    }

    let mut gains = Table::new("gains", ["rho", "gamma1_T", "gamma1_R", "gamma2_T", "gamma2_R", "mc_stderr"]);
    let (lo, hi, n) = GAIN_RHO;
    let rows = ris::gain_curve(&linear_grid(lo, hi, n), cfg.n.unwrap_or(DEFAULT_MC), cfg.seed)
        .quantity("angular gains")?;
    for r in rows {
        push(
            &mut gains,
            vec![
                r.rho.into(),
                r.gamma1_t.into(),
                r.gamma1_r.into(),
                r.gamma2_t.into(),
                r.gamma2_r.into(),
                r.mc_stderr.into(),
            ],
        );
    }
    Ok(Output::Tables(vec![cdfs, means, gains]))
}

/// Columns of the case-study table, in output order.
pub const TABLE3_COLUMNS: [&str; 10] = [
    "case", "lambda", "mu", "E_theta", "E_theta_T", "E_theta_R", "E_l_HAP", "E_l_sat", "tau_HAP", "tau_sat",
];

pub fn table3() -> Result<Table, CliError> {
    let mut table = Table::new("table3", TABLE3_COLUMNS);
    for s in coverage::case_study().quantity("case-study table")? {
        push(
            &mut table,
            vec![
                s.case.into(),
                s.lambda.into(),
                s.mu.into(),
                s.e_theta.into(),
                s.e_theta_t.into(),
                s.e_theta_r.into(),
                s.e_l_hap.into(),
                s.e_l_sat.into(),
                s.tau_hap.into(),
                s.tau_sat.into(),
            ],
        );
    }
    Ok(table)
}

/// `τ_H` against `Hν` for the case-study densities, the case-study table, and
/// the configured scenario when `--H` or `--nu` is set.
pub fn cmd_coverage(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut curve = Table::new("tau_curve", ["case", "rho", "h_nu", "tau"]);
    let (lo, hi, n) = TAU_HNU;
    for (name, lambda, mu) in CASE_STUDY {
        let env = EnvParams::new(lambda, mu).quantity(name)?;
        for h_nu in log_grid(lo, hi, n) {
            // τ depends on the tier only through Hν
            let s = CoverageScenario::new(env, 1.0, h_nu).quantity(format!("scenario Hν={h_nu}"))?;
            let tau = coverage::tau_unconditional(&s).quantity(format!("τ for {name} at Hν={h_nu}"))?;
            push(&mut curve, vec![name.into(), env.rho().into(), h_nu.into(), tau.into()]);
        }
    }
    let mut tables = vec![curve, table3()?];

    if cfg.big_h.is_some() || cfg.nu.is_some() {
        let tier = AerialTier {
            altitude: cfg.big_h.unwrap_or(HAP.altitude),
            nu: cfg.nu.unwrap_or(HAP.nu),
        };
        let env = env_for(cfg, ModelKind::MM);
        let s = CoverageScenario::new(env, tier.altitude, tier.nu).quantity("scenario")?;
        let mut cols = vec!["lambda", "mu", "H", "nu", "h_nu", "tau", "E_l", "E_L"];
        if cfg.carrier.is_some() {
            cols.extend(["x", "h", "tau_xh", "l_xh", "E_L_xh"]);
        }
        let mut scenario = Table::new("scenario", cols);
        let mut row: Vec<Cell> = vec![
            env.lambda().into(),
            env.mu().into(),
            tier.altitude.into(),
            tier.nu.into(),
            s.h_nu().into(),
            coverage::tau_unconditional(&s).quantity("τ")?.into(),
            coverage::mean_l(&s).into(),
            coverage::mean_big_l(&s).to_string().replace('∞', "inf").into(),
        ];
        if let Some((x, h)) = cfg.carrier {
            let x = x.abs();
            row.extend([
                x.into(),
                h.into(),
                coverage::tau_conditional(&s, x, h).quantity("τ(x, h)")?.into(),
                coverage::visible_length(x, h, tier.altitude).quantity("|l|")?.into(),
                coverage::expected_ris_length(&env, x, h, tier.altitude).quantity("E|L|")?.into(),
            ]);
        }
        push(&mut scenario, row);
        tables.push(scenario);
    }
    Ok(Output::Tables(tables))
}

/// LOS probability against elevation for the reference densities at the
/// configured `μ` and observer height `--h` (default 0).
pub fn cmd_threegpp(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut table = Table::new("los", ["rho", "h", "zeta_deg", "zeta", "p_los"]);
    let mu = cfg.mu;
    let h = cfg.observer_h.unwrap_or(0.0);
    for rho in LOS_RHO {
        let env = EnvParams::new(rho * mu, mu).quantity(format!("rho={rho}"))?;
        for i in 1..360 {
            let deg = 0.25 * i as f64;
            let zeta = deg.to_radians();
            let p = analytic::los_probability(&env, h, zeta).quantity(format!("LOS probability at {deg}°"))?;
            push(&mut table, vec![rho.into(), h.into(), deg.into(), zeta.into(), p.into()]);
        }
    }
    Ok(Output::Tables(vec![table]))
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<Output, CliError> {
    let suite = SuiteConfig {
        n: cfg.n.unwrap_or(DEFAULT_MC),
        seed: cfg.seed,
        alpha: DEFAULT_ALPHA,
    };
    let reports = validate::run_suite(&suite).quantity("validation suite")?;
    Ok(Output::Reports(reports))
}
