use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::analytic::{cdf_tan_theta_xh, mean_theta};
use crate::numerics::integrate;

fn env(lambda: f64, mu: f64) -> EnvParams {
    EnvParams::new(lambda, mu).unwrap()
}

fn trans(x: f64, h: f64) -> RisCondition {
    RisCondition::transmissive(x, h).unwrap()
}

fn refl(x: f64, h: f64) -> RisCondition {
    RisCondition::reflective(x, h).unwrap()
}

#[test]
fn transmissive_cdf_values() {
    let p = env(1.0, 1.0);
    let c = trans(1.0, 1.0);
    let want = (-(-1.0f64).exp()).exp();
    assert!((trans_cdf_tan(&p, &c, 0.5).unwrap() - want).abs() < 1e-15);
    assert_eq!(trans_cdf_tan(&p, &c, 1.0).unwrap(), 1.0);
    assert_eq!(trans_cdf_tan(&p, &c, 3.0).unwrap(), 1.0);
    assert_eq!(trans_cdf_tan(&p, &c, 0.0).unwrap(), 0.0);
    assert!(trans_cdf_tan(&p, &c, -1.0).is_err());
    assert_eq!(trans_pdf_tan(&p, &c, 1.5).unwrap(), 0.0);
    // left-continuous at the cap
    let below = trans_cdf_tan(&p, &c, 1.0 - 1e-12).unwrap();
    assert!((below - 1.0).abs() < 1e-11);
}

#[test]
fn zero_offset_reduces_to_elevated_observer() {
    let p = env(0.7, 1.3);
    for h in [0.2, 1.0, 3.0] {
        for t in [0.01, 0.3, 1.0, 10.0] {
            let want = cdf_tan_theta_xh(&p, h, t).unwrap();
            assert_eq!(trans_cdf_tan(&p, &trans(0.0, h), t).unwrap(), want);
            assert_eq!(refl_cdf_tan(&p, &refl(0.0, h), t).unwrap(), want);
        }
    }
}

#[test]
fn transmissive_pdf_normalizes() {
    let spec = QuadratureSpec::with_tolerances(1e-12, 1e-15);
    for (l, m, x, h) in [(1.0, 1.0, 1.0, 1.0), (0.6, 1.3, 0.7, 2.1), (2.0, 0.5, 3.0, 0.4)] {
        let p = env(l, m);
        let c = trans(x, h);
        let total = integrate(|t| trans_pdf_tan(&p, &c, t).unwrap(), 0.0, h / x, &spec)
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-8, "{total}");
        let step = 1e-6;
        for i in 1..40 {
            let t = i as f64 * h / x / 40.0;
            let fd = (trans_cdf_tan(&p, &c, t + step).unwrap() - trans_cdf_tan(&p, &c, t - step).unwrap())
                / (2.0 * step);
            let pdf = trans_pdf_tan(&p, &c, t).unwrap();
            assert!((fd - pdf).abs() <= 1e-5 * pdf + 1e-8, "t={t}: {fd} vs {pdf}");
        }
    }
}

#[test]
fn transmissive_moments() {
    let p = env(1.0, 1.0);
    let c = trans(1.0, 1.0);
    assert_eq!(trans_moment(&p, &c, 0).unwrap(), 1.0);
    // high-precision quadrature of t^k times the density
    let m1 = trans_moment(&p, &c, 1).unwrap();
    let m2 = trans_moment(&p, &c, 2).unwrap();
    assert!((m1 - 0.403_601_857_338_046_2).abs() < 1e-10, "{m1}");
    assert!((m2 - 0.219_402_615_438_165_7).abs() < 1e-10, "{m2}");
    let m2b = trans_moment(&env(0.6, 1.3), &trans(0.7, 2.1), 2).unwrap();
    assert!((m2b - 0.086_611_089_522_324_34).abs() < 1e-10);
    let spec = QuadratureSpec::with_tolerances(1e-12, 1e-15);
    for k in 1..4 {
        let direct = integrate(|t| t.powi(k) * trans_pdf_tan(&p, &c, t).unwrap(), 0.0, 1.0, &spec)
            .unwrap()
            .value;
        let closed = trans_moment(&p, &c, k as u32).unwrap();
        assert!((direct - closed).abs() < 1e-6 * closed);
    }
    assert_eq!(trans_moment(&p, &trans(0.0, 1.0), 1).unwrap(), f64::INFINITY);
}

#[test]
fn inversion_sampler_matches_moments() {
    let p = env(0.6, 1.3);
    let c = trans(0.7, 2.1);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 100_000;
    let draws: Vec<f64> = (0..n).map(|_| sample_trans_tan(&p, &c, &mut rng).unwrap()).collect();
    assert!(draws.iter().all(|&t| t > 0.0 && t <= 3.0));
    let mean = draws.iter().sum::<f64>() / n as f64;
    let m1 = trans_moment(&p, &c, 1).unwrap();
    let sd = ((trans_moment(&p, &c, 2).unwrap() - m1 * m1) / n as f64).sqrt();
    assert!((mean - m1).abs() < 4.0 * sd, "{mean} vs {m1}");
}

#[test]
fn conditional_means() {
    let p = env(1.0, 1.0);
    // high-precision quadrature references; the published 4-digit values are
    // 0.3669, 0.2714, 0.2249 and 0.4272, 0.2505, 0.2068
    let t_cases = [
        (1.0, 1.0, 0.366_994_615_223_461_2),
        (1.0, 2.0, 0.271_456_935_342_793_95),
        (2.0, 2.0, 0.224_970_150_500_585_5),
    ];
    for (x, h, want) in t_cases {
        let got = trans_angle_distribution(&p, &trans(x, h)).unwrap().mean().unwrap();
        assert!((got - want).abs() < 1e-8, "({x},{h}): {got}");
    }
    let r_cases = [
        (-1.0, 1.0, 0.427_252_396_097_412_8),
        (-1.0, 2.0, 0.250_520_339_392_157_2),
        (-2.0, 2.0, 0.206_852_752_655_931_74),
    ];
    for (x, h, want) in r_cases {
        let got = refl_angle_distribution(&p, &refl(x, h)).unwrap().mean().unwrap();
        assert!((got - want).abs() < 1e-8, "({x},{h}): {got}");
    }
}

#[test]
fn surfaces_see_more_sky_than_the_user() {
    let p = env(1.0, 1.0);
    let ground = mean_theta(&p, AngleVariant::MM).unwrap();
    for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for h in [0.1, 0.5, 1.0, 2.0, 5.0] {
            assert!(conditional_mean(&p, &trans(x, h)).unwrap() < ground);
            assert!(conditional_mean(&p, &refl(-x, h)).unwrap() < ground);
        }
    }
    let d = trans_angle_distribution(&p, &trans(1.0, 1.0)).unwrap();
    let g = crate::analytic::AngleDistribution::new(p, AngleVariant::MM).unwrap();
    for i in 0..300 {
        let phi = i as f64 * FRAC_PI_2 / 300.0;
        assert!(d.cdf(phi).unwrap() >= g.cdf(phi).unwrap());
    }
}

#[test]
fn reflective_limits() {
    let p = env(1.0, 1.0);
    let c = refl(-1.0, 1.0);
    assert_eq!(refl_cdf_tan(&p, &c, f64::INFINITY).unwrap(), 1.0);
    assert!(refl_cdf_tan(&p, &c, 50.0).unwrap() > 1.0 - 1e-12);
    assert_eq!(refl_cdf_tan(&p, &c, 0.0).unwrap(), 0.0);
    assert!(RisCondition::reflective(0.5, 1.0).is_err());
    assert!(RisCondition::transmissive(-0.5, 1.0).is_err());
    assert!(RisCondition::transmissive(0.5, 0.0).is_err());
    assert!(refl_cdf_tan(&p, &trans(1.0, 1.0), 1.0).is_err());
    assert!(trans_cdf_tan(&p, &c, 1.0).is_err());
}

#[test]
fn deconditioned_means_match_oracle() {
    // nested adaptive quadrature computed independently (μ = 1, λ = ρ)
    let cases = [(0.6, DECOND_06), (0.35, DECOND_035), (0.05, DECOND_005)];
    for (rho, (want_t, want_r)) in cases {
        let p = env(rho, 1.0);
        let t = deconditioned_mean(&p, RisMode::Transmissive).unwrap();
        let r = deconditioned_mean(&p, RisMode::Reflective).unwrap();
        assert!((t - want_t).abs() < 1e-7 * want_t.max(0.1), "ρ={rho} T: {t} vs {want_t}");
        assert!((r - want_r).abs() < 1e-7 * want_r.max(0.1), "ρ={rho} R: {r} vs {want_r}");
    }
}

const DECOND_06: (f64, f64) = (0.194_777_080_790_698_94, 0.221_779_432_129_212_1);
const DECOND_035: (f64, f64) = (0.123_125_198_966_623_56, 0.145_409_553_412_141_85);
const DECOND_005: (f64, f64) = (0.019_745_303_941_841_087, 0.025_448_859_790_092_395);

#[test]
fn both_deconditioning_routes_agree() {
    let p = env(0.6, 1.0);
    for mode in [RisMode::Transmissive, RisMode::Reflective] {
        let fast = deconditioned_mean(&p, mode).unwrap();
        let slow = deconditioned_mean_nested(&p, mode).unwrap();
        assert!((fast - slow).abs() < 1e-8, "{mode}: {fast} vs {slow}");
    }
}

#[test]
fn height_conditional_law_is_the_offset_average() {
    let p = env(0.6, 1.3);
    let rho = p.rho();
    let spec = QuadratureSpec::with_tolerances(1e-12, 1e-15);
    for h in [0.05, 0.7, 2.0, 6.0] {
        for t in [0.01, 0.2, 1.0, 5.0] {
            for mode in [RisMode::Transmissive, RisMode::Reflective] {
                let avg = integrate(
                    |r| {
                        let cond = RisCondition::new(mode, if mode == RisMode::Transmissive { h * r } else { -h * r }, h).unwrap();
                        let f = AngleDistribution::new(p, cond.variant()).unwrap().cdf_tan(t).unwrap();
                        rho * (-rho * r).exp() * f
                    },
                    0.0,
                    f64::INFINITY,
                    &spec,
                )
                .unwrap()
                .value;
                let got = height_conditional_cdf_tan(&p, mode, h, t).unwrap();
                assert!((got - avg).abs() < 1e-10, "{mode} h={h} t={t}: {got} vs {avg}");
            }
        }
    }
}

#[test]
fn gains_vanish_in_open_terrain() {
    for mode in [RisMode::Transmissive, RisMode::Reflective] {
        let mut last = f64::INFINITY;
        for rho in [1e-2, 1e-3, 1e-4, 1e-5] {
            let g = angular_gains(&env(rho, 1.0), mode, GainMethod::Quadrature).unwrap();
            assert!(g.gamma1 >= 1.0 && g.gamma1 < last, "{g:?}");
            assert!(g.gamma2.is_none());
            last = g.gamma1;
        }
        assert!(last < 1.0 + 1e-4);
        let p = env(1e-5, 1.0);
        let mc = angular_gains(&p, mode, GainMethod::MonteCarlo { n: 2000, seed: 1 }).unwrap();
        assert!(mc.gamma2.unwrap() >= 1.0 && mc.gamma2.unwrap() < 1.01, "{mc:?}");
    }
}

#[test]
fn quadrature_and_monte_carlo_gains_agree() {
    let p = env(0.6, 1.0);
    for mode in [RisMode::Transmissive, RisMode::Reflective] {
        let q = angular_gains(&p, mode, GainMethod::Quadrature).unwrap();
        let mc = angular_gains(&p, mode, GainMethod::MonteCarlo { n: 100_000, seed: 7 }).unwrap();
        let se = mc.gamma1_stderr.unwrap();
        assert!((q.gamma1 - mc.gamma1).abs() < 4.0 * se, "{mode}: {} vs {} ± {se}", q.gamma1, mc.gamma1);
        assert!(mc.gamma1 > 1.0 && mc.gamma2.unwrap() > mc.gamma1);
        assert!(!mc.low_sample_warning);
    }
}

#[test]
fn small_monte_carlo_runs_are_flagged() {
    let p = env(0.6, 1.0);
    let g = angular_gains(&p, RisMode::Transmissive, GainMethod::MonteCarlo { n: 100, seed: 1 }).unwrap();
    assert!(g.low_sample_warning);
    assert_eq!(g.samples, 100);
    assert!(angular_gains(&p, RisMode::Transmissive, GainMethod::MonteCarlo { n: 1, seed: 1 }).is_err());
}

#[test]
fn monte_carlo_is_reproducible() {
    let p = env(0.35, 1.0);
    let a = sample_angle_pairs(&p, RisMode::Reflective, 500, 3).unwrap();
    let b = sample_angle_pairs(&p, RisMode::Reflective, 500, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|s| s.x < 0.0 && s.h > 0.0 && s.index_k >= 1));
    let t = sample_angle_pairs(&p, RisMode::Transmissive, 500, 3).unwrap();
    // same right skyline, same user angle
    for (r, t) in a.iter().zip(&t) {
        assert_eq!(r.theta, t.theta);
        assert!(t.theta_ris <= (t.h / t.x).atan());
    }
}

#[test]
fn gain_curve_rows() {
    let rows = gain_curve(&[0.1, 0.5], 2000, 9).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].gamma1_t > rows[0].gamma1_t);
    assert!(rows.iter().all(|r| r.mc_stderr > 0.0 && r.gamma2_r >= 1.0));
}

#[test]
fn mode_parsing() {
    assert_eq!("trans".parse::<RisMode>().unwrap(), RisMode::Transmissive);
    assert_eq!("Reflective".parse::<RisMode>().unwrap(), RisMode::Reflective);
    assert!("hybrid".parse::<RisMode>().is_err());
    assert_eq!(RisMode::Reflective.to_string(), "refl");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ris_cdfs_are_monotone_with_unit_top(
        l in 0.05f64..3.0, m in 0.05f64..3.0, x in 0.01f64..5.0, h in 0.01f64..5.0,
    ) {
        let p = env(l, m);
        for cond in [trans(x, h), refl(-x, h)] {
            let d = AngleDistribution::new(p, cond.variant()).unwrap();
            let (_, hi) = d.support();
            let mut last = 0.0;
            for i in 0..400 {
                let phi = i as f64 * hi / 400.0;
                let f = d.cdf(phi).unwrap();
                prop_assert!(f >= last - 1e-14);
                last = f;
            }
            let top = d.cdf(hi.min(FRAC_PI_2 - 1e-12)).unwrap();
            prop_assert!((top - 1.0).abs() < 1e-9 || cond.mode == RisMode::Reflective);
        }
    }
}
