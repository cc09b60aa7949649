use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::numerics::{integrate, QuadratureSpec};
use crate::ris::{sample_trans_tan, RisCondition};

fn env(lambda: f64, mu: f64) -> EnvParams {
    EnvParams::new(lambda, mu).unwrap()
}

fn scenario(rho: f64, h_nu: f64) -> CoverageScenario {
    CoverageScenario::new(env(rho, 1.0), 1.0, h_nu).unwrap()
}

#[test]
fn direct_view_length() {
    assert_eq!(visible_length(1.0, 1.0, 1.0).unwrap(), 2.0);
    assert_eq!(visible_length(2.0, 4.0, 10.0).unwrap(), 7.0);
    assert!(visible_length(0.0, 1.0, 1.0).is_err());
    assert!(visible_length(1.0, 1.0, -1.0).is_err());
}

#[test]
fn extension_at_low_roofs() {
    let p = env(1.0, 1.0);
    let e = ris_extension(&p, 1e-12, 3.0).unwrap();
    assert!((e - 3.0).abs() < 1e-10);
    let total = expected_ris_length(&p, 1.0, 1.0, 1.0).unwrap();
    assert!((total - (2.0 + std::f64::consts::E)).abs() < 1e-14);
}

#[test]
fn expected_reach_matches_sampling() {
    let p = env(0.6, 1.3);
    let (x, h, big_h) = (0.7, 1.1, 5.0);
    let cond = RisCondition::transmissive(x, h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    let reach: Vec<f64> = (0..n)
        .map(|_| x + big_h / sample_trans_tan(&p, &cond, &mut rng).unwrap())
        .collect();
    let mean = reach.iter().sum::<f64>() / n as f64;
    let var = reach.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let want = expected_ris_length(&p, x, h, big_h).unwrap();
    assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} ± {se}");
    assert!(reach.iter().all(|&r| r >= visible_length(x, h, big_h).unwrap() - 1e-9));
}

#[test]
fn mean_direct_length_case_study() {
    let p = env(0.012, 0.02);
    let hap = CoverageScenario::new(p, 1e4, 5e-5).unwrap();
    let sat = CoverageScenario::new(p, 5e5, 2.3163e-6).unwrap();
    assert!((mean_l(&hap) - 16_833.333_333_333_332).abs() < 1e-8);
    assert!((mean_l(&sat) - 833_500.0).abs() < 1e-6);
    // linear in H with slope μ/λ
    let a = mean_l(&CoverageScenario::new(p, 100.0, 1.0).unwrap());
    let b = mean_l(&CoverageScenario::new(p, 200.0, 1.0).unwrap());
    assert!(((b - a) / 100.0 - 0.02 / 0.012).abs() < 1e-12);
    assert_eq!(mean_big_l(&hap), ExpectedLength::Infinite);
    assert_eq!(mean_big_l(&hap).to_string(), "∞");
    assert_eq!(mean_big_l(&hap).value(), None);
}

#[test]
fn conditional_connectivity() {
    let s = scenario(0.6, 0.6);
    assert!((tau_conditional(&s, 1.0, 1e-300).unwrap() - 0.5).abs() < 1e-15);
    assert!(tau_conditional(&s, 1.0, 800.0).unwrap() == 1.0);
    let mut last = 0.0;
    for h in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
        let t = tau_conditional(&s, 1.0, h).unwrap();
        assert!(t > last && t < 1.0);
        assert_eq!(t, tau_conditional(&s, 123.0, h).unwrap());
        last = t;
    }
    let mut last = 0.0;
    for hn in [0.01, 0.1, 1.0, 10.0] {
        let t = tau_conditional(&scenario(0.6, hn), 1.0, 1.0).unwrap();
        assert!(t > last);
        last = t;
    }
    let p = env(0.6, 1.0);
    let a = CoverageScenario::new(p, 10.0, 0.05).unwrap();
    let b = CoverageScenario::new(p, 1000.0, 0.0005).unwrap();
    assert!((tau_conditional(&a, 1.0, 0.7).unwrap() - tau_conditional(&b, 1.0, 0.7).unwrap()).abs() < 1e-15);
    assert!(tau_conditional(&a, 0.0, 1.0).is_err());
    assert!(CoverageScenario::new(p, 0.0, 1.0).is_err());
    assert!(CoverageScenario::new(p, 1.0, -1.0).is_err());
}

#[test]
fn case_study_connectivity() {
    // published to six decimals
    let cases = [
        (0.012, 1e4, 5e-5, 0.797_838),
        (0.007, 1e4, 5e-5, 0.864_512),
        (0.001, 1e4, 5e-5, 0.976_052),
        (0.012, 5e5, 2.3163e-6, 0.893_742),
        (0.001, 5e5, 2.3163e-6, 0.989_409),
    ];
    for (l, big_h, nu, want) in cases {
        let s = CoverageScenario::new(env(l, 0.02), big_h, nu).unwrap();
        let got = tau_unconditional(&s).unwrap();
        assert!((got - want).abs() < 5e-7, "λ={l}, H={big_h}: {got}");
    }
    // urban satellite case; the closed form, the log form and quadrature agree on
    // 0.933147 (the published table reads 0.935147)
    let s = CoverageScenario::new(env(0.007, 0.02), 5e5, 2.3163e-6).unwrap();
    let got = tau_unconditional(&s).unwrap();
    assert!((got - 0.933_147).abs() < 5e-7, "{got}");
    assert!((tau_unconditional_log_form(&s).unwrap() - got).abs() < 1e-12);
    assert!((tau_unconditional_quadrature(&s).unwrap() - got).abs() < 1e-12);
}

#[test]
fn closed_form_matches_double_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let spec = QuadratureSpec::with_tolerances(1e-11, 1e-14);
    for _ in 0..10 {
        use rand::Rng;
        let rho = 10f64.powf(rng.random_range(-2.0..0.5));
        let hn = 10f64.powf(rng.random_range(-2.0..1.0));
        let s = scenario(rho, hn);
        let j = BlockingJointDensity::new(s.env);
        let inner = |h: f64| {
            integrate(
                |x| {
                    let x = x.max(1e-300);
                    if h == 0.0 {
                        0.0
                    } else {
                        tau_conditional(&s, x, h).unwrap() * j.density(x, h).unwrap()
                    }
                },
                0.0,
                f64::INFINITY,
                &spec,
            )
            .unwrap()
            .value
        };
        let double = integrate(inner, 0.0, f64::INFINITY, &spec).unwrap().value;
        let closed = tau_unconditional(&s).unwrap();
        assert!((closed - double).abs() < 1e-6, "ρ={rho}, Hν={hn}: {closed} vs {double}");
        assert!((tau_unconditional_log_form(&s).unwrap() - closed).abs() < 1e-9);
    }
}

#[test]
fn equal_ratio_and_extreme_ratios() {
    let s = scenario(0.5, 0.5);
    // -Li₂(-1) = π²/12
    let want = std::f64::consts::PI.powi(2) / 12.0;
    assert!((tau_unconditional(&s).unwrap() - want).abs() < 1e-14);
    assert!((tau_unconditional_log_form(&s).unwrap() - want).abs() < 1e-14);
    for (rho, hn) in [(1e-12, 1.0), (1.0, 1e-12), (1e6, 1e-6), (1e-6, 1e6)] {
        let t = tau_unconditional(&scenario(rho, hn)).unwrap();
        assert!(t > 0.0 && t < 1.0, "{t}");
    }
}

#[test]
fn case_study_table() {
    let rows = case_study().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].case, "dense_urban");
    assert!((rows[2].e_l_hap - 202_000.0).abs() < 1e-6);
    assert!((rows[1].e_l_sat - 1_428_857.142_857_142_9).abs() < 1e-4);
    for w in rows.windows(2) {
        assert!(w[0].e_theta > w[1].e_theta);
        assert!(w[0].e_theta_t > w[1].e_theta_t);
        assert!(w[0].tau_hap < w[1].tau_hap);
    }
}

proptest! {
    #[test]
    fn connectivity_grows_with_the_tier(rho in 0.01f64..5.0, a in 0.01f64..10.0, b in 0.01f64..10.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let t_lo = tau_unconditional(&scenario(rho, lo)).unwrap();
        let t_hi = tau_unconditional(&scenario(rho, hi)).unwrap();
        prop_assert!(t_lo > 0.0 && t_hi < 1.0 && t_lo < t_hi);
    }
}
