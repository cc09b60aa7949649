use proptest::prelude::*;

use super::*;
use crate::numerics::regularized_upper_gamma;

fn env(lambda: f64, mu: f64) -> EnvParams {
    EnvParams::new(lambda, mu).unwrap()
}

fn ulp(x: f64) -> f64 {
    f64::from_bits(x.abs().to_bits() + 1) - x.abs()
}

#[test]
fn same_seed_same_realization() {
    let p = env(0.7, 1.3);
    for model in [ModelKind::MM, ModelKind::MD, ModelKind::DM, ModelKind::Weibull] {
        let a = sample_realization(&p, model, 0.0, 0.05, 1e-8, 42).unwrap();
        let b = sample_realization(&p, model, 0.0, 0.05, 1e-8, 42).unwrap();
        let c = sample_realization(&p, model, 0.0, 0.05, 1e-8, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.buildings, c.buildings);
    }
}

#[test]
fn grid_spacing_is_exact() {
    let p = env(0.37, 1.0);
    let r = sample_realization(&p, ModelKind::DM, 0.0, 0.02, 1e-8, 7).unwrap();
    assert!(r.len() > 100);
    assert!(r.buildings[0].x > 0.0 && r.buildings[0].x < 1.0 / 0.37);
    for w in r.buildings.windows(2) {
        let gap = w[1].x - w[0].x;
        assert!((gap - 1.0 / 0.37).abs() <= 4.0 * ulp(w[1].x), "gap {gap}");
    }
}

#[test]
fn deterministic_heights_are_constant() {
    let p = env(1.0, 2.5);
    let r = sample_realization(&p, ModelKind::MD, 0.0, 0.05, 1e-8, 3).unwrap();
    assert!(r.buildings.iter().all(|b| b.h == 0.4));
}

#[test]
fn window_counts_are_poisson() {
    // counts in (5, 10] with λ = 1 should be Poisson(5)
    let p = env(1.0, 1.0);
    let cfg = SamplingConfig::new(0.5, 1e-8).unwrap();
    let n = 10_000;
    let mut hist = [0usize; 12];
    for seed in 0..n {
        let r = sample_realization_with(&p, ModelKind::MM, 0.0, &cfg, seed).unwrap();
        assert!(r.x_max > 10.0);
        let c = r.buildings.iter().filter(|b| b.x > 5.0 && b.x <= 10.0).count();
        hist[c.min(11)] += 1;
    }
    let m = 5.0f64;
    let mut pmf = Vec::new();
    let mut term = (-m).exp();
    for k in 0..11 {
        pmf.push(term);
        term *= m / (k as f64 + 1.0);
    }
    pmf.push(1.0 - pmf.iter().sum::<f64>());
    // pool 0 and 1 so every expected count exceeds 5
    let observed = [hist[0] + hist[1]].into_iter().chain(hist[2..].iter().copied());
    let expected = [pmf[0] + pmf[1]].into_iter().chain(pmf[2..].iter().copied());
    let stat: f64 = observed
        .zip(expected)
        .map(|(o, e)| {
            let e = e * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = 10.0;
    let p_value = regularized_upper_gamma(dof / 2.0, stat / 2.0).unwrap();
    assert!(p_value > 0.01, "chi2 {stat}, p {p_value}");
}

#[test]
fn exponential_truncation_matches_closed_form() {
    let p = env(0.8, 1.7);
    let cfg = SamplingConfig::new(0.03, 1e-9).unwrap();
    for h in [0.0, 0.5, 2.0] {
        let got = truncation_distance(&p, ModelKind::MM, h, &cfg).unwrap();
        let (l, m, t) = (0.8f64, 1.7f64, 0.03f64);
        let want = ((l / (m * t * 1e-9)).ln() - m * h) / (m * t);
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }
}

#[test]
fn truncation_beyond_cap_is_an_error() {
    let p = env(1.0, 1e-6);
    let err = truncation_distance(&p, ModelKind::MM, 0.0, &SamplingConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Truncation { .. }));
}

#[test]
fn appending_lower_buildings_keeps_the_angle() {
    let p = env(1.0, 1.0);
    let mut r = sample_realization(&p, ModelKind::MM, 0.0, 0.05, 1e-8, 11).unwrap();
    let before = blockage_angle(&r, Observer::ORIGIN).unwrap();
    let t = before.tan_theta();
    let last = r.buildings.last().unwrap().x;
    for j in 1..50 {
        let x = last + j as f64;
        r.buildings.push(Building { x, h: 0.999 * t * x });
    }
    let after = blockage_angle(&r, Observer::ORIGIN).unwrap();
    assert_eq!(before.theta, after.theta);
    assert_eq!(before.index_k, after.index_k);
}

#[test]
fn ties_go_to_the_nearest_building() {
    let p = env(1.0, 1.0);
    let mut r = sample_realization(&p, ModelKind::MM, 0.0, 0.05, 1e-8, 1).unwrap();
    r.buildings = vec![
        Building { x: 1.0, h: 0.5 },
        Building { x: 2.0, h: 2.0 },
        Building { x: 4.0, h: 4.0 },
    ];
    let res = blockage_angle(&r, Observer::ORIGIN).unwrap();
    assert_eq!(res.index_k, 2);
    assert_eq!(res.x_plus, 2.0);
    assert!((res.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
}

#[test]
fn nothing_above_an_elevated_observer() {
    let p = env(1.0, 1.0);
    let r = sample_realization(&p, ModelKind::MD, 5.0, 0.05, 1e-8, 2).unwrap();
    let res = blockage_angle(&r, Observer::at_height(5.0)).unwrap();
    assert_eq!(res.theta, 0.0);
    assert_eq!(res.index_k, 0);
    assert!(res.truncation_warning);
}

#[test]
fn bad_inputs_are_rejected() {
    let p = env(1.0, 1.0);
    let mut r = sample_realization(&p, ModelKind::MM, 0.0, 0.05, 1e-8, 2).unwrap();
    assert!(matches!(
        blockage_angle(&r, Observer::new(1e6, 0.0)),
        Err(Error::ObserverPlacement { .. })
    ));
    r.buildings.clear();
    assert!(matches!(blockage_angle(&r, Observer::ORIGIN), Err(Error::EmptyRealization)));
    assert!(sample_realization(&p, ModelKind::MM, 0.0, 0.0, 1e-8, 1).is_err());
    assert!(sample_realization(&p, ModelKind::MM, 0.0, 0.1, 1.5, 1).is_err());
    assert!(sample_realization(&p, ModelKind::MM, -1.0, 0.1, 1e-8, 1).is_err());
}

#[test]
fn mirror_preserves_the_angle() {
    let p = env(0.6, 1.0);
    for seed in 0..50 {
        let r = sample_realization(&p, ModelKind::MM, 0.0, 0.05, 1e-8, seed).unwrap();
        let m = mirror_realization(&r);
        assert_eq!(m.side, Side::Negative);
        assert!(m.buildings.iter().all(|b| b.x < 0.0));
        let a = blockage_angle(&r, Observer::ORIGIN).unwrap();
        let b = blockage_angle(&m, Observer::ORIGIN).unwrap();
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.x_plus, -b.x_plus);
        assert_eq!(mirror_realization(&m), r);
    }
}

#[test]
fn stream_is_a_prefix_of_the_window() {
    let p = env(1.0, 1.0);
    let cfg = SamplingConfig::new(0.05, 1e-8).unwrap();
    for model in [ModelKind::MM, ModelKind::DM, ModelKind::Weibull, ModelKind::MD] {
        for seed in 0..30 {
            let r = sample_realization_with(&p, model, 0.0, &cfg, seed).unwrap();
            let full = blockage_angle(&r, Observer::ORIGIN).unwrap();
            let mut sky = Skyline::new(p, model, replication_rng(seed, 0, Lane::Primary));
            let best = sky.steepest_from(Observer::ORIGIN, 0, &cfg).unwrap();
            assert!(sky.buildings().len() <= r.len());
            assert_eq!(sky.buildings(), &r.buildings[..sky.buildings().len()]);
            let (i, s) = best.unwrap();
            assert_eq!(i + 1, full.index_k, "{model} seed {seed}");
            assert_eq!(s.atan(), full.theta);
        }
    }
}

#[test]
fn csv_has_one_row_per_building() {
    let p = env(1.0, 1.0);
    let r = sample_realization(&p, ModelKind::DM, 0.0, 0.2, 1e-6, 5).unwrap();
    let mut out = Vec::new();
    r.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,x,h"));
    assert_eq!(lines.count(), r.len());
}

fn first_crossing_beyond(seed: u64, p: &EnvParams, model: ModelKind, cfg: &SamplingConfig) -> bool {
    let r = sample_realization_with(p, model, 0.0, cfg, seed).unwrap();
    let mut sky = Skyline::new(*p, model, replication_rng(seed, 0, Lane::Primary));
    let mut i = r.len();
    loop {
        let b = sky.get(i);
        if b.x > 20.0 * r.x_max {
            return false;
        }
        if b.x > r.x_max && b.h > cfg.t_min * b.x {
            return true;
        }
        i += 1;
    }
}

#[test]
fn truncation_bound_holds_empirically() {
    let p = env(1.0, 1.0);
    let eps = 0.05;
    let cfg = SamplingConfig::new(0.2, eps).unwrap();
    let n = 20_000u64;
    for model in [ModelKind::MM, ModelKind::DM, ModelKind::Weibull] {
        let misses = (0..n).filter(|&s| first_crossing_beyond(s, &p, model, &cfg)).count();
        let frac = misses as f64 / n as f64;
        let sd = (eps * (1.0 - eps) / n as f64).sqrt();
        assert!(frac <= eps + 4.0 * sd, "{model}: {frac}");
        if model == ModelKind::MM {
            // the bound is exact for the Poisson process with exponential heights
            let exact = 1.0 - (-eps).exp();
            assert!((frac - exact).abs() < 4.0 * sd, "{frac} vs {exact}");
        }
    }
}

#[test]
fn ground_cdf_at_unit_tangent() {
    // P[tan θ ≤ 1] = e^{-ρ} for exponential heights
    let p = env(0.5, 1.0);
    let cfg = SamplingConfig::default();
    let n = 20_000u64;
    let hits: usize = replicate(n as usize, |rep| {
        let mut sky = Skyline::new(p, ModelKind::MM, replication_rng(99, rep, Lane::Primary));
        Ok(sky.steepest_from(Observer::ORIGIN, 0, &cfg)?.is_none_or(|(_, s)| s <= 1.0) as usize)
    })
    .unwrap()
    .into_iter()
    .sum();
    let frac = hits as f64 / n as f64;
    let want = (-0.5f64).exp();
    let sd = (want * (1.0 - want) / n as f64).sqrt();
    assert!((frac - want).abs() < 4.0 * sd, "{frac} vs {want}");
}

#[test]
fn replication_is_thread_count_independent() {
    let p = env(1.0, 1.0);
    let cfg = SamplingConfig::default();
    let run = || {
        replicate(200, |rep| {
            let mut sky = Skyline::new(p, ModelKind::MM, replication_rng(5, rep, Lane::Primary));
            Ok(sky.steepest_from(Observer::ORIGIN, 0, &cfg)?.map(|(_, s)| s))
        })
        .unwrap()
    };
    let a = run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(run);
    assert_eq!(a, b);
}

#[test]
fn lanes_are_distinct_streams() {
    use rand::Rng;
    let a: u64 = replication_rng(1, 0, Lane::Primary).random();
    let b: u64 = replication_rng(1, 0, Lane::Mirror).random();
    let c: u64 = replication_rng(1, 1, Lane::Primary).random();
    assert!(a != b && a != c && b != c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocker_dominates_every_rooftop(
        seed in any::<u64>(),
        lambda in 0.05f64..5.0,
        mu in 0.05f64..5.0,
        model_ix in 0usize..4,
        h_obs in 0.0f64..2.0,
    ) {
        let model = [ModelKind::MM, ModelKind::MD, ModelKind::DM, ModelKind::Weibull][model_ix];
        let p = env(lambda, mu);
        let r = sample_realization(&p, model, h_obs, 0.1, 1e-6, seed).unwrap();
        prop_assume!(!r.is_empty());
        let obs = Observer::at_height(h_obs);
        let res = blockage_angle(&r, obs).unwrap();
        prop_assert!(res.theta >= 0.0 && res.theta < std::f64::consts::FRAC_PI_2);
        prop_assert!(res.index_k <= r.len());
        let t = res.tan_theta();
        for (i, b) in r.buildings.iter().enumerate() {
            let s = (b.h - h_obs) / b.x;
            prop_assert!(s <= t * (1.0 + 1e-12));
            if i + 1 < res.index_k {
                prop_assert!(s < t);
            }
        }
    }
}
