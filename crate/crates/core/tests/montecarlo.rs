use std::collections::HashSet;
use std::f64::consts::PI;

use lsmap_core::exit_laws::{
    cramer_overshoot_signed_cdf, cramer_overshoot_tail, two_sided_conditional_cdf, two_sided_exit_probability,
};
use lsmap_core::montecarlo::*;
use lsmap_core::special::ln_gamma;
use lsmap_core::{CramerRegime, Error, ExitSide, QuadConfig, StableParams};
use rand::Rng;

fn p(a: f64, r: f64) -> StableParams {
    StableParams::new(a, r).unwrap()
}

fn cfg(n_paths: u64, time_step: f64, seed: u64) -> MCConfig {
    MCConfig {
        n_paths,
        time_step,
        seed,
        ..MCConfig::default()
    }
}

fn draws(params: &StableParams, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_stream(seed, 0);
    let s = StableSampler::new(params);
    (0..n).map(|_| s.sample(&mut rng)).collect()
}

#[test]
fn symmetric_increments_have_sign_mean_zero() {
    for a in [0.7, 1.0, 1.5] {
        let xs = draws(&p(a, 0.5), 1_000_000, 11);
        let m = xs.iter().map(|x| x.signum()).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 3.0 / (xs.len() as f64).sqrt(), "alpha {a}: {m}");
    }
}

#[test]
fn positivity_parameter_is_probability_of_positive_increment() {
    for (a, r) in [(0.7, 0.3), (0.7, 0.8), (1.5, 0.4), (1.8, 0.55)] {
        let xs = draws(&p(a, r), 1_000_000, 12);
        let est = MCEstimate::proportion(xs.iter().filter(|&&x| x >= 0.0).count() as u64, xs.len() as u64);
        assert!(est.z_score(r) < 3.0, "{a} {r}: {est:?}");
    }
}

#[test]
fn upper_tail_follows_levy_density() {
    // P(X₁ > K) K^α → c₊/α with c₊ = Γ(1+α) sin(παρ)/π.
    for (a, r) in [(0.8, 0.4), (1.5, 0.5)] {
        let params = p(a, r);
        let xs = draws(&params, 1_000_000, 13);
        let n = xs.len() as f64;
        let tail = |k: f64| xs.iter().filter(|&&x| x > k).count() as f64 / n;
        let (k1, k2) = (20.0, 80.0);
        let slope = (tail(k2) / tail(k1)).ln() / (k2 / k1).ln();
        assert!((slope + a).abs() < 0.1 * a, "{a} {r}: slope {slope}");
        let c_plus = ln_gamma(1.0 + a).unwrap().exp() * params.sin_ar() / PI;
        let level = tail(k1) * k1.powf(a);
        assert!((level - c_plus / a).abs() < 0.1 * c_plus / a, "{a} {r}: {level} vs {}", c_plus / a);
    }
}

#[test]
fn increment_scales_like_h_to_one_over_alpha() {
    let params = p(1.5, 0.4);
    let h = 1e-3;
    let mut a = rng_stream(5, 0);
    let mut b = rng_stream(5, 0);
    let s = StableSampler::new(&params);
    for _ in 0..100 {
        let x = sample_stable_increment(&params, h, &mut a).unwrap();
        let y = s.sample(&mut b) * h.powf(1.0 / 1.5);
        assert!((x - y).abs() <= 1e-15 * y.abs());
    }
    assert!(matches!(sample_stable_increment(&params, 0.0, &mut a), Err(Error::Domain(_))));
    assert!(matches!(StableParams::new(1.0, 0.4), Err(Error::Inadmissible(_))));
}

#[test]
fn streams_are_reproducible_and_disjoint() {
    let take = |seed, stream| -> Vec<u64> {
        let mut rng = rng_stream(seed, stream);
        (0..10_000).map(|_| rng.gen()).collect()
    };
    assert_eq!(take(7, 0), take(7, 0));
    let zero: HashSet<u64> = take(7, 0).into_iter().collect();
    assert!(take(7, 1).iter().all(|x| !zero.contains(x)));
    assert_ne!(take(7, 0), take(8, 0));
}

#[test]
fn runs_are_deterministic_across_worker_counts() {
    let params = p(0.8, 0.4);
    let base = MCConfig {
        n_workers: 1,
        ..cfg(3 * BLOCK_PATHS + 5, 1e-3, 21)
    };
    let a = simulate_two_sided_exit(&params, 0.3, &base).unwrap();
    let b = simulate_two_sided_exit(&params, 0.3, &base).unwrap();
    let c = simulate_two_sided_exit(&params, 0.3, &MCConfig { n_workers: 4, ..base }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let edges = linear_edges(0.0, 2.0, 20);
    let hist = |r: &[ExitRecord]| {
        Histogram::build(&overshoots(r, ExitSide::Up), &edges, r.len() as u64, |_, _| Ok(0.0))
            .unwrap()
            .to_csv("")
    };
    assert_eq!(hist(&a), hist(&c));
}

#[test]
fn budget_and_domain_errors() {
    let params = p(0.8, 0.5);
    let tight = MCConfig {
        step_cap: 10,
        ..cfg(10, 1e-4, 1)
    };
    assert!(matches!(simulate_two_sided_exit(&params, 0.0, &tight), Err(Error::Budget(10))));
    assert!(matches!(simulate_two_sided_exit(&params, 1.5, &cfg(10, 1e-3, 1)), Err(Error::Domain(_))));
    assert!(matches!(
        estimate_ladder_overshoot(&p(1.4, 0.5), 5.0, 1, &cfg(10, 1e-3, 1)),
        Err(Error::Regime(_))
    ));
}

#[test]
fn symmetric_start_exits_each_side_equally_often() {
    let recs = simulate_two_sided_exit(&p(1.2, 0.5), 0.0, &cfg(20_000, 1e-3, 31)).unwrap();
    let up = exit_probability(&recs, ExitSide::Up);
    assert!(up.z_score(0.5) < 3.0, "{up:?}");
    assert!(mean_steps(&recs) >= 100.0);
}

// The two-sided exit law from x = 0.3 at α = 0.8, ρ = 1/2, at the stated
// sample size and step.
#[test]
fn two_sided_exit_matches_closed_form() {
    let params = p(0.8, 0.5);
    let x = 0.3;
    let q = QuadConfig::default();
    let recs = simulate_two_sided_exit(&params, x, &cfg(200_000, 1e-4, 41)).unwrap();
    let mass = two_sided_exit_probability(&params, x, ExitSide::Up, &q).unwrap();
    let up = exit_probability(&recs, ExitSide::Up);
    assert!(up.z_score(mass) < 3.0, "{up:?} vs {mass}");
    let ks = ks_one_sample(&overshoots(&recs, ExitSide::Up), |th| {
        two_sided_conditional_cdf(&params, x, th, ExitSide::Up, &q)
    })
    .unwrap();
    assert!(ks <= 0.02, "KS {ks}");
}

#[test]
fn skeleton_bias_shrinks_with_step() {
    // Fixed-step skeleton, where the overshoot bias is visible.
    let params = p(1.4, 0.5);
    let x = 0.3;
    let q = QuadConfig::default();
    let ks = |h: f64| {
        let c = MCConfig {
            barrier_refinement: None,
            ..cfg(20_000, h, 51)
        };
        let recs = simulate_two_sided_exit(&params, x, &c).unwrap();
        ks_one_sample(&overshoots(&recs, ExitSide::Up), |th| {
            two_sided_conditional_cdf(&params, x, th, ExitSide::Up, &q)
        })
        .unwrap()
    };
    let (coarse, fine) = (ks(1e-3), ks(1e-4));
    assert!(fine < coarse, "{coarse} -> {fine}");
}

#[test]
fn exit_law_is_scale_invariant() {
    let params = p(0.9, 0.4);
    let (h, c) = (1e-3, 2.0);
    let unit = simulate_two_sided_exit(&params, 0.3, &cfg(20_000, h, 61)).unwrap();
    let wide = simulate_scaled_exit(&params, 0.3 * c, c, &cfg(20_000, h * c.powf(0.9), 62)).unwrap();
    let signed = |r: &[ExitRecord], w: f64| r.iter().map(|e| e.position / w).collect::<Vec<_>>();
    let t = ks_two_sample(&signed(&unit, 1.0), &signed(&wide, c)).unwrap();
    assert!(t.p_value > 0.01, "{t:?}");
}

#[test]
fn standard_errors_are_honest() {
    let params = p(0.8, 0.5);
    let x = 0.3;
    let target = two_sided_exit_probability(&params, x, ExitSide::Up, &QuadConfig::default()).unwrap();
    let inside = (0..100)
        .filter(|&k| {
            let recs = simulate_two_sided_exit(&params, x, &cfg(1_000, 1e-3, 1000 + k)).unwrap();
            exit_probability(&recs, ExitSide::Up).z_score(target) <= 3.0
        })
        .count();
    assert!(inside >= 99, "{inside} of 100 within 3 sigma");
}

#[test]
fn ladder_overshoot_matches_limit_law() {
    let params = p(0.8, 0.5);
    let q = QuadConfig::default();
    let regime = CramerRegime::BigAlpha;
    let samples = estimate_ladder_overshoot(&params, 5.0, 1, &cfg(100_000, 1e-3, 71)).unwrap();
    let signed: Vec<f64> = samples.iter().map(|s| s.signed()).collect();
    let ks = ks_one_sample(&signed, |s| cramer_overshoot_signed_cdf(&params, s, regime, &q)).unwrap();
    assert!(ks <= 0.03, "KS {ks}");

    let n = samples.len() as u64;
    for j in [1u8, 2] {
        let est = MCEstimate::proportion(samples.iter().filter(|s| s.j == j).count() as u64, n);
        let exact = cramer_overshoot_tail(&params, 0.0, j, regime, &q).unwrap();
        assert!(est.z_score(exact) < 3.0, "state {j}: {est:?} vs {exact}");
    }

    let by_state = |j: u8| samples.iter().filter(|s| s.j == j).map(|s| s.u).collect::<Vec<_>>();
    let t = ks_two_sample(&by_state(1), &by_state(2)).unwrap();
    assert!(t.p_value > 0.01, "{t:?}");
}

// The limit law is claimed not to depend on the starting state; checked by
// starting below the origin and comparing with a start above it.
#[test]
fn ladder_overshoot_forgets_the_starting_state() {
    let params = p(0.6, 0.4);
    let run = |state, seed| {
        estimate_ladder_overshoot(&params, 5.0, state, &cfg(20_000, 1e-3, seed))
            .unwrap()
            .iter()
            .map(|s| s.signed())
            .collect::<Vec<_>>()
    };
    let t = ks_two_sample(&run(1, 81), &run(2, 82)).unwrap();
    assert!(t.p_value > 0.01, "{t:?}");
    let q = QuadConfig::default();
    let ks = ks_one_sample(&run(2, 83), |s| {
        cramer_overshoot_signed_cdf(&params, s, CramerRegime::BigAlpha, &q)
    })
    .unwrap();
    assert!(ks <= 0.03, "KS {ks}");
}
