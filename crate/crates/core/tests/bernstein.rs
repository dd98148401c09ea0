use lsmap_core::bernstein::{
    kappa_qp, kappa_qp_deriv0, phi1_double_integral_oracle, phi_qp, phi_qp_deriv0, FactorIndices, IndexKind,
};
use lsmap_core::{QuadConfig, StableParams, C64};

fn p(a: f64, r: f64) -> StableParams {
    StableParams::new(a, r).unwrap()
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn tight() -> QuadConfig {
    QuadConfig::new(1e-13, 1e-16, 14).unwrap()
}

// Values from mpmath at 30 digits, integrating in the x variable.
#[test]
fn frozen_high_precision_values() {
    let cfg = QuadConfig::default();
    let cases: [(f64, f64, IndexKind, C64, bool, C64); 4] = [
        (0.8, 0.5, IndexKind::ArPlusOneArh, real(1.0), true, real(0.660_653_199_838_824_8)),
        (
            0.8,
            0.4,
            IndexKind::ArPlusOneArh,
            C64::new(0.7, -1.1),
            true,
            C64::new(0.483_379_473_531_555_6, -0.328_243_833_447_643_85),
        ),
        (1.5, 0.5, IndexKind::ArPlusOneArh, real(1.0), false, real(1.811_028_777_098_620_7)),
        (
            1.7,
            0.45,
            IndexKind::ArhArPlusOne,
            C64::new(0.2, 3.0),
            false,
            C64::new(0.234_664_892_384_170_23, 0.060_473_713_698_576_707),
        ),
    ];
    for (a, r, kind, s, is_kappa, expected) in cases {
        let params = p(a, r);
        let idx = FactorIndices::of(&params, kind);
        let got = if is_kappa {
            kappa_qp(&params, &idx, s, &cfg).unwrap()
        } else {
            phi_qp(&params, &idx, s, &cfg).unwrap()
        };
        assert!((got - expected).norm() / expected.norm() < 1e-9, "{a} {r} {kind:?} {s}: {got}");
    }

    let params = p(0.8, 0.4);
    let d = kappa_qp_deriv0(&params, &FactorIndices::of(&params, IndexKind::ArhArPlusOne), &cfg).unwrap();
    assert!((d - 0.458_749_760_496_084_33).abs() < 1e-9 * d);
    let params = p(1.7, 0.45);
    let d = phi_qp_deriv0(&params, &FactorIndices::of(&params, IndexKind::ArArhPlusOne), &cfg).unwrap();
    assert!((d - 0.439_819_333_838_108_7).abs() < 1e-9 * d);
}

/// Composite trapezoid rule with `n` panels on each half of (0,1), after
/// the substitutions u = w^{1/left_power} on (0,1/2) and
/// 1-u = y^{1/right_power} on (1/2,1), which make the endpoint singularities
/// u^{left_power-1} and (1-u)^{right_power-1} disappear.
fn trapezoid_oracle(
    f: impl Fn(f64, f64) -> f64,
    left_power: f64,
    right_power: f64,
    n: usize,
) -> f64 {
    let kl = 1.0 / left_power;
    let kr = 1.0 / right_power;
    let left = |w: f64| {
        // The singular endpoint value is its limit, approached closely.
        let w = w.max(1e-12);
        let u = w.powf(kl);
        f(u, 1.0 - u) * kl * w.powf(kl - 1.0)
    };
    let right = |y: f64| {
        let y = y.max(1e-12);
        let uc = y.powf(kr);
        f(1.0 - uc, uc) * kr * y.powf(kr - 1.0)
    };
    let trap = |g: &dyn Fn(f64) -> f64, b: f64| {
        let h = b / n as f64;
        let mut s = 0.5 * (g(0.0) + g(b));
        for k in 1..n {
            s += g(k as f64 * h);
        }
        s * h
    };
    trap(&left, 0.5f64.powf(left_power)) + trap(&right, 0.5f64.powf(right_power))
}

#[test]
fn kappa_against_brute_force_trapezoid() {
    let (a, r) = (0.8, 0.5);
    let params = p(a, r);
    let idx = FactorIndices::of(&params, IndexKind::ArPlusOneArh);
    let (ar, arh) = (params.ar(), params.arh());
    // At s = 1 the integrand is αρ u^{α-1} (1-u)^{-αρ} (1+u)^{-αρ̂}.
    let f = |u: f64, uc: f64| ar * u.powf(a - 1.0) * uc.powf(-ar) * (1.0 + u).powf(-arh);
    let oracle = trapezoid_oracle(f, a, 1.0 - ar, 1_000_000);
    let got = kappa_qp(&params, &idx, real(1.0), &QuadConfig::default()).unwrap().re;
    assert!((got - oracle).abs() / oracle < 1e-8, "{got} vs {oracle}");
}

#[test]
fn phi_against_brute_force_trapezoid() {
    let (a, r) = (1.5, 0.5);
    let params = p(a, r);
    let idx = FactorIndices::of(&params, IndexKind::ArPlusOneArh);
    let (ar, arh) = (params.ar(), params.arh());
    let c = idx.coefficient();
    // At s = 1, (1 - v) times the curly-bracket density.
    let f = |v: f64, vc: f64| {
        c * vc.powf(-ar) * (1.0 + v).powf(-arh) - 0.5 * (a - 1.0) * vc.powf(1.0 - ar) * (1.0 + v).powf(-arh)
    };
    let oracle = trapezoid_oracle(f, 1.0, 1.0 - ar, 1_000_000);
    let got = phi_qp(&params, &idx, real(1.0), &QuadConfig::default()).unwrap().re;
    assert!((got - oracle).abs() / oracle < 1e-8, "{got} vs {oracle}");
}

fn richardson(g: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d = |h: f64| g(h) / h;
    let r1 = 2.0 * d(h / 2.0) - d(h);
    let r2 = 2.0 * d(h / 4.0) - d(h / 2.0);
    (4.0 * r2 - r1) / 3.0
}

#[test]
fn means_match_richardson_difference_quotients() {
    let cfg = tight();
    for (a, r) in [(0.8, 0.5), (0.6, 0.3)] {
        let params = p(a, r);
        for kind in IndexKind::ALL {
            let idx = FactorIndices::of(&params, kind);
            let exact = kappa_qp_deriv0(&params, &idx, &cfg).unwrap();
            assert!(exact > 0.0 && exact.is_finite());
            let fd = richardson(|h| kappa_qp(&params, &idx, real(h), &cfg).unwrap().re, 1e-2);
            assert!((fd - exact).abs() / exact < 1e-6, "kappa {a} {r} {kind:?}: {fd} vs {exact}");
        }
    }
    let params = p(1.5, 0.5);
    for kind in IndexKind::ALL {
        let idx = FactorIndices::of(&params, kind);
        let exact = phi_qp_deriv0(&params, &idx, &cfg).unwrap();
        assert!(exact > 0.0 && exact.is_finite());
        let fd = richardson(|h| phi_qp(&params, &idx, real(h), &cfg).unwrap().re, 1e-2);
        assert!((fd - exact).abs() / exact < 1e-6, "phi {kind:?}: {fd} vs {exact}");
    }
}

#[test]
fn means_are_mirror_symmetric_at_half() {
    let cfg = QuadConfig::default();
    let params = p(1.5, 0.5);
    for kind in [IndexKind::ArPlusOneArh, IndexKind::ArhArPlusOne] {
        let a = phi_qp_deriv0(&params, &FactorIndices::of(&params, kind), &cfg).unwrap();
        let b = phi_qp_deriv0(&params, &FactorIndices::of(&params, kind.mirror()), &cfg).unwrap();
        assert!((a - b).abs() <= 1e-14 * a);
    }
}

#[test]
fn analytic_continuation_off_the_real_axis() {
    let cfg = tight();
    let params = p(0.7, 0.4);
    let idx = FactorIndices::of(&params, IndexKind::ArhPlusOneAr);
    let (x, y, h) = (1.5, 1e-3, 1e-4);
    let k = |s: C64| kappa_qp(&params, &idx, s, &cfg).unwrap();
    let deriv = (k(real(x + h)) - k(real(x - h))) / (2.0 * h);
    let taylor = k(real(x)) + C64::new(0.0, y) * deriv;
    let direct = k(C64::new(x, y));
    assert!((direct - taylor).norm() < 10.0 * y * y, "{direct} vs {taylor}");
}

#[test]
fn double_integral_route_vanishes_at_small_lambda() {
    let cfg = QuadConfig::default();
    let params = p(0.8, 0.5);
    let small = phi1_double_integral_oracle(&params, 1e-8, &cfg).unwrap();
    assert!(small.abs() < 1e-7);
    let at_two = phi1_double_integral_oracle(&params, 2.0, &cfg).unwrap();
    assert!(at_two > 0.0);
}
