use std::fmt::Write as _;

use lsmap_core::checks;
use lsmap_core::exit_laws::{
    cramer_overshoot_signed_cdf, cramer_overshoot_tail, hypergeometric_identity_check, two_sided_conditional_cdf,
    two_sided_exit_probability, two_sided_overshoot_cdf,
};
use lsmap_core::map_exponent::{f_circ, f_hat, f_matrix};
use lsmap_core::montecarlo::{
    estimate_ladder_overshoot, exit_probability, ks_one_sample, linear_edges, mean_steps, overshoots,
    simulate_two_sided_exit,
};
use lsmap_core::wiener_hopf::{kappa_hat_matrix, kappa_matrix, ladder_components};
use lsmap_core::{
    CramerRegime, ExitSide, Histogram, IdentityKind, LadderFactor, LadderKind, MCEstimate, Mat2, QuadConfig,
    StableParams, C64,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{CommandConfig, Estimator, RunConfig, Which};
use crate::Failure;

/// What a command produced: the main artefact, an optional side report and
/// whether every check in it passed.
pub struct Outcome {
    pub main: String,
    pub side: Option<String>,
    pub passed: bool,
}

fn csv_header(cfg: &RunConfig) -> String {
    format!("# {}\n", cfg.header())
}

fn push_row(out: &mut String, values: &[f64]) {
    let row: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

fn entries(m: &Mat2) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (k, (i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        out[2 * k] = m[(i, j)].re;
        out[2 * k + 1] = m[(i, j)].im;
    }
    out
}

fn params_of(cfg: &RunConfig) -> StableParams {
    cfg.params.expect("resolved with parameters")
}

pub fn exponent(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let CommandConfig::Exponent { which, z_real, z_imag } = &cfg.command else {
        unreachable!()
    };
    let params = params_of(cfg);
    let mut out = csv_header(cfg);
    out.push_str("z_re,z_im,m11_re,m11_im,m12_re,m12_im,m21_re,m21_im,m22_re,m22_im,det_re,det_im\n");
    for &x in z_real {
        for &y in z_imag {
            let z = C64::new(x, y);
            let m = match which {
                Which::F => f_matrix(&params, z)?,
                Which::FCirc => f_circ(&params, z)?,
                Which::FHat => f_hat(&params, z)?,
            }
            .entries;
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let mut row = vec![x, y];
            row.extend(entries(&m));
            row.extend([det.re, det.im]);
            push_row(&mut out, &row);
        }
    }
    Ok(Outcome {
        main: out,
        side: None,
        passed: true,
    })
}

fn real_entries(m: &Mat2) -> [f64; 4] {
    [m[(0, 0)].re, m[(0, 1)].re, m[(1, 0)].re, m[(1, 1)].re]
}

pub fn factors(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let CommandConfig::Factors { lambda } = &cfg.command else {
        unreachable!()
    };
    let params = params_of(cfg);
    let comps = ladder_components(&LadderFactor::new(params, LadderKind::Ascending, cfg.quad), lambda)?;
    let mut out = csv_header(cfg);
    out.push_str(
        "lambda,kappa_11,kappa_12,kappa_21,kappa_22,kappa_hat_11,kappa_hat_12,kappa_hat_21,kappa_hat_22,\
         phi_1,phi_2,switch_12,switch_21,k_12,k_21\n",
    );
    for (n, &l) in lambda.iter().enumerate() {
        let s = C64::new(l, 0.0);
        let mut row = vec![l];
        row.extend(real_entries(&kappa_matrix(&params, s, &cfg.quad)?));
        row.extend(real_entries(&kappa_hat_matrix(&params, s, &cfg.quad)?));
        row.extend([comps.phi1[n], comps.phi2[n], comps.switching[0], comps.switching[1]]);
        row.extend([comps.k12[n], comps.k21[n]]);
        push_row(&mut out, &row);
    }
    Ok(Outcome {
        main: out,
        side: None,
        passed: true,
    })
}

fn report<T: Serialize>(cfg: &RunConfig, records: &[T], passed: bool) -> String {
    let v = json!({ "config": cfg, "passed": passed, "records": records });
    serde_json::to_string_pretty(&v).expect("report serialises") + "\n"
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let CommandConfig::Verify { theta, lambda, only } = &cfg.command else {
        unreachable!()
    };
    let mut records = checks::run_all(&params_of(cfg), theta, lambda, &cfg.quad)?;
    if let Some(names) = only {
        if let Some(bad) = names.iter().find(|n| !records.iter().any(|r| &r.name == *n)) {
            let known: Vec<&str> = records.iter().map(|r| r.name.as_str()).collect();
            return Err(Failure::Usage(format!(
                "no check named '{bad}' applies here; available: {}",
                known.join(", ")
            )));
        }
        records.retain(|r| names.contains(&r.name));
    }
    let passed = records.iter().all(|r| r.passed);
    Ok(Outcome {
        main: report(cfg, &records, passed),
        side: None,
        passed,
    })
}

const BIG_ALPHA_GRID: [(f64, f64); 9] = [
    (1.2, 0.5),
    (1.2, 0.3),
    (1.2, 0.7),
    (1.5, 0.5),
    (1.5, 0.4),
    (1.5, 0.6),
    (1.8, 0.5),
    (1.8, 0.45),
    (1.8, 0.53),
];
const SMALL_ALPHA_GRID: [(f64, f64); 9] = [
    (0.3, 0.5),
    (0.3, 0.2),
    (0.3, 0.8),
    (0.6, 0.5),
    (0.6, 0.3),
    (0.6, 0.7),
    (0.9, 0.5),
    (0.9, 0.2),
    (0.9, 0.8),
];

#[derive(Serialize)]
struct IdentityRecord {
    alpha: f64,
    rho: f64,
    identity: &'static str,
    lhs: f64,
    rhs: f64,
    rel_residual: f64,
    tolerance: f64,
    passed: bool,
}

fn identity_record(params: &StableParams, q: &QuadConfig) -> Result<IdentityRecord, Failure> {
    let (kind, name) = if params.alpha() > 1.0 {
        (IdentityKind::BigAlpha, "bracket_equals_pi")
    } else if params.alpha() < 1.0 {
        (IdentityKind::SmallAlpha, "dual_constant")
    } else {
        return Err(Failure::Usage("no hypergeometric identity applies at alpha = 1".into()));
    };
    let c = hypergeometric_identity_check(params, kind, q)?;
    let r = c.rel_residual();
    Ok(IdentityRecord {
        alpha: params.alpha(),
        rho: params.rho(),
        identity: name,
        lhs: c.lhs,
        rhs: c.rhs,
        rel_residual: r,
        tolerance: checks::IDENTITY_TOL,
        passed: r <= checks::IDENTITY_TOL,
    })
}

pub fn identities(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let grid: Vec<StableParams> = match cfg.params {
        Some(p) => vec![p],
        None => BIG_ALPHA_GRID
            .iter()
            .chain(SMALL_ALPHA_GRID.iter())
            .map(|&(a, r)| StableParams::new(a, r))
            .collect::<Result<_, _>>()?,
    };
    let records = grid
        .iter()
        .map(|p| identity_record(p, &cfg.quad))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = records.iter().all(|r| r.passed);
    Ok(Outcome {
        main: report(cfg, &records, passed),
        side: None,
        passed,
    })
}

fn estimate_json(e: &MCEstimate, exact: f64) -> serde_json::Value {
    json!({
        "value": e.value,
        "std_error": e.std_error,
        "n_effective": e.n_effective,
        "exact": exact,
        "z_score": e.z_score(exact),
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let CommandConfig::Simulate {
        estimator,
        x,
        level,
        start_state,
        mc,
        bins,
        range,
        ks_bound,
        ..
    } = &cfg.command
    else {
        unreachable!()
    };
    let params = params_of(cfg);
    let q = cfg.quad;
    let edges = linear_edges(-range, *range, *bins);
    let (hist, summary, passed) = match estimator {
        Estimator::TwoSidedExit => {
            let recs = simulate_two_sided_exit(&params, *x, mc)?;
            // Up overshoots on the positive axis, down overshoots mirrored.
            let signed: Vec<f64> = recs
                .iter()
                .map(|r| match r.side {
                    ExitSide::Up => r.overshoot(1.0),
                    ExitSide::Down => -r.overshoot(1.0),
                })
                .collect();
            let cdf = |t: f64, side| {
                if t <= 0.0 {
                    Ok(0.0)
                } else {
                    two_sided_overshoot_cdf(&params, *x, t, side, &q)
                }
            };
            let mass = |l: f64, r: f64| {
                Ok(cdf(r, ExitSide::Up)? - cdf(l, ExitSide::Up)? + cdf(-l, ExitSide::Down)? - cdf(-r, ExitSide::Down)?)
            };
            let hist = Histogram::build(&signed, &edges, recs.len() as u64, mass)?;
            let mut sides = serde_json::Map::new();
            let mut worst: f64 = 0.0;
            for (side, name) in [(ExitSide::Up, "up"), (ExitSide::Down, "down")] {
                let exact = two_sided_exit_probability(&params, *x, side, &q)?;
                let os = overshoots(&recs, side);
                let ks = if os.is_empty() {
                    None
                } else {
                    Some(ks_one_sample(&os, |t| two_sided_conditional_cdf(&params, *x, t, side, &q))?)
                };
                worst = worst.max(ks.unwrap_or(0.0));
                sides.insert(
                    name.into(),
                    json!({
                        "exit_probability": estimate_json(&exit_probability(&recs, side), exact),
                        "ks_conditional_overshoot": ks,
                    }),
                );
            }
            let ok = worst <= *ks_bound;
            let summary = json!({
                "estimator": estimator,
                "sides": sides,
                "ks_max": worst,
                "ks_bound": ks_bound,
                "mean_steps": mean_steps(&recs),
                "passed": ok,
            });
            (hist, summary, ok)
        }
        Estimator::LadderOvershoot => {
            let regime = CramerRegime::BigAlpha;
            let samples = estimate_ladder_overshoot(&params, *level, *start_state, mc)?;
            let signed: Vec<f64> = samples.iter().map(|s| s.signed()).collect();
            let cdf = |s: f64| cramer_overshoot_signed_cdf(&params, s, regime, &q);
            let hist = Histogram::build(&signed, &edges, samples.len() as u64, |l, r| Ok(cdf(r)? - cdf(l)?))?;
            let ks = ks_one_sample(&signed, cdf)?;
            let n = samples.len() as u64;
            let mut states = serde_json::Map::new();
            for j in [1u8, 2] {
                let est = MCEstimate::proportion(samples.iter().filter(|s| s.j == j).count() as u64, n);
                let exact = cramer_overshoot_tail(&params, 0.0, j, regime, &q)?;
                states.insert(format!("state_{j}"), estimate_json(&est, exact));
            }
            let ok = ks <= *ks_bound;
            let summary = json!({
                "estimator": estimator,
                "ks": ks,
                "ks_bound": ks_bound,
                "state_probabilities": states,
                "passed": ok,
            });
            (hist, summary, ok)
        }
    };
    let mut header = String::new();
    let _ = writeln!(header, "{}", cfg.header());
    let _ = write!(header, "histogram of the signed overshoot; negative values are the lower side");
    let v = json!({ "config": cfg, "summary": summary });
    Ok(Outcome {
        main: hist.to_csv(&header),
        side: Some(serde_json::to_string_pretty(&v).expect("summary serialises") + "\n"),
        passed,
    })
}
