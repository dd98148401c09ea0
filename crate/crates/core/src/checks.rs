//! Residual checks of the closed-form identities, each against a declared
//! tolerance. Shared by the verification command and the acceptance suite.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bernstein::{kappa_qp, phi1_double_integral_oracle, phi_qp, FactorIndices, IndexKind};
use crate::error::{Error, Result};
use crate::exit_laws::{cramer_overshoot_mass, hypergeometric_identity_check, p_hat_inf_mass, CramerRegime, IdentityKind};
use crate::map_exponent::{det_prefactor, dual_from_f, esscher, f_circ, f_hat, f_matrix};
use crate::matrix::Mat2;
use crate::quadrature::QuadConfig;
use crate::special::C64;
use crate::stable::StableParams;
use crate::wiener_hopf::{kappa_circ_matrix, kappa_hat_matrix, kappa_matrix, kappa_via_shift, verify_factorisation, LadderFactor, LadderKind};

pub const DET_ROOT_TOL: f64 = 1e-10;
pub const ESSCHER_TOL: f64 = 1e-10;
pub const DUALITY_TOL: f64 = 1e-12;
pub const FACTORISATION_TOL: f64 = 1e-6;
pub const SHIFT_TOL: f64 = 1e-8;
pub const TWO_ROUTE_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const STATIONARY_MASS_TOL: f64 = 1e-10;
pub const OVERSHOOT_MASS_TOL: f64 = 1e-8;
pub const KILLING_TOL: f64 = 1e-9;

pub const THETA_GRID: [f64; 8] = [1.0, -1.0, 0.5, -0.5, 2.0, -2.0, 5.0, -5.0];
pub const LAMBDA_GRID: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub grid: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckRecord {
    fn new(name: &str, grid: String, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            grid,
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
        }
    }
}

/// Largest entry difference over the largest entry, so that a vanishing
/// entry does not turn rounding noise into an O(1) residual.
fn max_rel(a: &Mat2, b: &Mat2) -> f64 {
    let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            diff = diff.max((a[(i, j)] - b[(i, j)]).norm());
            scale = scale.max(a[(i, j)].norm()).max(b[(i, j)].norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn fmt_grid(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

/// 20 points inside the strip (-α, 1): five real parts, four heights.
pub fn z_grid(alpha: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(20);
    for k in 0..5 {
        let x = -alpha + (1.0 + alpha) * (k as f64 + 0.5) / 5.0;
        for y in [0.0, 0.5, -1.3, 2.7] {
            out.push(C64::new(x, y));
        }
    }
    out
}

/// det F at z = α-1 from the matrix entries, relative to the Γ prefactor.
pub fn det_root(params: &StableParams) -> Result<CheckRecord> {
    let z = C64::new(params.alpha() - 1.0, 0.0);
    let m = f_matrix(params, z)?.entries;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let pre = det_prefactor(params, z)?;
    Ok(CheckRecord::new(
        "det_root",
        format!("z = {}", params.alpha() - 1.0),
        det.norm() / pre.norm(),
        DET_ROOT_TOL,
    ))
}

/// Esscher transform at γ = α-1 against the circ exponent.
pub fn esscher_circ(params: &StableParams, zs: &[C64]) -> Result<CheckRecord> {
    let gamma = params.alpha() - 1.0;
    let mut worst: f64 = 0.0;
    for &z in zs {
        let tilted = esscher(params, z, gamma)?.entries;
        let circ = f_circ(params, z)?.entries;
        worst = worst.max(max_rel(&tilted, &circ));
    }
    Ok(CheckRecord::new("esscher_circ", format!("{} points in the strip", zs.len()), worst, ESSCHER_TOL))
}

/// F̂(z) against Δπ⁻¹ F(-z)ᵀ Δπ.
pub fn duality(params: &StableParams, zs: &[C64]) -> Result<CheckRecord> {
    let mut worst: f64 = 0.0;
    for &z in zs {
        worst = worst.max(max_rel(&f_hat(params, z)?.entries, &dual_from_f(params, z)?));
    }
    Ok(CheckRecord::new("duality", format!("{} points in the strip", zs.len()), worst, DUALITY_TOL))
}

pub fn factorisation(params: &StableParams, thetas: &[f64], cfg: &QuadConfig) -> Result<CheckRecord> {
    let rep = verify_factorisation(params, thetas, cfg)?;
    Ok(CheckRecord::new(
        "factorisation",
        format!("theta = {}", fmt_grid(thetas)),
        rep.max_rel_residual,
        FACTORISATION_TOL,
    ))
}

fn need_big_alpha(params: &StableParams, what: &str) -> Result<()> {
    if params.alpha() <= 1.0 {
        return Err(Error::Regime(format!("{what} needs alpha in (1,2), got {}", params.alpha())));
    }
    Ok(())
}

/// Δπ° κ°(λ+α-1) Δπ°⁻¹ against κ(λ).
pub fn shift_relation(params: &StableParams, lambdas: &[f64], cfg: &QuadConfig) -> Result<CheckRecord> {
    need_big_alpha(params, "the shift relation")?;
    let mut worst: f64 = 0.0;
    for &l in lambdas {
        let s = C64::new(l, 0.0);
        worst = worst.max(max_rel(&kappa_via_shift(params, s, cfg)?, &kappa_matrix(params, s, cfg)?));
    }
    Ok(CheckRecord::new("shift_relation", format!("lambda = {}", fmt_grid(lambdas)), worst, SHIFT_TOL))
}

/// κ̂(λ) against κ°(λ) with ρ and ρ̂ exchanged.
pub fn mirror_relation(params: &StableParams, lambdas: &[f64], cfg: &QuadConfig) -> Result<CheckRecord> {
    need_big_alpha(params, "the mirror relation")?;
    let mut worst: f64 = 0.0;
    for &l in lambdas {
        let s = C64::new(l, 0.0);
        let circ = kappa_circ_matrix(&params.mirrored(), s, cfg)?;
        worst = worst.max(max_rel(&kappa_hat_matrix(params, s, cfg)?, &circ));
    }
    Ok(CheckRecord::new("mirror_relation", format!("lambda = {}", fmt_grid(lambdas)), worst, SHIFT_TOL))
}

/// Φ₁ by the iterated double integral against (sin παρ/π) κ_{αρ+1,αρ̂}.
pub fn phi1_two_routes(params: &StableParams, lambdas: &[f64], cfg: &QuadConfig) -> Result<CheckRecord> {
    let idx = FactorIndices::of(params, IndexKind::ArPlusOneArh);
    let mut worst: f64 = 0.0;
    for &l in lambdas {
        let double = phi1_double_integral_oracle(params, l, cfg)?;
        let closed = params.sin_ar() / PI * kappa_qp(params, &idx, C64::new(l, 0.0), cfg)?.re;
        worst = worst.max((double - closed).abs() / closed.abs());
    }
    Ok(CheckRecord::new("phi1_two_routes", format!("lambda = {}", fmt_grid(lambdas)), worst, TWO_ROUTE_TOL))
}

/// Row sums of κ(0) and κ̂(0): zero for the unkilled factor, positive for
/// the killed one (κ̂ for α < 1, κ for α > 1, neither at α = 1). The
/// residual is the largest violation of that pattern.
pub fn killing_pattern(params: &StableParams, cfg: &QuadConfig) -> Result<CheckRecord> {
    let a = params.alpha();
    let sums = |kind| LadderFactor::new(*params, kind, *cfg).killing_rates();
    let k = sums(LadderKind::Ascending)?;
    let kh = sums(LadderKind::DualAscending)?;
    let (zero, positive): (Vec<f64>, Vec<f64>) = if a < 1.0 {
        (k.to_vec(), kh.to_vec())
    } else if a > 1.0 {
        (kh.to_vec(), k.to_vec())
    } else {
        ([k, kh].concat(), vec![])
    };
    let mut violation: f64 = zero.iter().map(|r| r.abs()).fold(0.0, f64::max);
    if positive.iter().any(|&r| r <= KILLING_TOL) {
        violation = f64::INFINITY;
    }
    Ok(CheckRecord::new(
        "killing_pattern",
        format!("row sums kappa(0) = {k:?}, kappa_hat(0) = {kh:?}"),
        violation,
        KILLING_TOL,
    ))
}

/// Increasing and concave on λ = 0, 0.25, …, 10 for both families and all
/// four index choices. The residual is the number of sign violations.
pub fn bernstein_shape(params: &StableParams, cfg: &QuadConfig) -> Result<CheckRecord> {
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
    let mut violations = 0usize;
    for kind in IndexKind::ALL {
        let idx = FactorIndices::of(params, kind);
        for use_kappa in [true, false] {
            let v = grid
                .iter()
                .map(|&l| {
                    let s = C64::new(l, 0.0);
                    if use_kappa {
                        kappa_qp(params, &idx, s, cfg).map(|z| z.re)
                    } else {
                        phi_qp(params, &idx, s, cfg).map(|z| z.re)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            let d1: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
            violations += d1.iter().filter(|&&d| !(d > 0.0)).count();
            violations += d1.windows(2).filter(|w| !(w[1] - w[0] < 0.0)).count();
        }
    }
    Ok(CheckRecord::new(
        "bernstein_shape",
        "lambda = 0, 0.25, ..., 10; 8 functions".into(),
        violations as f64,
        0.0,
    ))
}

/// The hypergeometric identity of the parameter's regime.
pub fn hypergeometric(params: &StableParams, cfg: &QuadConfig) -> Result<CheckRecord> {
    let (kind, name) = if params.alpha() > 1.0 {
        (IdentityKind::BigAlpha, "hypergeometric_big_alpha")
    } else if params.alpha() < 1.0 {
        (IdentityKind::SmallAlpha, "hypergeometric_small_alpha")
    } else {
        return Err(Error::Regime("no hypergeometric identity at alpha = 1".into()));
    };
    let chk = hypergeometric_identity_check(params, kind, cfg)?;
    Ok(CheckRecord::new(
        name,
        format!("lhs = {:.17e}, rhs = {:.17e}", chk.lhs, chk.rhs),
        chk.rel_residual(),
        IDENTITY_TOL,
    ))
}

pub fn stationary_mass(params: &StableParams, cfg: &QuadConfig) -> Result<CheckRecord> {
    let m = p_hat_inf_mass(params, cfg)?;
    Ok(CheckRecord::new("stationary_entrance_mass", "y in (-1,1)".into(), (m - 1.0).abs(), STATIONARY_MASS_TOL))
}

pub fn overshoot_mass(params: &StableParams, cfg: &QuadConfig) -> Result<CheckRecord> {
    let m = cramer_overshoot_mass(params, CramerRegime::BigAlpha, cfg)?;
    Ok(CheckRecord::new("limit_overshoot_mass", "u > 0, j = 1, 2".into(), (m - 1.0).abs(), OVERSHOOT_MASS_TOL))
}

/// Every check that applies to `params`, with the factorisation on `thetas`
/// and the λ-indexed relations on `lambdas`.
pub fn run_all(params: &StableParams, thetas: &[f64], lambdas: &[f64], cfg: &QuadConfig) -> Result<Vec<CheckRecord>> {
    let zs = z_grid(params.alpha());
    let mut out = vec![
        det_root(params)?,
        esscher_circ(params, &zs)?,
        duality(params, &zs)?,
        factorisation(params, thetas, cfg)?,
    ];
    let a = params.alpha();
    if a > 1.0 {
        out.push(shift_relation(params, lambdas, cfg)?);
        out.push(mirror_relation(params, lambdas, cfg)?);
        out.push(stationary_mass(params, cfg)?);
    }
    if a < 1.0 {
        out.push(phi1_two_routes(params, lambdas, cfg)?);
    }
    if a != 1.0 {
        out.push(hypergeometric(params, cfg)?);
    }
    out.push(overshoot_mass(params, cfg)?);
    out.push(killing_pattern(params, cfg)?);
    out.push(bernstein_shape(params, cfg)?);
    Ok(out)
}
