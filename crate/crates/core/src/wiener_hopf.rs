//! Explicit ladder exponents κ, κ̂ and κ° and checks of the matrix
//! Wiener–Hopf factorisation.

use serde::Serialize;

use crate::bernstein::{kappa_qp, kappa_qp_deriv0, phi_qp, phi_qp_deriv0, FactorIndices, IndexKind};
use crate::error::{Error, Result};
use crate::map_exponent::{f_matrix, stationary_pi};
use crate::matrix::Mat2;
use crate::quadrature::QuadConfig;
use crate::special::C64;
use crate::stable::StableParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// α ∈ (0, 1]
    SmallAlpha,
    /// α ∈ (1, 2)
    BigAlpha,
}

impl Regime {
    pub fn of(params: &StableParams) -> Self {
        if params.is_small_alpha() {
            Regime::SmallAlpha
        } else {
            Regime::BigAlpha
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    /// κ
    Ascending,
    /// κ̂
    DualAscending,
    /// κ°
    CircAscending,
}

impl LadderKind {
    pub fn name(&self) -> &'static str {
        match self {
            LadderKind::Ascending => "kappa",
            LadderKind::DualAscending => "kappa_hat",
            LadderKind::CircAscending => "kappa_circ",
        }
    }
}

/// One Bernstein function of either family together with its mean, so the
/// removable singularity of g(s)/s at 0 can be filled.
struct Family<'a> {
    params: &'a StableParams,
    regime: Regime,
    cfg: &'a QuadConfig,
}

impl Family<'_> {
    fn idx(&self, kind: IndexKind) -> FactorIndices {
        FactorIndices::of(self.params, kind)
    }

    fn value(&self, kind: IndexKind, s: C64) -> Result<C64> {
        let idx = self.idx(kind);
        match self.regime {
            Regime::SmallAlpha => kappa_qp(self.params, &idx, s, self.cfg),
            Regime::BigAlpha => phi_qp(self.params, &idx, s, self.cfg),
        }
    }

    fn mean(&self, kind: IndexKind) -> Result<f64> {
        let idx = self.idx(kind);
        match self.regime {
            Regime::SmallAlpha => kappa_qp_deriv0(self.params, &idx, self.cfg),
            Regime::BigAlpha => phi_qp_deriv0(self.params, &idx, self.cfg),
        }
    }

    /// g(s)/s, equal to g'(0+) at s = 0.
    fn quotient(&self, kind: IndexKind, s: C64) -> Result<C64> {
        if s == C64::new(0.0, 0.0) {
            return Ok(C64::new(self.mean(kind)?, 0.0));
        }
        Ok(self.value(kind, s)? / s)
    }
}

/// The ascending ladder exponent κ(s).
pub fn kappa_matrix(params: &StableParams, s: C64, cfg: &QuadConfig) -> Result<Mat2> {
    let regime = Regime::of(params);
    let fam = Family { params, regime, cfg };
    let (sn, snh) = (params.sin_ar(), params.sin_arh());
    use IndexKind::*;
    let m = match regime {
        Regime::SmallAlpha => {
            let (w12, w21) = (snh / sn, sn / snh);
            Mat2::new(
                fam.value(ArPlusOneArh, s)? + w12 * fam.mean(ArhArPlusOne)?,
                -w12 * fam.quotient(ArhArPlusOne, s)?,
                -w21 * fam.quotient(ArArhPlusOne, s)?,
                fam.value(ArhPlusOneAr, s)? + w21 * fam.mean(ArArhPlusOne)?,
            )
        }
        Regime::BigAlpha => {
            let t = s + (params.alpha() - 1.0);
            Mat2::new(
                sn * (fam.value(ArPlusOneArh, t)? + fam.mean(ArhArPlusOne)?),
                -snh * fam.quotient(ArhArPlusOne, t)?,
                -sn * fam.quotient(ArArhPlusOne, t)?,
                snh * (fam.value(ArhPlusOneAr, t)? + fam.mean(ArArhPlusOne)?),
            )
        }
    };
    Ok(m)
}

/// The dual ascending ladder exponent κ̂(s).
pub fn kappa_hat_matrix(params: &StableParams, s: C64, cfg: &QuadConfig) -> Result<Mat2> {
    let regime = Regime::of(params);
    let fam = Family { params, regime, cfg };
    let (sn, snh) = (params.sin_ar(), params.sin_arh());
    use IndexKind::*;
    let m = match regime {
        Regime::SmallAlpha => {
            let t = s + (1.0 - params.alpha());
            Mat2::new(
                fam.value(ArhPlusOneAr, t)? + (sn / snh) * fam.mean(ArArhPlusOne)?,
                -fam.quotient(ArArhPlusOne, t)?,
                -fam.quotient(ArhArPlusOne, t)?,
                fam.value(ArPlusOneArh, t)? + (snh / sn) * fam.mean(ArhArPlusOne)?,
            )
        }
        Regime::BigAlpha => Mat2::new(
            snh * (fam.value(ArhPlusOneAr, s)? + fam.mean(ArArhPlusOne)?),
            -snh * fam.quotient(ArArhPlusOne, s)?,
            -sn * fam.quotient(ArhArPlusOne, s)?,
            sn * (fam.value(ArPlusOneArh, s)? + fam.mean(ArhArPlusOne)?),
        ),
    };
    Ok(m)
}

/// π° = v(α-1) ∝ (sin παρ̂, sin παρ), summing to one.
pub fn pi_circ(params: &StableParams) -> [f64; 2] {
    let (s, sh) = (params.sin_ar(), params.sin_arh());
    [sh / (s + sh), s / (s + sh)]
}

/// κ°(s). For α ∈ (1,2) this is the shift route
/// Δπ°⁻¹ κ(s - (α-1)) Δπ°; for α ∈ (0,1] it is κ̂ with ρ and ρ̂ exchanged.
pub fn kappa_circ_matrix(params: &StableParams, s: C64, cfg: &QuadConfig) -> Result<Mat2> {
    match Regime::of(params) {
        Regime::BigAlpha => {
            let k = kappa_matrix(params, s - (params.alpha() - 1.0), cfg)?;
            Ok(k.similarity_diag(pi_circ(params)))
        }
        Regime::SmallAlpha => kappa_hat_matrix(&params.mirrored(), s, cfg),
    }
}

/// Δπ° κ°(s + α - 1) Δπ°⁻¹, which should reproduce κ(s).
pub fn kappa_via_shift(params: &StableParams, s: C64, cfg: &QuadConfig) -> Result<Mat2> {
    let circ = kappa_circ_matrix(params, s + (params.alpha() - 1.0), cfg)?;
    let pc = pi_circ(params);
    Ok(circ.similarity_diag([1.0 / pc[0], 1.0 / pc[1]]))
}

/// A ladder exponent bound to its parameters and quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderFactor {
    pub params: StableParams,
    pub kind: LadderKind,
    pub regime: Regime,
    pub quad: QuadConfig,
}

impl LadderFactor {
    pub fn new(params: StableParams, kind: LadderKind, quad: QuadConfig) -> Self {
        Self {
            regime: Regime::of(&params),
            params,
            kind,
            quad,
        }
    }

    pub fn eval(&self, s: C64) -> Result<Mat2> {
        match self.kind {
            LadderKind::Ascending => kappa_matrix(&self.params, s, &self.quad),
            LadderKind::DualAscending => kappa_hat_matrix(&self.params, s, &self.quad),
            LadderKind::CircAscending => kappa_circ_matrix(&self.params, s, &self.quad),
        }
    }

    pub fn eval_real(&self, lambda: f64) -> Result<Mat2> {
        self.eval(C64::new(lambda, 0.0))
    }

    /// Λ = (Λ₁₂, Λ₂₁), the switching rates read off at λ = 0.
    pub fn switching_rates(&self) -> Result<[f64; 2]> {
        let k0 = self.eval_real(0.0)?;
        let rates = [-k0[(0, 1)].re, -k0[(1, 0)].re];
        if rates.iter().any(|r| *r == 0.0 || !r.is_finite()) {
            return Err(Error::Degenerate(format!(
                "{} has a vanishing switching rate: {rates:?}",
                self.kind.name()
            )));
        }
        Ok(rates)
    }

    /// Row sums at λ = 0; positive entries are killing rates.
    pub fn killing_rates(&self) -> Result<[f64; 2]> {
        let k0 = self.eval_real(0.0)?;
        let r = k0.row_sums();
        Ok([r[0].re, r[1].re])
    }
}

/// κ(λ) = diag(Φ₁, Φ₂) - Λ∘K(λ) on a real grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderComponents {
    pub lambda: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    /// (Λ₁₂, Λ₂₁)
    pub switching: [f64; 2],
    pub k12: Vec<f64>,
    pub k21: Vec<f64>,
    /// Full matrix at each grid point.
    pub matrices: Vec<Mat2>,
}

pub fn ladder_components(factor: &LadderFactor, lambda_grid: &[f64]) -> Result<LadderComponents> {
    if let Some(bad) = lambda_grid.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::Domain(format!("lambda grid must be >= 0, found {bad}")));
    }
    let switching = factor.switching_rates()?;
    let mut out = LadderComponents {
        lambda: lambda_grid.to_vec(),
        phi1: Vec::with_capacity(lambda_grid.len()),
        phi2: Vec::with_capacity(lambda_grid.len()),
        switching,
        k12: Vec::with_capacity(lambda_grid.len()),
        k21: Vec::with_capacity(lambda_grid.len()),
        matrices: Vec::with_capacity(lambda_grid.len()),
    };
    for &l in lambda_grid {
        let m = factor.eval_real(l)?;
        out.phi1.push(m[(0, 0)].re - switching[0]);
        out.phi2.push(m[(1, 1)].re - switching[1]);
        out.k12.push(-m[(0, 1)].re / switching[0]);
        out.k21.push(-m[(1, 0)].re / switching[1]);
        out.matrices.push(m);
    }
    Ok(out)
}

/// Outcome of checking −F(iθ) against Δπ⁻¹ κ̂(iθ)ᵀ Δπ κ(−iθ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorReport {
    pub fitted_constant: [f64; 2],
    pub max_rel_residual: f64,
    pub theta_grid: Vec<f64>,
    /// Largest entrywise residual at each grid point.
    pub residual_per_theta: Vec<f64>,
}

/// Δπ⁻¹ κ̂(iθ)ᵀ Δπ κ(−iθ).
pub fn factor_product(params: &StableParams, theta: f64, cfg: &QuadConfig) -> Result<Mat2> {
    let kh = kappa_hat_matrix(params, C64::new(0.0, theta), cfg)?;
    let k = kappa_matrix(params, C64::new(0.0, -theta), cfg)?;
    Ok(kh.transpose().similarity_diag(stationary_pi(params)) * k)
}

pub fn verify_factorisation(params: &StableParams, theta_grid: &[f64], cfg: &QuadConfig) -> Result<FactorReport> {
    let Some(&theta0) = theta_grid.first() else {
        return Err(Error::Domain("theta grid is empty".into()));
    };
    if theta0 == 0.0 {
        return Err(Error::Domain("the fit point theta_0 must be non-zero".into()));
    }
    let mut pairs = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        let lhs = f_matrix(params, C64::new(0.0, theta))?.entries.scale(C64::new(-1.0, 0.0));
        let rhs = factor_product(params, theta, cfg)?;
        pairs.push((lhs, rhs));
    }
    let (l0, r0) = &pairs[0];
    let constant = l0[(0, 0)] / r0[(0, 0)];
    let mut per_theta = Vec::with_capacity(pairs.len());
    for (lhs, rhs) in &pairs {
        let fitted = rhs.scale(constant);
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((lhs[(i, j)] - fitted[(i, j)]).norm() / lhs[(i, j)].norm());
            }
        }
        per_theta.push(worst);
    }
    Ok(FactorReport {
        fitted_constant: [constant.re, constant.im],
        max_rel_residual: per_theta.iter().copied().fold(0.0, f64::max),
        theta_grid: theta_grid.to_vec(),
        residual_per_theta: per_theta,
    })
}
