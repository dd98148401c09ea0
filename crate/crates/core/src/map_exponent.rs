//! Closed-form matrix exponents of the Lamperti-stable MAP.
//!
//! State 1 is the positive half-line, state 2 the negative one. Every entry
//! is a ratio of gamma functions evaluated as a single exponential of
//! log-gamma differences, which keeps the ratio finite far up the
//! imaginary axis where the individual gammas underflow.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Mat2;
use crate::special::{log_gamma, C64};
use crate::stable::StableParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    /// Re z in (-1, α)
    F,
    /// Re z in (-α, 1)
    FCirc,
    /// Re z in (-α, 1)
    FHat,
    /// Exponential tilt of F by γ; Re z in (-1-γ, α-γ)
    Tilted { gamma: f64 },
}

impl ExponentKind {
    pub fn strip(&self, alpha: f64) -> (f64, f64) {
        match *self {
            ExponentKind::F => (-1.0, alpha),
            ExponentKind::FCirc | ExponentKind::FHat => (-alpha, 1.0),
            ExponentKind::Tilted { gamma } => (-1.0 - gamma, alpha - gamma),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExponentKind::F => "F",
            ExponentKind::FCirc => "F_circ",
            ExponentKind::FHat => "F_hat",
            ExponentKind::Tilted { .. } => "F_gamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixExp2 {
    pub kind: ExponentKind,
    pub z: [f64; 2],
    pub entries: Mat2,
}

impl MatrixExp2 {
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }
}

/// Right eigenvector of the leading eigenvalue, normalised so π·v = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub chi: f64,
    pub v: [f64; 2],
}

fn check_strip(kind: ExponentKind, alpha: f64, z: C64) -> Result<()> {
    let (lo, hi) = kind.strip(alpha);
    if !(z.re > lo && z.re < hi) || !z.im.is_finite() {
        return Err(Error::Domain(format!(
            "{} is defined on the strip Re z in ({lo}, {hi}); got z = {z}",
            kind.name()
        )));
    }
    Ok(())
}

/// Γ(a)Γ(b)/(Γ(c)Γ(d)); zero when a denominator argument is a pole.
fn gamma_ratio(a: C64, b: C64, c: C64, d: C64) -> Result<C64> {
    let (lc, ld) = match (log_gamma(c), log_gamma(d)) {
        (Ok(lc), Ok(ld)) => (lc, ld),
        (Err(Error::Pole(_)), _) | (_, Err(Error::Pole(_))) => return Ok(C64::new(0.0, 0.0)),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    Ok((log_gamma(a)? + log_gamma(b)? - lc - ld).exp())
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The matrix exponent F(z) of the Lamperti-stable MAP.
pub fn f_matrix(params: &StableParams, z: C64) -> Result<MatrixExp2> {
    check_strip(ExponentKind::F, params.alpha(), z)?;
    let (a, ar, arh) = (params.alpha(), params.ar(), params.arh());
    let (top, bot) = (a - z, 1.0 + z);
    let entries = Mat2::new(
        -gamma_ratio(top, bot, arh - z, 1.0 - arh + z)?,
        gamma_ratio(top, bot, real(arh), real(1.0 - arh))?,
        gamma_ratio(top, bot, real(ar), real(1.0 - ar))?,
        -gamma_ratio(top, bot, ar - z, 1.0 - ar + z)?,
    );
    Ok(MatrixExp2 {
        kind: ExponentKind::F,
        z: [z.re, z.im],
        entries,
    })
}

fn f_circ_entries(params: &StableParams, z: C64) -> Result<Mat2> {
    let (a, ar, arh) = (params.alpha(), params.ar(), params.arh());
    let (top, bot) = (1.0 - z, a + z);
    Ok(Mat2::new(
        -gamma_ratio(top, bot, 1.0 - ar - z, ar + z)?,
        gamma_ratio(top, bot, real(ar), real(1.0 - ar))?,
        gamma_ratio(top, bot, real(arh), real(1.0 - arh))?,
        -gamma_ratio(top, bot, 1.0 - arh - z, arh + z)?,
    ))
}

/// Exponent of the MAP underlying the Riesz–Bogdan–Zak transformed process.
pub fn f_circ(params: &StableParams, z: C64) -> Result<MatrixExp2> {
    check_strip(ExponentKind::FCirc, params.alpha(), z)?;
    Ok(MatrixExp2 {
        kind: ExponentKind::FCirc,
        z: [z.re, z.im],
        entries: f_circ_entries(params, z)?,
    })
}

/// Exponent of the dual MAP: F_circ with ρ and ρ̂ exchanged.
pub fn f_hat(params: &StableParams, z: C64) -> Result<MatrixExp2> {
    check_strip(ExponentKind::FHat, params.alpha(), z)?;
    Ok(MatrixExp2 {
        kind: ExponentKind::FHat,
        z: [z.re, z.im],
        entries: f_circ_entries(&params.mirrored(), z)?,
    })
}

/// Γ(α-z)²Γ(1+z)²/π², the prefactor of the closed-form determinant.
pub fn det_prefactor(params: &StableParams, z: C64) -> Result<C64> {
    check_strip(ExponentKind::F, params.alpha(), z)?;
    let lg = log_gamma(params.alpha() - z)? + log_gamma(1.0 + z)?;
    Ok((2.0 * lg).exp() / (PI * PI))
}

/// det F(z) from the closed form, with a root at z = α-1.
pub fn det_f(params: &StableParams, z: C64) -> Result<C64> {
    let pre = det_prefactor(params, z)?;
    let (ar, arh) = (params.ar(), params.arh());
    let bracket = ((ar - z) * PI).sin() * ((arh - z) * PI).sin()
        - (PI * ar).sin() * (PI * arh).sin();
    Ok(pre * bracket)
}

/// π ∝ (sin παρ, sin παρ̂), summing to one.
pub fn stationary_pi(params: &StableParams) -> [f64; 2] {
    let (s, sh) = (params.sin_ar(), params.sin_arh());
    [s / (s + sh), sh / (s + sh)]
}

/// Leading (Perron–Frobenius) eigenpair of F(z) for real z.
pub fn leading_eig(params: &StableParams, z: f64) -> Result<EigenPair> {
    let m = f_matrix(params, real(z))?.entries;
    let (a, b, c, d) = (m[(0, 0)].re, m[(0, 1)].re, m[(1, 0)].re, m[(1, 1)].re);
    let half_gap = ((0.5 * (a - d)).powi(2) + b * c).sqrt();
    let mid = 0.5 * (a + d);
    let (hi, lo) = (mid + half_gap, mid - half_gap);
    if 2.0 * half_gap <= 1e-12 * hi.abs().max(lo.abs()) {
        return Err(Error::Degenerate(format!(
            "eigenvalues of F({z}) coincide: {hi} and {lo}"
        )));
    }
    // (b, χ - a) is the eigenvector; χ - a = (d - a)/2 + half_gap > 0.
    let v = [b, 0.5 * (d - a) + half_gap];
    let pi = stationary_pi(params);
    let norm = pi[0] * v[0] + pi[1] * v[1];
    Ok(EigenPair {
        chi: hi,
        v: [v[0] / norm, v[1] / norm],
    })
}

/// Esscher transform F_γ(z) = Δv(γ)⁻¹ F(z+γ) Δv(γ) - χ(γ) I.
pub fn esscher(params: &StableParams, z: C64, gamma: f64) -> Result<MatrixExp2> {
    let kind = ExponentKind::Tilted { gamma };
    check_strip(ExponentKind::F, params.alpha(), real(gamma))?;
    check_strip(kind, params.alpha(), z)?;
    let eig = leading_eig(params, gamma)?;
    let shifted = f_matrix(params, z + gamma)?.entries;
    let entries = shifted.similarity_diag(eig.v) - Mat2::identity().scale(real(eig.chi));
    Ok(MatrixExp2 {
        kind,
        z: [z.re, z.im],
        entries,
    })
}

/// Δπ⁻¹ F(-z)ᵀ Δπ, the dual exponent built from F directly.
pub fn dual_from_f(params: &StableParams, z: C64) -> Result<Mat2> {
    let f = f_matrix(params, -z)?.entries;
    Ok(f.transpose().similarity_diag(stationary_pi(params)))
}
