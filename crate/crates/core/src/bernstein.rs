//! The κ and φ families of Bernstein functions and their mean values.
//!
//! Both families are integrals over (0,∞) in x; they are computed in the
//! variable u = e^{-x}, where the densities become products of powers of u,
//! 1-u and 1+u.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_01, neg_ln, QuadConfig};
use crate::special::{expm1, C64};
use crate::stable::StableParams;

/// Which of the four admissible index patterns (q+i, p+j) is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    /// (αρ+1, αρ̂)
    ArPlusOneArh,
    /// (αρ̂, αρ+1)
    ArhArPlusOne,
    /// (αρ̂+1, αρ)
    ArhPlusOneAr,
    /// (αρ, αρ̂+1)
    ArArhPlusOne,
}

impl IndexKind {
    pub const ALL: [IndexKind; 4] = [
        IndexKind::ArPlusOneArh,
        IndexKind::ArhArPlusOne,
        IndexKind::ArhPlusOneAr,
        IndexKind::ArArhPlusOne,
    ];

    /// The same pattern with the roles of ρ and ρ̂ exchanged.
    pub fn mirror(self) -> Self {
        match self {
            IndexKind::ArPlusOneArh => IndexKind::ArhPlusOneAr,
            IndexKind::ArhPlusOneAr => IndexKind::ArPlusOneArh,
            IndexKind::ArhArPlusOne => IndexKind::ArArhPlusOne,
            IndexKind::ArArhPlusOne => IndexKind::ArhArPlusOne,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IndexKind::ArPlusOneArh => "ar+1,arh",
            IndexKind::ArhArPlusOne => "arh,ar+1",
            IndexKind::ArhPlusOneAr => "arh+1,ar",
            IndexKind::ArArhPlusOne => "ar,arh+1",
        }
    }
}

/// The selector (q, p, i, j) with q + p = α and i + j = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorIndices {
    pub q: f64,
    pub p: f64,
    pub i: u8,
    pub j: u8,
}

impl FactorIndices {
    pub fn of(params: &StableParams, kind: IndexKind) -> Self {
        let (ar, arh) = (params.ar(), params.arh());
        let (q, p, i) = match kind {
            IndexKind::ArPlusOneArh => (ar, arh, 1),
            IndexKind::ArhArPlusOne => (arh, ar, 0),
            IndexKind::ArhPlusOneAr => (arh, ar, 1),
            IndexKind::ArArhPlusOne => (ar, arh, 0),
        };
        Self { q, p, i, j: 1 - i }
    }

    /// Checked construction from raw values.
    pub fn new(params: &StableParams, q: f64, p: f64, i: u8, j: u8) -> Result<Self> {
        let (ar, arh) = (params.ar(), params.arh());
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
        let q_ok = close(q, ar) || close(q, arh);
        if !q_ok || !close(q + p, params.alpha()) || i > 1 || j > 1 || i + j != 1 {
            return Err(Error::Domain(format!(
                "indices (q={q}, p={p}, i={i}, j={j}) need q in {{αρ, αρ̂}}, q+p = α and i+j = 1"
            )));
        }
        Ok(Self { q, p, i, j })
    }

    /// Exponent of (1-u) in the density.
    pub fn upper(&self) -> f64 {
        self.q + self.i as f64
    }

    /// Exponent of (1+u) in the density.
    pub fn lower(&self) -> f64 {
        self.p + self.j as f64
    }

    /// (q+i) ∨ (p+j) - 1
    pub fn coefficient(&self) -> f64 {
        self.upper().max(self.lower()) - 1.0
    }
}

/// Right-endpoint singularity order of a density (1-u)^{-a} once the
/// vanishing factor 1-u^s (or -ln u) has been absorbed.
fn right_exponent(a: f64) -> f64 {
    (a - 1.0).max(0.0)
}

/// (1 - u^s)/(1 - u) without cancellation at either end.
fn one_minus_pow_over(u: f64, uc: f64, s: C64) -> C64 {
    let ln_u = -neg_ln(u, uc);
    -expm1(s * ln_u) / uc
}

/// κ_{q+i,p+j}(s).
pub fn kappa_qp(params: &StableParams, idx: &FactorIndices, s: C64, cfg: &QuadConfig) -> Result<C64> {
    let alpha = params.alpha();
    if !(s.re > -alpha) || !s.im.is_finite() {
        return Err(Error::Domain(format!(
            "kappa needs Re s > -alpha = {}; got s = {s}",
            -alpha
        )));
    }
    if s == C64::new(0.0, 0.0) {
        return Ok(s);
    }
    let (a, b, c) = (idx.upper(), idx.lower(), idx.coefficient());
    let density = move |u: f64, uc: f64| c * u.powf(alpha - 1.0) * uc.powf(1.0 - a) * (1.0 + u).powf(-b);
    integrate_01(
        |u, uc| one_minus_pow_over(u, uc, s) * density(u, uc),
        1.0 - alpha - s.re.min(0.0),
        right_exponent(a),
        cfg,
    )
}

/// κ'_{q+i,p+j}(0+), the mean of the Lévy measure.
pub fn kappa_qp_deriv0(params: &StableParams, idx: &FactorIndices, cfg: &QuadConfig) -> Result<f64> {
    let alpha = params.alpha();
    let (a, b, c) = (idx.upper(), idx.lower(), idx.coefficient());
    integrate_01(
        |u, uc| {
            let x_over = neg_ln(u, uc) / uc;
            C64::new(c * x_over * u.powf(alpha - 1.0) * uc.powf(1.0 - a) * (1.0 + u).powf(-b), 0.0)
        },
        1.0 - alpha,
        right_exponent(a),
        cfg,
    )
    .map(|z| z.re)
}

/// The φ-family density in v = e^{-u}, multiplied by 1-v.
fn phi_density(alpha: f64, idx: &FactorIndices, v: f64, vc: f64) -> f64 {
    let (a, b, c) = (idx.upper(), idx.lower(), idx.coefficient());
    let (q, p) = (idx.q, idx.p);
    c * vc.powf(1.0 - a) * (1.0 + v).powf(-b) - 0.5 * (alpha - 1.0) * vc.powf(1.0 - q) * (1.0 + v).powf(-p)
}

/// The φ-family density itself as a function of u > 0.
pub fn phi_levy_density(params: &StableParams, idx: &FactorIndices, u: f64) -> f64 {
    let v = (-u).exp();
    let vc = -(-u).exp_m1();
    phi_density(params.alpha(), idx, v, vc) / vc * v
}

/// φ_{q+i,p+j}(s).
pub fn phi_qp(params: &StableParams, idx: &FactorIndices, s: C64, cfg: &QuadConfig) -> Result<C64> {
    if !(s.re > -1.0) || !s.im.is_finite() {
        return Err(Error::Domain(format!("phi needs Re s > -1; got s = {s}")));
    }
    if s == C64::new(0.0, 0.0) {
        return Ok(s);
    }
    let alpha = params.alpha();
    integrate_01(
        |v, vc| one_minus_pow_over(v, vc, s) * phi_density(alpha, idx, v, vc),
        -s.re.min(0.0),
        right_exponent(idx.upper()),
        cfg,
    )
}

/// φ'_{q+i,p+j}(0+).
pub fn phi_qp_deriv0(params: &StableParams, idx: &FactorIndices, cfg: &QuadConfig) -> Result<f64> {
    let alpha = params.alpha();
    integrate_01(
        |v, vc| C64::new(neg_ln(v, vc) / vc * phi_density(alpha, idx, v, vc), 0.0),
        0.0,
        right_exponent(idx.upper()),
        cfg,
    )
    .map(|z| z.re)
}

/// π₁Φ₁(λ) by the iterated integral over (z, v) in the unit square, before
/// the inner integral is collapsed into κ_{αρ+1,αρ̂}:
/// λ αρ (sin παρ/π) ∫∫ z^{α-1} v^{λ+α-1} (1+zv)^{-αρ̂} (1-zv)^{-(αρ+1)} dv dz.
pub fn phi1_double_integral_oracle(params: &StableParams, lambda: f64, cfg: &QuadConfig) -> Result<f64> {
    if !params.is_small_alpha() {
        return Err(Error::Regime(format!(
            "the iterated-integral route needs alpha <= 1, got {}",
            params.alpha()
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    let (alpha, ar, arh) = (params.alpha(), params.ar(), params.arh());
    // The inner integral grows like (1-z)^{-αρ} as z -> 1; it is computed
    // with that factor removed so nothing overflows near the corner.
    let scaled = move |z: f64, zc: f64, v: f64, vc: f64| {
        let one_minus_zv = zc + z * vc;
        v.powf(lambda + alpha - 1.0) * (1.0 + z * v).powf(-arh) * (zc / one_minus_zv).powf(ar) / one_minus_zv
    };
    let left = 1.0 - lambda - alpha;
    let inner = |z: f64, zc: f64| -> Result<f64> {
        if zc >= 0.25 {
            return integrate_01(|v, vc| C64::new(scaled(z, zc, v, vc), 0.0), left, 0.0, cfg).map(|w| w.re);
        }
        // The integrand has a peak of width 1-z at v = 1. Below 1-v = 1-z it
        // is integrated on a linear scale, above it on a logarithmic one.
        let near = integrate_01(
            |t, _| {
                let vc = zc * t;
                C64::new(zc * scaled(z, zc, 1.0 - vc, vc), 0.0)
            },
            0.0,
            0.0,
            cfg,
        )?;
        let ln_w = zc.ln();
        let far = integrate_01(
            |_, tc| {
                let vc = (ln_w * tc).exp();
                let v = -(ln_w * tc).exp_m1();
                C64::new(-ln_w * vc * scaled(z, zc, v, vc), 0.0)
            },
            0.0,
            left,
            cfg,
        )?;
        Ok(near.re + far.re)
    };
    let failure = std::cell::RefCell::new(None);
    let outer = integrate_01(
        |z, zc| {
            if failure.borrow().is_some() {
                return C64::new(0.0, 0.0);
            }
            match inner(z, zc) {
                Ok(w) => C64::new(z.powf(alpha - 1.0) * zc.powf(-ar) * w, 0.0),
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    C64::new(0.0, 0.0)
                }
            }
        },
        1.0 - alpha,
        ar,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(lambda * ar * params.sin_ar() / PI * outer?.re)
}
