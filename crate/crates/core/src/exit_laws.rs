//! Closed-form exit and entrance densities of the stable process, the
//! Cramér-type limits of the Lamperti-stable ladder MAP and the
//! hypergeometric identities behind their constants.
//!
//! Each density is a function of a named variable: θ for overshoots beyond a
//! barrier, y for entrance points into (-1,1), u for log-overshoots.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_01_real, QuadConfig};
use crate::special::{hyp2f1_neg1, ln_gamma};
use crate::stable::StableParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RogozinForm {
    /// Start x in (0,1), exit of (0,1) upwards.
    UnitInterval,
    /// Start x in (-1,1), exit of (-1,1) upwards.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitSide {
    Up,
    Down,
}

/// Which Cramér statement is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CramerRegime {
    /// Ascending ladder of the MAP; killed when α ∈ (1,2).
    BigAlpha,
    /// Ascending ladder of the dual MAP; killed when α ∈ (0,1).
    SmallAlphaDual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CramerAsymptotic {
    /// P(T_a < ∞) = 1 for every a.
    Certain,
    /// e^{rate·a} P(T_a < ∞) → constant.
    Exponential { rate: f64, constant: f64 },
}

impl CramerAsymptotic {
    /// The limit constant, with certain passage read as 1.
    pub fn value(&self) -> f64 {
        match *self {
            CramerAsymptotic::Certain => 1.0,
            CramerAsymptotic::Exponential { constant, .. } => constant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeAsymptote {
    /// lim s(x) x^{1-α} P_x(escape before hitting 0)
    pub limit: f64,
    /// s(x)
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// The intermediate ₂F₁ expression of the same quantity.
    pub hypergeometric: f64,
}

impl IdentityCheck {
    pub fn rel_residual(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs()
    }
}

fn need_big_alpha(params: &StableParams, what: &str) -> Result<()> {
    if params.alpha() <= 1.0 {
        return Err(Error::Regime(format!("{what} needs alpha in (1,2), got {}", params.alpha())));
    }
    Ok(())
}

fn need_open(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(v > lo && v < hi) {
        return Err(Error::Domain(format!("{name} must lie in ({lo}, {hi}), got {v}")));
    }
    Ok(())
}

fn need_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// c(α) = 2^{α-1} Γ(2-α) / (Γ(1-αρ̂) Γ(1-αρ)).
pub fn c_alpha(params: &StableParams) -> f64 {
    let a = params.alpha();
    ((a - 1.0) * 2f64.ln() + ln_gamma(2.0 - a).unwrap() - ln_gamma(1.0 - params.arh()).unwrap()
        - ln_gamma(1.0 - params.ar()).unwrap())
    .exp()
}

/// Density in θ of the overshoot X_{τ⁺} - b at an upward exit.
pub fn rogozin_density(params: &StableParams, x: f64, theta: f64, form: RogozinForm) -> Result<f64> {
    need_positive("theta", theta)?;
    let (ar, arh, k) = (params.ar(), params.arh(), params.sin_ar() / PI);
    match form {
        RogozinForm::UnitInterval => {
            need_open("x", x, 0.0, 1.0)?;
            Ok(k * (1.0 - x).powf(ar) * x.powf(arh) * theta.powf(-ar) * (theta + 1.0).powf(-arh)
                / (theta + 1.0 - x))
        }
        RogozinForm::Symmetric => {
            need_open("x", x, -1.0, 1.0)?;
            Ok(k * (1.0 - x).powf(ar) * (1.0 + x).powf(arh) * theta.powf(-ar) * (theta + 2.0).powf(-arh)
                / (theta + 1.0 - x))
        }
    }
}

/// The Rogozin density with θ = t/(1-t), times dθ/dt, as a function of
/// (t, 1-t). Integrable like t^{-αρ} at 0 and (1-t)^{α-1} at 1.
fn rogozin_in_t(params: &StableParams, x: f64, form: RogozinForm, t: f64, tc: f64) -> f64 {
    let (ar, arh, a, k) = (params.ar(), params.arh(), params.alpha(), params.sin_ar() / PI);
    // θ = t/tc, θ+1 = 1/tc, θ+1-x = (1 - x tc)/tc, dθ = dt/tc².
    let common = t.powf(-ar) * tc.powf(a - 1.0) / (1.0 - x * tc);
    match form {
        RogozinForm::UnitInterval => k * (1.0 - x).powf(ar) * x.powf(arh) * common,
        RogozinForm::Symmetric => k * (1.0 - x).powf(ar) * (1.0 + x).powf(arh) * (1.0 + tc).powf(-arh) * common,
    }
}

fn check_start(x: f64, form: RogozinForm) -> Result<()> {
    match form {
        RogozinForm::UnitInterval => need_open("x", x, 0.0, 1.0),
        RogozinForm::Symmetric => need_open("x", x, -1.0, 1.0),
    }
}

/// Probability of an upward exit, ∫₀^∞ rogozin_density dθ.
pub fn rogozin_mass(params: &StableParams, x: f64, form: RogozinForm, cfg: &QuadConfig) -> Result<f64> {
    check_start(x, form)?;
    integrate_01_real(
        |t, tc| rogozin_in_t(params, x, form, t, tc),
        params.ar(),
        1.0 - params.alpha(),
        cfg,
    )
}

/// ∫₀^θ rogozin_density.
pub fn rogozin_cdf(params: &StableParams, x: f64, theta: f64, form: RogozinForm, cfg: &QuadConfig) -> Result<f64> {
    check_start(x, form)?;
    if theta <= 0.0 {
        return Ok(0.0);
    }
    if theta.is_infinite() {
        return rogozin_mass(params, x, form, cfg);
    }
    let top = theta / (1.0 + theta);
    let top_c = 1.0 / (1.0 + theta);
    integrate_01_real(
        |w, wc| {
            let t = top * w;
            let tc = top_c + top * wc;
            top * rogozin_in_t(params, x, form, t, tc)
        },
        params.ar(),
        0.0,
        cfg,
    )
}

/// Density of the overshoot beyond the barrier on `side` for the process
/// started at x in (-1,1); the downward law is the upward one for -X.
pub fn two_sided_overshoot_density(params: &StableParams, x: f64, theta: f64, side: ExitSide) -> Result<f64> {
    match side {
        ExitSide::Up => rogozin_density(params, x, theta, RogozinForm::Symmetric),
        ExitSide::Down => rogozin_density(&params.mirrored(), -x, theta, RogozinForm::Symmetric),
    }
}

pub fn two_sided_exit_probability(params: &StableParams, x: f64, side: ExitSide, cfg: &QuadConfig) -> Result<f64> {
    match side {
        ExitSide::Up => rogozin_mass(params, x, RogozinForm::Symmetric, cfg),
        ExitSide::Down => rogozin_mass(&params.mirrored(), -x, RogozinForm::Symmetric, cfg),
    }
}

pub fn two_sided_overshoot_cdf(
    params: &StableParams,
    x: f64,
    theta: f64,
    side: ExitSide,
    cfg: &QuadConfig,
) -> Result<f64> {
    match side {
        ExitSide::Up => rogozin_cdf(params, x, theta, RogozinForm::Symmetric, cfg),
        ExitSide::Down => rogozin_cdf(&params.mirrored(), -x, theta, RogozinForm::Symmetric, cfg),
    }
}

/// Overshoot law on `side` conditioned on leaving through that side.
pub fn two_sided_conditional_cdf(
    params: &StableParams,
    x: f64,
    theta: f64,
    side: ExitSide,
    cfg: &QuadConfig,
) -> Result<f64> {
    Ok(two_sided_overshoot_cdf(params, x, theta, side, cfg)? / two_sided_exit_probability(params, x, side, cfg)?)
}

/// ∫₁^b (t-1)^{αρ-1} (t+1)^{αρ̂-1} dt for b ≥ 1.
pub fn entrance_integral(params: &StableParams, b: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(b >= 1.0) || !b.is_finite() {
        return Err(Error::Domain(format!("upper limit must be >= 1, got {b}")));
    }
    if b == 1.0 {
        return Ok(0.0);
    }
    let (ar, arh) = (params.ar(), params.arh());
    let len = b - 1.0;
    // t - 1 = len·w
    let scaled = integrate_01_real(
        |w, _| w.powf(ar - 1.0) * (2.0 + len * w).powf(arh - 1.0),
        1.0 - ar,
        0.0,
        cfg,
    )?;
    Ok(len.powf(ar) * scaled)
}

fn check_kpw_start(params: &StableParams, x: f64) -> Result<()> {
    need_big_alpha(params, "the interval entrance density")?;
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x must exceed 1, got {x}")));
    }
    Ok(())
}

// The entrance density given 1+y and 1-y separately, with the x-only
// integral precomputed.
fn kpw_from_parts(params: &StableParams, x: f64, yp: f64, ym: f64, tail: f64) -> f64 {
    let (a, ar, arh, k) = (params.alpha(), params.ar(), params.arh(), params.sin_ar() / PI);
    let base = k * yp.powf(-arh) * ym.powf(-ar);
    let lead = (x + 1.0).powf(arh) * (x - 1.0).powf(ar) / (x - 1.0 + ym);
    base * (lead - (a - 1.0) * tail)
}

/// Density in y of the position at first entrance to (-1,1) for the dual
/// process started at x > 1.
pub fn kpw_interval_density(params: &StableParams, x: f64, y: f64, cfg: &QuadConfig) -> Result<f64> {
    check_kpw_start(params, x)?;
    need_open("y", y, -1.0, 1.0)?;
    let tail = entrance_integral(params, x, cfg)?;
    Ok(kpw_from_parts(params, x, 1.0 + y, 1.0 - y, tail))
}

/// ∫_{-1}^1 kpw_interval_density dy, which is one when entrance is certain.
pub fn kpw_interval_mass(params: &StableParams, x: f64, cfg: &QuadConfig) -> Result<f64> {
    check_kpw_start(params, x)?;
    let tail = entrance_integral(params, x, cfg)?;
    // y = 2w - 1
    integrate_01_real(
        |w, wc| 2.0 * kpw_from_parts(params, x, 2.0 * w, 2.0 * wc, tail),
        params.arh(),
        params.ar(),
        cfg,
    )
}

/// The x → ∞ limit of the entrance density, c(α)(1+y)^{-αρ̂}(1-y)^{-αρ}.
pub fn p_hat_inf(params: &StableParams, y: f64) -> Result<f64> {
    need_big_alpha(params, "the stationary entrance law")?;
    need_open("y", y, -1.0, 1.0)?;
    Ok(c_alpha(params) * (1.0 + y).powf(-params.arh()) * (1.0 - y).powf(-params.ar()))
}

/// ∫_{-1}^1 p_hat_inf(y) dy.
pub fn p_hat_inf_mass(params: &StableParams, cfg: &QuadConfig) -> Result<f64> {
    need_big_alpha(params, "the stationary entrance law")?;
    let (ar, arh) = (params.ar(), params.arh());
    // y = 2w - 1
    let scale = 2.0 * c_alpha(params) * 2f64.powf(-params.alpha());
    let inner = integrate_01_real(|w, wc| w.powf(-arh) * wc.powf(-ar), arh, ar, cfg)?;
    Ok(scale * inner)
}

/// β̂(θ) = αρ(1-θ)^{-αρ-1}(1+θ)^{-αρ̂} - ((α-1)/2)(1-θ)^{-αρ}(1+θ)^{-αρ̂}.
pub fn beta_hat(params: &StableParams, theta: f64) -> Result<f64> {
    need_big_alpha(params, "beta_hat")?;
    need_open("theta", theta, -1.0, 1.0)?;
    let (a, ar, arh) = (params.alpha(), params.ar(), params.arh());
    let common = (1.0 - theta).powf(-ar) * (1.0 + theta).powf(-arh);
    Ok(common * (ar / (1.0 - theta) - 0.5 * (a - 1.0)))
}

fn sine_weight(params: &StableParams, i: u8) -> Result<f64> {
    match i {
        1 => Ok(PI / params.sin_ar()),
        2 => Ok(PI / params.sin_arh()),
        _ => Err(Error::Domain(format!("state must be 1 or 2, got {i}"))),
    }
}

/// Limit of e^{rate·a} P_{0,i}(T_a < ∞).
pub fn cramer_constant(params: &StableParams, i: u8, regime: CramerRegime) -> Result<CramerAsymptotic> {
    let w = sine_weight(params, i)?;
    let a = params.alpha();
    match regime {
        CramerRegime::BigAlpha if a <= 1.0 => Ok(CramerAsymptotic::Certain),
        CramerRegime::BigAlpha => Ok(CramerAsymptotic::Exponential {
            rate: a - 1.0,
            constant: c_alpha(params) * w,
        }),
        CramerRegime::SmallAlphaDual if a >= 1.0 => Ok(CramerAsymptotic::Certain),
        CramerRegime::SmallAlphaDual => {
            let ln = (1.0 - a) * 2f64.ln()
                - ln_gamma(params.ar())?
                - ln_gamma(params.arh())?
                - ln_gamma(2.0 - a)?;
            Ok(CramerAsymptotic::Exponential {
                rate: 1.0 - a,
                constant: ln.exp() * w,
            })
        }
    }
}

/// Limiting density in u of H⁺(T_a) - a on {J⁺(T_a) = j}, given T_a < ∞.
pub fn cramer_overshoot_density(params: &StableParams, u: f64, j: u8, regime: CramerRegime) -> Result<f64> {
    need_positive("u", u)?;
    let (a, ar, arh) = (params.alpha(), params.ar(), params.arh());
    let (y, yc) = ((-u).exp(), -(-u).exp_m1());
    match (regime, j) {
        (CramerRegime::BigAlpha, 1) => Ok(params.sin_ar() / PI * y.powf(a) * (1.0 + y).powf(-arh) * yc.powf(-ar)),
        (CramerRegime::BigAlpha, 2) => Ok(params.sin_arh() / PI * y.powf(a) * (1.0 + y).powf(-ar) * yc.powf(-arh)),
        (CramerRegime::SmallAlphaDual, 1) => Ok(c_alpha(params) * y * (1.0 + y).powf(-ar) * yc.powf(-arh)),
        (CramerRegime::SmallAlphaDual, 2) => Ok(c_alpha(params) * y * (1.0 + y).powf(-arh) * yc.powf(-ar)),
        _ => Err(Error::Domain(format!("state must be 1 or 2, got {j}"))),
    }
}

/// ∫_u^∞ cramer_overshoot_density, in the variable y = e^{-u}.
pub fn cramer_overshoot_tail(
    params: &StableParams,
    u: f64,
    j: u8,
    regime: CramerRegime,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("u must be >= 0, got {u}")));
    }
    // Density in y (dy = y du): the u-density divided by y.
    let (a, ar, arh) = (params.alpha(), params.ar(), params.arh());
    let (c, e_plus, e_minus, y_power) = match (regime, j) {
        (CramerRegime::BigAlpha, 1) => (params.sin_ar() / PI, arh, ar, a - 1.0),
        (CramerRegime::BigAlpha, 2) => (params.sin_arh() / PI, ar, arh, a - 1.0),
        (CramerRegime::SmallAlphaDual, 1) => (c_alpha(params), ar, arh, 0.0),
        (CramerRegime::SmallAlphaDual, 2) => (c_alpha(params), arh, ar, 0.0),
        _ => return Err(Error::Domain(format!("state must be 1 or 2, got {j}"))),
    };
    let top = (-u).exp();
    if top == 0.0 {
        return Ok(0.0);
    }
    let top_c = -(-u).exp_m1();
    // y = top·w
    let right = if u == 0.0 { e_minus } else { 0.0 };
    let v = integrate_01_real(
        |w, wc| {
            let y = top * w;
            let yc = top_c + top * wc;
            y.powf(y_power) * (1.0 + y).powf(-e_plus) * yc.powf(-e_minus)
        },
        -y_power,
        right,
        cfg,
    )?;
    Ok(c * top * v)
}

/// Total mass of the limiting overshoot law over u > 0 and j ∈ {1,2}.
pub fn cramer_overshoot_mass(params: &StableParams, regime: CramerRegime, cfg: &QuadConfig) -> Result<f64> {
    Ok(cramer_overshoot_tail(params, 0.0, 1, regime, cfg)? + cramer_overshoot_tail(params, 0.0, 2, regime, cfg)?)
}

/// CDF of the limiting law on one axis, with state 1 at s = u > 0 and
/// state 2 at s = -u < 0.
pub fn cramer_overshoot_signed_cdf(params: &StableParams, s: f64, regime: CramerRegime, cfg: &QuadConfig) -> Result<f64> {
    if s < 0.0 {
        return cramer_overshoot_tail(params, -s, 2, regime, cfg);
    }
    let mass = cramer_overshoot_mass(params, regime, cfg)?;
    Ok(mass - cramer_overshoot_tail(params, s, 1, regime, cfg)?)
}

pub fn escape_asymptote(params: &StableParams, x: f64) -> Result<EscapeAsymptote> {
    need_big_alpha(params, "the escape asymptote")?;
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("x must be non-zero and finite, got {x}")));
    }
    let weight = if x > 0.0 { params.sin_ar() } else { params.sin_arh() } / PI;
    Ok(EscapeAsymptote {
        limit: c_alpha(params),
        weight,
    })
}

/// Density in θ of X_{τ⁺₁} - 1 on the event that (-1,1) is left upwards
/// before the origin is hit, from x in (0,1).
pub fn first_passage_density_origin(params: &StableParams, x: f64, theta: f64, cfg: &QuadConfig) -> Result<f64> {
    need_big_alpha(params, "the origin-avoiding passage density")?;
    need_open("x", x, 0.0, 1.0)?;
    need_positive("theta", theta)?;
    let lead = rogozin_density(params, x, theta, RogozinForm::Symmetric)?;
    let (a, ar, arh, k) = (params.alpha(), params.ar(), params.arh(), params.sin_ar() / PI);
    let killed = (a - 1.0) * k * (2.0 + theta).powf(-arh) * theta.powf(-ar) / (1.0 + theta)
        * x.powf(a - 1.0)
        * entrance_integral(params, 1.0 / x, cfg)?;
    Ok(lead - killed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    BigAlpha,
    SmallAlpha,
}

/// The two hypergeometric simplifications behind the Cramér constants.
pub fn hypergeometric_identity_check(params: &StableParams, which: IdentityKind, cfg: &QuadConfig) -> Result<IdentityCheck> {
    let (a, ar, arh, s, sh) = (params.alpha(), params.ar(), params.arh(), params.sin_ar(), params.sin_arh());
    match which {
        IdentityKind::BigAlpha => {
            need_big_alpha(params, "the big-alpha identity")?;
            let i1 = integrate_01_real(
                |y, yc| y.powf(a - 1.0) * (1.0 + y).powf(-arh) * yc.powf(-ar),
                1.0 - a,
                ar,
                cfg,
            )?;
            let i2 = integrate_01_real(
                |y, yc| y.powf(a - 1.0) * yc.powf(-arh) * (1.0 + y).powf(-ar),
                1.0 - a,
                arh,
                cfg,
            )?;
            let beta = |x: f64, y: f64| (ln_gamma(x).unwrap() + ln_gamma(y).unwrap() - ln_gamma(x + y).unwrap()).exp();
            let h1 = beta(a, 1.0 - ar) * hyp2f1_neg1(arh, a, arh + 1.0)?;
            let h2 = beta(a, 1.0 - arh) * hyp2f1_neg1(ar, a, ar + 1.0)?;
            Ok(IdentityCheck {
                lhs: s * i1 + sh * i2,
                rhs: PI,
                hypergeometric: s * h1 + sh * h2,
            })
        }
        IdentityKind::SmallAlpha => {
            if a >= 1.0 {
                return Err(Error::Regime(format!("the small-alpha identity needs alpha in (0,1), got {a}")));
            }
            // In y = e^{-u} both integrands become (1-y)^{-e}(1+y)^{-f}.
            let j1 = integrate_01_real(|y, yc| yc.powf(-arh) * (1.0 + y).powf(-ar), 0.0, arh, cfg)?;
            let j2 = integrate_01_real(|y, yc| yc.powf(-ar) * (1.0 + y).powf(-arh), 0.0, ar, cfg)?;
            let k = s * sh / PI;
            let rhs = ((1.0 - a) * 2f64.ln() + PI.ln() - ln_gamma(ar)? - ln_gamma(arh)? - ln_gamma(2.0 - a)?).exp();
            let hyp = k / ((1.0 - arh) * (1.0 - ar))
                * ((1.0 - ar) * hyp2f1_neg1(1.0, ar, 2.0 - arh)? + (1.0 - arh) * hyp2f1_neg1(1.0, arh, 2.0 - ar)?);
            Ok(IdentityCheck {
                lhs: k * (j1 + j2),
                rhs,
                hypergeometric: hyp,
            })
        }
    }
}
