//! Double-exponential (tanh-sinh) quadrature for complex integrands with
//! algebraic endpoint singularities.
//!
//! Integrands on (0,1) receive both the node `u` and its complement `1 - u`,
//! each computed without cancellation, so factors like `(1-u)^{-p}` keep full
//! relative precision right up to the endpoint.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_levels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_levels: 12,
        }
    }
}

impl QuadConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_levels: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            max_levels,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Domain(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Domain(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if self.max_levels < 4 {
            return Err(Error::Domain(format!(
                "max_levels must be at least 4, got {}",
                self.max_levels
            )));
        }
        Ok(())
    }

    /// Same config with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            max_levels: self.max_levels,
        }
    }
}

// Nodes beyond |t| = 6 sit within 1e-270 of an endpoint; f is never
// evaluated there and their share comes from the endpoint power law.
const T_MAX: f64 = 6.0;

const ROUNDOFF: f64 = 4.0 * f64::EPSILON;

// The modelled tail stops once it is negligible or, for exponents very close
// to 1, at a fixed t where the rest is added in closed form.
const TAIL_CUTOFF: f64 = 1e-20;
const TAIL_LIMIT: f64 = 2.0 * T_MAX;

// Levels below this are never accepted as converged.
const MIN_ACCEPT_LEVEL: usize = 3;

struct Node {
    u: f64,
    uc: f64,
    w: f64,
}

fn node(t: f64) -> Node {
    let s = PI * t.sinh();
    let u = 1.0 / (1.0 + (-s).exp());
    let uc = 1.0 / (1.0 + s.exp());
    Node {
        u,
        uc,
        w: PI * t.cosh() * u * uc,
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if !(p < 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "{name} endpoint exponent {p} makes the integral divergent (need < 1)"
        )));
    }
    Ok(())
}

fn eval<F>(f: &F, n: &Node) -> Result<C64>
where
    F: Fn(f64, f64) -> C64,
{
    let v = f(n.u, n.uc);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "integrand is not finite at u = {:e} (1-u = {:e})",
            n.u, n.uc
        )))
    }
}

/// Trapezoid nodes beyond |t| = T_MAX, continuing the sum with the
/// endpoint value `g_end` carried by the power law `x^{-exponent}` that
/// holds that close to the endpoint x. Strong singularities decay slowly in
/// t, so cutting the sum at T_MAX would leave an O(h) error.
fn tail_sum(g_end: C64, exponent: f64, h: f64) -> C64 {
    if g_end == C64::new(0.0, 0.0) {
        return g_end;
    }
    // Past T_MAX the node is e^{-π sinh t} to full precision and the
    // transformed integrand is g_end·(cosh t / cosh T)·e^{-c(sinh t - sinh T)}.
    let c = (1.0 - exponent) * PI;
    let (sinh_end, cosh_end) = (T_MAX.sinh(), T_MAX.cosh());
    let mut acc = 0.0;
    let mut k = 1;
    loop {
        let t = T_MAX + k as f64 * h;
        let ratio = t.cosh() / cosh_end * (-c * (t.sinh() - sinh_end)).exp();
        if ratio < TAIL_CUTOFF {
            break;
        }
        if t >= TAIL_LIMIT {
            // What remains is the integral of the model from t on.
            acc += ratio * cosh_end / (c * t.cosh()) / h;
            break;
        }
        acc += ratio;
        k += 1;
    }
    g_end * (h * acc)
}

/// Integral of `f` over (0,1).
///
/// `f(u, 1-u)` may blow up like `u^{-left_exponent}` at 0 and like
/// `(1-u)^{-right_exponent}` at 1. Both exponents must be below 1.
pub fn integrate_01<F>(f: F, left_exponent: f64, right_exponent: f64, cfg: &QuadConfig) -> Result<C64>
where
    F: Fn(f64, f64) -> C64,
{
    cfg.validate()?;
    check_exponent("left", left_exponent)?;
    check_exponent("right", right_exponent)?;

    // Integer t nodes on [-T_MAX, T_MAX] form level 0 (step 1).
    let n0 = T_MAX as i64;
    let mut sum = C64::new(0.0, 0.0);
    for j in -n0..=n0 {
        let nd = node(j as f64);
        sum += nd.w * eval(&f, &nd)?;
    }

    let lo = node(-T_MAX);
    let hi = node(T_MAX);
    let g_lo = lo.w * eval(&f, &lo)?;
    let g_hi = hi.w * eval(&f, &hi)?;
    let tail = |h: f64| tail_sum(g_lo, left_exponent, h) + tail_sum(g_hi, right_exponent, h);

    let mut h = 1.0;
    let mut prev = sum * h + tail(h);
    let mut estimate = f64::INFINITY;
    for level in 1..=cfg.max_levels {
        h *= 0.5;
        let count = (T_MAX / h) as i64;
        let mut j = -count + 1;
        if j.rem_euclid(2) == 0 {
            j += 1;
        }
        while j <= count {
            let nd = node(j as f64 * h);
            sum += nd.w * eval(&f, &nd)?;
            j += 2;
        }
        let current = sum * h + tail(h);
        // Successive levels can agree to the last bit; no estimate is
        // ever better than the round-off in the sum itself.
        estimate = (current - prev).norm().max(ROUNDOFF * current.norm());
        let tolerance = cfg.abs_tol.max(cfg.rel_tol * current.norm());
        if level >= MIN_ACCEPT_LEVEL && estimate <= tolerance {
            return Ok(current);
        }
        prev = current;
    }
    Err(Error::NoConvergence {
        estimate,
        tolerance: cfg.abs_tol.max(cfg.rel_tol * prev.norm()),
        levels: cfg.max_levels,
    })
}

/// Real-valued convenience wrapper around [`integrate_01`].
pub fn integrate_01_real<F>(f: F, left_exponent: f64, right_exponent: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_01(|u, uc| C64::new(f(u, uc), 0.0), left_exponent, right_exponent, cfg).map(|z| z.re)
}

/// -ln(u) given u and 1-u, accurate at both ends.
pub fn neg_ln(u: f64, uc: f64) -> f64 {
    if u < 0.5 {
        -u.ln()
    } else {
        -(-uc).ln_1p()
    }
}

/// Integral of `f` over (0,∞) through the substitution x = -ln u.
///
/// `f(x)` may blow up like `x^{-origin_exponent}` at 0 and must decay like
/// `e^{-decay_rate x}` at infinity.
pub fn integrate_0inf<F>(f: F, origin_exponent: f64, decay_rate: f64, cfg: &QuadConfig) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    if !(decay_rate > 0.0) {
        return Err(Error::Domain(format!("decay rate must be positive, got {decay_rate}")));
    }
    integrate_01(
        |u, uc| {
            if u == 0.0 {
                return C64::new(0.0, 0.0);
            }
            f(neg_ln(u, uc)) / u
        },
        1.0 - decay_rate,
        origin_exponent,
        cfg,
    )
}
