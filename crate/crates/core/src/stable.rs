//! Admissible stable parameters and the scalar exponent and ladder factors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{sin_pi, C64};

/// Distance below which a parameter is considered to sit on a boundary of
/// the admissible set.
pub const BOUNDARY_SLACK: f64 = 1e-9;

/// A validated (α, ρ) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableParams {
    alpha: f64,
    rho: f64,
}

impl StableParams {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        let bad = |why: String| Err(Error::Inadmissible(format!("alpha = {alpha}, rho = {rho}: {why}")));
        if !alpha.is_finite() || !rho.is_finite() {
            return bad("parameters must be finite".into());
        }
        if !(alpha > BOUNDARY_SLACK && alpha < 2.0 - BOUNDARY_SLACK) {
            return bad("alpha must lie in (0, 2)".into());
        }
        if alpha == 1.0 {
            if rho != 0.5 {
                return bad("alpha = 1 requires rho = 1/2".into());
            }
        } else if (alpha - 1.0).abs() <= BOUNDARY_SLACK {
            return bad("alpha within 1e-9 of 1 is ambiguous; use exactly 1".into());
        }
        let lo = (1.0 - 1.0 / alpha).max(0.0);
        let hi = (1.0 / alpha).min(1.0);
        if !(rho > lo + BOUNDARY_SLACK && rho < hi - BOUNDARY_SLACK) {
            return bad(format!("rho must lie in the admissible interval ({lo}, {hi})"));
        }
        let (ar, arh) = (alpha * rho, alpha * (1.0 - rho));
        for (name, v) in [("alpha*rho", ar), ("alpha*rho_hat", arh)] {
            if !(v > BOUNDARY_SLACK && v < 1.0 - BOUNDARY_SLACK) {
                return bad(format!("{name} = {v} must lie in (0, 1)"));
            }
        }
        Ok(Self { alpha, rho })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rho_hat(&self) -> f64 {
        1.0 - self.rho
    }

    /// αρ
    pub fn ar(&self) -> f64 {
        self.alpha * self.rho
    }

    /// αρ̂
    pub fn arh(&self) -> f64 {
        self.alpha * self.rho_hat()
    }

    /// sin(παρ)
    pub fn sin_ar(&self) -> f64 {
        sin_pi(self.ar())
    }

    /// sin(παρ̂)
    pub fn sin_arh(&self) -> f64 {
        sin_pi(self.arh())
    }

    /// The same α with ρ and ρ̂ exchanged (the law of -X).
    pub fn mirrored(&self) -> Self {
        Self {
            alpha: self.alpha,
            rho: self.rho_hat(),
        }
    }

    pub fn is_small_alpha(&self) -> bool {
        self.alpha <= 1.0
    }
}

impl<'de> Deserialize<'de> for StableParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: f64,
            rho: f64,
        }
        let raw = Raw::deserialize(d)?;
        StableParams::new(raw.alpha, raw.rho).map_err(serde::de::Error::custom)
    }
}

/// Ψ(θ) = |θ|^α exp(±iπα(1/2 - ρ)) with the sign of θ.
pub fn char_exponent(params: &StableParams, theta: f64) -> C64 {
    if theta == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let phase = PI * params.alpha() * (0.5 - params.rho()) * theta.signum();
    C64::from_polar(theta.abs().powf(params.alpha()), phase)
}

/// Ascending and descending ladder exponents (λ^{αρ}, λ^{αρ̂}).
pub fn levy_wh_factors(params: &StableParams, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok((lambda.powf(params.ar()), lambda.powf(params.arh())))
}

/// The ladder factors continued to complex arguments on the principal
/// branch, λ^β = |λ|^β e^{iβ arg λ}.
pub fn levy_wh_factors_complex(params: &StableParams, lambda: C64) -> (C64, C64) {
    let pow = |b: f64| {
        if lambda.norm() == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::from_polar(lambda.norm().powf(b), b * lambda.arg())
        }
    };
    (pow(params.ar()), pow(params.arh()))
}
