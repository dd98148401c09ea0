//! Flag and file settings, and their resolution into a `RunConfig`.
//!
//! The optional TOML file holds the shared keys at top level and one table
//! per command. Every key mirrors a flag with dashes turned into
//! underscores, and a flag given on the command line wins over the file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lsmap_core::montecarlo::default_workers;
use lsmap_core::{checks, MCConfig, QuadConfig, StableParams};
use serde::{Deserialize, Serialize};

use crate::grid;
use crate::Failure;

pub const WORKERS_ENV: &str = "LSMAP_WORKERS";

/// Fills every `None` in `self` from `file`.
trait Overlay {
    fn overlay(self, file: Self) -> Self;
}

macro_rules! overlay_struct {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl Overlay for $t {
            fn overlay(self, file: Self) -> Self {
                Self { $($f: self.$f.or(file.$f)),* }
            }
        }
    };
}

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    /// Stability index in (0,2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Positivity parameter.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Sets both quadrature tolerances; --rel-tol and --abs-tol take precedence.
    #[arg(long = "quad-tol")]
    pub quad_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long = "abs-tol")]
    pub abs_tol: Option<f64>,
    /// Maximum tanh-sinh refinement levels.
    #[arg(long = "max-levels")]
    pub max_levels: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
overlay_struct!(Common { alpha, rho, quad_tol, rel_tol, abs_tol, max_levels, output });

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    #[value(name = "F")]
    #[serde(rename = "F")]
    F,
    #[value(name = "F_circ")]
    #[serde(rename = "F_circ")]
    FCirc,
    #[value(name = "F_hat")]
    #[serde(rename = "F_hat")]
    FHat,
}

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentArgs {
    /// Which exponent to tabulate.
    #[arg(long, value_enum, ignore_case = true)]
    pub which: Option<Which>,
    /// Real parts, as `a,b,c` or `lo:hi:n` [default: 0].
    #[arg(long = "z-real", allow_hyphen_values = true)]
    pub z_real: Option<String>,
    /// Imaginary parts, as `a,b,c` or `lo:hi:n` [default: 0].
    #[arg(long = "z-imag", allow_hyphen_values = true)]
    pub z_imag: Option<String>,
}
overlay_struct!(ExponentArgs { which, z_real, z_imag });

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorsArgs {
    /// Real λ ≥ 0 grid [default: 0:10:41].
    #[arg(long)]
    pub lambda: Option<String>,
}
overlay_struct!(FactorsArgs { lambda });

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyArgs {
    /// θ grid for the factorisation [default: ±0.5, ±1, ±2, ±5].
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// λ grid for the shift, mirror and two-route checks [default: 0.5,1,2,5].
    #[arg(long)]
    pub lambda: Option<String>,
    /// Comma-separated check names to keep; all applicable checks when absent.
    #[arg(long)]
    pub only: Option<String>,
}
overlay_struct!(VerifyArgs { theta, lambda, only });

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Exit from (-1,1), compared with the closed-form exit law.
    TwoSidedExit,
    /// Overshoot over a high level in log-modulus, compared with its limit.
    LadderOvershoot,
}

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub estimator: Option<Estimator>,
    /// Starting point in (-1,1) for the two-sided exit [default: 0.3].
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Level a in log-modulus for the ladder overshoot [default: 5].
    #[arg(long)]
    pub level: Option<f64>,
    /// Starting state (1 above, 2 below the origin) [default: 1].
    #[arg(long = "start-state")]
    pub start_state: Option<u8>,
    /// Number of paths [default: 50000].
    #[arg(long = "n-paths")]
    pub n_paths: Option<u64>,
    /// Largest time step [default: 1e-4].
    #[arg(long = "time-step")]
    pub time_step: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to the LSMAP_WORKERS variable, then to
    /// the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Near-barrier step refinement factor; 0 gives a plain fixed-step
    /// skeleton [default: 0.1].
    #[arg(long)]
    pub refinement: Option<f64>,
    /// Steps after which a path is abandoned as a budget error.
    #[arg(long = "step-cap")]
    pub step_cap: Option<u64>,
    /// Histogram bin count [default: 40].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Histogram covers [-range, range] of the signed overshoot [default: 2].
    #[arg(long)]
    pub range: Option<f64>,
    /// Largest acceptable KS distance [default: 0.02 two-sided, 0.03 ladder].
    #[arg(long = "ks-bound")]
    pub ks_bound: Option<f64>,
    /// JSON summary file; standard error when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}
overlay_struct!(SimulateArgs {
    estimator,
    x,
    level,
    start_state,
    n_paths,
    time_step,
    seed,
    workers,
    refinement,
    step_cap,
    bins,
    range,
    ks_bound,
    summary
});

/// Contents of a `--config` file.
#[derive(Debug, Default)]
pub struct FileConfig {
    pub common: Common,
    pub exponent: ExponentArgs,
    pub factors: FactorsArgs,
    pub verify: VerifyArgs,
    pub simulate: SimulateArgs,
}

const SECTIONS: [&str; 5] = ["exponent", "factors", "verify", "simulate", "identities"];

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let mut take = |name: &str| table.remove(name).unwrap_or_else(|| toml::Value::Table(Default::default()));
        let sections: Vec<toml::Value> = SECTIONS.iter().map(|s| take(s)).collect();
        let common: Common = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| e.to_string())?;
        let section = |i: usize| sections[i].clone();
        let identities: toml::Table = section(4).try_into().map_err(|e: toml::de::Error| e.to_string())?;
        if let Some(key) = identities.keys().next() {
            return Err(format!("[identities] takes no keys, found '{key}'"));
        }
        Ok(Self {
            common,
            exponent: section(0).try_into().map_err(|e: toml::de::Error| format!("[exponent] {e}"))?,
            factors: section(1).try_into().map_err(|e: toml::de::Error| format!("[factors] {e}"))?,
            verify: section(2).try_into().map_err(|e: toml::de::Error| format!("[verify] {e}"))?,
            simulate: section(3).try_into().map_err(|e: toml::de::Error| format!("[simulate] {e}"))?,
        })
    }
}

/// Fully resolved settings, embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<StableParams>,
    pub quad: QuadConfig,
    pub output: Option<String>,
    #[serde(flatten)]
    pub command: CommandConfig,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandConfig {
    Exponent {
        which: Which,
        z_real: Vec<f64>,
        z_imag: Vec<f64>,
    },
    Factors {
        lambda: Vec<f64>,
    },
    Verify {
        theta: Vec<f64>,
        lambda: Vec<f64>,
        only: Option<Vec<String>>,
    },
    Simulate {
        estimator: Estimator,
        x: f64,
        level: f64,
        start_state: u8,
        mc: MCConfig,
        bins: usize,
        range: f64,
        ks_bound: f64,
        summary: Option<String>,
    },
    Identities,
}

impl RunConfig {
    /// Single-line JSON, for CSV headers.
    pub fn header(&self) -> String {
        format!("config: {}", serde_json::to_string(self).expect("config serialises"))
    }
}

fn usage<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn grid_or(spec: Option<String>, default: &str) -> Result<Vec<f64>, Failure> {
    usage(grid::parse(spec.as_deref().unwrap_or(default)))
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn resolve_quad(common: &Common) -> Result<QuadConfig, Failure> {
    let d = QuadConfig::default();
    let q = QuadConfig {
        rel_tol: common.rel_tol.or(common.quad_tol).unwrap_or(d.rel_tol),
        abs_tol: common.abs_tol.or(common.quad_tol).unwrap_or(d.abs_tol),
        max_levels: common.max_levels.unwrap_or(d.max_levels),
    };
    if !(q.rel_tol > 0.0) || !(q.abs_tol >= 0.0) || q.max_levels == 0 {
        return Err(Failure::Usage(format!(
            "quadrature settings must have rel_tol > 0, abs_tol >= 0 and max_levels >= 1, got {q:?}"
        )));
    }
    Ok(q)
}

pub fn resolve_params(common: &Common) -> Result<StableParams, Failure> {
    match (common.alpha, common.rho) {
        (Some(a), Some(r)) => Ok(StableParams::new(a, r)?),
        _ => Err(Failure::Usage("--alpha and --rho are required".into())),
    }
}

fn base(common: &Common, params: Option<StableParams>, command: CommandConfig) -> Result<RunConfig, Failure> {
    Ok(RunConfig {
        params,
        quad: resolve_quad(common)?,
        output: common.output.as_ref().map(|p| p.display().to_string()),
        command,
    })
}

pub fn exponent(common: Common, args: ExponentArgs, file: FileConfig) -> Result<RunConfig, Failure> {
    let common = common.overlay(file.common);
    let args = args.overlay(file.exponent);
    let params = resolve_params(&common)?;
    let cmd = CommandConfig::Exponent {
        which: args.which.unwrap_or(Which::F),
        z_real: grid_or(args.z_real, "0")?,
        z_imag: grid_or(args.z_imag, "0")?,
    };
    base(&common, Some(params), cmd)
}

pub fn factors(common: Common, args: FactorsArgs, file: FileConfig) -> Result<RunConfig, Failure> {
    let common = common.overlay(file.common);
    let args = args.overlay(file.factors);
    let params = resolve_params(&common)?;
    let lambda = grid_or(args.lambda, "0:10:41")?;
    if let Some(bad) = lambda.iter().find(|l| **l < 0.0) {
        return Err(Failure::Usage(format!("lambda grid must be >= 0, found {bad}")));
    }
    base(&common, Some(params), CommandConfig::Factors { lambda })
}

pub fn verify(common: Common, args: VerifyArgs, file: FileConfig) -> Result<RunConfig, Failure> {
    let common = common.overlay(file.common);
    let args = args.overlay(file.verify);
    let params = resolve_params(&common)?;
    let theta = grid_or(args.theta, &list(&checks::THETA_GRID))?;
    let lambda = grid_or(args.lambda, &list(&checks::LAMBDA_GRID))?;
    let only = args
        .only
        .map(|s| s.split(',').map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).collect());
    base(&common, Some(params), CommandConfig::Verify { theta, lambda, only })
}

pub fn identities(common: Common, file: FileConfig) -> Result<RunConfig, Failure> {
    let common = common.overlay(file.common);
    let params = match (common.alpha, common.rho) {
        (None, None) => None,
        _ => Some(resolve_params(&common)?),
    };
    base(&common, params, CommandConfig::Identities)
}

fn env_workers() -> Result<Option<usize>, Failure> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn simulate(common: Common, args: SimulateArgs, file: FileConfig) -> Result<RunConfig, Failure> {
    let common = common.overlay(file.common);
    let args = args.overlay(file.simulate);
    let params = resolve_params(&common)?;
    let estimator = args
        .estimator
        .ok_or_else(|| Failure::Usage("an estimator (two-sided-exit or ladder-overshoot) is required".into()))?;
    let d = MCConfig::default();
    let refinement = args.refinement.unwrap_or(0.1);
    if !(refinement >= 0.0) {
        return Err(Failure::Usage(format!("refinement must be >= 0, got {refinement}")));
    }
    let n_workers = match args.workers {
        Some(n) => n,
        None => env_workers()?.unwrap_or_else(default_workers),
    };
    let mc = MCConfig {
        n_paths: args.n_paths.unwrap_or(50_000),
        time_step: args.time_step.unwrap_or(d.time_step),
        seed: args.seed.unwrap_or(d.seed),
        n_workers,
        barrier_refinement: (refinement > 0.0).then_some(refinement),
        step_cap: args.step_cap.unwrap_or(d.step_cap),
    };
    mc.validate()?;
    let bins = args.bins.unwrap_or(40);
    let range = args.range.unwrap_or(2.0);
    if bins == 0 || !(range > 0.0) || !range.is_finite() {
        return Err(Failure::Usage(format!("need bins >= 1 and a finite range > 0, got {bins} and {range}")));
    }
    let ks_bound = args.ks_bound.unwrap_or(match estimator {
        Estimator::TwoSidedExit => 0.02,
        Estimator::LadderOvershoot => 0.03,
    });
    let cmd = CommandConfig::Simulate {
        estimator,
        x: args.x.unwrap_or(0.3),
        level: args.level.unwrap_or(5.0),
        start_state: args.start_state.unwrap_or(1),
        mc,
        bins,
        range,
        ks_bound,
        summary: args.summary.as_ref().map(|p| p.display().to_string()),
    };
    base(&common, Some(params), cmd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = FileConfig::parse("alpha = 0.8\nrho = 0.5\nrel_tol = 1e-8\n[factors]\nlambda = \"0,1\"\n").unwrap();
        let flags = Common {
            rho: Some(0.3),
            ..Common::default()
        };
        let cfg = factors(flags, FactorsArgs::default(), file).unwrap();
        let p = cfg.params.unwrap();
        assert_eq!((p.alpha(), p.rho()), (0.8, 0.3));
        assert_eq!(cfg.quad.rel_tol, 1e-8);
        assert!(matches!(cfg.command, CommandConfig::Factors { ref lambda } if lambda == &[0.0, 1.0]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(FileConfig::parse("alpah = 0.8").is_err());
        assert!(FileConfig::parse("[simulate]\nn_path = 3").is_err());
        assert!(FileConfig::parse("[identities]\nx = 1").is_err());
        let q = resolve_quad(&FileConfig::parse("quad_tol = 1e-9\nabs_tol = 0.0").unwrap().common).unwrap();
        assert_eq!((q.rel_tol, q.abs_tol), (1e-9, 0.0));
    }
}
