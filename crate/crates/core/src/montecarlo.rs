//! Path simulation of the stable process and the statistics used to hold
//! the closed-form exit laws against it.
//!
//! Paths are generated in fixed blocks of [`BLOCK_PATHS`]; block `b` draws
//! from substream `b` of the seed, so output depends on the seed and path
//! count but not on how many workers share the blocks.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exit_laws::ExitSide;
use crate::stable::StableParams;

pub const BLOCK_PATHS: u64 = 4096;

/// Default number of steps after which a path is abandoned.
pub const STEP_CAP: u64 = 100_000_000;

// A skeleton needs on the order of 1/h steps to leave (-1,1); below 10² the
// exit statistics say more about h than about the process.
const MAX_TIME_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MCConfig {
    pub n_paths: u64,
    /// Largest step h in process time.
    pub time_step: f64,
    pub seed: u64,
    pub n_workers: usize,
    /// Within distance d of the barrier the step's spatial scale is capped
    /// at `refinement·d`. `None` gives the plain fixed-h skeleton.
    pub barrier_refinement: Option<f64>,
    /// A path still inside after this many steps is a budget error.
    pub step_cap: u64,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            time_step: 1e-4,
            seed: 0,
            n_workers: default_workers(),
            barrier_refinement: Some(0.1),
            step_cap: STEP_CAP,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Domain("n_paths must be at least 1".into()));
        }
        if !(self.time_step > 0.0 && self.time_step <= MAX_TIME_STEP) {
            return Err(Error::Domain(format!(
                "time_step must lie in (0, {MAX_TIME_STEP}] so a path takes at least 1e2 steps, got {}",
                self.time_step
            )));
        }
        if self.step_cap == 0 {
            return Err(Error::Domain("step_cap must be at least 1".into()));
        }
        if self.n_workers == 0 {
            return Err(Error::Domain("n_workers must be at least 1".into()));
        }
        if let Some(r) = self.barrier_refinement {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Domain(format!("barrier_refinement must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_effective: u64,
}

impl MCEstimate {
    /// Binomial proportion with its plug-in standard error.
    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n_effective: n,
        }
    }

    /// |value - target| in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.std_error
    }
}

/// Deterministic substream `stream` of `seed`. Distinct streams never
/// overlap: ChaCha keeps a separate 2^64-block counter per stream id.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Chambers–Mallows–Stuck sampler for X₁ with E e^{iθX₁} = e^{-Ψ(θ)}.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    alpha: f64,
    // π(ρ - 1/2), the shift making the skewness come out right.
    shift: f64,
    inv_alpha: f64,
    outer: f64,
}

impl StableSampler {
    pub fn new(params: &StableParams) -> Self {
        let alpha = params.alpha();
        Self {
            alpha,
            shift: PI * (params.rho() - 0.5),
            inv_alpha: 1.0 / alpha,
            outer: (1.0 - alpha) / alpha,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * rng.sample::<f64, _>(Open01) - FRAC_PI_2;
        if self.alpha == 1.0 {
            // Admissibility forces ρ = 1/2 here: standard Cauchy.
            return v.tan();
        }
        let w = -rng.sample::<f64, _>(Open01).ln();
        let t = self.alpha * (v + self.shift);
        let (st, ct) = t.sin_cos();
        let (sv, cv) = v.sin_cos();
        // cos(v - t) by the addition formula saves a third trig call.
        let cvt = cv * ct + sv * st;
        st * (self.outer * (cvt / w).ln() - self.inv_alpha * cv.ln()).exp()
    }
}

/// One increment over time h, distributed as h^{1/α} X₁.
pub fn sample_stable_increment<R: Rng + ?Sized>(params: &StableParams, h: f64, rng: &mut R) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("time step must be positive, got {h}")));
    }
    Ok(h.powf(1.0 / params.alpha()) * StableSampler::new(params).sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitRecord {
    pub side: ExitSide,
    /// First skeleton position outside the interval.
    pub position: f64,
    pub n_steps: u64,
}

impl ExitRecord {
    /// Distance beyond the barrier crossed, in units of the half-width.
    pub fn overshoot(&self, half_width: f64) -> f64 {
        self.position.abs() / half_width - 1.0
    }
}

struct Walker {
    sampler: StableSampler,
    spatial_step: f64,
    refinement: Option<f64>,
    step_cap: u64,
}

impl Walker {
    fn new(params: &StableParams, cfg: &MCConfig) -> Self {
        Self {
            sampler: StableSampler::new(params),
            spatial_step: cfg.time_step.powf(1.0 / params.alpha()),
            refinement: cfg.barrier_refinement,
            step_cap: cfg.step_cap,
        }
    }

    fn run(&self, x0: f64, half_width: f64, rng: &mut ChaCha8Rng) -> Result<ExitRecord> {
        let mut x = x0;
        let mut n_steps = 0u64;
        loop {
            let scale = match self.refinement {
                Some(r) => self.spatial_step.min(r * (half_width - x.abs())),
                None => self.spatial_step,
            };
            x += scale * self.sampler.sample(rng);
            n_steps += 1;
            if x >= half_width || x <= -half_width {
                let side = if x > 0.0 { ExitSide::Up } else { ExitSide::Down };
                return Ok(ExitRecord {
                    side,
                    position: x,
                    n_steps,
                });
            }
            if n_steps >= self.step_cap {
                return Err(Error::Budget(self.step_cap));
            }
        }
    }
}

/// Runs `per_path` for every path, block by block over the workers, and
/// returns results in path order.
fn run_blocks<T, F>(cfg: &MCConfig, per_path: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    cfg.validate()?;
    let n_blocks = cfg.n_paths.div_ceil(BLOCK_PATHS);
    let workers = (cfg.n_workers as u64).min(n_blocks).max(1);
    let block = |b: u64| -> Result<Vec<T>> {
        let mut rng = rng_stream(cfg.seed, b);
        let len = BLOCK_PATHS.min(cfg.n_paths - b * BLOCK_PATHS);
        (0..len).map(|_| per_path(&mut rng)).collect()
    };
    let mut blocks: Vec<(u64, Vec<T>)> = Vec::with_capacity(n_blocks as usize);
    std::thread::scope(|scope| -> Result<()> {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let block = &block;
                scope.spawn(move || -> Result<Vec<(u64, Vec<T>)>> {
                    (w..n_blocks).step_by(workers as usize).map(|b| Ok((b, block(b)?))).collect()
                })
            })
            .collect();
        for h in handles {
            blocks.extend(h.join().expect("simulation worker panicked")?);
        }
        Ok(())
    })?;
    blocks.sort_by_key(|(b, _)| *b);
    Ok(blocks.into_iter().flat_map(|(_, v)| v).collect())
}

/// Exit of (-1,1) from x by the random-walk skeleton.
pub fn simulate_two_sided_exit(params: &StableParams, x: f64, cfg: &MCConfig) -> Result<Vec<ExitRecord>> {
    simulate_scaled_exit(params, x, 1.0, cfg)
}

/// Exit of (-c,c) from x. By self-similarity the records divided by c have
/// the law of the unit-interval records from x/c with time step h·c^{-α}.
pub fn simulate_scaled_exit(params: &StableParams, x: f64, c: f64, cfg: &MCConfig) -> Result<Vec<ExitRecord>> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("interval half-width must be positive, got {c}")));
    }
    if !(x.abs() < c) {
        return Err(Error::Domain(format!("start {x} must lie inside (-{c}, {c})")));
    }
    let walker = Walker::new(params, cfg);
    run_blocks(cfg, |rng| walker.run(x, c, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderSample {
    /// log |exit position|, the ladder height beyond the level.
    pub u: f64,
    /// 1 for an exit above, 2 below.
    pub j: u8,
}

impl LadderSample {
    /// u for j = 1 and -u for j = 2, so both states share one axis.
    pub fn signed(&self) -> f64 {
        if self.j == 1 {
            self.u
        } else {
            -self.u
        }
    }
}

/// Samples of (H⁺(T_a) - a, J⁺(T_a)) for the ascending ladder MAP from
/// state `start_state`, read off the stable path started at ±e^{-a}.
pub fn estimate_ladder_overshoot(
    params: &StableParams,
    a: f64,
    start_state: u8,
    cfg: &MCConfig,
) -> Result<Vec<LadderSample>> {
    if params.alpha() > 1.0 {
        return Err(Error::Regime(format!(
            "the ascending ladder is killed for alpha in (1,2), got {}",
            params.alpha()
        )));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("level a must be positive, got {a}")));
    }
    let x0 = match start_state {
        1 => (-a).exp(),
        2 => -(-a).exp(),
        _ => return Err(Error::Domain(format!("state must be 1 or 2, got {start_state}"))),
    };
    let walker = Walker::new(params, cfg);
    run_blocks(cfg, |rng| {
        let rec = walker.run(x0, 1.0, rng)?;
        Ok(LadderSample {
            u: rec.position.abs().ln(),
            j: if rec.side == ExitSide::Up { 1 } else { 2 },
        })
    })
}

pub fn exit_probability(records: &[ExitRecord], side: ExitSide) -> MCEstimate {
    let hits = records.iter().filter(|r| r.side == side).count() as u64;
    MCEstimate::proportion(hits, records.len() as u64)
}

/// Overshoots of the paths that left on `side`.
pub fn overshoots(records: &[ExitRecord], side: ExitSide) -> Vec<f64> {
    records.iter().filter(|r| r.side == side).map(|r| r.overshoot(1.0)).collect()
}

pub fn mean_steps(records: &[ExitRecord]) -> f64 {
    records.iter().map(|r| r.n_steps as f64).sum::<f64>() / records.len() as f64
}

/// sup |F_n - F| for the sample against a continuous CDF.
pub fn ks_one_sample<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(Error::Domain("KS statistic of an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max(f - k as f64 / n).max((k + 1) as f64 / n - f);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTwoSample {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTwoSample> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("KS statistic of an empty sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = xs[i].min(ys[j]);
        while i < n && xs[i] <= t {
            i += 1;
        }
        while j < m && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    Ok(KsTwoSample {
        statistic: d,
        p_value: kolmogorov_survival((en + 0.12 + 0.11 / en) * d),
    })
}

/// P(K > λ) for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    /// count / (n_total · width)
    pub density: f64,
    /// Analytic probability of the bin divided by its width.
    pub analytic_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub n_total: u64,
    pub bins: Vec<HistogramBin>,
}

impl Histogram {
    /// Counts samples into the bins delimited by `edges`. Densities are
    /// normalised by `n_total`, which may exceed the sample size when the
    /// samples are one part of a larger population.
    pub fn build<P>(samples: &[f64], edges: &[f64], n_total: u64, analytic_mass: P) -> Result<Self>
    where
        P: Fn(f64, f64) -> Result<f64>,
    {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("histogram edges must be strictly increasing, at least two".into()));
        }
        let mut counts = vec![0u64; edges.len() - 1];
        for &x in samples {
            if x < edges[0] || x >= edges[edges.len() - 1] {
                continue;
            }
            let k = edges.partition_point(|&e| e <= x) - 1;
            counts[k] += 1;
        }
        let bins = edges
            .windows(2)
            .zip(counts)
            .map(|(w, count)| {
                let width = w[1] - w[0];
                Ok(HistogramBin {
                    bin_left: w[0],
                    bin_right: w[1],
                    count,
                    density: count as f64 / (n_total as f64 * width),
                    analytic_density: analytic_mass(w[0], w[1])? / width,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_total, bins })
    }

    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("bin_left,bin_right,count,density,analytic_density\n");
        for b in &self.bins {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{},{:.16e},{:.16e}",
                b.bin_left, b.bin_right, b.count, b.density, b.analytic_density
            );
        }
        out
    }
}

/// `n` equal-width edges from `lo` to `hi`.
pub fn linear_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}
