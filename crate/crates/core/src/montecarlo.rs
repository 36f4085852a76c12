//! Monte-Carlo estimates of the link metrics and analytic/empirical comparison.
//!
//! Trials are cut into blocks of [`BLOCK`] draws. Block `b` draws from the
//! ChaCha8 stream `b` of the plan seed, and block results are merged in block
//! order, so estimates are bit-identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::cascade::{StackSampler, UwocStack};
use crate::error::{invalid, Result};
use crate::metrics::{DetectionKind, ModulationScheme};
use crate::mixed::MixedLinkConfig;
use crate::turbulence::{sample_pointing, MalagaFogParams, PointingError};

pub const BLOCK: u64 = 1 << 16;
/// Smallest trial count a plan accepts.
pub const MIN_TRIALS: u64 = 10_000;
/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "UWOC_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub histogram_bins: usize,
    /// Sweep values in dB (or dBm for power sweeps), ascending.
    pub snr_grid: Vec<f64>,
}

impl SimPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(invalid("trials", format!("must be at least {MIN_TRIALS}, got {}", self.trials)));
        }
        if self.workers == 0 {
            return Err(invalid("workers", "must be positive"));
        }
        if self.histogram_bins == 0 {
            return Err(invalid("histogram_bins", "must be positive"));
        }
        if self.snr_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("snr_grid", "must be strictly increasing"));
        }
        Ok(())
    }

    /// Worker count after applying the environment override.
    pub fn effective_workers(&self) -> usize {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&w| w > 0)
            .unwrap_or(self.workers)
    }
}

/// What to estimate at each grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub gamma_th: f64,
    pub modulation: ModulationScheme,
    pub detection: DetectionKind,
}

/// Point estimate with a 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn exact(v: f64) -> Self {
        Self {
            estimate: v,
            low: v,
            high: v,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.high - self.low)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSeries {
    pub grid: Vec<f64>,
    pub trials: u64,
    pub outage: Vec<Interval>,
    pub ber: Vec<Interval>,
    pub capacity: Vec<Interval>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    below: u64,
    ber: f64,
    ber2: f64,
    cap: f64,
    cap2: f64,
}

impl Acc {
    fn add(&mut self, gamma: f64, m: &SimMetrics, kappa: f64, fast_q: bool) {
        if gamma < m.gamma_th {
            self.below += 1;
        }
        let b = if fast_q {
            0.5 * erfc((0.5 * gamma).sqrt())
        } else {
            m.modulation.conditional_ber(gamma)
        };
        self.ber += b;
        self.ber2 += b * b;
        let c = (kappa * gamma).ln_1p() / std::f64::consts::LN_2;
        self.cap += c;
        self.cap2 += c * c;
    }

    fn merge(&mut self, o: &Acc) {
        self.below += o.below;
        self.ber += o.ber;
        self.ber2 += o.ber2;
        self.cap += o.cap;
        self.cap2 += o.cap2;
    }
}

const Z95: f64 = 1.959_963_984_540_054;

fn proportion(k: u64, n: u64) -> Interval {
    let p = k as f64 / n as f64;
    let h = Z95 * (p * (1.0 - p) / n as f64).sqrt();
    Interval {
        estimate: p,
        low: (p - h).max(0.0),
        high: (p + h).min(1.0),
    }
}

fn mean(sum: f64, sum2: f64, n: u64) -> Interval {
    let nf = n as f64;
    let m = sum / nf;
    let var = ((sum2 / nf - m * m) * nf / (nf - 1.0)).max(0.0);
    let h = Z95 * (var / nf).sqrt();
    Interval {
        estimate: m,
        low: m - h,
        high: m + h,
    }
}

/// Runs `per_block(block_index, draws, rng)` over all blocks on `workers`
/// threads and returns the results in block order.
fn run_blocks<T, F>(trials: u64, seed: u64, workers: usize, per_block: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64, &mut ChaCha8Rng) -> T + Sync,
{
    let blocks = trials.div_ceil(BLOCK);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    Ok(pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = substream(seed, b);
                let n = BLOCK.min(trials - b * BLOCK);
                per_block(b, n, &mut rng)
            })
            .collect()
    }))
}

/// Generator of block `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn finish(grid: &[f64], trials: u64, blocks: Vec<Vec<Acc>>) -> EmpiricalSeries {
    let mut total = vec![Acc::default(); grid.len()];
    for block in &blocks {
        for (t, a) in total.iter_mut().zip(block) {
            t.merge(a);
        }
    }
    EmpiricalSeries {
        grid: grid.to_vec(),
        trials,
        outage: total.iter().map(|a| proportion(a.below, trials)).collect(),
        ber: total.iter().map(|a| mean(a.ber, a.ber2, trials)).collect(),
        capacity: total.iter().map(|a| mean(a.cap, a.cap2, trials)).collect(),
    }
}

fn is_ook(m: &ModulationScheme) -> bool {
    m.q.len() == 1 && m.phi == 0.5 && m.q[0] == 0.5 && m.delta == 1.0
}

/// Empirical metrics of the underwater link at each linear average SNR of
/// `gamma_bar_grid`; `plan.snr_grid` only labels the points.
pub fn simulate_uwoc(stack: &UwocStack, gamma_bar_grid: &[f64], plan: &SimPlan, m: &SimMetrics) -> Result<EmpiricalSeries> {
    plan.validate()?;
    stack.validate()?;
    m.modulation.validate()?;
    let sampler = StackSampler::new(stack);
    let kappa = m.detection.kappa();
    let fast = is_ook(&m.modulation);
    let blocks = run_blocks(plan.trials, plan.seed, plan.effective_workers(), |_, n, rng| {
        let mut acc = vec![Acc::default(); gamma_bar_grid.len()];
        for _ in 0..n {
            let h2 = sampler.sample(rng).powi(2);
            for (a, &gb) in acc.iter_mut().zip(gamma_bar_grid) {
                a.add(gb * h2, m, kappa, fast);
            }
        }
        acc
    })?;
    Ok(finish(gamma_bar_grid, plan.trials, blocks))
}

/// Draws of the terrestrial gain `h_a h_f h_p`.
#[derive(Debug, Clone)]
pub struct TowcSampler {
    cumulative: Vec<f64>,
    turb_alpha: Gamma<f64>,
    turb_k: Vec<Gamma<f64>>,
    inv_rate: f64,
    fog: Gamma<f64>,
    pointing: PointingError,
}

impl TowcSampler {
    pub fn new(p: &MalagaFogParams) -> Result<Self> {
        p.validate()?;
        let w = p.malaga.weights();
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        let cumulative = w
            .iter()
            .map(|x| {
                acc += x / total;
                acc
            })
            .collect();
        let shape = |k: f64| Gamma::new(k, 1.0).map_err(|e| invalid("shape", e.to_string()));
        Ok(Self {
            cumulative,
            turb_alpha: shape(p.malaga.alpha)?,
            turb_k: (1..=w.len()).map(|k| shape(k as f64)).collect::<Result<_>>()?,
            inv_rate: 1.0 / p.malaga.rate(),
            fog: Gamma::new(p.fog.k, 1.0 / p.fog.z).map_err(|e| invalid("fog", e.to_string()))?,
            pointing: p.pointing,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cumulative.partition_point(|&c| c < u).min(self.turb_k.len() - 1);
        let ha = self.turb_alpha.sample(rng) * self.turb_k[k].sample(rng) * self.inv_rate;
        let hf = (-self.fog.sample(rng)).exp();
        ha * hf * sample_pointing(&self.pointing, rng)
    }
}

/// End-to-end SNR of the relayed link.
#[inline]
pub fn relay_snr(gamma_t: f64, gamma_u: f64, relay_gain: f64) -> f64 {
    gamma_t * gamma_u / (gamma_u + relay_gain)
}

/// Empirical metrics of the mixed link with both hops at each linear average
/// SNR of `gamma_bar_grid`; the average SNRs stored in `cfg` are not used.
pub fn simulate_mixed(cfg: &MixedLinkConfig, gamma_bar_grid: &[f64], plan: &SimPlan, m: &SimMetrics) -> Result<EmpiricalSeries> {
    plan.validate()?;
    cfg.validate()?;
    m.modulation.validate()?;
    let towc = TowcSampler::new(&cfg.towc)?;
    let uwoc = StackSampler::new(&cfg.stack);
    let gbs = gamma_bar_grid;
    let kappa = m.detection.kappa();
    let fast = is_ook(&m.modulation);
    let c = cfg.relay_gain;
    let blocks = run_blocks(plan.trials, plan.seed, plan.effective_workers(), |_, n, rng| {
        let mut acc = vec![Acc::default(); gbs.len()];
        for _ in 0..n {
            let ht2 = towc.sample(rng).powi(2);
            let hu2 = uwoc.sample(rng).powi(2);
            for (a, &gb) in acc.iter_mut().zip(gbs) {
                a.add(relay_snr(gb * ht2, gb * hu2, c), m, kappa, fast);
            }
        }
        acc
    })?;
    Ok(finish(gamma_bar_grid, plan.trials, blocks))
}

/// `trials` draws of `f`, in block order.
pub fn draw<F>(trials: u64, seed: u64, workers: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let blocks = run_blocks(trials, seed, workers, |_, n, rng| (0..n).map(|_| f(rng)).collect::<Vec<_>>())?;
    Ok(blocks.concat())
}

/// Fraction of sorted samples `<= x`.
pub fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Kolmogorov-Smirnov distance between sorted samples and `cdf`, checked at
/// `points` sample quantiles (both one-sided gaps at each).
pub fn ks_statistic<F>(sorted: &[f64], mut cdf: F, points: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if sorted.is_empty() || points == 0 {
        return Err(invalid("samples", "need samples and check points"));
    }
    let n = sorted.len();
    let mut d = 0.0f64;
    for i in 0..points {
        let idx = ((i as f64 + 0.5) / points as f64 * n as f64) as usize;
        let x = sorted[idx.min(n - 1)];
        let f = cdf(x)?;
        let hi = sorted.partition_point(|&v| v <= x) as f64 / n as f64;
        let lo = sorted.partition_point(|&v| v < x) as f64 / n as f64;
        d = d.max((hi - f).abs()).max((f - lo).abs());
    }
    Ok(d)
}

/// Acceptance rule of one comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    /// Points whose analytic value is below this are reported but not judged.
    pub min_target: f64,
}

impl Tolerance {
    /// Relative tolerance judged only where the target is at least
    /// `100 / trials`.
    pub fn for_trials(rel: f64, trials: u64) -> Self {
        Self {
            rel,
            min_target: 100.0 / trials as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metric: String,
    pub analytic: Vec<f64>,
    pub empirical: Vec<Interval>,
    pub rel_errors: Vec<f64>,
    pub max_rel_error: f64,
    pub ks: Option<f64>,
    pub judged: Vec<bool>,
    pub failing: Vec<usize>,
    pub pass: bool,
}

pub fn compare(metric: &str, analytic: &[f64], empirical: &[Interval], tol: Tolerance) -> Result<ComparisonReport> {
    if analytic.len() != empirical.len() {
        return Err(invalid("series", "analytic and empirical lengths differ"));
    }
    let rel_errors: Vec<f64> = analytic
        .iter()
        .zip(empirical)
        .map(|(&a, e)| {
            if a == e.estimate {
                0.0
            } else {
                (e.estimate - a).abs() / a.abs()
            }
        })
        .collect();
    let judged: Vec<bool> = analytic.iter().map(|&a| a >= tol.min_target).collect();
    let failing: Vec<usize> = (0..analytic.len())
        .filter(|&i| judged[i] && !(rel_errors[i] <= tol.rel))
        .collect();
    let max_rel_error = (0..analytic.len())
        .filter(|&i| judged[i])
        .map(|i| rel_errors[i])
        .fold(0.0, f64::max);
    Ok(ComparisonReport {
        metric: metric.to_string(),
        analytic: analytic.to_vec(),
        empirical: empirical.to_vec(),
        rel_errors,
        max_rel_error,
        ks: None,
        judged,
        pass: failing.is_empty(),
        failing,
    })
}

/// Distributional comparison judged on the KS distance alone.
pub fn compare_ks(metric: &str, ks: f64, threshold: f64) -> ComparisonReport {
    ComparisonReport {
        metric: metric.to_string(),
        analytic: Vec::new(),
        empirical: Vec::new(),
        rel_errors: Vec::new(),
        max_rel_error: 0.0,
        ks: Some(ks),
        judged: Vec::new(),
        failing: Vec::new(),
        pass: ks < threshold,
    }
}
