//! Sweep evaluation and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use uwoc_core::metrics::{
    avg_ber, avg_ber_asymptotic, diversity_order, ergodic_capacity, outage, outage_asymptotic, printed_diversity_order,
};
use uwoc_core::mixed::{mixed_avg_ber, mixed_outage};
use uwoc_core::montecarlo::{simulate_mixed, simulate_uwoc, EmpiricalSeries, Interval, SimMetrics, SimPlan};

use crate::config::{ConfigError, Metric, RunConfig, Scenario, Variant};

/// Relative tolerances of the analytic/MC comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ToleranceProfile {
    #[default]
    Strict,
    Fast,
}

impl ToleranceProfile {
    pub fn rel(self, metric: Metric) -> f64 {
        match (self, metric) {
            (ToleranceProfile::Strict, Metric::Capacity) => 0.02,
            (ToleranceProfile::Strict, _) => 0.05,
            (ToleranceProfile::Fast, Metric::Capacity) => 0.05,
            (ToleranceProfile::Fast, _) => 0.10,
        }
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub mc_trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), ConfigError> {
        if let Some(o) = &self.out {
            cfg.output.dir = o.display().to_string();
        }
        if let Some(t) = self.mc_trials {
            cfg.plan.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.plan.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.plan.workers = w;
        }
        let v = cfg.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure in {context}: {source}")]
    Numerical {
        context: String,
        source: uwoc_core::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub analytic: f64,
    pub asymptotic: Option<f64>,
    pub mc: Option<Interval>,
}

impl Row {
    pub fn rel_error(&self) -> Option<f64> {
        self.mc.map(|m| {
            if m.estimate == self.analytic {
                0.0
            } else {
                (m.estimate - self.analytic).abs() / self.analytic.abs()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub variant: String,
    pub metric: Metric,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantOrder {
    pub variant: String,
    pub diversity: f64,
    pub printed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub config: String,
    pub files: Vec<PathBuf>,
    pub curves: Vec<Curve>,
    pub orders: Vec<VariantOrder>,
    /// High-SNR log-log slope of each probability curve against `γ̄`.
    pub slopes: Vec<(String, f64)>,
    pub checks: Vec<CheckResult>,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Exit status of a completed run.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            4
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "config: {}", self.config);
        for o in &self.orders {
            let _ = writeln!(
                s,
                "diversity[{}]: {} (summed per-family rule {})",
                o.variant,
                fmt_num(o.diversity),
                fmt_num(o.printed)
            );
        }
        for (name, slope) in &self.slopes {
            let _ = writeln!(s, "slope[{name}]: {}", fmt_num(*slope));
        }
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        for f in &self.files {
            let _ = writeln!(s, "wrote {}", f.display());
        }
        s
    }
}

/// Fixed 17-significant-digit formatting.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `-d ln P / d ln γ̄` between the last two positive analytic points.
pub fn tail_slope(cfg: &RunConfig, c: &Curve) -> Option<f64> {
    c.rows.windows(2).rev().find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (a.analytic > 0.0 && b.analytic > 0.0)
            .then(|| -(b.analytic / a.analytic).ln() / (cfg.gamma_bar(b.x) / cfg.gamma_bar(a.x)).ln())
    })
}

fn numerical(context: String) -> impl FnOnce(uwoc_core::Error) -> RunError {
    move |source| RunError::Numerical { context, source }
}

fn analytic_point(cfg: &RunConfig, v: &Variant, metric: Metric, x: f64) -> Result<(f64, Option<f64>), RunError> {
    let gb = cfg.gamma_bar(x);
    let ctx = format!("{}.{} at {x}", v.label, metric.name());
    let th = cfg.gamma_th();
    match cfg.scenario {
        Scenario::Uwoc => {
            let s = cfg.stack(v);
            let r = match metric {
                Metric::Outage => (outage(&s, gb, th), Some(outage_asymptotic(&s, gb, th))),
                Metric::Ber => (avg_ber(&s, gb, &cfg.modulation), Some(avg_ber_asymptotic(&s, gb, &cfg.modulation))),
                Metric::Capacity => (ergodic_capacity(&s, gb, cfg.detection), None),
            };
            let a = r.0.map_err(numerical(ctx.clone()))?;
            let asym = r.1.transpose().map_err(numerical(ctx))?;
            Ok((a, asym))
        }
        Scenario::Mixed => {
            let m = cfg.mixed(v, gb).map_err(numerical(ctx.clone()))?;
            let a = match metric {
                Metric::Outage => mixed_outage(&m, th),
                Metric::Ber => mixed_avg_ber(&m, &cfg.modulation),
                Metric::Capacity => unreachable!("rejected at validation"),
            }
            .map_err(numerical(ctx))?;
            Ok((a, None))
        }
    }
}

fn simulate(cfg: &RunConfig, v: &Variant, grid: &[f64]) -> Result<Option<EmpiricalSeries>, RunError> {
    if cfg.plan.trials == 0 {
        return Ok(None);
    }
    let plan = SimPlan {
        trials: cfg.plan.trials,
        seed: cfg.plan.seed,
        workers: cfg.plan.workers,
        histogram_bins: 64,
        snr_grid: grid.to_vec(),
    };
    let m = SimMetrics {
        gamma_th: cfg.gamma_th(),
        modulation: cfg.modulation.clone(),
        detection: cfg.detection,
    };
    let gbs: Vec<f64> = grid.iter().map(|&x| cfg.gamma_bar(x)).collect();
    let ctx = format!("{} simulation", v.label);
    let e = match cfg.scenario {
        Scenario::Uwoc => simulate_uwoc(&cfg.stack(v), &gbs, &plan, &m),
        Scenario::Mixed => {
            let mixed = cfg.mixed(v, 1.0).map_err(numerical(ctx.clone()))?;
            simulate_mixed(&mixed, &gbs, &plan, &m)
        }
    }
    .map_err(numerical(ctx))?;
    Ok(Some(e))
}

/// Points are judged only where the MC 95% half-width is at most half the
/// tolerance; for proportions the half-width is taken at the analytic value.
fn judge(c: &Curve, rel: f64, trials: u64) -> CheckResult {
    let mut judged = 0;
    let mut failing = Vec::new();
    let mut worst = 0.0f64;
    for r in &c.rows {
        let (Some(mc), Some(err)) = (r.mc, r.rel_error()) else { continue };
        let hw = if c.metric == Metric::Outage {
            1.96 * (r.analytic * (1.0 - r.analytic) / trials as f64).sqrt()
        } else {
            mc.half_width()
        };
        if !(r.analytic.abs() > 0.0 && hw <= 0.5 * rel * r.analytic.abs()) {
            continue;
        }
        judged += 1;
        worst = worst.max(err);
        if !(err <= rel) {
            failing.push(fmt_num(r.x));
        }
    }
    CheckResult {
        name: format!("mc_{}[{}]", c.metric.name(), c.variant),
        pass: failing.is_empty(),
        detail: format!(
            "{judged}/{} points judged at rel {rel}, max rel error {:.3e}{}",
            c.rows.len(),
            worst,
            if failing.is_empty() {
                String::new()
            } else {
                format!(", failing at {}", failing.join(" "))
            }
        ),
    }
}

/// Computes all curves of `cfg` without writing anything.
pub fn evaluate(cfg: &RunConfig, profile: ToleranceProfile) -> Result<RunSummary, RunError> {
    let v = cfg.violations();
    if !v.is_empty() {
        return Err(ConfigError::Invalid(v).into());
    }
    let grid = cfg.sweep().points();
    let mut curves = Vec::new();
    let mut orders = Vec::new();
    let mut checks = Vec::new();
    let mut slopes = Vec::new();
    for v in &cfg.variants {
        log::info!("variant {}", v.label);
        if cfg.scenario == Scenario::Uwoc {
            let s = cfg.stack(v);
            orders.push(VariantOrder {
                variant: v.label.clone(),
                diversity: diversity_order(&s),
                printed: printed_diversity_order(&s),
            });
        }
        let emp = simulate(cfg, v, &grid)?;
        for &metric in &cfg.metrics {
            let mut rows = Vec::with_capacity(grid.len());
            for (i, &x) in grid.iter().enumerate() {
                let (analytic, asymptotic) = analytic_point(cfg, v, metric, x)?;
                let mc = emp.as_ref().map(|e| match metric {
                    Metric::Outage => e.outage[i],
                    Metric::Ber => e.ber[i],
                    Metric::Capacity => e.capacity[i],
                });
                rows.push(Row {
                    x,
                    analytic,
                    asymptotic,
                    mc,
                });
            }
            let curve = Curve {
                variant: v.label.clone(),
                metric,
                rows,
            };
            if emp.is_some() {
                checks.push(judge(&curve, profile.rel(metric), cfg.plan.trials));
            }
            if metric != Metric::Capacity {
                if let Some(k) = tail_slope(cfg, &curve) {
                    slopes.push((format!("{}.{}", curve.variant, metric.name()), k));
                }
            }
            curves.push(curve);
        }
    }
    Ok(RunSummary {
        config: cfg.name.clone(),
        files: Vec::new(),
        curves,
        orders,
        slopes,
        checks,
    })
}

/// CSV text of one metric across all variants.
pub fn render_csv(cfg: &RunConfig, curves: &[Curve], metric: Metric) -> String {
    let selected: Vec<&Curve> = curves.iter().filter(|c| c.metric == metric).collect();
    let asym = selected.iter().any(|c| c.rows.iter().any(|r| r.asymptotic.is_some()));
    let mc = selected.iter().any(|c| c.rows.iter().any(|r| r.mc.is_some()));
    let mut header = vec!["variant", cfg.axis().column(), "analytic"];
    if asym {
        header.push("asymptotic");
    }
    if mc {
        header.extend(["mc", "mc_low", "mc_high", "rel_error"]);
    }
    let mut out = header.join(",");
    out.push('\n');
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    for c in selected {
        for r in &c.rows {
            let mut cells = vec![c.variant.clone(), fmt_num(r.x), fmt_num(r.analytic)];
            if asym {
                cells.push(opt(r.asymptotic));
            }
            if mc {
                cells.push(opt(r.mc.map(|m| m.estimate)));
                cells.push(opt(r.mc.map(|m| m.low)));
                cells.push(opt(r.mc.map(|m| m.high)));
                cells.push(opt(r.rel_error()));
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Evaluates `cfg` and writes one CSV per metric plus a summary file into
/// the configured output directory.
pub fn run(cfg: &RunConfig, profile: ToleranceProfile) -> Result<RunSummary, RunError> {
    let mut summary = evaluate(cfg, profile)?;
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    for &metric in &cfg.metrics {
        let path = dir.join(format!("{}_{}.csv", cfg.name, metric.name()));
        write(&path, &render_csv(cfg, &summary.curves, metric))?;
        summary.files.push(path);
    }
    let path = dir.join(format!("{}_summary.txt", cfg.name));
    summary.files.push(path.clone());
    write(&path, &summary.render())?;
    Ok(summary)
}
