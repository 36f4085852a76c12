//! Run configuration: TOML schema, parsing and validation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use uwoc_core::cascade::UwocStack;
use uwoc_core::metrics::{DetectionKind, ModulationScheme};
use uwoc_core::mixed::MixedLinkConfig;
use uwoc_core::turbulence::{FogChannel, LayerModel, MalagaFogParams, MalagaModel, PathGain, PointingError};
use uwoc_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Uwoc,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    Ber,
    Capacity,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Ber => "ber",
            Metric::Capacity => "capacity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
}

/// Inclusive arithmetic sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn check(&self, path: &str, out: &mut Vec<Violation>) {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            out.push(Violation::new(path, "start and stop must be finite"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            out.push(Violation::new(format!("{path}.step"), "must be positive"));
        } else if self.stop < self.start {
            out.push(Violation::new(format!("{path}.stop"), "must not be below start"));
        } else if (self.stop - self.start) / self.step > 10_000.0 {
            out.push(Violation::new(path, "more than 10000 points"));
        }
    }
}

/// Link budget. Power sweeps give `γ̄ = P_t² exp(-2 α_ext l_U) / σ_w²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub noise_variance: f64,
    pub extinction: f64,
    pub uwoc_length_m: f64,
    pub towc_length_m: f64,
    pub relay_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pointing {
    pub rho2: f64,
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UwocHop {
    pub pointing: Pointing,
    pub layers: Vec<LayerModel>,
}

/// Terrestrial hop; the fog rate `z` is given directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowcHop {
    pub alpha: f64,
    pub beta: f64,
    pub fog_k: f64,
    pub fog_z: f64,
    pub pointing: Pointing,
}

/// One curve of a figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub label: String,
    pub uwoc: UwocHop,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub towc: Option<TowcHop>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: String,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub name: String,
    pub scenario: Scenario,
    pub metrics: Vec<Metric>,
    pub gamma_th_db: f64,
    pub modulation: ModulationScheme,
    pub detection: DetectionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_sweep: Option<Sweep>,
    pub link: LinkBudget,
    pub plan: PlanConfig,
    pub output: OutputConfig,
    pub variants: Vec<Variant>,
}

/// Which axis a sweep runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PowerDbm,
    SnrDb,
}

impl SweepAxis {
    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::PowerDbm => "power_dbm",
            SweepAxis::SnrDb => "snr_db",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("{} invalid field(s):\n{}", .0.len(), .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
}

fn push_core(out: &mut Vec<Violation>, prefix: &str, r: uwoc_core::Result<()>) {
    if let Err(e) = r {
        match e {
            CoreError::InvalidParameter { field, reason } => out.push(Violation::new(format!("{prefix}.{field}"), reason)),
            other => out.push(Violation::new(prefix, other.to_string())),
        }
    }
}

fn positive(out: &mut Vec<Violation>, field: String, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(Violation::new(field, format!("must be positive and finite, got {v}")));
    }
}

impl Pointing {
    pub fn to_core(self) -> PointingError {
        PointingError {
            rho2: self.rho2,
            a0: self.a0,
        }
    }
}

impl TowcHop {
    pub fn to_core(&self) -> uwoc_core::Result<MalagaFogParams> {
        Ok(MalagaFogParams {
            malaga: MalagaModel::with_defaults(self.alpha, self.beta)?,
            fog: FogChannel {
                k: self.fog_k,
                z: self.fog_z,
            },
            pointing: self.pointing.to_core(),
        })
    }
}

impl RunConfig {
    pub fn axis(&self) -> SweepAxis {
        if self.power_sweep.is_some() {
            SweepAxis::PowerDbm
        } else {
            SweepAxis::SnrDb
        }
    }

    pub fn sweep(&self) -> Sweep {
        self.power_sweep.or(self.snr_sweep).expect("validated config has a sweep")
    }

    /// Linear `γ_th`.
    pub fn gamma_th(&self) -> f64 {
        10f64.powf(self.gamma_th_db / 10.0)
    }

    /// Underwater stack of a variant; power sweeps carry the extinction loss.
    pub fn stack(&self, v: &Variant) -> UwocStack {
        let path = match self.axis() {
            SweepAxis::PowerDbm => PathGain {
                alpha_ext: self.link.extinction,
                length: self.link.uwoc_length_m,
            },
            SweepAxis::SnrDb => PathGain::default(),
        };
        UwocStack {
            layers: v.uwoc.layers.clone(),
            pe: v.uwoc.pointing.to_core(),
            path,
        }
    }

    /// Mixed link of a variant at a common average SNR for both hops.
    pub fn mixed(&self, v: &Variant, gamma_bar: f64) -> uwoc_core::Result<MixedLinkConfig> {
        let towc = v.towc.as_ref().expect("validated mixed variant has a terrestrial hop");
        Ok(MixedLinkConfig {
            towc: towc.to_core()?,
            towc_gamma_bar: gamma_bar,
            stack: self.stack(v),
            uwoc_gamma_bar: gamma_bar,
            relay_gain: self.link.relay_gain,
        })
    }

    /// Linear average SNR of a sweep point.
    pub fn gamma_bar(&self, x: f64) -> f64 {
        match self.axis() {
            SweepAxis::PowerDbm => uwoc_core::reference::gamma_bar_from_power(x, self.link.noise_variance),
            SweepAxis::SnrDb => 10f64.powf(x / 10.0),
        }
    }

    /// Every violated invariant, with field paths.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.name.trim().is_empty() {
            out.push(Violation::new("name", "must not be empty"));
        }
        if self.metrics.is_empty() {
            out.push(Violation::new("metrics", "must list at least one metric"));
        }
        if self.scenario == Scenario::Mixed && self.metrics.contains(&Metric::Capacity) {
            out.push(Violation::new("metrics", "capacity is not available for the mixed scenario"));
        }
        if !self.gamma_th_db.is_finite() {
            out.push(Violation::new("gamma_th_db", "must be finite"));
        }
        push_core(&mut out, "modulation", self.modulation.validate());
        match (&self.power_sweep, &self.snr_sweep) {
            (Some(s), None) => s.check("power_sweep", &mut out),
            (None, Some(s)) => s.check("snr_sweep", &mut out),
            _ => out.push(Violation::new("sweep", "exactly one of power_sweep, snr_sweep")),
        }
        positive(&mut out, "link.noise_variance".into(), self.link.noise_variance);
        positive(&mut out, "link.relay_gain".into(), self.link.relay_gain);
        for (f, v) in [
            ("link.extinction", self.link.extinction),
            ("link.uwoc_length_m", self.link.uwoc_length_m),
            ("link.towc_length_m", self.link.towc_length_m),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                out.push(Violation::new(f, format!("must be non-negative, got {v}")));
            }
        }
        if self.plan.trials != 0 && self.plan.trials < uwoc_core::montecarlo::MIN_TRIALS {
            out.push(Violation::new(
                "plan.trials",
                format!("must be 0 or at least {}", uwoc_core::montecarlo::MIN_TRIALS),
            ));
        }
        if self.plan.workers == 0 {
            out.push(Violation::new("plan.workers", "must be positive"));
        }
        if self.output.dir.trim().is_empty() {
            out.push(Violation::new("output.dir", "must not be empty"));
        }
        if self.variants.is_empty() {
            out.push(Violation::new("variants", "must list at least one variant"));
        }
        for (i, v) in self.variants.iter().enumerate() {
            let p = format!("variants[{i}]");
            if v.label.trim().is_empty() || v.label.contains([',', '"', '\n']) {
                out.push(Violation::new(format!("{p}.label"), "must be non-empty without commas, quotes or newlines"));
            }
            if v.uwoc.layers.is_empty() {
                out.push(Violation::new(format!("{p}.uwoc.layers"), "must list at least one layer"));
            }
            for (j, l) in v.uwoc.layers.iter().enumerate() {
                push_core(&mut out, &format!("{p}.uwoc.layers[{j}]"), l.validate());
            }
            push_core(&mut out, &format!("{p}.uwoc.pointing"), v.uwoc.pointing.to_core().validate());
            match (&v.towc, self.scenario) {
                (None, Scenario::Mixed) => out.push(Violation::new(format!("{p}.towc"), "required for the mixed scenario")),
                (Some(_), Scenario::Uwoc) => out.push(Violation::new(format!("{p}.towc"), "only allowed for the mixed scenario")),
                (Some(t), Scenario::Mixed) => {
                    let tp = format!("{p}.towc");
                    positive(&mut out, format!("{tp}.alpha"), t.alpha);
                    if !(t.beta.round() >= 1.0 && t.beta.is_finite()) {
                        out.push(Violation::new(format!("{tp}.beta"), "must round to a positive integer"));
                    }
                    positive(&mut out, format!("{tp}.fog_k"), t.fog_k);
                    positive(&mut out, format!("{tp}.fog_z"), t.fog_z);
                    push_core(&mut out, &format!("{tp}.pointing"), t.pointing.to_core().validate());
                }
                (None, Scenario::Uwoc) => {}
            }
        }
        out
    }
}

/// Parses and validates TOML text, reporting every violation.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(v))
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serializes")
}
