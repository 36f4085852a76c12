//! Per-layer oceanic fading models, pointing errors, path gain and the
//! terrestrial Málaga/fog channel.

mod ew;
mod expansion;
mod layer;
mod malaga;
mod pointing;
mod transform;

pub use ew::EwSeries;
pub use expansion::{unified_expansion, UnifiedExpansion, UnifiedTerm, DEFAULT_EW_TRUNCATION, EW_TRUNCATION_CAP};
pub use layer::{cdf_layer, moment_layer, pdf_layer, sample_layer};
pub use malaga::{sample_fog_gain, sample_malaga, FogChannel, MalagaFogParams, MalagaModel, MalagaTable};
pub use pointing::sample_pointing;
pub use transform::{ln_add_exp, MomentTransform, ProductKernel};
pub use layer::LayerSampler;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

/// Generalized Gamma layer: `f(x) = p x^{d-1} exp(-(x/a)^p) / (a^d Γ(d/p))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GGParams {
    pub a: f64,
    pub d: f64,
    pub p: f64,
}

impl GGParams {
    pub fn validate(&self) -> Result<()> {
        positive("a", self.a)?;
        positive("d", self.d)?;
        positive("p", self.p)
    }
}

/// Exponential / generalized Gamma mixture with weight `omega` on the exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EGGParams {
    pub omega: f64,
    pub lambda: f64,
    pub a: f64,
    pub d: f64,
    pub p: f64,
}

impl EGGParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(invalid("omega", format!("must lie in [0, 1], got {}", self.omega)));
        }
        positive("lambda", self.lambda)?;
        self.gg_branch().validate()
    }

    pub fn gg_branch(&self) -> GGParams {
        GGParams {
            a: self.a,
            d: self.d,
            p: self.p,
        }
    }
}

/// Exponentiated Weibull: `F(x) = (1 - exp(-(x/eta)^beta))^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EWParams {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

impl EWParams {
    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("eta", self.eta)
    }
}

/// Gamma-Gamma with unit mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaGammaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaGammaParams {
    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)
    }
}

/// Fading law of one water layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LayerModel {
    Gg(GGParams),
    Egg(EGGParams),
    Ew(EWParams),
    GammaGamma(GammaGammaParams),
}

impl LayerModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            LayerModel::Gg(p) => p.validate(),
            LayerModel::Egg(p) => p.validate(),
            LayerModel::Ew(p) => p.validate(),
            LayerModel::GammaGamma(p) => p.validate(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            LayerModel::Gg(_) => "gg",
            LayerModel::Egg(_) => "egg",
            LayerModel::Ew(_) => "ew",
            LayerModel::GammaGamma(_) => "gamma_gamma",
        }
    }
}

/// Zero-boresight pointing error: `f(h) = rho2 h^{rho2-1} / A0^{rho2}` on `(0, A0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingError {
    pub rho2: f64,
    pub a0: f64,
}

impl PointingError {
    pub fn new(rho2: f64, a0: f64) -> Result<Self> {
        let pe = Self { rho2, a0 };
        pe.validate()?;
        Ok(pe)
    }

    pub fn validate(&self) -> Result<()> {
        positive("rho2", self.rho2)?;
        if !(self.a0 > 0.0 && self.a0 <= 1.0) {
            return Err(invalid("a0", format!("must lie in (0, 1], got {}", self.a0)));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.a0 * self.rho2 / (self.rho2 + 1.0)
    }
}

/// Deterministic attenuation `exp(-alpha_ext * length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGain {
    pub alpha_ext: f64,
    pub length: f64,
}

impl PathGain {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_ext >= 0.0 && self.length >= 0.0 && self.alpha_ext.is_finite() && self.length.is_finite()) {
            return Err(invalid("path", "extinction and length must be non-negative"));
        }
        Ok(())
    }

    pub fn gain(&self) -> f64 {
        (-self.alpha_ext * self.length).exp()
    }
}

impl Default for PathGain {
    fn default() -> Self {
        Self {
            alpha_ext: 0.0,
            length: 0.0,
        }
    }
}
