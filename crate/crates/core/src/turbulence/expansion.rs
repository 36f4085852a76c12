//! Multi-index expansion of the cascaded density into Fox-H terms.
//!
//! Each layer contributes a short list of branches `(coefficient, Gamma
//! factors, scale)`; the cascade is the Cartesian product of those lists, so
//! an N-layer EGG stack has `2^N` terms.

use serde::{Deserialize, Serialize};

use super::ew::EwSeries;
use super::LayerModel;
use crate::error::{invalid, Error, Result};
use crate::special::foxh::{FoxHSpec, GammaFactor};
use crate::special::gamma::{gamma, ln_gamma};

pub const DEFAULT_EW_TRUNCATION: usize = 60;
pub const EW_TRUNCATION_CAP: usize = 200;

/// One term `coefficient / h * H^{m,0}_{0,m}[D | E h]` of the cascaded density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedTerm {
    pub coefficient: f64,
    pub factors: Vec<GammaFactor>,
    pub scale: f64,
}

impl UnifiedTerm {
    /// `(m, q)`; the density kernel has no right-hand factors so `m = q`.
    pub fn orders(&self) -> (usize, usize) {
        (self.factors.len(), self.factors.len())
    }

    /// Mellin transform of the term at real `s`.
    pub fn moment(&self, s: f64) -> f64 {
        let g: f64 = self.factors.iter().map(|f| ln_gamma(f.shift + f.slope * s)).sum();
        self.coefficient * (g - s * self.scale.ln()).exp()
    }

    pub fn density_spec(&self) -> FoxHSpec {
        FoxHSpec {
            lower_left: self.factors.clone(),
            ..FoxHSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedExpansion {
    pub terms: Vec<UnifiedTerm>,
    /// Probability mass dropped by truncating exponentiated-Weibull series.
    pub truncation_error_bound: f64,
}

struct Branch {
    coefficient: f64,
    factors: Vec<GammaFactor>,
    scale: f64,
}

fn branches(model: &LayerModel, ew_trunc: usize) -> (Vec<Branch>, f64) {
    match *model {
        LayerModel::Gg(p) => (
            vec![Branch {
                coefficient: 1.0 / gamma(p.d / p.p),
                factors: vec![GammaFactor::new(p.d / p.p, 1.0 / p.p)],
                scale: 1.0 / p.a,
            }],
            0.0,
        ),
        LayerModel::Egg(p) => {
            let mut v = Vec::with_capacity(2);
            if p.omega > 0.0 {
                v.push(Branch {
                    coefficient: p.omega,
                    factors: vec![GammaFactor::new(1.0, 1.0)],
                    scale: 1.0 / p.lambda,
                });
            }
            if p.omega < 1.0 {
                v.push(Branch {
                    coefficient: (1.0 - p.omega) / gamma(p.d / p.p),
                    factors: vec![GammaFactor::new(p.d / p.p, 1.0 / p.p)],
                    scale: 1.0 / p.a,
                });
            }
            (v, 0.0)
        }
        LayerModel::Ew(p) => {
            let series = EwSeries::new(p.alpha);
            let lead = gamma(p.alpha + 1.0);
            let v = series
                .coefficients(ew_trunc)
                .into_iter()
                .enumerate()
                .filter(|(_, c)| *c != 0.0)
                .map(|(j, c)| Branch {
                    coefficient: lead * c / (j + 1) as f64,
                    factors: vec![GammaFactor::new(1.0, 1.0 / p.beta)],
                    scale: ((j + 1) as f64).powf(1.0 / p.beta) / p.eta,
                })
                .collect();
            (v, series.mass_complement(ew_trunc).abs())
        }
        LayerModel::GammaGamma(p) => (
            vec![Branch {
                coefficient: (-ln_gamma(p.alpha) - ln_gamma(p.beta)).exp(),
                factors: vec![GammaFactor::new(p.alpha, 1.0), GammaFactor::new(p.beta, 1.0)],
                scale: p.alpha * p.beta,
            }],
            0.0,
        ),
    }
}

/// Full expansion of an N-layer cascade; fails with `ExpansionTooLarge` when
/// the number of terms exceeds `cap`.
pub fn unified_expansion(layers: &[LayerModel], ew_trunc: usize, cap: usize) -> Result<UnifiedExpansion> {
    if layers.is_empty() {
        return Err(invalid("layers", "at least one layer is required"));
    }
    if ew_trunc == 0 || ew_trunc > EW_TRUNCATION_CAP {
        return Err(invalid("ew_trunc", format!("must lie in 1..={EW_TRUNCATION_CAP}")));
    }
    let mut per_layer = Vec::with_capacity(layers.len());
    let mut kept_mass = 1.0;
    let mut count: usize = 1;
    for layer in layers {
        layer.validate()?;
        let (b, dropped) = branches(layer, ew_trunc);
        count = count.saturating_mul(b.len());
        kept_mass *= 1.0 - dropped;
        per_layer.push(b);
    }
    if count > cap {
        return Err(Error::ExpansionTooLarge { terms: count, cap });
    }
    let mut terms = vec![UnifiedTerm {
        coefficient: 1.0,
        factors: Vec::new(),
        scale: 1.0,
    }];
    for layer in &per_layer {
        let mut next = Vec::with_capacity(terms.len() * layer.len());
        for t in &terms {
            for b in layer {
                let mut factors = t.factors.clone();
                factors.extend_from_slice(&b.factors);
                next.push(UnifiedTerm {
                    coefficient: t.coefficient * b.coefficient,
                    factors,
                    scale: t.scale * b.scale,
                });
            }
        }
        terms = next;
    }
    Ok(UnifiedExpansion {
        terms,
        truncation_error_bound: 1.0 - kept_mass,
    })
}
