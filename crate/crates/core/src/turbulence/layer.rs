use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::gamma_lr;

use super::ew::EwSeries;
use super::transform::{dominant, ln_add_exp, MomentTransform};
use super::{EGGParams, EWParams, GGParams, GammaGammaParams, LayerModel};
use crate::error::Result;
use crate::special::bessel::ln_bessel_k;
use crate::special::foxh::FoxHSpec;
use crate::special::gamma::{ln_gamma, ln_gamma_unchecked};
use crate::special::mellin::{invert, QuadratureConfig};

use crate::turbulence::transform::ProductKernel;

fn ln_pdf_gg(p: &GGParams, x: f64) -> f64 {
    p.p.ln() - p.d * p.a.ln() - ln_gamma(p.d / p.p) + (p.d - 1.0) * x.ln() - (x / p.a).powf(p.p)
}

/// Density of one layer's fading coefficient.
pub fn pdf_layer(model: &LayerModel, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    match model {
        LayerModel::Gg(p) => ln_pdf_gg(p, x).exp(),
        LayerModel::Egg(p) => {
            let expo = if p.omega > 0.0 {
                p.omega / p.lambda * (-x / p.lambda).exp()
            } else {
                0.0
            };
            let gg = if p.omega < 1.0 {
                (1.0 - p.omega) * ln_pdf_gg(&p.gg_branch(), x).exp()
            } else {
                0.0
            };
            expo + gg
        }
        LayerModel::Ew(p) => {
            let y = (x / p.eta).powf(p.beta);
            let ln = (p.alpha * p.beta / p.eta).ln() + (p.beta - 1.0) * (x / p.eta).ln() - y
                + (p.alpha - 1.0) * (-(-y).exp_m1()).ln();
            ln.exp()
        }
        LayerModel::GammaGamma(p) => {
            let ab = p.alpha * p.beta;
            let ln = std::f64::consts::LN_2 + 0.5 * (p.alpha + p.beta) * ab.ln()
                - ln_gamma(p.alpha)
                - ln_gamma(p.beta)
                + (0.5 * (p.alpha + p.beta) - 1.0) * x.ln()
                + ln_bessel_k(p.alpha - p.beta, 2.0 * (ab * x).sqrt());
            ln.exp()
        }
    }
}

fn cdf_gg(p: &GGParams, x: f64) -> f64 {
    gamma_lr(p.d / p.p, (x / p.a).powf(p.p))
}

/// Distribution function of one layer. Gamma-Gamma goes through the Mellin
/// inversion; the others have closed forms.
pub fn cdf_layer(model: &LayerModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Ok(0.0);
    }
    Ok(match model {
        LayerModel::Gg(p) => cdf_gg(p, x),
        LayerModel::Egg(p) => p.omega * (-(-x / p.lambda).exp_m1()) + (1.0 - p.omega) * cdf_gg(&p.gg_branch(), x),
        LayerModel::Ew(p) => (-(-(x / p.eta).powf(p.beta)).exp_m1()).powf(p.alpha),
        LayerModel::GammaGamma(_) => {
            let kernel = ProductKernel::new(vec![model as &dyn MomentTransform], FoxHSpec::cdf_step());
            invert(&kernel, x, &QuadratureConfig::with_rel_tol(1e-10))?.clamp(0.0, 1.0)
        }
    })
}

/// `E[h^n]` for real `n` inside the strip of existence.
pub fn moment_layer(model: &LayerModel, n: f64) -> f64 {
    if n == 0.0 {
        return 1.0;
    }
    let v = model.ln_moment(Complex64::new(n, 0.0));
    v.re.exp() * v.im.cos().signum()
}

fn ln_moment_gg(p: &GGParams, s: Complex64) -> Complex64 {
    s * p.a.ln() + ln_gamma_unchecked((s + p.d) / p.p) - ln_gamma(p.d / p.p)
}

impl MomentTransform for LayerModel {
    fn ln_moment(&self, s: Complex64) -> Complex64 {
        match self {
            LayerModel::Gg(p) => ln_moment_gg(p, s),
            LayerModel::Egg(p) => {
                let expo = p.omega.ln() + s * p.lambda.ln() + ln_gamma_unchecked(s + 1.0);
                let gg = (1.0 - p.omega).ln() + ln_moment_gg(&p.gg_branch(), s);
                ln_add_exp(expo, gg)
            }
            LayerModel::Ew(p) => {
                let w = s / p.beta;
                ln_gamma(p.alpha + 1.0) + s * p.eta.ln() + ln_gamma_unchecked(w + 1.0)
                    + EwSeries::new(p.alpha).sum(w).ln()
            }
            LayerModel::GammaGamma(p) => {
                -s * (p.alpha * p.beta).ln() + ln_gamma_unchecked(s + p.alpha) + ln_gamma_unchecked(s + p.beta)
                    - ln_gamma(p.alpha)
                    - ln_gamma(p.beta)
            }
        }
    }

    fn singularities(&self) -> Vec<f64> {
        let mut out: Vec<f64> = match self {
            LayerModel::Gg(p) => (0..4).map(|k| -p.d - k as f64 * p.p).collect(),
            LayerModel::Egg(p) => {
                let mut v = Vec::new();
                if p.omega > 0.0 {
                    v.extend((1..5).map(|k| -(k as f64)));
                }
                if p.omega < 1.0 {
                    v.extend((0..4).map(|k| -p.d - k as f64 * p.p));
                }
                v
            }
            LayerModel::Ew(p) => ew_singularities(p),
            LayerModel::GammaGamma(p) => (0..4)
                .flat_map(|k| [-p.alpha - k as f64, -p.beta - k as f64])
                .collect(),
        };
        out.sort_by(|a, b| b.total_cmp(a));
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    fn decay_rate(&self) -> f64 {
        match self {
            LayerModel::Gg(p) => 1.0 / p.p,
            LayerModel::Egg(p) => egg_branches(p, 0.0).0,
            LayerModel::Ew(p) => 1.0 / p.beta,
            LayerModel::GammaGamma(_) => 2.0,
        }
    }

    fn algebraic_order(&self, c: f64) -> f64 {
        match self {
            LayerModel::Gg(p) => (p.d + c) / p.p - 0.5,
            LayerModel::Egg(p) => egg_branches(p, c).1,
            LayerModel::Ew(p) => 0.5 + c / p.beta,
            LayerModel::GammaGamma(p) => p.alpha + p.beta + 2.0 * c - 1.0,
        }
    }
}

fn egg_branches(p: &EGGParams, c: f64) -> (f64, f64) {
    let mut b = Vec::new();
    if p.omega > 0.0 {
        b.push((1.0, c + 0.5));
    }
    if p.omega < 1.0 {
        b.push((1.0 / p.p, (p.d + c) / p.p - 0.5));
    }
    dominant(&b)
}

/// `-αβ - kβ` from the series, plus the Gamma poles `-kβ` with `k ≥ α` that
/// the series does not cancel.
fn ew_singularities(p: &EWParams) -> Vec<f64> {
    let mut v: Vec<f64> = (0..4).map(|k| -(p.alpha + k as f64) * p.beta).collect();
    let first = p.alpha.ceil().max(1.0) as usize;
    v.extend((first..first + 4).map(|k| -(k as f64) * p.beta));
    v
}

/// One draw of the layer's fading coefficient.
pub fn sample_layer<R: Rng + ?Sized>(model: &LayerModel, rng: &mut R) -> f64 {
    LayerSampler::new(model).sample(rng)
}

/// Pre-built sampler for repeated draws.
#[derive(Debug, Clone)]
pub enum LayerSampler {
    Gg { a: f64, inv_p: f64, gamma: Gamma<f64> },
    Egg { omega: f64, lambda: f64, gg: Box<LayerSampler> },
    Ew { inv_alpha: f64, inv_beta: f64, eta: f64 },
    GammaGamma { large: Gamma<f64>, small: Gamma<f64> },
}

impl LayerSampler {
    pub fn new(model: &LayerModel) -> Self {
        match *model {
            LayerModel::Gg(p) => Self::gg(&p),
            LayerModel::Egg(p) => LayerSampler::Egg {
                omega: p.omega,
                lambda: p.lambda,
                gg: Box::new(Self::gg(&p.gg_branch())),
            },
            LayerModel::Ew(p) => LayerSampler::Ew {
                inv_alpha: 1.0 / p.alpha,
                inv_beta: 1.0 / p.beta,
                eta: p.eta,
            },
            LayerModel::GammaGamma(GammaGammaParams { alpha, beta }) => LayerSampler::GammaGamma {
                large: Gamma::new(alpha, 1.0 / alpha).expect("validated shape"),
                small: Gamma::new(beta, 1.0 / beta).expect("validated shape"),
            },
        }
    }

    fn gg(p: &GGParams) -> Self {
        LayerSampler::Gg {
            a: p.a,
            inv_p: 1.0 / p.p,
            gamma: Gamma::new(p.d / p.p, 1.0).expect("validated shape"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LayerSampler::Gg { a, inv_p, gamma } => a * gamma.sample(rng).powf(*inv_p),
            LayerSampler::Egg { omega, lambda, gg } => {
                if rng.random::<f64>() < *omega {
                    -lambda * (1.0 - rng.random::<f64>()).ln()
                } else {
                    gg.sample(rng)
                }
            }
            LayerSampler::Ew { inv_alpha, inv_beta, eta } => {
                let u: f64 = 1.0 - rng.random::<f64>();
                eta * (-(-u.powf(*inv_alpha)).ln_1p()).powf(*inv_beta)
            }
            LayerSampler::GammaGamma { large, small } => large.sample(rng) * small.sample(rng),
        }
    }
}
