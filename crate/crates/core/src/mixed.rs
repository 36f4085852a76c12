//! Dual-hop terrestrial/underwater link with a fixed-gain amplify-and-forward
//! relay: `γ = γ_T γ_U / (γ_U + C)`.
//!
//! Writing `γ = γ_T / (1 + y)` with `y = C / γ_U`, the distribution function
//! is `E_y[F_T(γ (1 + y))]`. Expanding `(1 + y)^{-s1/2}` as one plus a
//! Mellin-Barnes integral splits it into the terrestrial CDF and a bivariate
//! Fox-H correction:
//!
//! ```text
//! F(γ) = F_T(γ) - (1/2πi)^2 ∫∫ K_T(s1) Γ(1 + s2/2) (Γ(-s2)/Γ(1-s2))
//!                  Γ((s1 - s2)/2) / Γ(s1/2) M_U(s2) u1^{-s1} u2^{-s2}
//! ```
//!
//! with `K_T = -M_T(s1)/s1`, `u1 = sqrt(γ/γ̄_T)`, `u2 = sqrt(C/γ̄_U)` and
//! `-2 < c2 < c1 < 0`.

use serde::{Deserialize, Serialize};

use crate::cascade::{clamp_probability, UwocStack};
use crate::error::{invalid, Error, Result};
use crate::metrics::ModulationScheme;
use crate::special::bivariate::{bivariate_mellin, JointFactor, DOUBLE_NODE_BUDGET};
use crate::special::foxh::{meijerg, FoxHSpec, GammaFactor};
use crate::special::gamma::ln_gamma;
use crate::special::mellin::{invert, QuadratureConfig};
use crate::special::quad::{integrate_panels, QuadTol};
use crate::turbulence::{MalagaFogParams, MomentTransform, ProductKernel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedLinkConfig {
    pub towc: MalagaFogParams,
    pub towc_gamma_bar: f64,
    pub stack: UwocStack,
    pub uwoc_gamma_bar: f64,
    /// Fixed relay gain constant `C`.
    pub relay_gain: f64,
}

impl MixedLinkConfig {
    pub fn validate(&self) -> Result<()> {
        self.towc.validate()?;
        self.stack.validate()?;
        for (field, v) in [
            ("towc_gamma_bar", self.towc_gamma_bar),
            ("uwoc_gamma_bar", self.uwoc_gamma_bar),
            ("relay_gain", self.relay_gain),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    fn u2(&self) -> f64 {
        (self.relay_gain / self.uwoc_gamma_bar).sqrt()
    }
}

/// Evaluation options of the mixed-link statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedOptions {
    pub quad: QuadratureConfig,
    /// Evaluation budget of one double contour integral.
    pub node_budget: usize,
    /// Tolerance of the composition integral used as fallback.
    pub composition_rel_tol: f64,
}

impl Default for MixedOptions {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::with_rel_tol(1e-7),
            node_budget: DOUBLE_NODE_BUDGET,
            composition_rel_tol: 1e-7,
        }
    }
}

/// A mixed-link value and whether it came from the composition fallback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedEval {
    pub value: f64,
    pub slow_path: bool,
}

fn terrestrial<'a>(cfg: &'a MixedLinkConfig, extra: FoxHSpec) -> ProductKernel<'a> {
    ProductKernel::new(vec![&cfg.towc as &dyn MomentTransform], extra)
}

/// Density of the terrestrial SNR from the factorised transform.
pub fn towc_snr_pdf(cfg: &MixedLinkConfig, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Ok(0.0);
    }
    let u1 = (gamma / cfg.towc_gamma_bar).sqrt();
    let v = invert(&terrestrial(cfg, FoxHSpec::default()), u1, &QuadratureConfig::default())?;
    Ok((v / (2.0 * gamma)).max(0.0))
}

pub fn towc_snr_cdf(cfg: &MixedLinkConfig, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Ok(0.0);
    }
    let u1 = (gamma / cfg.towc_gamma_bar).sqrt();
    let q = QuadratureConfig::default();
    clamp_probability(invert(&terrestrial(cfg, FoxHSpec::cdf_step()), u1, &q)?, q.rel_tol)
}

/// Density of the terrestrial SNR as a sum of Meijer G-functions, one per
/// Málaga mixture term. The fog shape enters as a repeated factor, so it is
/// rounded to the nearest integer.
pub fn towc_snr_pdf_meijer(cfg: &MixedLinkConfig, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Ok(0.0);
    }
    let MalagaFogParams { malaga, fog, pointing } = &cfg.towc;
    let k = fog.k.round();
    if k < 1.0 {
        return Err(invalid("fog.k", "must round to a positive integer"));
    }
    if k != fog.k {
        log::warn!("fog shape {} rounded to {k} for the Meijer-G form", fog.k);
    }
    let reps = k as usize;
    let rate = malaga.rate();
    let arg = (gamma / cfg.towc_gamma_bar).sqrt() * rate / pointing.a0;
    let q = QuadratureConfig::default();
    let mut total = 0.0;
    for (i, w) in malaga.weights().iter().enumerate() {
        let kk = (i + 1) as f64;
        let mut lower = vec![malaga.alpha, kk, pointing.rho2];
        lower.extend(std::iter::repeat_n(fog.z, reps));
        let mut upper = vec![1.0 + pointing.rho2];
        upper.extend(std::iter::repeat_n(fog.z + 1.0, reps));
        let spec = FoxHSpec::meijer(&upper, &lower, lower.len(), 0);
        let lead = (w.ln() - ln_gamma(malaga.alpha) - ln_gamma(kk) + k * fog.z.ln()).exp();
        total += lead * meijerg(&spec, arg, &q)?;
    }
    Ok((pointing.rho2 * total / (2.0 * gamma)).max(0.0))
}

/// Underwater kernel of the correction term: `M_U(s2) Γ(1+s2/2) Γ(-s2)/Γ(1-s2)`.
fn underwater<'a>(cfg: &'a MixedLinkConfig) -> ProductKernel<'a> {
    ProductKernel::new(
        vec![&cfg.stack as &dyn MomentTransform],
        FoxHSpec {
            lower_left: vec![GammaFactor::new(1.0, 0.5)],
            ..FoxHSpec::cdf_step()
        },
    )
}

fn joint() -> [JointFactor; 1] {
    [JointFactor::new(0.0, 0.5, -0.5)]
}

/// `(1/2πi)^2 ∫∫ T(s1) Γ((s1-s2)/2)/Γ(s1/2) U(s2) z1^{-s1} u2^{-s2}` with
/// `T = M_T * extra` and the underwater kernel above.
fn correction(cfg: &MixedLinkConfig, mut extra: FoxHSpec, z1: f64, opts: &MixedOptions) -> Result<f64> {
    extra.upper_right.push(GammaFactor::new(0.0, 0.5));
    let k1 = terrestrial(cfg, extra);
    let k2 = underwater(cfg);
    bivariate_mellin(&k1, &k2, &joint(), [z1, cfg.u2()], None, &opts.quad, opts.node_budget)
}

fn with_fallback<F, G>(fast: F, slow: G) -> Result<MixedEval>
where
    F: FnOnce() -> Result<f64>,
    G: FnOnce() -> Result<f64>,
{
    match fast() {
        Ok(value) => Ok(MixedEval {
            value,
            slow_path: false,
        }),
        Err(Error::NonConvergence { nodes, .. }) => {
            log::warn!("double contour budget exhausted after {nodes} nodes; using composition integral");
            Ok(MixedEval {
                value: slow()?,
                slow_path: true,
            })
        }
        Err(e) => Err(e),
    }
}

pub fn mixed_cdf(cfg: &MixedLinkConfig, gamma: f64) -> Result<f64> {
    mixed_cdf_eval(cfg, gamma, &MixedOptions::default()).map(|e| e.value)
}

pub fn mixed_cdf_eval(cfg: &MixedLinkConfig, gamma: f64, opts: &MixedOptions) -> Result<MixedEval> {
    cfg.validate()?;
    if !(gamma > 0.0) {
        return Ok(MixedEval {
            value: 0.0,
            slow_path: false,
        });
    }
    with_fallback(
        || {
            let u1 = (gamma / cfg.towc_gamma_bar).sqrt();
            let ft = invert(&terrestrial(cfg, FoxHSpec::cdf_step()), u1, &opts.quad)?;
            let v = ft - correction(cfg, FoxHSpec::cdf_step(), u1, opts)?;
            clamp_probability(v, opts.quad.rel_tol)
        },
        || mixed_cdf_composition(cfg, gamma, opts.composition_rel_tol),
    )
}

pub fn mixed_pdf(cfg: &MixedLinkConfig, gamma: f64) -> Result<f64> {
    mixed_pdf_eval(cfg, gamma, &MixedOptions::default()).map(|e| e.value)
}

pub fn mixed_pdf_eval(cfg: &MixedLinkConfig, gamma: f64, opts: &MixedOptions) -> Result<MixedEval> {
    cfg.validate()?;
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "density requires gamma > 0"));
    }
    with_fallback(
        || {
            let u1 = (gamma / cfg.towc_gamma_bar).sqrt();
            let ft = invert(&terrestrial(cfg, FoxHSpec::default()), u1, &opts.quad)?;
            let v = ft - correction(cfg, FoxHSpec::default(), u1, opts)?;
            Ok((v / (2.0 * gamma)).max(0.0))
        },
        || mixed_pdf_composition(cfg, gamma, opts.composition_rel_tol),
    )
}

pub fn mixed_outage(cfg: &MixedLinkConfig, gamma_th: f64) -> Result<f64> {
    mixed_cdf(cfg, gamma_th)
}

pub fn mixed_avg_ber(cfg: &MixedLinkConfig, m: &ModulationScheme) -> Result<f64> {
    mixed_avg_ber_eval(cfg, m, &MixedOptions::default()).map(|e| e.value)
}

pub fn mixed_avg_ber_eval(cfg: &MixedLinkConfig, m: &ModulationScheme, opts: &MixedOptions) -> Result<MixedEval> {
    cfg.validate()?;
    m.validate()?;
    let mut kernel = FoxHSpec::cdf_step();
    kernel.upper_left.push(GammaFactor::new(1.0 - m.phi, 0.5));
    let lead = m.delta / (2.0 * ln_gamma(m.phi).exp());
    with_fallback(
        || {
            let mut total = 0.0;
            for &q in &m.q {
                let z1 = 1.0 / (q * cfg.towc_gamma_bar).sqrt();
                total += invert(&terrestrial(cfg, kernel.clone()), z1, &opts.quad)?;
                total -= correction(cfg, kernel.clone(), z1, opts)?;
            }
            clamp_probability(lead * total, opts.quad.rel_tol)
        },
        || mixed_avg_ber_composition(cfg, m, opts.composition_rel_tol),
    )
}

/// `E_U[g(γ_U)]` by quadrature over `ln h_U` against the log-density of the
/// underwater gain.
fn underwater_average<G: FnMut(f64) -> Result<f64>>(cfg: &MixedLinkConfig, mut g: G, rel_tol: f64) -> Result<f64> {
    let kernel = ProductKernel::new(vec![&cfg.stack as &dyn MomentTransform], FoxHSpec::default());
    let q = QuadratureConfig::with_rel_tol(1e-9);
    let centre = cfg.stack.mean_gain().ln();
    // the log-density falls off like exp(|s0| t) below the mean
    let below = 35.0 / cfg.stack.singularities()[0].abs().max(1e-3);
    let mut failure = None;
    let est = integrate_panels(
        |t| {
            if failure.is_some() {
                return 0.0;
            }
            let h = t.exp();
            let r = invert(&kernel, h, &q).and_then(|dens| {
                if dens.abs() < 1e-300 {
                    Ok(0.0)
                } else {
                    g(cfg.uwoc_gamma_bar * h * h).map(|v| v * dens)
                }
            });
            r.unwrap_or_else(|e| {
                failure = Some(e);
                0.0
            })
        },
        centre - below.min(80.0),
        centre + 6.0,
        32,
        QuadTol {
            abs: 1e-15,
            rel: rel_tol,
            max_evals: 200_000,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est.value)
}

/// `∫ F_T(γ (1 + C/x)) f_U(x) dx`, independent of the double-contour form.
pub fn mixed_cdf_composition(cfg: &MixedLinkConfig, gamma: f64, rel_tol: f64) -> Result<f64> {
    cfg.validate()?;
    if !(gamma > 0.0) {
        return Ok(0.0);
    }
    let k = terrestrial(cfg, FoxHSpec::cdf_step());
    let q = QuadratureConfig::with_rel_tol(1e-9);
    let v = underwater_average(
        cfg,
        |x| {
            let u1 = (gamma * (1.0 + cfg.relay_gain / x) / cfg.towc_gamma_bar).sqrt();
            Ok(invert(&k, u1, &q)?.clamp(0.0, 1.0))
        },
        rel_tol,
    )?;
    clamp_probability(v, 1e-6)
}

/// Argument beyond which the terrestrial density kernel `u f(u)` is below
/// 1e-30 of its running peak and the quadrature of it stops converging.
fn density_cutoff(k: &ProductKernel<'_>, q: &QuadratureConfig) -> Result<f64> {
    let mut peak = 0.0f64;
    let mut u = 1.0;
    for _ in 0..400 {
        match invert(k, u, q) {
            Ok(v) if v > 1e-30 * peak => peak = peak.max(v),
            Ok(_) => return Ok(u),
            Err(_) if peak > 0.0 => return Ok(u / 1.25),
            Err(e) => return Err(e),
        }
        u *= 1.25;
    }
    Ok(u)
}

/// `∫ f_T(γ (1 + C/x)) (1 + C/x) f_U(x) dx`.
pub fn mixed_pdf_composition(cfg: &MixedLinkConfig, gamma: f64, rel_tol: f64) -> Result<f64> {
    cfg.validate()?;
    if !(gamma > 0.0) {
        return Ok(0.0);
    }
    let k = terrestrial(cfg, FoxHSpec::default());
    let q = QuadratureConfig::with_rel_tol(1e-9);
    let cutoff = density_cutoff(&k, &q)?;
    underwater_average(
        cfg,
        |x| {
            let scale = 1.0 + cfg.relay_gain / x;
            let u1 = (gamma * scale / cfg.towc_gamma_bar).sqrt();
            if u1 > cutoff {
                return Ok(0.0);
            }
            // f_T(γ s) s = v(u1) / (2γ)
            Ok(invert(&k, u1, &q)? / (2.0 * gamma))
        },
        rel_tol,
    )
}

/// `E_U[BER_T(γ̄_T / (1 + C/γ_U))]`: the end-to-end SNR is the terrestrial
/// SNR scaled by the relay loss, so conditioning on the second hop reduces
/// the error rate to a single-hop average.
pub fn mixed_avg_ber_composition(cfg: &MixedLinkConfig, m: &ModulationScheme, rel_tol: f64) -> Result<f64> {
    cfg.validate()?;
    m.validate()?;
    let mut kernel = FoxHSpec::cdf_step();
    kernel.upper_left.push(GammaFactor::new(1.0 - m.phi, 0.5));
    let k = terrestrial(cfg, kernel);
    let q = QuadratureConfig::with_rel_tol(1e-9);
    let lead = m.delta / (2.0 * ln_gamma(m.phi).exp());
    underwater_average(
        cfg,
        |x| {
            let eff = cfg.towc_gamma_bar / (1.0 + cfg.relay_gain / x);
            let mut t = 0.0;
            for &qn in &m.q {
                t += invert(&k, 1.0 / (qn * eff).sqrt(), &q)?;
            }
            Ok(lead * t)
        },
        rel_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turbulence::{FogChannel, GGParams, LayerModel, MalagaModel, PathGain, PointingError};

    fn config(k: f64) -> MixedLinkConfig {
        let towc = MalagaFogParams {
            malaga: MalagaModel::with_defaults(2.3378, 4.5323).unwrap(),
            fog: FogChannel { k, z: 5.43 },
            pointing: PointingError::new(1.0, 0.8).unwrap(),
        };
        let stack = UwocStack::new(
            vec![LayerModel::Gg(GGParams {
                a: 0.6302,
                d: 1.1780,
                p: 0.8444,
            })],
            PointingError::new(1.0, 0.8).unwrap(),
            PathGain::default(),
        )
        .unwrap();
        MixedLinkConfig {
            towc,
            towc_gamma_bar: 100.0,
            stack,
            uwoc_gamma_bar: 100.0,
            relay_gain: 1.0,
        }
    }

    #[test]
    fn meijer_form_matches_factorised() {
        let cfg = config(3.0);
        for &g in &[0.01, 0.1, 1.0] {
            let a = towc_snr_pdf(&cfg, g).unwrap();
            let b = towc_snr_pdf_meijer(&cfg, g).unwrap();
            assert!((a / b - 1.0).abs() < 1e-7, "{g}: {a} {b}");
        }
    }

    #[test]
    fn bivariate_cdf_matches_composition() {
        let cfg = config(3.0);
        for &g in &[0.05, 0.5] {
            let a = mixed_cdf_eval(&cfg, g, &MixedOptions::default()).unwrap();
            let b = mixed_cdf_composition(&cfg, g, 1e-8).unwrap();
            assert!(!a.slow_path);
            assert!((a.value / b - 1.0).abs() < 1e-4, "{g}: {} {b}", a.value);
        }
    }

    #[test]
    fn bivariate_pdf_matches_composition() {
        let cfg = config(3.0);
        for &g in &[0.05, 0.5, 5.0] {
            let a = mixed_pdf(&cfg, g).unwrap();
            let b = mixed_pdf_composition(&cfg, g, 1e-8).unwrap();
            assert!((a / b - 1.0).abs() < 1e-4, "{g}: {a} {b}");
        }
    }
}
