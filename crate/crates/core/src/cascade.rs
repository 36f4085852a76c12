//! Statistics of the N-layer product channel with pointing errors.
//!
//! The received SNR is `gamma = gamma_bar * (g h_1 ... h_N h_p)^2` with `g`
//! the deterministic path gain, so every SNR statistic is a Mellin-Barnes
//! integral of `E[h^s]` against a small Gamma-ratio kernel evaluated at
//! `sqrt(gamma / gamma_bar)`. Two routes are provided: the term-by-term
//! Fox-H expansion and a single inversion of the factorised transform.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::foxh::{foxh, FoxHSpec, GammaFactor};
use crate::special::mellin::{invert, QuadratureConfig};
use crate::turbulence::{
    sample_pointing, unified_expansion, LayerModel, LayerSampler, MomentTransform, PathGain, PointingError,
    ProductKernel, UnifiedExpansion, DEFAULT_EW_TRUNCATION,
};

/// Cascade of independent layers followed by a pointing-error stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UwocStack {
    pub layers: Vec<LayerModel>,
    pub pe: PointingError,
    #[serde(default)]
    pub path: PathGain,
}

impl UwocStack {
    pub fn new(layers: Vec<LayerModel>, pe: PointingError, path: PathGain) -> Result<Self> {
        let s = Self { layers, pe, path };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(invalid("layers", "at least one layer is required"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            l.validate().map_err(|e| prefix(&format!("layers[{i}]"), e))?;
        }
        self.pe.validate().map_err(|e| prefix("pe", e))?;
        self.path.validate()
    }

    /// `E[g h_c h_p]`.
    pub fn mean_gain(&self) -> f64 {
        let turb: f64 = self.layers.iter().map(|l| crate::turbulence::moment_layer(l, 1.0)).product();
        turb * self.pe.mean() * self.path.gain()
    }

    pub fn expansion(&self, opts: &EvalOptions) -> Result<UnifiedExpansion> {
        unified_expansion(&self.layers, opts.ew_truncation, opts.term_cap)
    }
}

fn prefix(path: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter {
            field: format!("{path}.{field}"),
            reason,
        },
        other => other,
    }
}

impl MomentTransform for UwocStack {
    fn ln_moment(&self, s: Complex64) -> Complex64 {
        self.layers.iter().map(|l| l.ln_moment(s)).sum::<Complex64>()
            + self.pe.ln_moment(s)
            + s * self.path.gain().ln()
    }

    fn singularities(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.layers.iter().flat_map(|l| l.singularities()).collect();
        v.extend(self.pe.singularities());
        v.sort_by(|a, b| b.total_cmp(a));
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        v
    }

    fn decay_rate(&self) -> f64 {
        self.layers.iter().map(|l| l.decay_rate()).sum::<f64>() + self.pe.decay_rate()
    }

    fn algebraic_order(&self, c: f64) -> f64 {
        self.layers.iter().map(|l| l.algebraic_order(c)).sum::<f64>() + self.pe.algebraic_order(c)
    }
}

/// Instantaneous and average electrical SNR, both linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub gamma: f64,
    pub gamma_bar: f64,
}

impl SnrPoint {
    pub fn new(gamma: f64, gamma_bar: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be finite and non-negative, got {gamma}")));
        }
        if !(gamma_bar > 0.0 && gamma_bar.is_finite()) {
            return Err(invalid("gamma_bar", format!("must be finite and positive, got {gamma_bar}")));
        }
        Ok(Self { gamma, gamma_bar })
    }

    /// `sqrt(gamma / gamma_bar)`, the fading level that yields `gamma`.
    pub fn level(&self) -> f64 {
        (self.gamma / self.gamma_bar).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Expansion while it has at most `auto_terms` terms, factorised otherwise.
    Auto,
    Expansion,
    Factorised,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub route: Route,
    pub ew_truncation: usize,
    pub term_cap: usize,
    pub auto_terms: usize,
    pub quad: QuadratureConfig,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            route: Route::Auto,
            ew_truncation: DEFAULT_EW_TRUNCATION,
            term_cap: 1 << 12,
            auto_terms: 64,
            quad: QuadratureConfig::default(),
        }
    }
}

impl EvalOptions {
    pub fn with_route(route: Route) -> Self {
        Self {
            route,
            ..Self::default()
        }
    }
}

fn merge(a: &FoxHSpec, b: &FoxHSpec) -> FoxHSpec {
    let cat = |x: &[GammaFactor], y: &[GammaFactor]| x.iter().chain(y).copied().collect::<Vec<_>>();
    FoxHSpec {
        upper_left: cat(&a.upper_left, &b.upper_left),
        upper_right: cat(&a.upper_right, &b.upper_right),
        lower_left: cat(&a.lower_left, &b.lower_left),
        lower_right: cat(&a.lower_right, &b.lower_right),
    }
}

fn use_expansion(stack: &UwocStack, opts: &EvalOptions) -> Result<Option<UnifiedExpansion>> {
    match opts.route {
        Route::Factorised => Ok(None),
        Route::Expansion => stack.expansion(opts).map(Some),
        Route::Auto => match stack.expansion(opts) {
            Ok(e) if e.terms.len() <= opts.auto_terms && e.truncation_error_bound <= opts.quad.rel_tol => Ok(Some(e)),
            Ok(_) | Err(Error::ExpansionTooLarge { .. }) => Ok(None),
            Err(e) => Err(e),
        },
    }
}

/// `(1 / 2 pi i) ∫ E[(g h_c h_p)^s] Θ(s) z^{-s} ds` for the Gamma-ratio
/// kernel `Θ = extra`. Every SNR statistic of the stack is of this form.
pub fn mellin_average(stack: &UwocStack, extra: &FoxHSpec, z: f64, opts: &EvalOptions) -> Result<f64> {
    stack.validate()?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid("z", format!("argument must be positive and finite, got {z}")));
    }
    match use_expansion(stack, opts)? {
        Some(exp) => {
            let pe = &stack.pe;
            let pointing = FoxHSpec {
                lower_left: vec![GammaFactor::new(pe.rho2, 1.0)],
                upper_right: vec![GammaFactor::new(1.0 + pe.rho2, 1.0)],
                ..FoxHSpec::default()
            };
            let kernel_tail = merge(&pointing, extra);
            let scale = 1.0 / (pe.a0 * stack.path.gain());
            let mut total = 0.0;
            for term in &exp.terms {
                let spec = merge(&term.density_spec(), &kernel_tail);
                total += term.coefficient * foxh(&spec, z * term.scale * scale, &opts.quad)?;
            }
            Ok(pe.rho2 * total)
        }
        None => {
            let kernel = ProductKernel::new(vec![stack as &dyn MomentTransform], extra.clone());
            invert(&kernel, z, &opts.quad)
        }
    }
}

/// Clamp a probability that may overshoot [0, 1] by quadrature noise.
pub(crate) fn clamp_probability(v: f64, rel_tol: f64) -> Result<f64> {
    let slack = 10.0 * rel_tol.max(1e-12);
    if v < -slack || v > 1.0 + slack || !v.is_finite() {
        return Err(Error::OutOfRange { value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Density of the cascaded turbulence coefficient `h_1 ... h_N`, term by term.
pub fn cascaded_pdf(layers: &[LayerModel], h: f64) -> Result<f64> {
    cascaded_pdf_with(layers, h, &EvalOptions::default())
}

pub fn cascaded_pdf_with(layers: &[LayerModel], h: f64, opts: &EvalOptions) -> Result<f64> {
    if !(h > 0.0) {
        return Ok(0.0);
    }
    let exp = unified_expansion(layers, opts.ew_truncation, opts.term_cap)?;
    let mut total = 0.0;
    for term in &exp.terms {
        total += term.coefficient * foxh(&term.density_spec(), term.scale * h, &opts.quad)?;
    }
    Ok((total / h).max(0.0))
}

/// Density of the received SNR.
pub fn snr_pdf(stack: &UwocStack, pt: SnrPoint) -> Result<f64> {
    snr_pdf_with(stack, pt, &EvalOptions::default())
}

pub fn snr_pdf_with(stack: &UwocStack, pt: SnrPoint, opts: &EvalOptions) -> Result<f64> {
    if pt.gamma <= 0.0 {
        return Err(invalid("gamma", "density requires gamma > 0"));
    }
    let v = mellin_average(stack, &FoxHSpec::default(), pt.level(), opts)?;
    Ok((v / (2.0 * pt.gamma)).max(0.0))
}

/// Distribution function of the received SNR.
pub fn snr_cdf(stack: &UwocStack, pt: SnrPoint) -> Result<f64> {
    snr_cdf_with(stack, pt, &EvalOptions::default())
}

pub fn snr_cdf_with(stack: &UwocStack, pt: SnrPoint, opts: &EvalOptions) -> Result<f64> {
    if pt.gamma == 0.0 {
        return Ok(0.0);
    }
    let v = mellin_average(stack, &FoxHSpec::cdf_step(), pt.level(), opts)?;
    clamp_probability(v, opts.quad.rel_tol)
}

/// Reusable sampler of `g h_c h_p`.
#[derive(Debug, Clone)]
pub struct StackSampler {
    layers: Vec<LayerSampler>,
    pe: PointingError,
    gain: f64,
}

impl StackSampler {
    pub fn new(stack: &UwocStack) -> Self {
        Self {
            layers: stack.layers.iter().map(LayerSampler::new).collect(),
            pe: stack.pe,
            gain: stack.path.gain(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let turb: f64 = self.layers.iter().map(|l| l.sample(rng)).product();
        self.gain * turb * sample_pointing(&self.pe, rng)
    }
}

/// One draw of the combined channel gain.
pub fn sample_combined<R: Rng + ?Sized>(stack: &UwocStack, rng: &mut R) -> f64 {
    StackSampler::new(stack).sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel::bessel_k;
    use crate::special::quad::{integrate_positive, QuadTol};
    use crate::turbulence::{pdf_layer, EGGParams, GGParams};

    fn gg(a: f64, d: f64, p: f64) -> LayerModel {
        LayerModel::Gg(GGParams { a, d, p })
    }

    fn single_gg(rho2: f64) -> UwocStack {
        UwocStack::new(vec![gg(0.6302, 1.1780, 0.8444)], PointingError::new(rho2, 1.0).unwrap(), PathGain::default())
            .unwrap()
    }

    #[test]
    fn single_layer_collapses_to_closed_form() {
        let l = gg(0.6302, 1.1780, 0.8444);
        for &x in &[0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
            let v = cascaded_pdf(&[l], x).unwrap();
            let w = pdf_layer(&l, x);
            assert!((v / w - 1.0).abs() < 1e-8, "{x}: {v} {w}");
        }
    }

    #[test]
    fn product_of_exponentials() {
        let e = gg(1.0, 1.0, 1.0);
        for &h in &[0.05, 0.3, 1.0, 4.0] {
            let v = cascaded_pdf(&[e, e], h).unwrap();
            let w = 2.0 * bessel_k(0.0, 2.0 * h.sqrt());
            assert!((v / w - 1.0).abs() < 1e-8, "{h}: {v} {w}");
        }
    }

    #[test]
    fn routes_agree() {
        let egg = LayerModel::Egg(EGGParams {
            omega: 0.2130,
            lambda: 0.3291,
            a: 1.1817,
            d: 1.4299 * 17.1984,
            p: 17.1984,
        });
        let stack = UwocStack::new(vec![egg, gg(0.6302, 1.1780, 0.8444)], PointingError::new(1.0, 0.8).unwrap(), PathGain::default())
            .unwrap();
        for &g in &[1e-3, 1e-1, 1.0] {
            let pt = SnrPoint::new(g, 1.0).unwrap();
            let a = snr_cdf_with(&stack, pt, &EvalOptions::with_route(Route::Expansion)).unwrap();
            let b = snr_cdf_with(&stack, pt, &EvalOptions::with_route(Route::Factorised)).unwrap();
            assert!((a / b - 1.0).abs() < 1e-6, "{g}: {a} {b}");
        }
    }

    #[test]
    fn pdf_normalises_and_first_moment() {
        let stack = single_gg(1.0);
        let gb = 100.0;
        let tol = QuadTol::rel(1e-9);
        let f = |g: f64| snr_pdf(&stack, SnrPoint::new(g, gb).unwrap()).unwrap();
        let mass = integrate_positive(f, 1e-14, 1e6, tol).value;
        assert!((mass - 1.0).abs() < 1e-4, "{mass}");
        let m1 = integrate_positive(|g| (g / gb).sqrt() * f(g), 1e-14, 1e6, tol).value;
        assert!((m1 / stack.mean_gain() - 1.0).abs() < 1e-3, "{m1}");
    }

    #[test]
    fn cdf_derivative_is_pdf() {
        let stack = single_gg(6.0);
        for &r in &[1e-3, 1e-2, 1e-1] {
            let gb = 1e6;
            let g = r * gb;
            let eps = 1e-4 * g;
            let cdf = |x| snr_cdf(&stack, SnrPoint::new(x, gb).unwrap()).unwrap();
            let fd = (cdf(g + eps) - cdf(g - eps)) / (2.0 * eps);
            let pdf = snr_pdf(&stack, SnrPoint::new(g, gb).unwrap()).unwrap();
            assert!((fd / pdf - 1.0).abs() < 1e-4, "{r}: {fd} {pdf}");
        }
    }

    #[test]
    fn cdf_limits() {
        let stack = single_gg(1.0);
        assert_eq!(snr_cdf(&stack, SnrPoint::new(0.0, 10.0).unwrap()).unwrap(), 0.0);
        let top = snr_cdf(&stack, SnrPoint::new(1e7, 10.0).unwrap()).unwrap();
        assert!((top - 1.0).abs() < 1e-4);
    }

    #[test]
    fn validation_names_fields() {
        let bad = UwocStack {
            layers: vec![LayerModel::Egg(EGGParams {
                omega: 1.2,
                lambda: 1.0,
                a: 1.0,
                d: 1.0,
                p: 1.0,
            })],
            pe: PointingError { rho2: 1.0, a0: 1.0 },
            path: PathGain::default(),
        };
        match bad.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "layers[0].omega"),
            other => panic!("{other:?}"),
        }
    }
}
