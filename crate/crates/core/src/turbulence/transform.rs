use num_complex::Complex64;

use crate::error::Result;
use crate::special::foxh::FoxHSpec;
use crate::special::mellin::{MellinKernel, Strip};

/// Complex Mellin transform `E[X^s]` of a positive random variable, in log form.
pub trait MomentTransform: Send + Sync {
    fn ln_moment(&self, s: Complex64) -> Complex64;

    /// Singular points on the negative real axis, rightmost first. The first
    /// entry bounds the strip of analyticity; later ones are only used to keep
    /// residue circles clear of neighbouring singularities.
    fn singularities(&self) -> Vec<f64>;

    /// Exponential decay rate of `|E[X^{c+it}]|` in units of `pi |t| / 2`.
    fn decay_rate(&self) -> f64;

    /// Algebraic order of `|E[X^{c+it}]|` for large `|t|`.
    fn algebraic_order(&self, c: f64) -> f64;
}

/// `ln(e^a + e^b)` on the principal branch up to multiples of `2 pi i`.
#[inline]
pub fn ln_add_exp(a: Complex64, b: Complex64) -> Complex64 {
    if !a.re.is_finite() && a.re < 0.0 {
        return b;
    }
    if !b.re.is_finite() && b.re < 0.0 {
        return a;
    }
    let (hi, lo) = if a.re >= b.re { (a, b) } else { (b, a) };
    hi + (Complex64::new(1.0, 0.0) + (lo - hi).exp()).ln()
}

/// Asymptotically dominant `(decay, order)` among the branches of a sum:
/// slowest decay wins, ties go to the larger order.
pub(crate) fn dominant(branches: &[(f64, f64)]) -> (f64, f64) {
    branches
        .iter()
        .copied()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, b| {
            if b.0 < acc.0 - 1e-12 || ((b.0 - acc.0).abs() <= 1e-12 && b.1 > acc.1) {
                b
            } else {
                acc
            }
        })
}

/// Product of Mellin transforms times a Gamma-ratio kernel, as one
/// Mellin-Barnes integrand.
pub struct ProductKernel<'a> {
    pub parts: Vec<&'a dyn MomentTransform>,
    pub extra: FoxHSpec,
}

impl<'a> ProductKernel<'a> {
    pub fn new(parts: Vec<&'a dyn MomentTransform>, extra: FoxHSpec) -> Self {
        Self { parts, extra }
    }

    /// Rightmost singularity of the transform product.
    pub fn first_singularity(&self) -> f64 {
        self.parts
            .iter()
            .filter_map(|p| p.singularities().first().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl MellinKernel for ProductKernel<'_> {
    fn ln_eval(&self, s: Complex64) -> Complex64 {
        self.parts.iter().map(|p| p.ln_moment(s)).sum::<Complex64>() + self.extra.ln_eval(s)
    }

    fn strip(&self) -> Result<Strip> {
        let strip = self.extra.strip()?.intersect(Strip {
            lo: self.first_singularity(),
            hi: f64::INFINITY,
        });
        if strip.lo >= strip.hi {
            return Err(crate::error::invalid("kernel", "transform strip and Gamma kernel strip do not overlap"));
        }
        Ok(strip)
    }

    fn decay_rate(&self) -> f64 {
        self.parts.iter().map(|p| p.decay_rate()).sum::<f64>() + self.extra.decay_rate()
    }

    fn algebraic_order(&self, c: f64) -> f64 {
        self.parts.iter().map(|p| p.algebraic_order(c)).sum::<f64>() + self.extra.algebraic_order(c)
    }
}
