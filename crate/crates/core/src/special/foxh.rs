//! Fox H-function and Meijer G-function of positive real argument.
//!
//! Convention:
//!
//! ```text
//! H(z) = 1/(2 pi i) ∫_L  Π Γ(b_j + B_j s) Π Γ(1 - a_j - A_j s)
//!                       ─────────────────────────────────────  z^{-s} ds
//!                       Π Γ(1 - b_j - B_j s) Π Γ(a_j + A_j s)
//! ```
//!
//! with the four products running over `lower_left`, `upper_left`,
//! `lower_right` and `upper_right` respectively.

use num_complex::Complex64;

use super::gamma::ln_gamma_unchecked;
use super::mellin::{integrate_vertical, saddle_abscissa, MellinKernel, QuadratureConfig, Strip};
use crate::error::{invalid, Error, Result};

/// One `(shift, slope)` pair of a Gamma factor.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GammaFactor {
    pub shift: f64,
    pub slope: f64,
}

impl GammaFactor {
    pub const fn new(shift: f64, slope: f64) -> Self {
        Self { shift, slope }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.shift.is_finite() {
            return Err(invalid("GammaFactor.shift", "must be finite"));
        }
        if !(self.slope > 0.0 && self.slope.is_finite()) {
            return Err(invalid("GammaFactor.slope", "must be positive"));
        }
        Ok(())
    }
}

/// Parameter lists of `H^{m,n}_{p,q}`.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FoxHSpec {
    /// `n` factors `Γ(1 - a - A s)`.
    pub upper_left: Vec<GammaFactor>,
    /// `p - n` factors `1 / Γ(a + A s)`.
    pub upper_right: Vec<GammaFactor>,
    /// `m` factors `Γ(b + B s)`.
    pub lower_left: Vec<GammaFactor>,
    /// `q - m` factors `1 / Γ(1 - b - B s)`.
    pub lower_right: Vec<GammaFactor>,
}

fn unit(xs: &[f64]) -> Vec<GammaFactor> {
    xs.iter().map(|&x| GammaFactor::new(x, 1.0)).collect()
}

impl FoxHSpec {
    /// `G^{m,n}_{p,q}` with upper parameters `a` and lower parameters `b`.
    pub fn meijer(a: &[f64], b: &[f64], m: usize, n: usize) -> Self {
        assert!(n <= a.len() && m <= b.len(), "G-function orders exceed parameter counts");
        Self {
            upper_left: unit(&a[..n]),
            upper_right: unit(&a[n..]),
            lower_left: unit(&b[..m]),
            lower_right: unit(&b[m..]),
        }
    }

    /// `Γ(-s) / Γ(1-s) = -1/s`, which turns a density transform into a
    /// distribution-function transform.
    pub fn cdf_step() -> Self {
        Self {
            upper_left: vec![GammaFactor::new(1.0, 1.0)],
            lower_right: vec![GammaFactor::new(0.0, 1.0)],
            ..Self::default()
        }
    }

    /// `(m, n, p, q)`.
    pub fn orders(&self) -> (usize, usize, usize, usize) {
        let n = self.upper_left.len();
        let m = self.lower_left.len();
        (m, n, n + self.upper_right.len(), m + self.lower_right.len())
    }

    pub fn is_meijer(&self) -> bool {
        self.factors().all(|f| f.slope == 1.0)
    }

    fn factors(&self) -> impl Iterator<Item = &GammaFactor> {
        self.upper_left
            .iter()
            .chain(&self.upper_right)
            .chain(&self.lower_left)
            .chain(&self.lower_right)
    }

    pub fn validate(&self) -> Result<()> {
        self.factors().try_for_each(GammaFactor::validate)
    }
}

/// Largest pole of the `lower_left` factors (with index), if any.
fn rightmost_left_pole(spec: &FoxHSpec) -> Option<(usize, f64)> {
    spec.lower_left
        .iter()
        .enumerate()
        .map(|(i, f)| (i, -f.shift / f.slope))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// Smallest pole of the `upper_left` factors (with index), if any.
fn leftmost_right_pole(spec: &FoxHSpec) -> Option<(usize, f64)> {
    spec.upper_left
        .iter()
        .enumerate()
        .map(|(i, f)| (i, (1.0 - f.shift) / f.slope))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

impl MellinKernel for FoxHSpec {
    fn ln_eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for f in &self.lower_left {
            acc += ln_gamma_unchecked(f.shift + f.slope * s);
        }
        for f in &self.upper_left {
            acc += ln_gamma_unchecked(1.0 - f.shift - f.slope * s);
        }
        for f in &self.lower_right {
            acc -= ln_gamma_unchecked(1.0 - f.shift - f.slope * s);
        }
        for f in &self.upper_right {
            acc -= ln_gamma_unchecked(f.shift + f.slope * s);
        }
        acc
    }

    fn strip(&self) -> Result<Strip> {
        let left = rightmost_left_pole(self);
        let right = leftmost_right_pole(self);
        if let (Some((li, lp)), Some((ri, rp))) = (left, right) {
            if lp >= rp {
                return Err(Error::ContourOverlap {
                    left_index: li,
                    left_pole: lp,
                    right_index: ri,
                    right_pole: rp,
                });
            }
        }
        Ok(Strip {
            lo: left.map_or(f64::NEG_INFINITY, |p| p.1),
            hi: right.map_or(f64::INFINITY, |p| p.1),
        })
    }

    fn decay_rate(&self) -> f64 {
        let sum = |v: &[GammaFactor]| v.iter().map(|f| f.slope).sum::<f64>();
        sum(&self.lower_left) + sum(&self.upper_left) - sum(&self.lower_right) - sum(&self.upper_right)
    }

    fn algebraic_order(&self, c: f64) -> f64 {
        let mut order = 0.0;
        for f in &self.lower_left {
            order += f.shift + f.slope * c - 0.5;
        }
        for f in &self.upper_left {
            order += 0.5 - f.shift - f.slope * c;
        }
        for f in &self.lower_right {
            order -= 0.5 - f.shift - f.slope * c;
        }
        for f in &self.upper_right {
            order -= f.shift + f.slope * c - 0.5;
        }
        order
    }
}

/// Contour abscissa strictly between the two pole families, at least
/// `pole_margin` away from either. Mid-strip when both sides are bounded,
/// half a unit inside the bound otherwise.
pub fn choose_contour(spec: &FoxHSpec, pole_margin: f64) -> Result<f64> {
    spec.validate()?;
    let strip = spec.strip()?;
    if strip.hi - strip.lo < 2.0 * pole_margin {
        let (li, lp) = rightmost_left_pole(spec).expect("bounded strip");
        let (ri, rp) = leftmost_right_pole(spec).expect("bounded strip");
        return Err(Error::ContourOverlap {
            left_index: li,
            left_pole: lp,
            right_index: ri,
            right_pole: rp,
        });
    }
    Ok(match (strip.lo.is_finite(), strip.hi.is_finite()) {
        (true, true) => 0.5 * (strip.lo + strip.hi),
        (true, false) => strip.lo + 0.5,
        (false, true) => strip.hi - 0.5,
        (false, false) => 0.0,
    })
}

/// Fox H-function at `z > 0` on the steepest-descent contour.
pub fn foxh(spec: &FoxHSpec, z: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid("z", "Fox-H argument must be positive and finite"));
    }
    choose_contour(spec, cfg.pole_margin)?;
    let strip = spec.strip()?;
    let c = saddle_abscissa(spec, z.ln(), strip, cfg.pole_margin);
    integrate_vertical(spec, z.ln(), c, cfg)
}

/// Fox H-function on an explicit contour `Re s = c`.
pub fn foxh_on_contour(spec: &FoxHSpec, z: f64, c: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid("z", "Fox-H argument must be positive and finite"));
    }
    spec.validate()?;
    let strip = spec.strip()?;
    if !strip.contains(c, 0.5 * cfg.pole_margin) {
        return Err(invalid("c", format!("contour {c} outside strip ({}, {})", strip.lo, strip.hi)));
    }
    integrate_vertical(spec, z.ln(), c, cfg)
}

/// Meijer G-function: a Fox H-function whose slopes are all one.
pub fn meijerg(spec: &FoxHSpec, z: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !spec.is_meijer() {
        return Err(invalid("spec", "Meijer G requires unit slopes"));
    }
    foxh(spec, z, cfg)
}
