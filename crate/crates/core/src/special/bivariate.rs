//! Bivariate Fox H-function as a nested double Mellin-Barnes integral.
//!
//! ```text
//! H(z1, z2) = (1 / 2 pi i)^2 ∫∫ Θ1(s1) Θ2(s2) J(s1, s2) z1^{-s1} z2^{-s2} ds1 ds2
//! ```
//!
//! where `Θ1`, `Θ2` are single-variable kernels and `J` is a product of
//! Gamma functions of `shift + w1 s1 + w2 s2`, each in the numerator or the
//! denominator.

use num_complex::Complex64;
use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use super::foxh::FoxHSpec;
use super::gamma::ln_gamma_unchecked;
use super::mellin::{finite_or_zero, HalfLine, MellinKernel, QuadratureConfig, Strip};
use crate::error::{invalid, Error, Result};

/// Default cap on the total number of integrand evaluations of one double integral.
pub const DOUBLE_NODE_BUDGET: usize = 1 << 22;

/// `Γ(shift + w1 s1 + w2 s2)`, or its reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JointFactor {
    pub shift: f64,
    pub weights: [f64; 2],
    pub reciprocal: bool,
}

impl JointFactor {
    pub fn new(shift: f64, w1: f64, w2: f64) -> Self {
        Self {
            shift,
            weights: [w1, w2],
            reciprocal: false,
        }
    }

    pub fn recip(shift: f64, w1: f64, w2: f64) -> Self {
        Self {
            reciprocal: true,
            ..Self::new(shift, w1, w2)
        }
    }

    #[inline]
    fn ln_eval(&self, s1: Complex64, s2: Complex64) -> Complex64 {
        let v = ln_gamma_unchecked(s1 * self.weights[0] + s2 * self.weights[1] + self.shift);
        if self.reciprocal {
            -v
        } else {
            v
        }
    }

    /// Real part of the argument at the contour point.
    fn real_arg(&self, c: [f64; 2]) -> f64 {
        self.shift + self.weights[0] * c[0] + self.weights[1] * c[1]
    }
}

/// Parameter lists of a bivariate Fox H-function.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BivariateFoxHSpec {
    pub joint_factors: Vec<JointFactor>,
    pub axis1: FoxHSpec,
    pub axis2: FoxHSpec,
    pub args: [f64; 2],
    /// Contour abscissae; chosen automatically when absent.
    pub contour: Option<[f64; 2]>,
}

/// A double contour `(c1, c2)` inside both strips that keeps every joint
/// numerator Gamma to the right of its poles, as far from all constraints as
/// a grid search can find.
pub fn choose_double_contour(strips: [Strip; 2], joint: &[JointFactor], margin: f64) -> Result<[f64; 2]> {
    let window = |s: Strip| -> (f64, f64) {
        let lo = if s.lo.is_finite() { s.lo } else { s.hi.min(0.0) - 4.0 };
        let hi = if s.hi.is_finite() { s.hi } else { s.lo.max(0.0) + 4.0 };
        (lo, hi)
    };
    let (a1, b1) = window(strips[0]);
    let (a2, b2) = window(strips[1]);
    let score = |c: [f64; 2]| -> f64 {
        let mut m = (c[0] - strips[0].lo)
            .min(strips[0].hi - c[0])
            .min(c[1] - strips[1].lo)
            .min(strips[1].hi - c[1]);
        for j in joint.iter().filter(|j| !j.reciprocal) {
            let norm = j.weights[0].hypot(j.weights[1]).max(1e-300);
            m = m.min(j.real_arg(c) / norm);
        }
        m
    };
    let n = 80;
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
    for i in 1..n {
        for k in 1..n {
            let c = [
                a1 + (b1 - a1) * i as f64 / n as f64,
                a2 + (b2 - a2) * k as f64 / n as f64,
            ];
            let v = score(c);
            if v > best.0 {
                best = (v, c);
            }
        }
    }
    if best.0 < margin {
        return Err(invalid("contour", "no double contour separates the pole families"));
    }
    Ok(best.1)
}

/// Exponential decay rate of the integrand along direction `(cos th, sin th)`,
/// minimised over a fan of directions.
fn min_directional_decay<K1, K2>(k1: &K1, k2: &K2, joint: &[JointFactor]) -> f64
where
    K1: MellinKernel + ?Sized,
    K2: MellinKernel + ?Sized,
{
    let (r1, r2) = (k1.decay_rate(), k2.decay_rate());
    (0..128)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / 128.0;
            let (d1, d2) = (th.cos(), th.sin());
            let mut rate = r1 * d1.abs() + r2 * d2.abs();
            for j in joint {
                let w = (j.weights[0] * d1 + j.weights[1] * d2).abs();
                rate += if j.reciprocal { -w } else { w };
            }
            rate
        })
        .fold(f64::INFINITY, f64::min)
}

/// Double Mellin-Barnes integral with general axis kernels.
pub fn bivariate_mellin<K1, K2>(
    k1: &K1,
    k2: &K2,
    joint: &[JointFactor],
    args: [f64; 2],
    contour: Option<[f64; 2]>,
    cfg: &QuadratureConfig,
    max_total_nodes: usize,
) -> Result<f64>
where
    K1: MellinKernel + ?Sized,
    K2: MellinKernel + ?Sized,
{
    if !(args[0] > 0.0 && args[1] > 0.0 && args[0].is_finite() && args[1].is_finite()) {
        return Err(invalid("args", "bivariate arguments must be positive and finite"));
    }
    let strips = [k1.strip()?, k2.strip()?];
    let c = match contour {
        Some(c) => c,
        None => choose_double_contour(strips, joint, cfg.pole_margin)?,
    };
    let decay = min_directional_decay(k1, k2, joint);
    if decay <= 1e-12 {
        return Err(Error::Divergent {
            decay,
            order: f64::NAN,
        });
    }
    let (l1, l2) = (args[0].ln(), args[1].ln());
    let axis1 = |t1: f64| {
        let s1 = Complex64::new(c[0], t1);
        (s1, k1.ln_eval(s1) - s1 * l1)
    };
    let ln_f = |s1: Complex64, base: Complex64, t2: f64| -> Complex64 {
        let s2 = Complex64::new(c[1], t2);
        let mut v = base + k2.ln_eval(s2) - s2 * l2;
        for j in joint {
            v += j.ln_eval(s1, s2);
        }
        v
    };
    let spent = Cell::new(0usize);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_cfg = QuadratureConfig {
        rel_tol: 0.5 * cfg.rel_tol,
        ..*cfg
    };
    let inner_line = Cell::new(HalfLine {
        tail_factor: 1.0,
        oscillation: 1.0 + l2.abs(),
        abs_floor: 0.0,
    });
    let inner = |t1: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        let (s1, base) = axis1(t1);
        let remaining = max_total_nodes.saturating_sub(spent.get());
        let mut acc = 0.0;
        for sign in [1.0, -1.0] {
            let r = inner_line.get().integrate(
                |t2| finite_or_zero(ln_f(s1, base, sign * t2).exp().re),
                |t2| ln_f(s1, base, sign * t2).re,
                &inner_cfg,
                remaining.min(cfg.max_nodes),
            );
            match r {
                Ok((v, n)) => {
                    acc += v;
                    spent.set(spent.get() + n);
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    return 0.0;
                }
            }
        }
        if spent.get() > max_total_nodes {
            *failure.borrow_mut() = Some(Error::NonConvergence {
                estimate: f64::INFINITY,
                nodes: spent.get(),
            });
        }
        acc
    };
    // inner integrals far out on the outer line only need absolute accuracy
    // relative to the size of the whole integral
    let scale = inner(0.0).abs();
    inner_line.set(HalfLine {
        abs_floor: 0.05 * cfg.rel_tol * scale,
        ..inner_line.get()
    });
    let outer_env = |t1: f64| -> f64 {
        let (s1, base) = axis1(t1);
        [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0]
            .iter()
            .map(|&k| ln_f(s1, base, k * t1).re)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let outer_line = HalfLine {
        tail_factor: 1.0,
        oscillation: 1.0 + l1.abs(),
        abs_floor: 0.0,
    };
    let result = outer_line.integrate(&inner, outer_env, cfg, cfg.max_nodes);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (value, _) = result?;
    Ok(value / (2.0 * PI * PI))
}

/// Bivariate Fox H-function of `spec.args`.
pub fn bivariate_foxh(spec: &BivariateFoxHSpec, cfg: &QuadratureConfig) -> Result<f64> {
    spec.axis1.validate()?;
    spec.axis2.validate()?;
    bivariate_mellin(
        &spec.axis1,
        &spec.axis2,
        &spec.joint_factors,
        spec.args,
        spec.contour,
        cfg,
        DOUBLE_NODE_BUDGET,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::foxh::{foxh, GammaFactor};

    #[test]
    fn separable_spec_factorises() {
        let axis1 = FoxHSpec {
            lower_left: vec![GammaFactor::new(0.5, 1.0)],
            ..Default::default()
        };
        let axis2 = FoxHSpec {
            lower_left: vec![GammaFactor::new(0.0, 1.0); 2],
            ..Default::default()
        };
        let cfg = QuadratureConfig::with_rel_tol(1e-9);
        let spec = BivariateFoxHSpec {
            axis1: axis1.clone(),
            axis2: axis2.clone(),
            args: [0.7, 1.3],
            ..Default::default()
        };
        let v = bivariate_foxh(&spec, &cfg).unwrap();
        let expect = foxh(&axis1, 0.7, &cfg).unwrap() * foxh(&axis2, 1.3, &cfg).unwrap();
        assert!(((v - expect) / expect).abs() < 2e-9, "{v} vs {expect}");
    }

    #[test]
    fn beta_integral_coupling() {
        // 1/(1 + z1 + z2) = (1/2πi)^2 ∫∫ Γ(s1) Γ(s2) Γ(1 - s1 - s2) z1^{-s1} z2^{-s2}
        let axis1 = FoxHSpec {
            lower_left: vec![GammaFactor::new(0.0, 1.0)],
            ..Default::default()
        };
        let axis2 = axis1.clone();
        let spec = BivariateFoxHSpec {
            joint_factors: vec![JointFactor::new(1.0, -1.0, -1.0)],
            axis1,
            axis2,
            args: [0.4, 1.7],
            contour: None,
        };
        let cfg = QuadratureConfig::with_rel_tol(1e-8);
        let v = bivariate_foxh(&spec, &cfg).unwrap();
        let expect = 1.0 / (1.0 + 0.4 + 1.7);
        assert!(((v - expect) / expect).abs() < 1e-7, "{v} vs {expect}");
    }

    #[test]
    fn rejects_missing_contour() {
        let axis = FoxHSpec {
            lower_left: vec![GammaFactor::new(0.0, 1.0)],
            ..Default::default()
        };
        let spec = BivariateFoxHSpec {
            joint_factors: vec![JointFactor::new(-5.0, -1.0, -1.0)],
            axis1: axis.clone(),
            axis2: axis,
            args: [1.0, 1.0],
            contour: None,
        };
        assert!(bivariate_foxh(&spec, &QuadratureConfig::default()).is_err());
    }
}
