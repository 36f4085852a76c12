//! Vertical-contour Mellin-Barnes integration shared by the Fox-H routines
//! and by the factorised channel transforms.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::quad::{integrate_panels, QuadTol};
use crate::error::{Error, Result};

/// Quadrature settings for Mellin-Barnes integrals.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureConfig {
    /// Initial truncation of `|Im s|`.
    pub contour_height: f64,
    pub rel_tol: f64,
    /// Budget of integrand evaluations.
    pub max_nodes: usize,
    /// Minimum distance kept between the contour and any pole.
    pub pole_margin: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            contour_height: 80.0,
            rel_tol: 1e-8,
            max_nodes: 1 << 16,
            pole_margin: 1e-3,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(crate::error::invalid("rel_tol", "must lie in (0, 1)"));
        }
        if !(self.contour_height > 0.0) {
            return Err(crate::error::invalid("contour_height", "must be positive"));
        }
        if !(self.pole_margin > 0.0) {
            return Err(crate::error::invalid("pole_margin", "must be positive"));
        }
        if self.max_nodes < 64 {
            return Err(crate::error::invalid("max_nodes", "must be at least 64"));
        }
        Ok(())
    }
}

/// Open interval of admissible contour abscissae.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strip {
    /// Rightmost pole that must stay left of the contour (`-inf` if none).
    pub lo: f64,
    /// Leftmost pole that must stay right of the contour (`+inf` if none).
    pub hi: f64,
}

impl Strip {
    pub const FULL: Strip = Strip {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn intersect(self, other: Strip) -> Strip {
        Strip {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn contains(&self, c: f64, margin: f64) -> bool {
        c - self.lo >= margin && self.hi - c >= margin
    }

    /// Search window for the contour abscissa.
    fn window(&self, margin: f64) -> (f64, f64) {
        let lo = if self.lo.is_finite() {
            self.lo + margin
        } else if self.hi.is_finite() {
            self.hi - 200.0
        } else {
            -200.0
        };
        let hi = if self.hi.is_finite() {
            self.hi - margin
        } else {
            lo.max(0.0) + 200.0
        };
        (lo, hi)
    }
}

/// An integrand `Theta(s)` of a Mellin-Barnes integral, evaluated in log form.
pub trait MellinKernel {
    fn ln_eval(&self, s: Complex64) -> Complex64;

    /// Strip in which the contour must run.
    fn strip(&self) -> Result<Strip>;

    /// Exponential decay rate of `|Theta(c + it)|` in units of `pi |t| / 2`.
    fn decay_rate(&self) -> f64;

    /// Algebraic order of `|Theta(c + it)|` for large `|t|`.
    fn algebraic_order(&self, c: f64) -> f64;
}

/// Reject kernels whose vertical-line integral does not exist.
pub fn check_convergence<K: MellinKernel + ?Sized>(kernel: &K, c: f64) -> Result<()> {
    let decay = kernel.decay_rate();
    let order = kernel.algebraic_order(c);
    if decay > 1e-12 || (decay.abs() <= 1e-12 && order < -1.0) {
        Ok(())
    } else {
        Err(Error::Divergent { decay, order })
    }
}

/// Abscissa minimising the integrand modulus on the real axis, i.e. the
/// steepest-descent crossing. Keeps cancellation along the line bounded.
pub fn saddle_abscissa<K: MellinKernel + ?Sized>(kernel: &K, ln_z: f64, strip: Strip, margin: f64) -> f64 {
    let (lo, hi) = strip.window(margin);
    if hi <= lo {
        return 0.5 * (lo + hi);
    }
    let g = |c: f64| {
        let v = kernel.ln_eval(Complex64::new(c, 0.0)).re - c * ln_z;
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    // coarse scan, denser near the finite edges where poles sit
    let n = 96;
    let mut best = (f64::INFINITY, 0.5 * (lo + hi));
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let u = i as f64 / n as f64;
        let w = 0.5 - 0.5 * (PI * u).cos();
        let c = lo + (hi - lo) * w;
        let v = g(c);
        samples.push((c, v));
        if v < best.0 {
            best = (v, c);
        }
    }
    let idx = samples
        .iter()
        .position(|&(c, _)| c == best.1)
        .unwrap_or(n / 2);
    let mut a = samples[idx.saturating_sub(1)].0;
    let mut b = samples[(idx + 1).min(n)].0;
    // golden-section refinement
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        }
        if (b - a).abs() < 1e-10 * (1.0 + a.abs()) {
            break;
        }
    }
    let c = 0.5 * (a + b);
    if g(c) <= best.0 {
        c
    } else {
        best.1
    }
}

/// `(1 / 2 pi i) int_{c - i inf}^{c + i inf} Theta(s) z^{-s} ds` for a kernel
/// with real coefficients, with `ln_z = ln z`.
pub fn integrate_vertical<K: MellinKernel + ?Sized>(
    kernel: &K,
    ln_z: f64,
    c: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_convergence(kernel, c)?;
    let ln_f = |t: f64| {
        let s = Complex64::new(c, t);
        kernel.ln_eval(s) - s * ln_z
    };
    let tail = tail_factor(kernel.decay_rate(), kernel.algebraic_order(c));
    let line = HalfLine {
        tail_factor: tail,
        oscillation: 1.0 + ln_z.abs(),
        abs_floor: 0.0,
    };
    let (value, _) = line.integrate(|t| finite_or_zero(ln_f(t).exp().re), |t| ln_f(t).re, cfg, cfg.max_nodes)?;
    Ok(value / PI)
}

/// Inverse Mellin transform of `kernel` at `z > 0` on the steepest-descent
/// contour of its strip.
pub fn invert<K: MellinKernel + ?Sized>(kernel: &K, z: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let strip = kernel.strip()?;
    let c = saddle_abscissa(kernel, z.ln(), strip, cfg.pole_margin);
    integrate_vertical(kernel, z.ln(), c, cfg)
}

#[inline]
pub(crate) fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Multiplier turning `envelope(T) * T` into a bound on the neglected tail.
pub(crate) fn tail_factor(decay: f64, order: f64) -> f64 {
    if decay <= 1e-12 {
        1.0 / (-order - 1.0).max(1e-3)
    } else {
        1.0
    }
}

/// Integration of a decaying function over `[0, inf)` by adaptive panels on
/// doubling windows, stopped once the envelope bound on the remainder is small.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HalfLine {
    pub tail_factor: f64,
    /// Rough number of oscillations per unit length; sets the panel count.
    pub oscillation: f64,
    /// Absolute accuracy below which the relative target is not pursued.
    pub abs_floor: f64,
}

impl HalfLine {
    /// Returns the integral and the number of evaluations spent. `ln_env`
    /// is the log-modulus of the integrand.
    pub fn integrate<F, E>(&self, f: F, ln_env: E, cfg: &QuadratureConfig, max_nodes: usize) -> Result<(f64, usize)>
    where
        F: Fn(f64) -> f64,
        E: Fn(f64) -> f64,
    {
        let env = |t: f64| finite_or_zero(ln_env(t).exp());
        let mut env0 = env(0.0).max(env(cfg.pole_margin));
        let mut probe = 0.5;
        while probe <= cfg.contour_height {
            env0 = env0.max(env(probe));
            probe *= 2.0;
        }
        let mut height = 2.0;
        while height < cfg.contour_height && env(height) * height * self.tail_factor > 1e-3 * cfg.rel_tol * env0 {
            height *= 2.0;
        }
        let mut budget = max_nodes;
        let mut lo = 0.0;
        let mut hi = height.min(cfg.contour_height);
        let mut total = 0.0f64;
        let mut err = 0.0f64;
        loop {
            let panels = ((hi - lo) * self.oscillation / 8.0).ceil().clamp(4.0, 2000.0) as usize;
            if 15 * panels > budget {
                return Err(Error::NonConvergence {
                    estimate: f64::INFINITY,
                    nodes: max_nodes - budget,
                });
            }
            let est = integrate_panels(
                &f,
                lo,
                hi,
                panels,
                QuadTol {
                    abs: (0.25 * cfg.rel_tol * total.abs()).max(0.25 * self.abs_floor),
                    rel: 0.25 * cfg.rel_tol,
                    max_evals: budget,
                },
            );
            budget = budget.saturating_sub(est.evaluations);
            total += est.value;
            err += est.error;
            if !est.converged && err > (cfg.rel_tol * total.abs()).max(self.abs_floor) {
                return Err(Error::NonConvergence {
                    estimate: err / total.abs().max(f64::MIN_POSITIVE),
                    nodes: max_nodes - budget,
                });
            }
            let tail = env(hi) * hi * self.tail_factor;
            if tail < (0.1 * cfg.rel_tol * total.abs()).max(0.1 * self.abs_floor) || tail == 0.0 {
                break;
            }
            if budget < 64 {
                return Err(Error::NonConvergence {
                    estimate: tail / total.abs().max(f64::MIN_POSITIVE),
                    nodes: max_nodes - budget,
                });
            }
            lo = hi;
            hi *= 2.0;
        }
        Ok((total, max_nodes - budget))
    }
}
