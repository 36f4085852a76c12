//! Outage probability, average bit-error rate, ergodic capacity and their
//! high-SNR behaviour for a [`UwocStack`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;
use std::f64::consts::{LN_2, PI};

use crate::cascade::{clamp_probability, mellin_average, snr_cdf_with, EvalOptions, SnrPoint, UwocStack};
use crate::error::{invalid, Error, Result};
use crate::special::foxh::{FoxHSpec, GammaFactor};
use crate::special::gamma::ln_gamma;
use crate::special::mellin::MellinKernel;
use crate::turbulence::{LayerModel, MomentTransform, ProductKernel};

/// Values below this are reported as sitting on the numerical floor.
pub const BER_FLOOR: f64 = 1e-12;

pub fn below_ber_floor(ber: f64) -> bool {
    ber < BER_FLOOR
}

/// Conditional error probability `delta/(2 Γ(phi)) Σ_n Γ(phi, q_n γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationScheme {
    pub delta: f64,
    pub phi: f64,
    pub q: Vec<f64>,
}

impl Default for ModulationScheme {
    fn default() -> Self {
        Self::ook()
    }
}

impl ModulationScheme {
    /// On-off keying, for which the conditional error is `Q(sqrt(γ))`.
    pub fn ook() -> Self {
        Self {
            delta: 1.0,
            phi: 0.5,
            q: vec![0.5],
        }
    }

    pub fn terms(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(invalid("delta", "must be positive"));
        }
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return Err(invalid("phi", "must be positive"));
        }
        if self.q.is_empty() {
            return Err(invalid("q", "at least one term is required"));
        }
        if let Some(i) = self.q.iter().position(|q| !(*q > 0.0 && q.is_finite())) {
            return Err(invalid(format!("q[{i}]"), "must be positive"));
        }
        Ok(())
    }

    pub fn conditional_ber(&self, gamma: f64) -> f64 {
        let tail = |x: f64| if x > 0.0 { gamma_ur(self.phi, x) } else { 1.0 };
        0.5 * self.delta * self.q.iter().map(|&q| tail(q * gamma)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionKind {
    /// Intensity modulation with direct detection.
    ImDd,
    /// Heterodyne detection.
    Heterodyne,
}

impl DetectionKind {
    pub fn kappa(self) -> f64 {
        match self {
            DetectionKind::ImDd => std::f64::consts::E / (2.0 * PI),
            DetectionKind::Heterodyne => 1.0,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

/// `Γ(φ - s/2) / s` up to sign: the Laplace step of the error-rate average.
fn ber_kernel(phi: f64) -> FoxHSpec {
    let mut k = FoxHSpec::cdf_step();
    k.upper_left.push(GammaFactor::new(1.0 - phi, 0.5));
    k
}

/// Mellin kernel of `ln(1 + x)` in the variable `s = -2w`.
fn capacity_kernel() -> FoxHSpec {
    FoxHSpec {
        upper_left: vec![GammaFactor::new(0.0, 0.5)],
        upper_right: vec![GammaFactor::new(1.0, 0.5)],
        lower_left: vec![GammaFactor::new(0.0, 0.5), GammaFactor::new(0.0, 0.5)],
        lower_right: Vec::new(),
    }
}

/// `P(γ < γ_th)`.
pub fn outage(stack: &UwocStack, gamma_bar: f64, gamma_th: f64) -> Result<f64> {
    outage_with(stack, gamma_bar, gamma_th, &EvalOptions::default())
}

pub fn outage_with(stack: &UwocStack, gamma_bar: f64, gamma_th: f64, opts: &EvalOptions) -> Result<f64> {
    snr_cdf_with(stack, SnrPoint::new(gamma_th, gamma_bar)?, opts)
}

pub fn avg_ber(stack: &UwocStack, gamma_bar: f64, m: &ModulationScheme) -> Result<f64> {
    avg_ber_with(stack, gamma_bar, m, &EvalOptions::default())
}

pub fn avg_ber_with(stack: &UwocStack, gamma_bar: f64, m: &ModulationScheme, opts: &EvalOptions) -> Result<f64> {
    positive("gamma_bar", gamma_bar)?;
    m.validate()?;
    let kernel = ber_kernel(m.phi);
    let mut total = 0.0;
    for &q in &m.q {
        total += mellin_average(stack, &kernel, 1.0 / (q * gamma_bar).sqrt(), opts)?;
    }
    let v = m.delta / (2.0 * ln_gamma(m.phi).exp()) * total;
    clamp_probability(v, opts.quad.rel_tol)
}

/// `E[log2(1 + κ γ)]` in bits/s/Hz.
pub fn ergodic_capacity(stack: &UwocStack, gamma_bar: f64, det: DetectionKind) -> Result<f64> {
    ergodic_capacity_with(stack, gamma_bar, det, &EvalOptions::default())
}

pub fn ergodic_capacity_with(stack: &UwocStack, gamma_bar: f64, det: DetectionKind, opts: &EvalOptions) -> Result<f64> {
    positive("gamma_bar", gamma_bar)?;
    let v = mellin_average(stack, &capacity_kernel(), 1.0 / (det.kappa() * gamma_bar).sqrt(), opts)?;
    Ok((v / (2.0 * LN_2)).max(0.0))
}

/// Leading singularities of each Gamma factor of the stack transform: the
/// points whose residues make up the high-SNR expansion.
fn leading_singularities(stack: &UwocStack) -> Vec<f64> {
    let mut v = vec![-stack.pe.rho2];
    for l in &stack.layers {
        match *l {
            LayerModel::Gg(p) => v.push(-p.d),
            LayerModel::Egg(p) => {
                if p.omega > 0.0 {
                    v.push(-1.0);
                }
                if p.omega < 1.0 {
                    v.push(-p.d);
                }
            }
            LayerModel::Ew(_) => v.push(l.singularities()[0]),
            LayerModel::GammaGamma(p) => v.extend([-p.alpha, -p.beta]),
        }
    }
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    v
}

const CLUSTER_GAP: f64 = 0.02;
const MAX_RADIUS: f64 = 0.25;

/// Disjoint discs `(centre, radius)` around groups of leading singularities,
/// each clear of every other singularity of the transform.
fn residue_discs(leading: &[f64], all: &[f64]) -> Vec<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for &p in leading {
        match spans.last_mut() {
            Some((lo, _)) if *lo - p < CLUSTER_GAP => *lo = p,
            _ => spans.push((p, p)),
        }
    }
    let mut discs = Vec::with_capacity(spans.len());
    for (mut lo, mut hi) in spans {
        // absorb any singularity too close to separate from the group
        loop {
            let near = all.iter().copied().find(|&x| (x < lo - 1e-12 && lo - x < 1e-6) || (x > hi + 1e-12 && x - hi < 1e-6));
            match near {
                Some(x) => {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
                None => break,
            }
        }
        let gap = all
            .iter()
            .chain(leading)
            .filter(|&&x| x < lo - 1e-12 || x > hi + 1e-12)
            .map(|&x| if x < lo { lo - x } else { x - hi })
            .fold(f64::INFINITY, f64::min)
            .min(hi.abs());
        discs.push((0.5 * (lo + hi), 0.5 * (hi - lo) + (0.5 * gap).min(MAX_RADIUS)));
    }
    discs
}

/// `(1/2πi) ∮ Θ(s) z^{-s} ds` over the circle `|s - centre| = r` by the
/// trapezoid rule, refined until two successive node counts agree.
fn circle_residue<K: MellinKernel + ?Sized>(kernel: &K, ln_z: f64, centre: f64, r: f64, rel_tol: f64) -> Result<f64> {
    let eval = |n: usize| -> f64 {
        (0..n)
            .map(|k| {
                let e = Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / n as f64);
                let s = Complex64::new(centre, 0.0) + e;
                (kernel.ln_eval(s) - s * ln_z).exp() * e
            })
            .sum::<Complex64>()
            .re
            / n as f64
    };
    let mut n = 64;
    let mut prev = eval(n);
    while n < 1 << 14 {
        n *= 2;
        let next = eval(n);
        if (next - prev).abs() <= rel_tol * next.abs() + 1e-300 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence { estimate: prev, nodes: n })
}

/// Sum of the residues of `E[h^s] Θ(s) z^{-s}` at the leading singularities.
fn leading_residues(stack: &UwocStack, extra: FoxHSpec, z: f64, opts: &EvalOptions) -> Result<f64> {
    stack.validate()?;
    let kernel = ProductKernel::new(vec![stack as &dyn MomentTransform], extra);
    let leading = leading_singularities(stack);
    let all = stack.singularities();
    let mut total = 0.0;
    for (centre, r) in residue_discs(&leading, &all) {
        total += circle_residue(&kernel, z.ln(), centre, r, opts.quad.rel_tol.max(1e-12))?;
    }
    Ok(total)
}

/// High-SNR outage approximation from the leading residues.
pub fn outage_asymptotic(stack: &UwocStack, gamma_bar: f64, gamma_th: f64) -> Result<f64> {
    let pt = SnrPoint::new(gamma_th, gamma_bar)?;
    positive("gamma_th", gamma_th)?;
    leading_residues(stack, FoxHSpec::cdf_step(), pt.level(), &EvalOptions::default())
}

/// High-SNR error-rate approximation from the leading residues.
pub fn avg_ber_asymptotic(stack: &UwocStack, gamma_bar: f64, m: &ModulationScheme) -> Result<f64> {
    positive("gamma_bar", gamma_bar)?;
    m.validate()?;
    let opts = EvalOptions::default();
    let mut total = 0.0;
    for &q in &m.q {
        total += leading_residues(stack, ber_kernel(m.phi), 1.0 / (q * gamma_bar).sqrt(), &opts)?;
    }
    Ok(m.delta / (2.0 * ln_gamma(m.phi).exp()) * total)
}

/// Magnitude of the high-SNR log-log slope of outage and error rate: half
/// the distance from the origin to the first singularity of `E[h^s]`.
pub fn diversity_order(stack: &UwocStack) -> f64 {
    -0.5 * stack.singularities()[0]
}

/// Per-family rule that adds the layer shape parameters before taking the
/// minimum with the pointing term. It overstates the slope whenever one
/// layer is much more severe than the rest.
pub fn printed_diversity_order(stack: &UwocStack) -> f64 {
    let pointing = stack.pe.rho2;
    let layers = &stack.layers;
    let sum = |f: &dyn Fn(&LayerModel) -> f64| layers.iter().map(f).sum::<f64>();
    let same = |fam: &str| layers.iter().all(|l| l.family() == fam);
    let turb = if same("gg") {
        sum(&|l| if let LayerModel::Gg(p) = l { p.d } else { 0.0 })
    } else if same("egg") {
        let d = sum(&|l| if let LayerModel::Egg(p) = l { p.d } else { 0.0 });
        d.min(layers.len() as f64)
    } else if same("ew") {
        sum(&|l| if let LayerModel::Ew(p) = l { p.beta } else { 0.0 })
    } else if same("gamma_gamma") {
        let a = sum(&|l| if let LayerModel::GammaGamma(p) = l { p.alpha } else { 0.0 });
        let b = sum(&|l| if let LayerModel::GammaGamma(p) = l { p.beta } else { 0.0 });
        a.min(b)
    } else {
        sum(&|l| match *l {
            LayerModel::Gg(p) => p.d,
            LayerModel::Egg(p) => p.d.min(1.0),
            LayerModel::Ew(p) => p.beta,
            LayerModel::GammaGamma(p) => p.alpha.min(p.beta),
        })
    };
    0.5 * turb.min(pointing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::quad::{integrate_positive, QuadTol};
    use crate::turbulence::{GGParams, GammaGammaParams, PathGain, PointingError};

    fn db(x: f64) -> f64 {
        10f64.powf(x / 10.0)
    }

    fn gg_stack(rho2: f64) -> UwocStack {
        let l = LayerModel::Gg(GGParams {
            a: 0.6302,
            d: 1.1780,
            p: 0.8444,
        });
        UwocStack::new(vec![l], PointingError::new(rho2, 1.0).unwrap(), PathGain::default()).unwrap()
    }

    #[test]
    fn ook_is_gaussian_tail() {
        let m = ModulationScheme::ook();
        for &g in &[0.0, 0.5, 4.0, 25.0] {
            let q = 0.5 * statrs::function::erf::erfc((g / 2.0f64).sqrt());
            assert!((m.conditional_ber(g) - q).abs() < 1e-15 + 1e-9 * q, "{g}: {} {q}", m.conditional_ber(g));
        }
    }

    #[test]
    fn ber_matches_cdf_quadrature() {
        let stack = gg_stack(1.0);
        let m = ModulationScheme::ook();
        let gb = db(20.0);
        let closed = avg_ber(&stack, gb, &m).unwrap();
        let q = m.q[0];
        let f = |g: f64| {
            let c = snr_cdf_with(&stack, SnrPoint::new(g, gb).unwrap(), &EvalOptions::default()).unwrap();
            q.powf(m.phi) * g.powf(m.phi - 1.0) * (-q * g).exp() * c
        };
        let quad = m.delta / (2.0 * PI.sqrt()) * integrate_positive(f, 1e-12, 200.0, QuadTol::rel(1e-8)).value;
        assert!((closed / quad - 1.0).abs() < 1e-3, "{closed} {quad}");
    }

    #[test]
    fn heterodyne_beats_direct_detection() {
        let stack = gg_stack(1.0);
        for &x in &[0.0, 20.0, 40.0] {
            let im = ergodic_capacity(&stack, db(x), DetectionKind::ImDd).unwrap();
            let hd = ergodic_capacity(&stack, db(x), DetectionKind::Heterodyne).unwrap();
            assert!(hd > im, "{x}: {hd} {im}");
        }
    }

    #[test]
    fn asymptotes_meet_exact_values() {
        let stack = gg_stack(1.0);
        let gb = db(110.0);
        let o = outage(&stack, gb, 1.0).unwrap();
        let oa = outage_asymptotic(&stack, gb, 1.0).unwrap();
        assert!((oa / o - 1.0).abs() < 0.1, "{o} {oa}");
        let m = ModulationScheme::ook();
        let b = avg_ber(&stack, gb, &m).unwrap();
        let ba = avg_ber_asymptotic(&stack, gb, &m).unwrap();
        assert!((ba / b - 1.0).abs() < 0.1, "{b} {ba}");
    }

    #[test]
    fn coincident_poles_need_no_perturbation() {
        let l = LayerModel::Gg(GGParams { a: 1.0, d: 1.0, p: 1.0 });
        let stack = UwocStack::new(vec![l], PointingError::new(1.0, 1.0).unwrap(), PathGain::default()).unwrap();
        let gb = db(100.0);
        let o = outage(&stack, gb, 1.0).unwrap();
        let oa = outage_asymptotic(&stack, gb, 1.0).unwrap();
        assert!((oa / o - 1.0).abs() < 0.02, "{o} {oa}");
    }

    #[test]
    fn diversity_rules() {
        let gg = UwocStack::new(
            vec![LayerModel::GammaGamma(GammaGammaParams { alpha: 5.0, beta: 1.18 })],
            PointingError::new(6.0, 1.0).unwrap(),
            PathGain::default(),
        )
        .unwrap();
        assert!((diversity_order(&gg) - 0.59).abs() < 1e-12);
        assert!((printed_diversity_order(&gg) - 0.59).abs() < 1e-12);
        assert!((diversity_order(&gg_stack(6.0)) - 0.589).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_average_snr() {
        let stack = gg_stack(1.0);
        let m = ModulationScheme::ook();
        let mut last = (1.0, 1.0);
        for i in 0..20 {
            let gb = db(20.0 + 4.0 * i as f64);
            let o = outage(&stack, gb, 1.0).unwrap();
            let b = avg_ber(&stack, gb, &m).unwrap();
            assert!(o <= last.0 * (1.0 + 1e-9) && b <= last.1 * (1.0 + 1e-9));
            last = (o, b);
        }
    }
}
