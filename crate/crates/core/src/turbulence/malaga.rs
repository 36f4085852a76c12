//! Terrestrial hop: Málaga irradiance, fog-induced random path gain and
//! pointing errors.
//!
//! The Málaga density is a finite mixture over `k = 1..β` of products of two
//! unit-scale Gamma variables with shapes `α` and `k`, scaled by `1/B` with
//! `B = αβ / (gβ + Ω')`. Its Mellin transform is therefore
//! `Σ_k w_k B^{-s} Γ(α+s) Γ(k+s) / (Γ(α) Γ(k))`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transform::{ln_add_exp, MomentTransform};
use super::PointingError;
use crate::error::{invalid, Error, Result};
use crate::special::bessel::ln_bessel_k;
use crate::special::gamma::{ln_gamma, ln_gamma_unchecked};

/// `A^{mg}` and `b_k` (with `b_k = a_k B^{-(α+k)/2}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalagaConstants {
    pub amg: f64,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalagaModel {
    pub alpha: f64,
    pub beta: u32,
    /// Average power of the scattered component.
    pub g: f64,
    /// Average power of the coherent contributions, `Ω'`.
    pub omega_p: f64,
    /// Overrides the constants derived from the four parameters above.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<MalagaConstants>,
}

/// Scattered and coherent powers used when only `(α, β)` are given.
pub const DEFAULT_G: f64 = 0.087_18;
pub const DEFAULT_OMEGA_P: f64 = 1.455_12;

impl MalagaModel {
    /// Model with the default powers; `beta` is rounded to the nearest integer
    /// because the mixture needs an integer number of terms.
    pub fn with_defaults(alpha: f64, beta: f64) -> Result<Self> {
        let rounded = beta.round();
        if !(rounded >= 1.0) {
            return Err(invalid("beta", format!("must round to a positive integer, got {beta}")));
        }
        if rounded != beta {
            log::warn!("Málaga beta {beta} rounded to {rounded}");
        }
        let m = Self {
            alpha,
            beta: rounded as u32,
            g: DEFAULT_G,
            omega_p: DEFAULT_OMEGA_P,
            constants: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive"));
        }
        if self.beta == 0 {
            return Err(invalid("beta", "must be a positive integer"));
        }
        if !(self.g > 0.0 && self.omega_p >= 0.0) {
            return Err(invalid("g", "powers must be positive"));
        }
        if let Some(c) = &self.constants {
            if c.b.len() != self.beta as usize {
                return Err(invalid("b", format!("needs {} entries, got {}", self.beta, c.b.len())));
            }
            if !(c.amg > 0.0) || c.b.iter().any(|&b| !(b > 0.0)) {
                return Err(invalid("b", "constants must be positive"));
            }
        }
        Ok(())
    }

    /// `B = αβ / (gβ + Ω')`.
    pub fn rate(&self) -> f64 {
        let beta = self.beta as f64;
        self.alpha * beta / (self.g * beta + self.omega_p)
    }

    fn ln_a_coefficients(&self) -> Vec<f64> {
        let (alpha, beta, g, om) = (self.alpha, self.beta as f64, self.g, self.omega_p);
        (1..=self.beta)
            .map(|k| {
                let kf = k as f64;
                ln_gamma(beta) - ln_gamma(kf) - ln_gamma(beta - kf + 1.0) + (1.0 - kf / 2.0) * (g * beta + om).ln()
                    - ln_gamma(kf)
                    + (kf - 1.0) * (om / g).ln()
                    + kf / 2.0 * (alpha / beta).ln()
            })
            .collect()
    }

    fn ln_amg(&self) -> f64 {
        let (alpha, beta, g, om) = (self.alpha, self.beta as f64, self.g, self.omega_p);
        std::f64::consts::LN_2 + alpha / 2.0 * alpha.ln() - (1.0 + alpha / 2.0) * g.ln() - ln_gamma(alpha)
            + (beta + alpha / 2.0) * (g * beta / (g * beta + om)).ln()
    }

    /// `A^{mg}` and `b_k`.
    pub fn constants(&self) -> MalagaConstants {
        if let Some(c) = &self.constants {
            return c.clone();
        }
        let rate = self.rate();
        let b = self
            .ln_a_coefficients()
            .iter()
            .enumerate()
            .map(|(i, la)| (la - (self.alpha + (i + 1) as f64) / 2.0 * rate.ln()).exp())
            .collect();
        MalagaConstants {
            amg: self.ln_amg().exp(),
            b,
        }
    }

    /// Mixture weights `w_k = A^{mg} b_k Γ(α) Γ(k) / 2`; they sum to one for
    /// a consistent parameter set.
    pub fn weights(&self) -> Vec<f64> {
        let c = self.constants();
        c.b.iter()
            .enumerate()
            .map(|(i, b)| (c.amg.ln() + b.ln() + ln_gamma(self.alpha) + ln_gamma((i + 1) as f64)).exp() / 2.0)
            .collect()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        let c = self.constants();
        let rate = self.rate();
        let arg = 2.0 * (rate * x).sqrt();
        c.b.iter()
            .enumerate()
            .map(|(i, b)| {
                let k = (i + 1) as f64;
                let ln_a = b.ln() + (self.alpha + k) / 2.0 * rate.ln();
                (c.amg.ln() + ln_a + ((self.alpha + k) / 2.0 - 1.0) * x.ln() + ln_bessel_k(self.alpha - k, arg)).exp()
            })
            .sum()
    }

    pub fn mean(&self) -> f64 {
        let rate = self.rate();
        self.weights()
            .iter()
            .enumerate()
            .map(|(i, w)| w * self.alpha * (i + 1) as f64 / rate)
            .sum()
    }

    /// Draw through the Gamma-product mixture.
    pub fn sample_mixture<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let w = self.weights();
        let total: f64 = w.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut k = w.len();
        for (i, wi) in w.iter().enumerate() {
            if u < *wi {
                k = i + 1;
                break;
            }
            u -= wi;
        }
        let ga = Gamma::new(self.alpha, 1.0).expect("positive shape").sample(rng);
        let gk = Gamma::new(k as f64, 1.0).expect("positive shape").sample(rng);
        ga * gk / self.rate()
    }
}

impl MomentTransform for MalagaModel {
    fn ln_moment(&self, s: Complex64) -> Complex64 {
        let rate = self.rate();
        let common = -s * rate.ln() + ln_gamma_unchecked(s + self.alpha) - ln_gamma(self.alpha);
        let mut acc = Complex64::new(f64::NEG_INFINITY, 0.0);
        for (i, w) in self.weights().iter().enumerate() {
            let k = (i + 1) as f64;
            acc = ln_add_exp(acc, w.ln() + ln_gamma_unchecked(s + k) - ln_gamma(k));
        }
        common + acc
    }

    fn singularities(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..4).map(|j| -self.alpha - j as f64).chain((1..5).map(|k| -(k as f64))).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    fn decay_rate(&self) -> f64 {
        2.0
    }

    fn algebraic_order(&self, c: f64) -> f64 {
        self.alpha + self.beta as f64 + 2.0 * c - 1.0
    }
}

/// Fog attenuation `h_f = exp(-t)` with `t ~ Gamma(shape k, rate z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FogChannel {
    pub k: f64,
    pub z: f64,
}

impl FogChannel {
    /// `z = 4.343 / (β_f l)` with the fog attenuation `β_f` in dB/km and the
    /// hop length in metres.
    pub fn from_attenuation(k: f64, beta_f: f64, length_m: f64) -> Self {
        Self {
            k,
            z: 4.343 / (beta_f * length_m / 1000.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.z > 0.0 && self.k.is_finite() && self.z.is_finite()) {
            return Err(invalid("fog", "k and z must be positive"));
        }
        Ok(())
    }
}

impl MomentTransform for FogChannel {
    fn ln_moment(&self, s: Complex64) -> Complex64 {
        self.k * (self.z.ln() - (s + self.z).ln())
    }

    fn singularities(&self) -> Vec<f64> {
        vec![-self.z]
    }

    fn decay_rate(&self) -> f64 {
        0.0
    }

    fn algebraic_order(&self, _c: f64) -> f64 {
        -self.k
    }
}

pub fn sample_fog_gain<R: Rng + ?Sized>(k: f64, z: f64, rng: &mut R) -> f64 {
    let t = Gamma::new(k, 1.0 / z).expect("positive fog parameters").sample(rng);
    (-t).exp()
}

/// Complete terrestrial hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalagaFogParams {
    pub malaga: MalagaModel,
    pub fog: FogChannel,
    pub pointing: PointingError,
}

impl MalagaFogParams {
    pub fn validate(&self) -> Result<()> {
        self.malaga.validate()?;
        self.fog.validate()?;
        self.pointing.validate()
    }
}

impl MomentTransform for MalagaFogParams {
    fn ln_moment(&self, s: Complex64) -> Complex64 {
        self.malaga.ln_moment(s) + self.fog.ln_moment(s) + self.pointing.ln_moment(s)
    }

    fn singularities(&self) -> Vec<f64> {
        let mut v = self.malaga.singularities();
        v.extend(self.fog.singularities());
        v.extend(self.pointing.singularities());
        v.sort_by(|a, b| b.total_cmp(a));
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        v
    }

    fn decay_rate(&self) -> f64 {
        self.malaga.decay_rate() + self.fog.decay_rate() + self.pointing.decay_rate()
    }

    fn algebraic_order(&self, c: f64) -> f64 {
        self.malaga.algebraic_order(c) + self.fog.algebraic_order(c) + self.pointing.algebraic_order(c)
    }
}

/// Inverse-CDF table of the Málaga density on log-spaced nodes.
#[derive(Debug, Clone)]
pub struct MalagaTable {
    ln_x: Vec<f64>,
    cdf: Vec<f64>,
    /// Power-law exponent of the distribution function below the first node.
    head: f64,
}

pub const TABLE_NODES: usize = 1 << 16;

impl MalagaTable {
    pub fn build(model: &MalagaModel) -> Result<Self> {
        model.validate()?;
        let mean = model.mean();
        let lo = (mean * 1e-10).ln();
        let mut hi = mean.ln();
        while model.pdf(hi.exp()) * hi.exp() > 1e-16 * mean {
            hi += 0.5;
        }
        let n = TABLE_NODES;
        let step = (hi - lo) / (n - 1) as f64;
        let ln_x: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        // x f(x) is the density in ln x
        let dens: Vec<f64> = ln_x.par_iter().map(|&u| model.pdf(u.exp()) * u.exp()).collect();
        let head_exponent = model.alpha.min(1.0);
        let mut cdf = Vec::with_capacity(n);
        let mut acc = dens[0] / head_exponent;
        cdf.push(acc);
        for i in 1..n {
            acc += 0.5 * step * (dens[i] + dens[i - 1]);
            cdf.push(acc);
        }
        let mass = acc;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::TableNormalization { mass });
        }
        for c in &mut cdf {
            *c /= mass;
        }
        Ok(Self {
            ln_x,
            cdf,
            head: head_exponent,
        })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u);
        if i == 0 {
            // power-law head below the first node
            let c0 = self.cdf[0];
            return (self.ln_x[0] + (u / c0).ln() / self.head).exp();
        }
        if i >= self.cdf.len() {
            return self.ln_x[self.ln_x.len() - 1].exp();
        }
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        (self.ln_x[i - 1] + t * (self.ln_x[i] - self.ln_x[i - 1])).exp()
    }
}

/// Málaga irradiance by table inversion.
pub fn sample_malaga<R: Rng + ?Sized>(table: &MalagaTable, rng: &mut R) -> f64 {
    table.quantile(rng.random::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::quad::{integrate_positive, QuadTol};
    use rand::SeedableRng;

    fn table_iii() -> Vec<MalagaModel> {
        [(4.5916, 7.0941), (2.3378, 4.5323), (1.4321, 3.4948)]
            .iter()
            .map(|&(a, b)| MalagaModel::with_defaults(a, b).unwrap())
            .collect()
    }

    #[test]
    fn weights_normalise() {
        for m in table_iii() {
            let total: f64 = m.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-10, "{m:?}: {total}");
            let mass = integrate_positive(|x| m.pdf(x), 1e-14, 200.0, QuadTol::rel(1e-11)).value;
            assert!((mass - 1.0).abs() < 1e-8, "{mass}");
            assert!((m.mean() - (m.g + m.omega_p)).abs() < 1e-9, "{}", m.mean());
        }
    }

    #[test]
    fn moment_transform_matches_density() {
        let m = &table_iii()[1];
        for n in [0.5, 1.0, 2.0] {
            let q = integrate_positive(|x| x.powf(n) * m.pdf(x), 1e-14, 300.0, QuadTol::rel(1e-11)).value;
            let t = m.ln_moment(Complex64::new(n, 0.0)).exp().re;
            assert!(((q - t) / t).abs() < 1e-8);
        }
    }

    #[test]
    fn table_sampler_mean() {
        let m = &table_iii()[0];
        let table = MalagaTable::build(m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_malaga(&table, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean / m.mean() - 1.0).abs() < 0.005, "{mean} vs {}", m.mean());
        let mix = (0..n).map(|_| m.sample_mixture(&mut rng)).sum::<f64>() / n as f64;
        assert!((mix / m.mean() - 1.0).abs() < 0.005);
    }

    #[test]
    fn fog_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let fog = FogChannel::from_attenuation(13.12, 2.0, 400.0);
        let n = 1_000_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let h = sample_fog_gain(fog.k, fog.z, &mut rng);
            assert!(h > 0.0 && h <= 1.0);
            m1 += h;
            m2 += h * h;
        }
        for (emp, order) in [(m1 / n as f64, 1.0), (m2 / n as f64, 2.0)] {
            let exact = (fog.z / (fog.z + order)).powf(fog.k);
            assert!((emp / exact - 1.0).abs() < 0.01);
            assert!((fog.ln_moment(Complex64::new(order, 0.0)).exp().re - exact).abs() < 1e-15);
        }
        let uniform = (0..n).map(|_| sample_fog_gain(1.0, 1.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((uniform - 0.5).abs() < 0.005);
    }
}
