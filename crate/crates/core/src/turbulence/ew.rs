//! Series behind the exponentiated-Weibull Mellin transform.
//!
//! `E[h^s] = Γ(α+1) η^s Γ(1 + s/β) S(s/β)` with
//! `S(w) = Σ_j c_j (j+1)^{-1-w}` and `c_j = (-1)^j / (j! Γ(α-j))`.
//! For non-integer `α` the coefficients keep one sign once `j > α` and decay
//! like `j^{-α}`, so the partial sums converge algebraically; `S` is summed to
//! a few hundred terms and the known tail powers are removed by Richardson
//! extrapolation.

use num_complex::Complex64;

use crate::special::gamma::recip_gamma;

/// Partial-sum sizes used by the extrapolation.
const LEVELS: [usize; 5] = [32, 64, 128, 256, 512];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwSeries {
    pub alpha: f64,
}

impl EwSeries {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    /// Coefficients `c_0 .. c_{n-1}` by the ratio `c_{j+1} / c_j = -(α-j-1)/(j+1)`.
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut c = recip_gamma(self.alpha);
        for j in 0..n {
            if j > 0 {
                let jm = (j - 1) as f64;
                c *= -(self.alpha - jm - 1.0) / (jm + 1.0);
            }
            out.push(c);
        }
        out
    }

    fn terminates(&self) -> bool {
        self.alpha == self.alpha.round() && self.alpha <= LEVELS[0] as f64
    }

    /// `S(w)`, analytically continued to `Re(α + w) > -4`.
    pub fn sum(&self, w: Complex64) -> Complex64 {
        let n_max = *LEVELS.last().expect("levels");
        let coeffs = self.coefficients(n_max);
        let mut partial = [Complex64::new(0.0, 0.0); LEVELS.len()];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut level = 0;
        let exponent = -(w + 1.0);
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                acc += c * (exponent * ((j + 1) as f64).ln()).exp();
            }
            if j + 1 == LEVELS[level] {
                partial[level] = acc;
                level += 1;
            }
        }
        if self.terminates() {
            return acc;
        }
        // tails behave like n^{-σ-k}, σ = α + w, k = 0, 1, 2, ...
        let sigma = w + self.alpha;
        let mut table = partial.to_vec();
        for k in 0..LEVELS.len() - 1 {
            let r = (-(sigma + k as f64) * std::f64::consts::LN_2).exp();
            let denom = Complex64::new(1.0, 0.0) - r;
            for i in 0..table.len() - 1 {
                table[i] = (table[i + 1] - r * table[i]) / denom;
            }
            table.pop();
        }
        table[0]
    }

    /// `1 - Γ(α+1) Σ_{j<n} c_j/(j+1)`, the probability mass dropped when the
    /// density series is cut after `n` terms.
    pub fn mass_complement(&self, n: usize) -> f64 {
        let g = crate::special::gamma::gamma(self.alpha + 1.0);
        let kept: f64 = self
            .coefficients(n)
            .iter()
            .enumerate()
            .map(|(j, c)| c / (j + 1) as f64)
            .sum();
        1.0 - g * kept
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::quad::{integrate, QuadTol};

    /// S(w) Γ(1+w) Γ(α) = ∫_0^∞ y^w e^{-y} (1 - e^{-y})^{α-1} dy for real w.
    fn oracle(alpha: f64, w: f64) -> f64 {
        let v = integrate(
            |u: f64| {
                let y = u.exp();
                y.powf(w + 1.0) * (-y).exp() * (-(-y).exp_m1()).powf(alpha - 1.0)
            },
            -40.0,
            4.0,
            QuadTol::rel(1e-13),
        )
        .value;
        v / (crate::special::gamma::gamma(1.0 + w) * crate::special::gamma::gamma(alpha))
    }

    #[test]
    fn extrapolated_sum_matches_integral() {
        for (alpha, w) in [(2.5, 0.0), (2.5, 1.3), (2.5, -0.5), (0.6, 0.2), (4.2, 2.0)] {
            let s = EwSeries::new(alpha).sum(Complex64::new(w, 0.0));
            let o = oracle(alpha, w);
            assert!((s.re - o).abs() < 1e-10 * o.abs().max(1e-3), "alpha={alpha} w={w}: {} vs {o}", s.re);
            assert!(s.im.abs() < 1e-14);
        }
    }

    #[test]
    fn normalisation_and_zero_at_minus_one() {
        let series = EwSeries::new(2.5);
        let g = crate::special::gamma::gamma(3.5);
        assert!((series.sum(Complex64::new(0.0, 0.0)).re * g - 1.0).abs() < 1e-11);
        // the pole of Γ(1 + w) at w = -1 is cancelled for α > 1
        assert!(series.sum(Complex64::new(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn integer_alpha_terminates() {
        let series = EwSeries::new(3.0);
        let c = series.coefficients(6);
        assert!(c[3..].iter().all(|&x| x == 0.0));
        assert!(series.mass_complement(3).abs() < 1e-14);
    }

    #[test]
    fn tail_is_one_signed() {
        let c = EwSeries::new(2.5).coefficients(60);
        assert!(c[3..].iter().all(|&x| x.signum() == c[3].signum()));
        let m = EwSeries::new(2.5).mass_complement(60);
        assert!(m > 0.0 && m < 1e-3, "{m}");
    }
}
