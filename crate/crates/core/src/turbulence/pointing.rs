use num_complex::Complex64;
use rand::Rng;

use super::transform::MomentTransform;
use super::PointingError;

impl MomentTransform for PointingError {
    fn ln_moment(&self, s: Complex64) -> Complex64 {
        self.rho2.ln() + s * self.a0.ln() - (s + self.rho2).ln()
    }

    fn singularities(&self) -> Vec<f64> {
        vec![-self.rho2]
    }

    fn decay_rate(&self) -> f64 {
        0.0
    }

    fn algebraic_order(&self, _c: f64) -> f64 {
        -1.0
    }
}

/// `h_p = A0 U^{1/rho2}`, the inverse of the power-law distribution function.
pub fn sample_pointing<R: Rng + ?Sized>(pe: &PointingError, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    pe.a0 * u.powf(1.0 / pe.rho2)
}
