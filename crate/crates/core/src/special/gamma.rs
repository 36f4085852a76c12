//! Log-Gamma on the complex plane.
//!
//! Lanczos approximation (g = 607/128, 15 terms) for `Re z >= 0.5`, reflection
//! formula below. The reflection uses a rewriting of `ln sin(pi z)` that stays
//! finite for large `|Im z|`, which is where Mellin-Barnes contours spend most
//! of their nodes.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G_HALF: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const LN_PI: f64 = 1.144_729_885_849_400_2;

fn lanczos(z: Complex64) -> Complex64 {
    let tmp = z + LANCZOS_G_HALF;
    let mut ser = Complex64::new(LANCZOS_C0, 0.0);
    let mut y = z;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    (z + 0.5) * tmp.ln() - tmp + (ser * SQRT_2PI).ln() - z.ln()
}

/// `ln sin(pi z)` without overflow for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 10.0 {
        return (z * PI).sin().ln();
    }
    // sin(pi z) = e^{-i pi z} (1 - e^{2 i pi z}) / (-2i) for Im z > 0
    let flip = z.im < 0.0;
    let w = if flip { z.conj() } else { z };
    let i = Complex64::i();
    let small = (i * 2.0 * PI * w).exp();
    let val = -i * PI * w + (Complex64::new(1.0, 0.0) - small).ln() - (-2.0 * i).ln();
    if flip {
        val.conj()
    } else {
        val
    }
}

/// Principal-branch `ln Gamma(z)` for complex `z`.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::GammaPole(z.re));
    }
    Ok(ln_gamma_unchecked(z))
}

/// As [`log_gamma_complex`] without the pole check; returns a non-finite value at poles.
#[inline]
pub fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        lanczos(z)
    } else {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let v = Complex64::new(LN_PI, 0.0) - ln_sin_pi(z) - lanczos(Complex64::new(1.0, 0.0) - z);
        // keep the imaginary part on the branch continuous with the right half plane
        let k = ((v.im - reference_arg(z)) / (2.0 * PI)).round();
        Complex64::new(v.re, v.im - 2.0 * PI * k)
    }
}

/// Stirling-level estimate of `arg Gamma(z)` used only to pick the branch.
fn reference_arg(z: Complex64) -> f64 {
    // Shift right with the recurrence and apply Stirling; the shift sum tracks
    // the continuous branch.
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.re < 8.0 {
        acc += w.ln();
        w += 1.0;
    }
    let stirling = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * w);
    (stirling - acc).im
}

/// Real `ln|Gamma(x)|` via the complex routine.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_unchecked(Complex64::new(x, 0.0)).re
}

/// Real Gamma function with sign, for arguments where it does not overflow.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return f64::NAN;
    }
    let mag = ln_gamma(x).exp();
    mag * gamma_sign(x)
}

/// `1 / Gamma(x)`; zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return 0.0;
    }
    gamma_sign(x) * (-ln_gamma(x)).exp()
}

/// Sign of `Gamma(x)` for real non-pole `x`.
pub fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        // between -k-1 and -k the sign is (-1)^(k+1)
        let k = (-x).floor() as i64;
        if k % 2 == 0 {
            -1.0
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_and_half() {
        assert!(log_gamma_complex(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(log_gamma_complex(c(2.0, 0.0)).unwrap().norm() < 1e-14);
        let half = log_gamma_complex(c(0.5, 0.0)).unwrap();
        assert!((half.re - 0.5 * PI.ln()).abs() < 1e-14);
    }

    #[test]
    fn gamma_of_one_plus_i() {
        // |Gamma(1+i)|^2 = pi / sinh(pi)
        let v = log_gamma_complex(c(1.0, 1.0)).unwrap();
        let expect = (PI / PI.sinh()).sqrt();
        assert!((v.re.exp() - expect).abs() < 1e-14);
        // mpmath: loggamma(1+i) = -0.650923199301856 - 0.301640320467533i
        assert!((v.re + 0.650_923_199_301_856_3).abs() < 1e-13);
        assert!((v.im + 0.301_640_320_467_533_2).abs() < 1e-13);
    }

    #[test]
    fn mpmath_reference_points() {
        let v = log_gamma_complex(c(3.7, -12.2)).unwrap();
        assert!((v.re + 10.205_061_424_817_611).abs() < 1e-12);
        assert!((v.im + 22.932_275_457_292_758).abs() < 1e-12);
        let v = log_gamma_complex(c(-2.5, 0.3)).unwrap();
        assert!((v.re + 0.432_088_892_613_201_9).abs() < 1e-12);
        assert!((v.im + 9.093_345_421_289_741).abs() < 1e-12);
        let v = ln_gamma(150.25);
        assert!(((v - 601.261_504_032_499_7) / 601.26).abs() < 1e-13);
    }

    #[test]
    fn poles_rejected() {
        for x in [0.0, -1.0, -7.0] {
            assert_eq!(log_gamma_complex(c(x, 0.0)), Err(Error::GammaPole(x)));
        }
        assert!(log_gamma_complex(c(-1.0, 1e-9)).is_ok());
    }

    #[test]
    fn factorials_on_real_axis() {
        let mut fact = 1.0f64;
        for n in 1..=170 {
            let lg = ln_gamma(n as f64 + 1.0);
            fact *= n as f64;
            let rel = if fact.is_finite() {
                (lg - fact.ln()).abs() / fact.ln().max(1.0)
            } else {
                0.0
            };
            assert!(rel < 1e-13, "n = {n}: {rel}");
        }
    }

    #[test]
    fn real_helpers() {
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(-1.5) - 4.0 / 3.0 * PI.sqrt()).abs() < 1e-13);
        assert_eq!(recip_gamma(-3.0), 0.0);
        assert!((recip_gamma(0.5) - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn huge_imaginary_part_is_finite() {
        let v = log_gamma_complex(c(-0.3, 400.0)).unwrap();
        assert!(v.re.is_finite() && v.im.is_finite());
        let w = log_gamma_complex(c(0.7, 400.0)).unwrap();
        // recurrence across the reflection boundary
        let d = w - (v + c(-0.3, 400.0).ln());
        assert!(d.re.abs() < 1e-9);
        assert!(((d.im / (2.0 * PI)).round() * 2.0 * PI - d.im).abs() < 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn recurrence(r in 0.1f64..50.0, th in -3.1f64..3.1) {
            let z = Complex64::from_polar(r, th);
            proptest::prop_assume!(!(z.im.abs() < 1e-6 && z.re <= 0.0));
            let a = ln_gamma_unchecked(z + 1.0);
            let b = ln_gamma_unchecked(z) + z.ln();
            let scale = a.norm().max(1.0);
            proptest::prop_assert!((a.re - b.re).abs() / scale < 1e-12);
            let dim = a.im - b.im;
            let wrapped = dim - (dim / (2.0 * PI)).round() * 2.0 * PI;
            proptest::prop_assert!(wrapped.abs() / scale < 1e-12);
        }
    }
}
