//! Globally adaptive Gauss-Kronrod (7/15 point) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Result of one Kronrod panel.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
    pub abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Apply the 15-point Kronrod rule (with embedded 7-point Gauss) on `[a, b]`.
pub fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let value = res_k * half;
    let mut error = ((res_k - res_g) * half).abs();
    let abs_value = res_abs * half.abs();
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Panel {
        a,
        b,
        value,
        error: error.max(50.0 * f64::EPSILON * abs_value),
        abs_value,
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub abs_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
    pub max_evals: usize,
}

impl Default for QuadTol {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-10,
            max_evals: 200_000,
        }
    }
}

impl QuadTol {
    pub fn rel(rel: f64) -> Self {
        Self {
            rel,
            ..Self::default()
        }
    }
}

/// Adaptive integral of `f` over `[a, b]`, starting from `initial` equal panels.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    initial: usize,
    tol: QuadTol,
) -> Estimate {
    let n0 = initial.max(1);
    let mut heap = BinaryHeap::with_capacity(4 * n0);
    let width = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        heap.push(kronrod15(&mut f, lo, hi));
    }
    let mut evals = 15 * n0;
    let (mut value, mut error, mut abs_value) = totals(&heap);
    loop {
        let target = tol.abs.max(tol.rel * value.abs()).max(50.0 * f64::EPSILON * abs_value);
        if error <= target || evals + 30 > tol.max_evals {
            // resum to shed drift from the running updates
            let (value, error, abs_value) = totals(&heap);
            return Estimate {
                value,
                error,
                abs_value,
                evaluations: evals,
                converged: error <= target,
            };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.error.is_finite()) && (mid <= worst.a || mid >= worst.b) {
            let (value, error, abs_value) = totals(&heap);
            return Estimate {
                value,
                error: f64::INFINITY.min(error + worst.error),
                abs_value,
                evaluations: evals,
                converged: false,
            };
        }
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision; freeze it
            error -= worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        let left = kronrod15(&mut f, worst.a, mid);
        let right = kronrod15(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        if !error.is_finite() {
            heap.push(left);
            heap.push(right);
            let t = totals(&heap);
            value = t.0;
            error = t.1;
            abs_value = t.2;
        } else {
            heap.push(left);
            heap.push(right);
        }
        evals += 30;
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64, f64) {
    heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
        (acc.0 + p.value, acc.1 + p.error, acc.2 + p.abs_value)
    })
}

/// Adaptive integral over a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: QuadTol) -> Estimate {
    integrate_panels(f, a, b, 1, tol)
}

/// Integral over `(0, inf)` through the substitution `x = e^u` on a window
/// wide enough for densities that decay at both ends.
pub fn integrate_positive<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: QuadTol) -> Estimate {
    integrate_panels(
        |u| {
            let x = u.exp();
            f(x) * x
        },
        lo.ln(),
        hi.ln(),
        32,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, QuadTol::default());
        assert!((e.value - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
        assert!(e.converged);
    }

    #[test]
    fn peaked_and_oscillatory() {
        let e = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, QuadTol::rel(1e-12));
        let exact = 2.0 * 100.0 * (1.0f64 / 1e-2).atan();
        assert!((e.value - exact).abs() / exact < 1e-11);
        let e = integrate(|x| (50.0 * x).cos(), 0.0, 3.0, QuadTol::rel(1e-12));
        assert!((e.value - (150.0f64).sin() / 50.0).abs() < 1e-12);
    }

    #[test]
    fn positive_axis_density() {
        let e = integrate_positive(|x| (-x).exp(), 1e-14, 60.0, QuadTol::rel(1e-12));
        assert!((e.value - 1.0).abs() < 1e-11);
    }
}
