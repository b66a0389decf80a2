//! Adaptive quadrature used by the numerical routes.
//!
//! Three building blocks:
//!
//! - [`integrate`]: globally adaptive Gauss–Kronrod (7/15 point) on a finite
//!   interval, for any value type implementing [`QuadValue`].
//! - [`oscillatory_tail`]: `∫_a^∞ h(ω) cos(ωt) dω` (or `sin`) for a slowly
//!   decaying amplitude `h`, summed between consecutive zeros of the
//!   trigonometric factor and accelerated with Wynn's epsilon algorithm.
//! - [`semi_infinite`]: `∫_a^∞ h(ω) dω` for a non-oscillatory, algebraically
//!   decaying `h`, via the map `ω = a/u`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: a real vector space with a norm.
pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn norm(&self) -> f64 {
        // max-norm keeps the estimate component-wise, which is what the
        // relative tolerances downstream are stated in
        self.re.abs().max(self.im.abs())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 2000,
        }
    }

    pub const fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<V> {
    pub value: V,
    pub error: f64,
}

impl<V: QuadValue> Estimate<V> {
    fn zero() -> Self {
        Estimate {
            value: V::default(),
            error: 0.0,
        }
    }
}

// Kronrod abscissae, descending; the odd-indexed ones are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Gauss–Kronrod panel with the usual rescaled error estimate.
fn gk15<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> Estimate<V> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = f_center.norm() * WGK[7];
    let mut samples = [(V::default(), V::default()); 7];

    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
        *sample = (f1, f2);
    }

    let mean = res_k * 0.5;
    let mut res_asc = (f_center - mean).norm() * WGK[7];
    for (j, (f1, f2)) in samples.iter().enumerate() {
        res_asc += ((*f1 - mean).norm() + (*f2 - mean).norm()) * WGK[j];
    }

    let abs_half = half.abs();
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    Estimate {
        value: res_k * half,
        error: err,
    }
}

struct Segment<V> {
    a: f64,
    b: f64,
    est: Estimate<V>,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}

impl<V> Eq for Segment<V> {}

impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// error drops below `max(tol.abs, tol.rel * |I|)`.
pub fn integrate<V, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if a == b {
        return Ok(Estimate::zero());
    }
    let first = gk15(&f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, est: first });

    let target = |total: &V| tol.abs.max(tol.rel * total.norm());

    while total_err > target(&total) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::Integration {
                residual: total_err,
                tolerance: target(&total),
                context: "subdivision limit reached",
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval cannot be split further in floating point
            heap.push(worst);
            return Err(Error::Integration {
                residual: total_err,
                tolerance: target(&total),
                context: "roundoff limit reached",
            });
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        total = total - worst.est.value + left.value + right.value;
        total_err += left.error + right.error - worst.est.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            est: right,
        });
    }

    // resum to shed accumulated cancellation in the running totals
    let mut value = V::default();
    let mut error = 0.0;
    for seg in heap.iter() {
        value = value + seg.est.value;
        error += seg.est.error;
    }
    Ok(Estimate { value, error })
}

/// Integrates over `[a, b]` split into equal panels no wider than `width`,
/// each handled adaptively with a share of the absolute tolerance.
pub fn integrate_panels<V, F>(f: F, a: f64, b: f64, width: f64, tol: Tolerance) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    let step = (b - a) / n as f64;
    let panel_tol = Tolerance {
        abs: tol.abs / n as f64,
        ..tol
    };
    let mut acc = Estimate::zero();
    for i in 0..n {
        let lo = a + step * i as f64;
        let hi = if i + 1 == n { b } else { a + step * (i + 1) as f64 };
        let est = integrate(&f, lo, hi, panel_tol)?;
        acc.value = acc.value + est.value;
        acc.error += est.error;
    }
    Ok(acc)
}

/// `∫_a^∞ h(ω) dω` for a non-oscillatory `h` decaying at least like `1/ω²`.
pub fn semi_infinite<F>(h: F, a: f64, tol: Tolerance) -> Result<Estimate<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    assert!(a > 0.0, "semi-infinite integral needs a positive lower limit");
    integrate(|u: f64| h(a / u) * (a / (u * u)), 0.0, 1.0, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Cos => x.cos(),
            Trig::Sin => x.sin(),
        }
    }

    /// Phase offset of the zeros: `sin` vanishes at `kπ`, `cos` at `(k + ½)π`.
    fn zero_offset(self) -> f64 {
        match self {
            Trig::Cos => 0.5,
            Trig::Sin => 0.0,
        }
    }
}

const WYNN_WINDOW: usize = 16;
const MAX_TAIL_PANELS: usize = 400;

/// Wynn's epsilon extrapolation of a sequence of partial sums; returns the
/// deepest even-column entry built from the most recent terms.
pub fn wynn_epsilon(sums: &[f64]) -> f64 {
    let s = &sums[sums.len().saturating_sub(WYNN_WINDOW)..];
    let n = s.len();
    if n == 0 {
        return 0.0;
    }
    let mut best = s[n - 1];
    let mut prev = vec![0.0; n + 1];
    let mut cur = s.to_vec();
    for col in 1..n {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for k in 0..cur.len() - 1 {
            let d = cur[k + 1] - cur[k];
            if d == 0.0 || !d.is_finite() {
                return best;
            }
            next.push(prev[k + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            let cand = cur[cur.len() - 1];
            if !cand.is_finite() {
                return best;
            }
            best = cand;
        }
    }
    best
}

/// `∫_a^∞ h(ω) trig(ωt) dω` for an amplitude `h` that decays monotonically
/// (possibly only like `1/ω`) beyond `a`.
///
/// The integral is cut at consecutive zeros of `trig(ωt)`; the resulting
/// nearly alternating partial sums are extrapolated with Wynn's epsilon
/// algorithm, separately for the real and imaginary parts.
pub fn oscillatory_tail<F>(h: F, trig: Trig, t: f64, a: f64, tol: f64) -> Result<Estimate<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    if t == 0.0 {
        return match trig {
            Trig::Sin => Ok(Estimate::zero()),
            Trig::Cos => semi_infinite(h, a, Tolerance::new(tol, 1e-13)),
        };
    }
    let half_period = PI / t;
    let offset = trig.zero_offset();
    let mut k = (a / half_period - offset).floor() + 1.0;
    let panel_tol = Tolerance::new(tol * 0.05, 1e-13);
    let integrand = |w: f64| h(w) * trig.eval(w * t);

    let mut lo = a;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut quad_err = 0.0;
    let mut re_sums = Vec::new();
    let mut im_sums = Vec::new();
    let mut last = (f64::NAN, f64::NAN);
    let mut small_panels = 0;

    for panel in 0..MAX_TAIL_PANELS {
        let hi = (k + offset) * half_period;
        k += 1.0;
        let est = integrate(integrand, lo, hi, panel_tol)?;
        lo = hi;
        sum += est.value;
        quad_err += est.error;
        re_sums.push(sum.re);
        im_sums.push(sum.im);

        if est.value.norm() < 1e-3 * tol {
            small_panels += 1;
            if small_panels >= 2 {
                return Ok(Estimate {
                    value: sum,
                    error: quad_err + est.value.norm(),
                });
            }
        } else {
            small_panels = 0;
        }

        if panel >= 3 {
            let cur = (wynn_epsilon(&re_sums), wynn_epsilon(&im_sums));
            let change = (cur.0 - last.0).abs().max((cur.1 - last.1).abs());
            if change <= tol {
                return Ok(Estimate {
                    value: Complex64::new(cur.0, cur.1),
                    error: quad_err + change,
                });
            }
            last = cur;
        } else if panel == 2 {
            last = (wynn_epsilon(&re_sums), wynn_epsilon(&im_sums));
        }
    }
    Err(Error::Integration {
        residual: (re_sums[re_sums.len() - 1] - last.0)
            .abs()
            .max((im_sums[im_sums.len() - 1] - last.1).abs()),
        tolerance: tol,
        context: "oscillatory tail extrapolation",
    })
}

/// Trapezoidal rule on a (not necessarily uniform) grid.
pub fn trapezoid<V: QuadValue>(xs: &[f64], ys: &[V]) -> V {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .fold(V::default(), |acc, (x, y)| acc + (y[0] + y[1]) * (0.5 * (x[1] - x[0])))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerance = Tolerance::new(1e-12, 1e-12);

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, TOL).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((est.value - exact).abs() < 1e-13);
    }

    #[test]
    fn endpoint_log_singularity() {
        // ∫_0^1 ln x dx = -1
        let est = integrate(|x: f64| x.ln(), 0.0, 1.0, TOL).unwrap();
        assert!((est.value + 1.0).abs() < 1e-11, "{}", est.value);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = integrate(|x: f64| x.exp(), 0.0, 1.0, TOL).unwrap().value;
        let bwd = integrate(|x: f64| x.exp(), 1.0, 0.0, TOL).unwrap().value;
        assert!((fwd + bwd).abs() < 1e-14);
    }

    #[test]
    fn subdivision_limit_is_an_error() {
        let res = integrate(
            |x: f64| (1.0 / x).sin(),
            1e-8,
            1.0,
            Tolerance::new(1e-14, 0.0).with_max_intervals(10),
        );
        assert!(matches!(res, Err(Error::Integration { .. })));
    }

    #[test]
    fn semi_infinite_rational() {
        // ∫_1^∞ dω/(1+ω²) = π/4
        let est = semi_infinite(|w| Complex64::new(1.0 / (1.0 + w * w), 0.0), 1.0, TOL).unwrap();
        assert!((est.value.re - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_tail() {
        // ∫_0^∞ sin(ωt)/ω dω = π/2 for any t > 0; split at ω = 1
        for &t in &[0.3, 1.0, 7.0] {
            let head = integrate(|w: f64| if w == 0.0 { t } else { (w * t).sin() / w }, 0.0, 1.0, TOL)
                .unwrap()
                .value;
            let tail = oscillatory_tail(|w| Complex64::new(1.0 / w, 0.0), Trig::Sin, t, 1.0, 1e-11).unwrap();
            assert!((head + tail.value.re - PI / 2.0).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn cosine_tail_of_lorentzian() {
        // ∫_0^∞ cos(ωt)/(1+ω²) dω = (π/2) e^{-t}
        let t = 2.5;
        let f = |w: f64| 1.0 / (1.0 + w * w);
        let head = integrate(|w: f64| f(w) * (w * t).cos(), 0.0, 3.0, TOL).unwrap().value;
        let tail = oscillatory_tail(|w| Complex64::new(f(w), 0.0), Trig::Cos, t, 3.0, 1e-12).unwrap();
        assert!((head + tail.value.re - 0.5 * PI * (-t).exp()).abs() < 1e-10);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut sums = Vec::new();
        let mut s = 0.0;
        for n in 1..=14 {
            s += if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
            sums.push(s);
        }
        assert!((wynn_epsilon(&sums) - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let xs = [0.0, 0.5, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&xs, &ys) - 12.0).abs() < 1e-14);
    }
}
