//! Frequency-domain quadrature of `L`, `g` and `ġ` for an arbitrary
//! spectral density:
//!
//! ```text
//! L(t) = (1/π) ∫ J(ω) [coth(βω/2) cos ωt − i sin ωt] dω
//! g(t) = (1/π) ∫ J(ω)/ω² [coth(βω/2)(1 − cos ωt) − i(ωt − sin ωt)] dω
//! ġ(t) = (1/π) ∫ J(ω)/ω  [coth(βω/2) sin ωt − i(1 − cos ωt)] dω
//! ```
//!
//! Continuous densities are integrated on `[0, Ω]` in panels no wider than
//! `min(π/t, scale)`, `Ω ≥ max(50·scale, 50/β)`; beyond `Ω` the integrand is
//! split into a non-oscillatory part (mapped to a finite interval) and
//! `cos`/`sin` parts (zero-to-zero panels with epsilon extrapolation).
//! Tabulated densities use the trapezoidal rule over the grid with `J`
//! taken as zero outside it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::quad::{integrate_panels, oscillatory_tail, semi_infinite, trapezoid, Tolerance, Trig};
use crate::spectral::{brownian_density, thermal_factor, SpectralDensity, TabulatedDensity};

const FINITE_TOL: Tolerance = Tolerance::new(1e-10, 1e-12);
const TAIL_TOL: f64 = 1e-11;
/// Trapezoid points per half period of the oscillating factor.
const TRAPEZOID_DENSITY: f64 = 16.0;
const MAX_TRAPEZOID_POINTS: usize = 4_000_000;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `1 − cos x` without cancellation.
fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// `x − sin x` without cancellation.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        for k in 1..8 {
            let k = 2 * k;
            term *= -x2 / ((k + 2) * (k + 3)) as f64;
            sum += term;
        }
        sum
    } else {
        x - x.sin()
    }
}

struct Grid {
    width: f64,
    cutoff: f64,
}

fn grid(scale: f64, beta: f64, t: f64) -> Grid {
    let width = if t > 0.0 { (PI / t).min(scale) } else { scale };
    let omega_min = (50.0 * scale).max(50.0 / beta);
    Grid {
        width,
        cutoff: (omega_min / width).ceil() * width,
    }
}

pub(crate) fn correlation(sd: &SpectralDensity, beta: f64, t: f64) -> Result<Complex64> {
    let integrand = |j: f64, w: f64| {
        let (s, cs) = (w * t).sin_cos();
        c(j * thermal_factor(beta, w) * cs, -j * s)
    };
    match sd {
        SpectralDensity::Tabulated(tab) => tabulated(tab, t, integrand),
        SpectralDensity::OverdampedBrownian { eta, gamma } => {
            if t == 0.0 {
                return domain(
                    "Re L(0) diverges logarithmically for a finite-temperature Brownian bath; use t > 0",
                );
            }
            let j = |w: f64| brownian_density(*eta, *gamma, w);
            let g = grid(*gamma, beta, t);
            let head = integrate_panels(|w: f64| integrand(j(w), w), 0.0, g.cutoff, g.width, FINITE_TOL)?;
            let fluct = oscillatory_tail(|w| c(j(w) * thermal_factor(beta, w), 0.0), Trig::Cos, t, g.cutoff, TAIL_TOL)?;
            let diss = oscillatory_tail(|w| c(0.0, -j(w)), Trig::Sin, t, g.cutoff, TAIL_TOL)?;
            Ok((head.value + fluct.value + diss.value) / PI)
        }
    }
}

pub(crate) fn dephasing(sd: &SpectralDensity, beta: f64, t: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    let integrand = |j: f64, w: f64| {
        let x = w * t;
        let a = j / (w * w);
        c(a * thermal_factor(beta, w) * one_minus_cos(x), -a * x_minus_sin(x))
    };
    match sd {
        SpectralDensity::Tabulated(tab) => tabulated(tab, t, integrand),
        SpectralDensity::OverdampedBrownian { eta, gamma } => {
            let j = |w: f64| brownian_density(*eta, *gamma, w);
            let g = grid(*gamma, beta, t);
            let head = integrate_panels(|w: f64| integrand(j(w), w), 0.0, g.cutoff, g.width, FINITE_TOL)?;
            let smooth = semi_infinite(
                |w| {
                    let jw = j(w);
                    c(jw * thermal_factor(beta, w) / (w * w), -t * jw / w)
                },
                g.cutoff,
                Tolerance::new(TAIL_TOL, 1e-13),
            )?;
            let cos_part = oscillatory_tail(
                |w| c(-j(w) * thermal_factor(beta, w) / (w * w), 0.0),
                Trig::Cos,
                t,
                g.cutoff,
                TAIL_TOL,
            )?;
            let sin_part = oscillatory_tail(|w| c(0.0, j(w) / (w * w)), Trig::Sin, t, g.cutoff, TAIL_TOL)?;
            Ok((head.value + smooth.value + cos_part.value + sin_part.value) / PI)
        }
    }
}

pub(crate) fn dephasing_rate(sd: &SpectralDensity, beta: f64, t: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    let integrand = |j: f64, w: f64| {
        let x = w * t;
        let a = j / w;
        c(a * thermal_factor(beta, w) * x.sin(), -a * one_minus_cos(x))
    };
    match sd {
        SpectralDensity::Tabulated(tab) => tabulated(tab, t, integrand),
        SpectralDensity::OverdampedBrownian { eta, gamma } => {
            let j = |w: f64| brownian_density(*eta, *gamma, w);
            let g = grid(*gamma, beta, t);
            let head = integrate_panels(|w: f64| integrand(j(w), w), 0.0, g.cutoff, g.width, FINITE_TOL)?;
            let smooth = semi_infinite(|w| c(0.0, -j(w) / w), g.cutoff, Tolerance::new(TAIL_TOL, 1e-13))?;
            let sin_part = oscillatory_tail(
                |w| c(j(w) * thermal_factor(beta, w) / w, 0.0),
                Trig::Sin,
                t,
                g.cutoff,
                TAIL_TOL,
            )?;
            let cos_part = oscillatory_tail(|w| c(0.0, j(w) / w), Trig::Cos, t, g.cutoff, TAIL_TOL)?;
            Ok((head.value + smooth.value + sin_part.value + cos_part.value) / PI)
        }
    }
}

/// Trapezoidal rule over the tabulated support, refining each cell so the
/// oscillating factor is resolved.
fn tabulated<F>(tab: &TabulatedDensity, t: f64, integrand: F) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64,
{
    let omega = tab.omega();
    let values = tab.values();
    let step = if t > 0.0 { PI / (TRAPEZOID_DENSITY * t) } else { f64::INFINITY };
    let mut xs = vec![omega[0]];
    let mut ys = vec![integrand(values[0], omega[0])];
    for i in 1..omega.len() {
        let (w0, w1) = (omega[i - 1], omega[i]);
        let (j0, j1) = (values[i - 1], values[i]);
        let sub = ((w1 - w0) / step).ceil().max(1.0) as usize;
        for k in 1..=sub {
            let frac = k as f64 / sub as f64;
            let w = w0 + (w1 - w0) * frac;
            xs.push(w);
            ys.push(integrand(j0 + (j1 - j0) * frac, w));
        }
        if xs.len() > MAX_TRAPEZOID_POINTS {
            return domain(format!(
                "tabulated quadrature at t = {t} would need more than {MAX_TRAPEZOID_POINTS} points"
            ));
        }
    }
    Ok(trapezoid(&xs, &ys) / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_helpers() {
        for &x in &[1e-8f64, 1e-3, 0.3, 0.49, 0.51, 2.0] {
            let exact = x - x.sin();
            let approx = x_minus_sin(x);
            if x > 0.1 {
                assert!((approx - exact).abs() < 1e-15);
            } else {
                assert!((approx - x * x * x / 6.0).abs() < 1e-2 * approx);
            }
            assert!((one_minus_cos(x) - (1.0 - x.cos())).abs() < 1e-15);
        }
    }

    #[test]
    fn brownian_dissipation_is_exponential() {
        // Im L(t) = −ηγ e^{−γt} exactly, independent of temperature
        let sd = SpectralDensity::OverdampedBrownian { eta: 1.0, gamma: 0.5 };
        for &t in &[0.2, 1.0, 6.0] {
            let l = correlation(&sd, 1.0, t).unwrap();
            assert!((l.im + 0.5 * (-0.5 * t).exp()).abs() < 1e-9, "t = {t}: {l}");
        }
    }

    #[test]
    fn brownian_rate_imaginary_part() {
        // Im ġ(t) = −η(1 − e^{−γt})
        let sd = SpectralDensity::OverdampedBrownian { eta: 1.0, gamma: 0.5 };
        for &t in &[0.3, 2.0, 15.0] {
            let gd = dephasing_rate(&sd, 1.0, t).unwrap();
            assert!((gd.im + 1.0 - (-0.5 * t).exp()).abs() < 1e-9, "t = {t}: {gd}");
        }
    }
}
