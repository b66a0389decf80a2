//! The dephasing (lineshape) function `g(t) = ∫_0^t dt' ∫_0^{t'} dt'' L(t'')`
//! and its rate `ġ(t) = ∫_0^t L`, from four interchangeable engines.
//!
//! | engine | route |
//! |---|---|
//! | [`Engine::AnalyticBrownian`] | Matsubara series of the Brownian bath |
//! | [`Engine::HighTemperature`] | Brownian series with `cot(βγ/2) → 2/(βγ)` and no Matsubara terms |
//! | [`Engine::FrequencyQuadrature`] | single frequency integral of `J(ω)/ω²` |
//! | [`Engine::TimeDoubleQuadrature`] | `∫_0^t (t − τ) L(τ) dτ` with `L` itself from frequency quadrature |
//!
//! The last two work for any [`SpectralDensity`] and share no code path with
//! the series, which is what makes them useful as cross-checks.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::matsubara::{self, BrownianSeries, Order};
use crate::quad::{integrate, QuadValue, Tolerance};
use crate::spectral::{BathParams, SpectralDensity};
use crate::transforms;

pub use crate::matsubara::SeriesTail;

/// Selects how `g` is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    AnalyticBrownian { params: BathParams, tail: SeriesTail },
    HighTemperature(BathParams),
    FrequencyQuadrature { sd: SpectralDensity, beta: f64 },
    TimeDoubleQuadrature { sd: SpectralDensity, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Analytic,
    Hight,
    FreqQuad,
    TimeQuad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingSample {
    pub t: f64,
    pub g: Complex64,
    pub gdot: Complex64,
}

#[derive(Debug, Clone)]
enum Backend {
    Series(BrownianSeries),
    HighTemperature(BathParams),
    Frequency { sd: SpectralDensity, beta: f64 },
    Time { sd: SpectralDensity, beta: f64 },
}

/// Evaluates `g` and `ġ` for one bath. Immutable once built; share freely
/// across threads.
#[derive(Debug, Clone)]
pub struct DephasingEvaluator {
    engine: Engine,
    backend: Backend,
}

const TIME_TOL: Tolerance = Tolerance::new(1e-9, 1e-11);

impl DephasingEvaluator {
    pub fn new(engine: Engine) -> Result<Self> {
        let backend = match &engine {
            Engine::AnalyticBrownian { params, tail } => Backend::Series(BrownianSeries::new(params, *tail)?),
            Engine::HighTemperature(params) => {
                params.validate()?;
                Backend::HighTemperature(*params)
            }
            Engine::FrequencyQuadrature { sd, beta } => {
                check_quadrature_inputs(sd, *beta)?;
                Backend::Frequency { sd: sd.clone(), beta: *beta }
            }
            Engine::TimeDoubleQuadrature { sd, beta } => {
                check_quadrature_inputs(sd, *beta)?;
                Backend::Time { sd: sd.clone(), beta: *beta }
            }
        };
        Ok(DephasingEvaluator { engine, backend })
    }

    /// Matsubara series with exactly `params.matsubara_terms` terms.
    pub fn analytic(params: BathParams) -> Result<Self> {
        Self::new(Engine::AnalyticBrownian {
            params,
            tail: SeriesTail::Truncated,
        })
    }

    /// Matsubara series with the remainder beyond the explicit terms resummed.
    pub fn analytic_resummed(params: BathParams) -> Result<Self> {
        Self::new(Engine::AnalyticBrownian {
            params,
            tail: SeriesTail::Resummed,
        })
    }

    pub fn high_temperature(params: BathParams) -> Result<Self> {
        Self::new(Engine::HighTemperature(params))
    }

    pub fn frequency_quadrature(sd: SpectralDensity, beta: f64) -> Result<Self> {
        Self::new(Engine::FrequencyQuadrature { sd, beta })
    }

    pub fn time_quadrature(sd: SpectralDensity, beta: f64) -> Result<Self> {
        Self::new(Engine::TimeDoubleQuadrature { sd, beta })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn kind(&self) -> EngineKind {
        match self.engine {
            Engine::AnalyticBrownian { .. } => EngineKind::Analytic,
            Engine::HighTemperature(_) => EngineKind::Hight,
            Engine::FrequencyQuadrature { .. } => EngineKind::FreqQuad,
            Engine::TimeDoubleQuadrature { .. } => EngineKind::TimeQuad,
        }
    }

    pub fn g(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        match &self.backend {
            Backend::Series(s) => Ok(s.eval(Order::Value, t)),
            Backend::HighTemperature(p) => Ok(matsubara::high_temperature(p, Order::Value, t)),
            Backend::Frequency { sd, beta } => transforms::dephasing(sd, *beta, t),
            Backend::Time { sd, beta } => {
                let m = time_moments(sd, *beta, 0.0, t)?;
                Ok(m.zeroth * t - m.first)
            }
        }
    }

    pub fn gdot(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        match &self.backend {
            Backend::Series(s) => Ok(s.eval(Order::Rate, t)),
            Backend::HighTemperature(p) => Ok(matsubara::high_temperature(p, Order::Rate, t)),
            Backend::Frequency { sd, beta } => transforms::dephasing_rate(sd, *beta, t),
            Backend::Time { sd, beta } => Ok(time_moments(sd, *beta, 0.0, t)?.zeroth),
        }
    }

    pub fn sample(&self, t: f64) -> Result<DephasingSample> {
        check_time(t)?;
        match &self.backend {
            Backend::Time { sd, beta } => {
                let m = time_moments(sd, *beta, 0.0, t)?;
                Ok(DephasingSample {
                    t,
                    g: m.zeroth * t - m.first,
                    gdot: m.zeroth,
                })
            }
            _ => Ok(DephasingSample {
                t,
                g: self.g(t)?,
                gdot: self.gdot(t)?,
            }),
        }
    }

    /// Samples at many times. The time-domain engine accumulates its moments
    /// over the sorted times instead of restarting from zero for each one.
    pub fn sample_many(&self, ts: &[f64]) -> Result<Vec<DephasingSample>> {
        for &t in ts {
            check_time(t)?;
        }
        match &self.backend {
            Backend::Time { sd, beta } => {
                let mut order: Vec<usize> = (0..ts.len()).collect();
                order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
                let mut out = vec![
                    DephasingSample {
                        t: 0.0,
                        g: Complex64::default(),
                        gdot: Complex64::default(),
                    };
                    ts.len()
                ];
                let mut acc = Moments::default();
                let mut prev = 0.0;
                for idx in order {
                    let t = ts[idx];
                    acc = acc + time_moments(sd, *beta, prev, t)?;
                    prev = t;
                    out[idx] = DephasingSample {
                        t,
                        g: acc.zeroth * t - acc.first,
                        gdot: acc.zeroth,
                    };
                }
                Ok(out)
            }
            _ => ts.par_iter().map(|&t| self.sample(t)).collect(),
        }
    }

    /// Resummed `Σ_{n>K}` of the Matsubara terms of `g(t)`: the truncation
    /// error of the analytic engine. `None` for the other engines.
    pub fn remainder(&self, t: f64) -> Option<f64> {
        match &self.backend {
            Backend::Series(s) => Some(s.remainder(Order::Value, t)),
            _ => None,
        }
    }

    /// `L(t) = g̈(t)` where the engine has it in closed form.
    pub fn correlation(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        match &self.backend {
            Backend::Series(s) => Ok(s.eval(Order::Curvature, t)),
            Backend::HighTemperature(p) => Ok(matsubara::high_temperature(p, Order::Curvature, t)),
            Backend::Frequency { sd, beta } | Backend::Time { sd, beta } => transforms::correlation(sd, *beta, t),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("time must be finite and non-negative, got {t}"))
    }
}

fn check_quadrature_inputs(sd: &SpectralDensity, beta: f64) -> Result<()> {
    sd.validate()?;
    if !(beta > 0.0 && beta.is_finite()) {
        return domain(format!("beta must be positive and finite, got {beta}"));
    }
    Ok(())
}

/// `(∫ L, ∫ τ L)` over an interval.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    zeroth: Complex64,
    first: Complex64,
}

impl Add for Moments {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Moments {
            zeroth: self.zeroth + o.zeroth,
            first: self.first + o.first,
        }
    }
}

impl Sub for Moments {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Moments {
            zeroth: self.zeroth - o.zeroth,
            first: self.first - o.first,
        }
    }
}

impl Mul<f64> for Moments {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Moments {
            zeroth: self.zeroth * k,
            first: self.first * k,
        }
    }
}

impl QuadValue for Moments {
    fn norm(&self) -> f64 {
        self.zeroth.norm().max(self.first.norm())
    }
}

/// Moments of the quadrature `L` over `[a, b]`; `L` is only sampled at
/// interior Gauss–Kronrod nodes, so its logarithmic singularity at `τ = 0`
/// is never evaluated.
fn time_moments(sd: &SpectralDensity, beta: f64, a: f64, b: f64) -> Result<Moments> {
    if a == b {
        return Ok(Moments::default());
    }
    // panels of at most one time unit keep the cumulative sums balanced
    let n = (b - a).ceil().max(1.0) as usize;
    let step = (b - a) / n as f64;
    let mut acc = Moments::default();
    for i in 0..n {
        let lo = a + step * i as f64;
        let hi = if i + 1 == n { b } else { a + step * (i + 1) as f64 };
        let est = integrate(
            |tau: f64| {
                // every failure here is surfaced by the outer tolerance check
                let l = transforms::correlation(sd, beta, tau).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                Moments {
                    zeroth: l,
                    first: l * tau,
                }
            },
            lo,
            hi,
            TIME_TOL,
        )?;
        if !(est.value.zeroth.re.is_finite() && est.value.zeroth.im.is_finite()) {
            return domain("correlation function quadrature failed inside the time-domain engine");
        }
        acc = acc + est.value;
    }
    Ok(acc)
}

/// `g(t)` from the Matsubara series with exactly `params.matsubara_terms` terms.
pub fn g_analytic_brownian(params: &BathParams, t: f64) -> Result<Complex64> {
    DephasingEvaluator::analytic(*params)?.g(t)
}

/// `g(t) = (2η/βγ²)(e^{−γt} + γt − 1) − i(η/γ)(e^{−γt} + γt − 1)`
pub fn g_high_temperature(params: &BathParams, t: f64) -> Result<Complex64> {
    params.validate()?;
    check_time(t)?;
    Ok(matsubara::high_temperature(params, Order::Value, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRoute {
    Frequency,
    TimeDouble,
}

pub fn g_quadrature(sd: &SpectralDensity, beta: f64, t: f64, route: QuadratureRoute) -> Result<Complex64> {
    let eval = match route {
        QuadratureRoute::Frequency => DephasingEvaluator::frequency_quadrature(sd.clone(), beta)?,
        QuadratureRoute::TimeDouble => DephasingEvaluator::time_quadrature(sd.clone(), beta)?,
    };
    eval.g(t)
}

pub fn gdot(evaluator: &DephasingEvaluator, t: f64) -> Result<Complex64> {
    evaluator.gdot(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure() -> BathParams {
        BathParams::figure()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn every_engine_starts_at_zero() {
        let p = figure();
        let sd = p.spectral_density();
        let engines = [
            DephasingEvaluator::analytic(p).unwrap(),
            DephasingEvaluator::analytic_resummed(p).unwrap(),
            DephasingEvaluator::high_temperature(p).unwrap(),
            DephasingEvaluator::frequency_quadrature(sd.clone(), 1.0).unwrap(),
            DephasingEvaluator::time_quadrature(sd, 1.0).unwrap(),
        ];
        for e in &engines {
            assert_eq!(e.g(0.0).unwrap(), Complex64::default(), "{:?}", e.kind());
            assert_eq!(e.gdot(0.0).unwrap(), Complex64::default(), "{:?}", e.kind());
        }
    }

    #[test]
    fn negative_time_rejected() {
        let e = DephasingEvaluator::analytic(figure()).unwrap();
        assert!(e.g(-1.0).is_err());
        assert!(e.gdot(f64::NAN).is_err());
    }

    #[test]
    fn high_temperature_asymptote() {
        let p = figure().with_terms(0);
        let t = 60.0;
        let g = g_high_temperature(&p, t).unwrap();
        let asym_re = 2.0 / (0.25) * (0.5 * t - 1.0);
        let asym_im = -2.0 * (0.5 * t - 1.0);
        assert!((g.re - asym_re).abs() < 1e-10);
        assert!((g.im - asym_im).abs() < 1e-10);
        let slope = g_high_temperature(&p, t + 1.0).unwrap().re - g.re;
        assert!((slope - 4.0).abs() < 1e-10);
    }

    #[test]
    fn high_temperature_close_to_series_at_small_beta_gamma() {
        // βγ = 0.01
        let p = BathParams::new(1.0, 0.01, 1.0, 0).unwrap();
        let series = DephasingEvaluator::analytic(p).unwrap();
        for i in 1..=40 {
            let t = 0.5 * i as f64;
            let a = series.g(t).unwrap();
            let h = g_high_temperature(&p, t).unwrap();
            assert!(rel(h, a) < 0.01, "t = {t}");
        }
    }

    #[test]
    fn high_temperature_rate_is_positive() {
        let e = DephasingEvaluator::high_temperature(figure()).unwrap();
        for i in 1..200 {
            let t = 0.05 * i as f64;
            let gd = e.gdot(t).unwrap();
            assert!(gd.re > 0.0);
            assert!((gd.re - 4.0 * (1.0 - (-0.5 * t).exp())).abs() < 1e-13);
        }
    }

    #[test]
    fn analytic_rate_matches_finite_difference() {
        let e = DephasingEvaluator::analytic(figure()).unwrap();
        let h = 1e-4;
        for &t in &[0.5, 2.0] {
            let fd = (e.g(t + h).unwrap() - e.g(t - h).unwrap()) / (2.0 * h);
            assert!(rel(fd, e.gdot(t).unwrap()) < 1e-5);
        }
    }

    #[test]
    fn quadrature_engines_match_series() {
        let p = figure();
        let sd = p.spectral_density();
        let series = DephasingEvaluator::analytic_resummed(p).unwrap();
        let freq = DephasingEvaluator::frequency_quadrature(sd.clone(), 1.0).unwrap();
        let time = DephasingEvaluator::time_quadrature(sd, 1.0).unwrap();
        let ts = [0.5, 1.0, 2.0, 5.0];
        let timed = time.sample_many(&ts).unwrap();
        for (i, &t) in ts.iter().enumerate() {
            let a = series.g(t).unwrap();
            assert!(rel(freq.g(t).unwrap(), a) < 1e-6, "freq t = {t}");
            assert!(rel(timed[i].g, a) < 1e-6, "time t = {t}");
            assert!(rel(freq.gdot(t).unwrap(), series.gdot(t).unwrap()) < 1e-6);
            assert!(rel(timed[i].gdot, series.gdot(t).unwrap()) < 1e-6);
        }
    }

    #[test]
    fn single_and_batched_time_engine_agree() {
        let sd = figure().spectral_density();
        let time = DephasingEvaluator::time_quadrature(sd, 1.0).unwrap();
        let batched = time.sample_many(&[2.5, 0.7]).unwrap();
        let single = time.sample(0.7).unwrap();
        assert!(rel(batched[1].g, single.g) < 1e-9);
        assert_eq!(batched[0].t, 2.5);
    }

    #[test]
    fn matsubara_partial_sums_are_cauchy() {
        let g = |k| g_analytic_brownian(&figure().with_terms(k), 1.0).unwrap();
        let (g50, g100, g200) = (g(50), g(100), g(200));
        assert!((g200 - g100).norm() < (g100 - g50).norm());
    }

    #[test]
    fn dissipation_independent_of_temperature() {
        for &t in &[0.3, 1.0, 8.0] {
            let a = g_analytic_brownian(&figure(), t).unwrap();
            let mut hot = figure();
            hot.beta = 2.0;
            let b = g_analytic_brownian(&hot, t).unwrap();
            assert_eq!(a.im, b.im);
        }
    }

    #[test]
    fn truncation_remainder_is_reported() {
        let e = DephasingEvaluator::analytic(figure()).unwrap();
        let r = e.remainder(1.0).unwrap();
        // ≈ Σ_{n>100} ηγtβ/(π² n²) ≈ 5e-4 t
        assert!(r > 4e-4 && r < 6e-4, "{r}");
        assert!(DephasingEvaluator::high_temperature(figure()).unwrap().remainder(1.0).is_none());
    }
}
