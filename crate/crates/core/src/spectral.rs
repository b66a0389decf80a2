//! Spectral densities and the bath correlation function
//!
//! `L(t) = (1/π) ∫_0^∞ dω J(ω) [coth(βω/2) cos ωt − i sin ωt]`, with
//! `ħ = k_B = 1` throughout. The real part carries the fluctuations, the
//! imaginary part the dissipation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::matsubara::{BrownianSeries, Order, SeriesTail};
use crate::transforms;

/// Number of explicit Matsubara terms used when none is given.
pub const DEFAULT_MATSUBARA_TERMS: usize = 100;

/// Overdamped Brownian oscillator bath at inverse temperature `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BathParams {
    /// coupling strength
    pub eta: f64,
    /// bath relaxation rate
    pub gamma: f64,
    /// inverse temperature
    pub beta: f64,
    /// number of explicit Matsubara correction terms
    pub matsubara_terms: usize,
}

impl Default for BathParams {
    fn default() -> Self {
        BathParams::figure()
    }
}

impl BathParams {
    pub fn new(eta: f64, gamma: f64, beta: f64, matsubara_terms: usize) -> Result<Self> {
        let params = BathParams {
            eta,
            gamma,
            beta,
            matsubara_terms,
        };
        params.validate()?;
        Ok(params)
    }

    /// `β = 1, γ = 0.5, η = 1`, i.e. `βγ = 0.5` and `βη = 1`, with 100 terms.
    pub fn figure() -> Self {
        BathParams {
            eta: 1.0,
            gamma: 0.5,
            beta: 1.0,
            matsubara_terms: DEFAULT_MATSUBARA_TERMS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("gamma", self.gamma), ("beta", self.beta)] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }

    pub fn with_terms(mut self, k: usize) -> Self {
        self.matsubara_terms = k;
        self
    }

    /// `ν_n = 2πn/β`
    pub fn matsubara_frequency(&self, n: usize) -> f64 {
        2.0 * std::f64::consts::PI * n as f64 / self.beta
    }

    pub fn spectral_density(&self) -> SpectralDensity {
        SpectralDensity::OverdampedBrownian {
            eta: self.eta,
            gamma: self.gamma,
        }
    }
}

/// Piecewise-linear spectral density sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    omega: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() {
            return domain("tabulated spectral density needs as many values as frequencies");
        }
        if omega.len() < 2 {
            return domain("tabulated spectral density needs at least two samples");
        }
        if omega[0] <= 0.0 || !omega.iter().all(|w| w.is_finite()) {
            return domain("tabulated frequencies must be positive and finite");
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return domain("tabulated frequencies must be strictly increasing");
        }
        if values.iter().any(|j| !(j.is_finite() && *j >= 0.0)) {
            return domain("tabulated J(omega) must be finite and non-negative");
        }
        Ok(TabulatedDensity { omega, values })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn eval(&self, omega: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&omega) {
            return Err(Error::Extrapolation {
                omega,
                min: lo,
                max: hi,
            });
        }
        let i = self.omega.partition_point(|&w| w <= omega).clamp(1, self.omega.len() - 1);
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let (j0, j1) = (self.values[i - 1], self.values[i]);
        Ok(j0 + (j1 - j0) * (omega - w0) / (w1 - w0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralDensity {
    /// `J(ω) = 2ηωγ / (ω² + γ²)`
    OverdampedBrownian { eta: f64, gamma: f64 },
    Tabulated(TabulatedDensity),
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralDensity::OverdampedBrownian { eta, gamma } => {
                BathParams::new(*eta, *gamma, 1.0, 0).map(|_| ())
            }
            SpectralDensity::Tabulated(tab) => {
                TabulatedDensity::new(tab.omega.clone(), tab.values.clone()).map(|_| ())
            }
        }
    }

    /// Characteristic frequency: `γ` for the Brownian model, the mean grid
    /// spacing for tabulated data.
    pub fn scale(&self) -> f64 {
        match self {
            SpectralDensity::OverdampedBrownian { gamma, .. } => *gamma,
            SpectralDensity::Tabulated(tab) => {
                let (lo, hi) = tab.range();
                (hi - lo) / (tab.omega.len() - 1) as f64
            }
        }
    }

    /// Evaluates `J(ω)` for `ω > 0`.
    pub fn eval(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return domain(format!("spectral density needs omega > 0, got {omega}"));
        }
        match self {
            SpectralDensity::OverdampedBrownian { eta, gamma } => Ok(brownian_density(*eta, *gamma, omega)),
            SpectralDensity::Tabulated(tab) => tab.eval(omega),
        }
    }
}

#[inline]
pub(crate) fn brownian_density(eta: f64, gamma: f64, omega: f64) -> f64 {
    2.0 * eta * omega * gamma / (omega * omega + gamma * gamma)
}

/// `J(ω)` for `ω > 0`.
pub fn spectral_density(sd: &SpectralDensity, omega: f64) -> Result<f64> {
    sd.eval(omega)
}

/// `coth(βω/2)`, switching to `2/(βω) + βω/6` when `βω < 1e-4`.
pub fn thermal_factor(beta: f64, omega: f64) -> f64 {
    let x = beta * omega;
    if x.abs() < 1e-4 {
        2.0 / x + x / 6.0
    } else {
        1.0 / (0.5 * x).tanh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSample {
    pub t: f64,
    pub value: Complex64,
}

/// How [`correlation_function_with`] evaluates `L(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationRoute {
    /// Brownian closed form: `γ`-pole residue plus the Matsubara sum, with
    /// `terms` explicit terms and the remainder resummed.
    Analytic { terms: usize },
    /// Frequency-domain quadrature of the defining integral.
    Quadrature,
}

/// `L(t)`: the analytic route for the Brownian model, quadrature otherwise.
pub fn correlation_function(sd: &SpectralDensity, beta: f64, t: f64) -> Result<CorrelationSample> {
    let route = match sd {
        SpectralDensity::OverdampedBrownian { .. } => CorrelationRoute::Analytic {
            terms: DEFAULT_MATSUBARA_TERMS,
        },
        SpectralDensity::Tabulated(_) => CorrelationRoute::Quadrature,
    };
    correlation_function_with(sd, beta, t, route)
}

pub fn correlation_function_with(
    sd: &SpectralDensity,
    beta: f64,
    t: f64,
    route: CorrelationRoute,
) -> Result<CorrelationSample> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("correlation function needs t >= 0, got {t}"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return domain(format!("beta must be positive and finite, got {beta}"));
    }
    let value = match (route, sd) {
        (CorrelationRoute::Analytic { terms }, SpectralDensity::OverdampedBrownian { eta, gamma }) => {
            let params = BathParams::new(*eta, *gamma, beta, terms)?;
            let value = BrownianSeries::new(&params, SeriesTail::Resummed)?.eval(Order::Curvature, t);
            if t == 0.0 {
                // sin ωt vanishes identically; Im L jumps to −ηγ only for t > 0
                Complex64::new(value.re, 0.0)
            } else {
                value
            }
        }
        (CorrelationRoute::Analytic { .. }, SpectralDensity::Tabulated(_)) => {
            return domain("the analytic correlation route exists only for the Brownian spectral density");
        }
        (CorrelationRoute::Quadrature, sd) => transforms::correlation(sd, beta, t)?,
    };
    Ok(CorrelationSample { t, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brownian() -> SpectralDensity {
        SpectralDensity::OverdampedBrownian { eta: 1.0, gamma: 0.5 }
    }

    #[test]
    fn density_at_gamma_equals_eta() {
        assert!((spectral_density(&brownian(), 0.5).unwrap() - 1.0).abs() < 1e-15);
        let sd = SpectralDensity::OverdampedBrownian { eta: 2.7, gamma: 3.1 };
        assert!((sd.eval(3.1).unwrap() - 2.7).abs() < 1e-14);
    }

    #[test]
    fn density_small_omega_slope() {
        let w = 1e-7;
        let slope = brownian().eval(w).unwrap() / w;
        assert!((slope - 4.0).abs() < 1e-6);
    }

    #[test]
    fn density_at_five() {
        let j = brownian().eval(5.0).unwrap();
        assert!((j - 5.0 / 25.25).abs() < 1e-15);
        assert!((j - 0.19802).abs() < 1e-5);
    }

    #[test]
    fn density_rejects_nonpositive_omega() {
        assert!(matches!(brownian().eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(brownian().eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn tabulated_interpolates_and_refuses_extrapolation() {
        let tab = TabulatedDensity::new(vec![0.5, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        let sd = SpectralDensity::Tabulated(tab);
        assert!((sd.eval(1.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((sd.eval(2.0).unwrap() - 3.0).abs() < 1e-15);
        assert!(matches!(sd.eval(2.5), Err(Error::Extrapolation { .. })));
        assert!(matches!(sd.eval(0.25), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn tabulated_validation() {
        assert!(TabulatedDensity::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(TabulatedDensity::new(vec![1.0, 2.0], vec![0.0, -1.0]).is_err());
        assert!(TabulatedDensity::new(vec![0.0, 2.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn thermal_factor_branches_agree() {
        let beta = 1.0;
        let w = 1.0001e-4;
        let laurent = 2.0 / (beta * w) + beta * w / 6.0;
        assert!((thermal_factor(beta, w) - laurent).abs() / laurent < 1e-12);
    }

    #[test]
    fn bath_params_validation() {
        assert!(BathParams::new(1.0, 0.5, 1.0, 0).is_ok());
        assert!(BathParams::new(0.0, 0.5, 1.0, 0).is_err());
        assert!(BathParams::new(1.0, -0.5, 1.0, 0).is_err());
        assert!(BathParams::new(1.0, 0.5, f64::INFINITY, 0).is_err());
    }

    #[test]
    fn imaginary_part_vanishes_at_zero() {
        let l = correlation_function(&brownian(), 1.0, 0.0).unwrap();
        assert_eq!(l.value.im, 0.0);
        let tab = TabulatedDensity::new(vec![0.1, 1.0, 4.0], vec![0.2, 1.0, 0.3]).unwrap();
        let l = correlation_function(&SpectralDensity::Tabulated(tab), 1.0, 0.0).unwrap();
        assert_eq!(l.value.im, 0.0);
    }

    #[test]
    fn analytic_and_quadrature_routes_agree() {
        let sd = brownian();
        for &t in &[0.1, 1.0, 5.0] {
            let a = correlation_function_with(&sd, 1.0, t, CorrelationRoute::Analytic { terms: 100 })
                .unwrap()
                .value;
            let q = correlation_function_with(&sd, 1.0, t, CorrelationRoute::Quadrature)
                .unwrap()
                .value;
            let rel = (a - q).norm() / a.norm();
            assert!(rel < 1e-6, "t = {t}: analytic {a} vs quadrature {q}, rel {rel:e}");
        }
    }

    #[test]
    fn high_temperature_limit_of_real_part() {
        // βγ = 0.01
        let sd = SpectralDensity::OverdampedBrownian { eta: 1.0, gamma: 0.01 };
        for &t in &[1.0, 10.0, 100.0] {
            let l = correlation_function(&sd, 1.0, t).unwrap().value;
            let classical = 2.0 * (-0.01 * t).exp();
            assert!((l.re - classical).abs() / classical < 0.01, "t = {t}");
        }
    }

    #[test]
    fn heating_increases_fluctuations() {
        // Re L diverges at t = 0 for a quantum bath, so probe just after it
        let sd = brownian();
        let route = CorrelationRoute::Quadrature;
        let t = 0.05;
        let cold = correlation_function_with(&sd, 1.0, t, route).unwrap().value.re;
        let hot = correlation_function_with(&sd, 0.5, t, route).unwrap().value.re;
        assert!(hot > cold);
    }

    #[test]
    fn quadrature_at_zero_diverges_for_brownian() {
        let res = correlation_function_with(&brownian(), 1.0, 0.0, CorrelationRoute::Quadrature);
        assert!(res.is_err());
    }

    #[test]
    fn tabulated_route_tracks_brownian() {
        // dense tabulation of the Brownian J on [1e-4, 400] against the
        // analytic route; the missing high-frequency tail only shifts Re L
        // by about (2ηγ/π)/400
        let sd = brownian();
        let omega: Vec<f64> = (0..40_000).map(|i| 1e-4 + i as f64 * 0.01).collect();
        let values: Vec<f64> = omega.iter().map(|&w| sd.eval(w).unwrap()).collect();
        let tab = SpectralDensity::Tabulated(TabulatedDensity::new(omega, values).unwrap());
        let t = 1.0;
        let exact = correlation_function(&sd, 1.0, t).unwrap().value;
        let approx = correlation_function(&tab, 1.0, t).unwrap().value;
        assert!((exact - approx).norm() < 5e-3, "{exact} vs {approx}");
    }
}
