//! Closed forms of the overdamped Brownian oscillator bath.
//!
//! With `φ(x, t) = e^{−xt} + xt − 1` the dephasing function reads
//!
//! ```text
//! g(t) = (η/γ) cot(βγ/2) φ(γ, t) + Σ_n c_n φ(ν_n, t) − i (η/γ) φ(γ, t)
//! c_n  = 4ηγ / (β ν_n (ν_n² − γ²)),   ν_n = 2πn/β
//! ```
//!
//! and `ġ`, `L = g̈` follow term by term from `∂_t φ` and `∂_t² φ`.
//!
//! When `ν_m` coincides with `γ` both the `cot` term and the `m`-th Matsubara
//! term have a pole; their sum is analytic and is replaced by its limit plus
//! a first-order correction in `γ − ν_m`.
//!
//! The remainder `Σ_{n>K}` can be resummed: terms up to the point where
//! `e^{−ν_n t}` is negligible are summed directly, the polynomial part
//! beyond it through Euler–Maclaurin applied to `1/(n² − a²)` and
//! `1/(n(n² − a²))`, `a = βγ/2π`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::BathParams;

/// Derivative order with respect to time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Order {
    /// `g`
    Value,
    /// `ġ`
    Rate,
    /// `g̈ = L`
    Curvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesTail {
    /// exactly the explicit terms
    #[default]
    Truncated,
    /// explicit terms plus the resummed remainder
    Resummed,
}

/// Relative distance below which `ν_m` and `γ` are treated as coincident.
const DEGENERACY: f64 = 1e-6;
/// Upper bound on directly summed remainder terms (only reached for t ≲ 1e-5 β).
const MAX_DIRECT_TERMS: usize = 4_000_000;

/// `φ`, `∂_t φ` or `∂_t² φ` at rate `x`.
fn phi(order: Order, x: f64, t: f64) -> f64 {
    let xt = x * t;
    match order {
        Order::Value => {
            if xt < 0.1 {
                // e^{-y} + y - 1 = y²/2 - y³/6 + ...
                let mut term = 0.5 * xt * xt;
                let mut sum = term;
                for k in 3..=12 {
                    term *= -xt / k as f64;
                    sum += term;
                }
                sum
            } else {
                (-xt).exp() + xt - 1.0
            }
        }
        Order::Rate => -x * (-xt).exp_m1(),
        Order::Curvature => x * x * (-xt).exp(),
    }
}

/// `∂_x` of [`phi`].
fn phi_dx(order: Order, x: f64, t: f64) -> f64 {
    let e = (-x * t).exp();
    match order {
        Order::Value => -t * (-x * t).exp_m1(),
        Order::Rate => -(-x * t).exp_m1() + x * t * e,
        Order::Curvature => (2.0 * x - x * x * t) * e,
    }
}

/// `Σ_{n>N} n^{-p}` by Euler–Maclaurin (accurate for N ≳ 50).
fn zeta_tail(p: f64, n: f64) -> f64 {
    let np = n.powf(-p);
    np * n / (p - 1.0) - 0.5 * np + p * np / (12.0 * n)
        - p * (p + 1.0) * (p + 2.0) * np / (720.0 * n.powi(3))
        + p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) * np / (30240.0 * n.powi(5))
}

/// `Σ_{n>N} 1/(n^q (n² − a²))` for `N ≥ 8a`, from the geometric expansion in `(a/n)²`.
fn shifted_tail(q: f64, a: f64, n: f64) -> f64 {
    let r = (a / n) * (a / n);
    let mut sum = 0.0;
    let mut weight = 1.0;
    for j in 0..64 {
        sum += weight * zeta_tail(q + 2.0 + 2.0 * j as f64, n);
        if r == 0.0 || r.powi(j + 1) < 1e-18 {
            break;
        }
        weight *= a * a;
    }
    sum
}

/// Matsubara series of one Brownian bath, with coefficients fixed at
/// construction.
#[derive(Debug, Clone)]
pub(crate) struct BrownianSeries {
    eta: f64,
    gamma: f64,
    beta: f64,
    terms: usize,
    tail: SeriesTail,
    /// `(η/γ) cot(βγ/2)`; unused when `resonance` is set
    cot_coeff: f64,
    /// `4ηγ/β`
    prefactor: f64,
    resonance: Option<usize>,
}

impl BrownianSeries {
    pub fn new(params: &BathParams, tail: SeriesTail) -> Result<Self> {
        params.validate()?;
        let BathParams {
            eta,
            gamma,
            beta,
            matsubara_terms,
        } = *params;
        let a = beta * gamma / (2.0 * PI);
        let m = a.round() as usize;
        let resonance = (m >= 1 && (2.0 * PI * m as f64 / beta - gamma).abs() < DEGENERACY * gamma).then_some(m);
        if let (Some(m), SeriesTail::Truncated) = (resonance, tail) {
            if m > matsubara_terms {
                return Err(Error::Resonance { index: m, gamma });
            }
        }
        let half = 0.5 * beta * gamma;
        let cot_coeff = if resonance.is_some() {
            f64::NAN
        } else {
            let s = half.sin();
            if s == 0.0 {
                return Err(Error::Resonance { index: m, gamma });
            }
            eta / gamma * half.cos() / s
        };
        Ok(BrownianSeries {
            eta,
            gamma,
            beta,
            terms: matsubara_terms,
            tail,
            cot_coeff,
            prefactor: 4.0 * eta * gamma / beta,
            resonance,
        })
    }

    fn nu(&self, n: usize) -> f64 {
        2.0 * PI * n as f64 / self.beta
    }

    fn matsubara_term(&self, order: Order, n: usize, t: f64) -> f64 {
        let nu = self.nu(n);
        self.prefactor / (nu * (nu * nu - self.gamma * self.gamma)) * phi(order, nu, t)
    }

    /// `cot` term plus the `m`-th Matsubara term as a function of `γ = x`.
    fn resonant_pair_direct(&self, order: Order, m: usize, x: f64, t: f64) -> f64 {
        let nu = self.nu(m);
        let half = 0.5 * self.beta * x;
        self.eta / x * half.cos() / half.sin() * phi(order, x, t)
            + 4.0 * self.eta * x / self.beta * phi(order, nu, t) / (nu * (nu * nu - x * x))
    }

    fn resonant_pair(&self, order: Order, m: usize, t: f64) -> f64 {
        let nu = self.nu(m);
        let limit =
            2.0 * self.eta / self.beta * (phi_dx(order, nu, t) / nu - 1.5 * phi(order, nu, t) / (nu * nu));
        let h = 1e-3 * nu;
        let slope = (self.resonant_pair_direct(order, m, nu + h, t)
            - self.resonant_pair_direct(order, m, nu - h, t))
            / (2.0 * h);
        limit + slope * (self.gamma - nu)
    }

    /// `Σ_{n>K}` of the Matsubara terms; `+∞` for `L(0)`, which diverges.
    pub fn remainder(&self, order: Order, t: f64) -> f64 {
        if t == 0.0 {
            return if order == Order::Curvature { f64::INFINITY } else { 0.0 };
        }
        let a = self.beta * self.gamma / (2.0 * PI);
        let mut last = self.terms.max((8.0 * a).ceil() as usize + 50);
        if t > 0.0 {
            let needed = (40.0 / (self.nu(1) * t)).ceil();
            if needed > last as f64 {
                last = (needed as usize).min(MAX_DIRECT_TERMS).max(last);
            }
        }
        let mut sum = 0.0;
        for n in self.terms + 1..=last {
            if Some(n) == self.resonance {
                continue;
            }
            sum += self.matsubara_term(order, n, t);
        }
        let scale = self.beta / (2.0 * PI);
        let n = last as f64;
        let t1 = self.prefactor * scale * scale * shifted_tail(0.0, a, n);
        let t0 = self.prefactor * scale * scale * scale * shifted_tail(1.0, a, n);
        sum + match order {
            Order::Value => t * t1 - t0,
            Order::Rate => t1,
            Order::Curvature => 0.0,
        }
    }

    /// Real part of the series (fluctuations).
    fn real_part(&self, order: Order, t: f64) -> f64 {
        let mut re = 0.0;
        let pair_included = match self.resonance {
            Some(m) => m <= self.terms || self.tail == SeriesTail::Resummed,
            None => false,
        };
        match self.resonance {
            Some(m) if pair_included => re += self.resonant_pair(order, m, t),
            _ => re += self.cot_coeff * phi(order, self.gamma, t),
        }
        for n in 1..=self.terms {
            if Some(n) == self.resonance {
                continue;
            }
            re += self.matsubara_term(order, n, t);
        }
        if self.tail == SeriesTail::Resummed {
            re += self.remainder(order, t);
        }
        re
    }

    pub fn eval(&self, order: Order, t: f64) -> Complex64 {
        let im = -self.eta / self.gamma * phi(order, self.gamma, t);
        Complex64::new(self.real_part(order, t), im)
    }
}

/// `K = 0` limit with `cot(βγ/2) → 2/(βγ)`.
pub(crate) fn high_temperature(params: &BathParams, order: Order, t: f64) -> Complex64 {
    let BathParams { eta, gamma, beta, .. } = *params;
    let p = phi(order, gamma, t);
    Complex64::new(2.0 * eta / (beta * gamma * gamma) * p, -eta / gamma * p)
}
