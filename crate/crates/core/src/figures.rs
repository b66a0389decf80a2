//! Data behind the two trace-distance figures: `D(t2)` curves for
//! preparation times 0 and 1, and the surface `D(t1, t2)`, at `β = 1`,
//! `γ = 0.5`, `η = 1`.
//!
//! Curves are normalised so that the analytic pair starts at `D = 1` when
//! it is prepared, i.e. `D = e^{−E}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dephasing::DephasingEvaluator;
use crate::error::{domain, Result};
use crate::measures::{exponent_profile, Scenario};
use crate::spectral::BathParams;

pub const FIGURE_T_MAX: f64 = 10.0;
pub const CURVE_POINTS: usize = 1000;
pub const SURFACE_POINTS: usize = 200;
pub const PREPARATION_TIMES: [f64; 2] = [0.0, 1.0];
/// Matsubara terms of the low-temperature curves; the others use the
/// high-temperature kernel.
pub const LOW_TEMPERATURE_TERMS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDistanceCurve {
    pub t1: f64,
    /// 0 for the high-temperature kernel.
    pub terms: usize,
    pub t2: Vec<f64>,
    pub d: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDistanceSurface {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// `d[i][j] = D(t1[i], t2[j])`
    pub d: Vec<Vec<f64>>,
}

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| if i + 1 == n { end } else { start + (end - start) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// `D` and `σ` of the analytic pair over `t2s`.
pub fn trace_distance_curve(eval: &DephasingEvaluator, t1: f64, t2s: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let profile = exponent_profile(eval, Scenario::Prepared { t1 }, t2s)?;
    let d: Vec<f64> = profile.iter().map(|(e, _)| (-e).exp()).collect();
    let sigma = profile.iter().zip(&d).map(|((_, rate), d)| -rate * d).collect();
    Ok((d, sigma))
}

/// Evaluator behind a curve: high-temperature for `terms = 0`, otherwise
/// the truncated Matsubara series.
pub fn figure_evaluator(terms: usize) -> Result<DephasingEvaluator> {
    let params = BathParams::figure().with_terms(terms);
    if terms == 0 {
        DephasingEvaluator::high_temperature(params)
    } else {
        DephasingEvaluator::analytic(params)
    }
}

/// The four curves, ordered `(t1, terms)` = (0, 0), (0, 100), (1, 0), (1, 100).
pub fn trace_distance_curves() -> Result<Vec<TraceDistanceCurve>> {
    let t2 = linspace(0.0, FIGURE_T_MAX, CURVE_POINTS);
    let mut curves = Vec::new();
    for t1 in PREPARATION_TIMES {
        for terms in [0, LOW_TEMPERATURE_TERMS] {
            let (d, sigma) = trace_distance_curve(&figure_evaluator(terms)?, t1, &t2)?;
            curves.push(TraceDistanceCurve {
                t1,
                terms,
                t2: t2.clone(),
                d,
                sigma,
            });
        }
    }
    Ok(curves)
}

pub fn trace_distance_surface(eval: &DephasingEvaluator, t1s: &[f64], t2s: &[f64]) -> Result<TraceDistanceSurface> {
    let d = t1s
        .iter()
        .map(|&t1| Ok(trace_distance_curve(eval, t1, t2s)?.0))
        .collect::<Result<_>>()?;
    Ok(TraceDistanceSurface {
        t1: t1s.to_vec(),
        t2: t2s.to_vec(),
        d,
    })
}

/// High-temperature surface on a `200 × 200` grid over `[0, 10]²`.
pub fn figure_surface() -> Result<TraceDistanceSurface> {
    let ts = linspace(0.0, FIGURE_T_MAX, SURFACE_POINTS);
    trace_distance_surface(&figure_evaluator(0)?, &ts, &ts)
}

/// Relative Frobenius residual of the best fit `D(t1, t2) ≈ f(t1) h(t2)`.
pub fn rank_one_residual(surface: &TraceDistanceSurface) -> Result<f64> {
    let rows = surface.d.len();
    let cols = surface.d.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || surface.d.iter().any(|r| r.len() != cols) {
        return domain("surface must be a non-empty rectangular grid");
    }
    let m = DMatrix::from_fn(rows, cols, |i, j| surface.d[i][j]);
    let singular = m.singular_values();
    let total: f64 = singular.iter().map(|s| s * s).sum();
    let rest: f64 = singular.iter().skip(1).map(|s| s * s).sum();
    Ok((rest / total).sqrt())
}
