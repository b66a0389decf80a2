//! Trace-distance non-Markovianity.
//!
//! Under pure dephasing populations are frozen and every coherence is
//! multiplied by a kernel of modulus `e^{−E(t)}`, so for any pair of states
//!
//! ```text
//! D(t) = sqrt(Δp² + |Δc|² e^{−2E(t)}),   σ = dD/dt = −Ė |Δc|² e^{−2E} / D
//! ```
//!
//! with `E(t) = Re g(t)` for a single interval and
//! `E(t2) = 2 Re g(t1) + 2 Re g(t2) − Re g(t1 + t2)` after a coherence flip
//! that follows a preparation time `t1`. `D` grows exactly where `Ė < 0`,
//! and the growth is largest for the equatorial antipodal pair, for which
//! `D = e^{−E}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::DephasingEvaluator;
use crate::dynamics::{
    propagate_with_kernels, trace_distance, DensityMatrix2, LiouvilleOp, SystemParams, TwoTimeKernelSet,
};
use crate::error::{domain, Result};

pub const DEFAULT_SCAN_POINTS: usize = 10_000;
pub const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    /// One interval of free evolution from a factorised state.
    SingleTime,
    /// Factorised at `−t1`, coherence flip at `0`, observed at `t2 = t`.
    Prepared { t1: f64 },
}

impl Scenario {
    fn validate(&self) -> Result<()> {
        match *self {
            Scenario::SingleTime => Ok(()),
            Scenario::Prepared { t1 } if t1 >= 0.0 && t1.is_finite() => Ok(()),
            Scenario::Prepared { t1 } => domain(format!("preparation time must be non-negative, got {t1}")),
        }
    }

    fn superoperator(&self) -> LiouvilleOp {
        match self {
            Scenario::SingleTime => LiouvilleOp::identity(),
            Scenario::Prepared { .. } => LiouvilleOp::coherence_flip(),
        }
    }

    fn t1(&self) -> f64 {
        match *self {
            Scenario::SingleTime => 0.0,
            Scenario::Prepared { t1 } => t1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub a: DensityMatrix2,
    pub b: DensityMatrix2,
}

impl StatePair {
    pub fn new(a: DensityMatrix2, b: DensityMatrix2) -> Self {
        StatePair { a, b }
    }

    /// `p11 = 1/2` with `c12 = ±1/2`: the maximiser for pure dephasing.
    pub fn analytic() -> Self {
        let a = DensityMatrix2::new(0.5, Complex64::new(0.5, 0.0)).expect("valid state");
        let b = DensityMatrix2::new(0.5, Complex64::new(-0.5, 0.0)).expect("valid state");
        StatePair { a, b }
    }

    fn population_gap(&self) -> f64 {
        self.a.p11() - self.b.p11()
    }

    fn coherence_gap(&self) -> f64 {
        (self.a.c12() - self.b.c12()).norm()
    }

    /// `D` for a given decay exponent.
    pub fn distance(&self, exponent: f64) -> f64 {
        self.population_gap().hypot(self.coherence_gap() * (-exponent).exp())
    }

    /// `dD/dt` for a given exponent and its rate.
    pub fn distance_rate(&self, exponent: f64, rate: f64) -> f64 {
        let d = self.distance(exponent);
        if d == 0.0 {
            return 0.0;
        }
        let c = self.coherence_gap() * (-exponent).exp();
        -rate * c * c / d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SearchMode {
    AnalyticPair,
    /// Each state is gridded over `p11`, `|c12| / sqrt(p11 p22)` and `arg c12`.
    GridSearch {
        p_steps: usize,
        c_steps: usize,
        phase_steps: usize,
    },
}

impl SearchMode {
    pub fn grid_default() -> Self {
        SearchMode::GridSearch {
            p_steps: 50,
            c_steps: 50,
            phase_steps: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanWindow {
    pub t_max: f64,
    pub points: usize,
}

impl ScanWindow {
    pub fn new(t_max: f64) -> Self {
        ScanWindow {
            t_max,
            points: DEFAULT_SCAN_POINTS,
        }
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return domain(format!("window end must be positive and finite, got {}", self.t_max));
        }
        if self.points < 2 {
            return domain(format!("scan needs at least 2 points, got {}", self.points));
        }
        Ok(())
    }

    fn step(&self) -> f64 {
        self.t_max / (self.points - 1) as f64
    }

    fn grid(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.t_max } else { i as f64 * h })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthInterval {
    pub t_start: f64,
    pub t_end: f64,
    /// Increase of `D` across the interval.
    pub delta_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonMarkovResult {
    pub n_value: f64,
    pub growth_intervals: Vec<GrowthInterval>,
    pub argmax_pair: StatePair,
    pub scenario: Scenario,
    pub search: SearchMode,
    /// `D` was still growing at the end of the window.
    pub truncated: bool,
    pub warnings: Vec<String>,
}

/// Intervals of `D` growth together with scan diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthScan {
    pub intervals: Vec<GrowthInterval>,
    pub truncated: bool,
    pub warnings: Vec<String>,
}

/// `E` and `Ė` at each `t` (interpreted as `t2` for a prepared scenario).
pub fn exponent_profile(eval: &DephasingEvaluator, scenario: Scenario, ts: &[f64]) -> Result<Vec<(f64, f64)>> {
    scenario.validate()?;
    let direct = eval.sample_many(ts)?;
    match scenario {
        Scenario::SingleTime => Ok(direct.iter().map(|s| (s.g.re, s.gdot.re)).collect()),
        Scenario::Prepared { t1 } => {
            let prep = eval.g(t1)?.re;
            let shifted: Vec<f64> = ts.iter().map(|t| t + t1).collect();
            let total = eval.sample_many(&shifted)?;
            Ok(direct
                .iter()
                .zip(&total)
                .map(|(d, s)| (2.0 * prep + 2.0 * d.g.re - s.g.re, 2.0 * d.gdot.re - s.gdot.re))
                .collect())
        }
    }
}

pub fn decay_exponent(eval: &DephasingEvaluator, scenario: Scenario, t: f64) -> Result<f64> {
    scenario.validate()?;
    match scenario {
        Scenario::SingleTime => Ok(eval.g(t)?.re),
        Scenario::Prepared { t1 } => Ok(2.0 * eval.g(t1)?.re + 2.0 * eval.g(t)?.re - eval.g(t1 + t)?.re),
    }
}

pub fn decay_rate(eval: &DephasingEvaluator, scenario: Scenario, t: f64) -> Result<f64> {
    scenario.validate()?;
    match scenario {
        Scenario::SingleTime => Ok(eval.gdot(t)?.re),
        Scenario::Prepared { t1 } => Ok(2.0 * eval.gdot(t)?.re - eval.gdot(t1 + t)?.re),
    }
}

/// `σ(t) = dD/dt` for the pair, in closed form.
pub fn sigma(pair: &StatePair, eval: &DephasingEvaluator, scenario: Scenario, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("time must be non-negative, got {t}"));
    }
    let e = decay_exponent(eval, scenario, t)?;
    let rate = decay_rate(eval, scenario, t)?;
    Ok(pair.distance_rate(e, rate))
}

/// Normalised trace distance `D(t) / D(−t1)` for the analytic pair, i.e. `e^{−E(t)}`.
pub fn normalized_distance(eval: &DephasingEvaluator, scenario: Scenario, t: f64) -> Result<f64> {
    Ok((-decay_exponent(eval, scenario, t)?).exp())
}

/// Root of `Ė` in `[lo, hi]`, given `Ė(lo) < 0 ≤ Ė(hi)` or the reverse.
fn bisect(eval: &DephasingEvaluator, scenario: Scenario, mut lo: f64, mut hi: f64) -> Result<f64> {
    let growing_lo = decay_rate(eval, scenario, lo)? < 0.0;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (decay_rate(eval, scenario, mid)? < 0.0) == growing_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximal sub-intervals of `[0, t_max]` on which `D` increases for `pair`.
///
/// `Ė` is scanned on a uniform grid; each sign change is refined by
/// bisection. Grid points where `Ė` is exactly zero do not start an
/// interval, so tangencies are not counted.
pub fn growth_intervals(
    eval: &DephasingEvaluator,
    scenario: Scenario,
    window: ScanWindow,
    pair: &StatePair,
) -> Result<GrowthScan> {
    window.validate()?;
    let ts = window.grid();
    let profile = exponent_profile(eval, scenario, &ts)?;
    let growing: Vec<bool> = profile.iter().map(|&(_, rate)| rate < 0.0).collect();

    let mut bounds = Vec::new();
    let mut start = growing[0].then_some(0.0);
    for i in 1..ts.len() {
        if growing[i] == growing[i - 1] {
            continue;
        }
        let root = bisect(eval, scenario, ts[i - 1], ts[i])?;
        match start.take() {
            Some(s) => bounds.push((s, root)),
            None => start = Some(root),
        }
    }
    let truncated = start.is_some();
    if let Some(s) = start {
        bounds.push((s, window.t_max));
    }

    // a tangency from below splits a run in two at one root; re-join it
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, e) in bounds {
        match merged.last_mut() {
            Some(last) if s - last.1 <= BISECTION_TOL => last.1 = e,
            _ => merged.push((s, e)),
        }
    }

    let mut warnings = Vec::new();
    let step = window.step();
    let mut intervals = Vec::new();
    for (s, e) in merged {
        if e - s < step {
            warnings.push(format!(
                "growth interval [{s}, {e}] is shorter than the scan step {step}; \
                 roots closer than the step may be missed, increase the number of points"
            ));
        }
        let delta_d = pair.distance(decay_exponent(eval, scenario, e)?) - pair.distance(decay_exponent(eval, scenario, s)?);
        if delta_d > 0.0 {
            intervals.push(GrowthInterval {
                t_start: s,
                t_end: e,
                delta_d,
            });
        }
    }
    if truncated {
        warnings.push(format!(
            "trace distance still increasing at t_max = {}; the measure is truncated",
            window.t_max
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(GrowthScan {
        intervals,
        truncated,
        warnings,
    })
}

/// The non-Markovianity measure over `[0, t_max]`, maximised over state
/// pairs either in closed form or by an exhaustive grid.
pub fn non_markovianity(
    sys: &SystemParams,
    eval: &DephasingEvaluator,
    scenario: Scenario,
    window: ScanWindow,
    search: SearchMode,
) -> Result<NonMarkovResult> {
    let analytic = StatePair::analytic();
    let scan = growth_intervals(eval, scenario, window, &analytic)?;
    let (n_value, growth_intervals, argmax_pair) = match search {
        SearchMode::AnalyticPair => {
            let n = scan.intervals.iter().fold(0.0, |acc, iv| acc + iv.delta_d);
            (n, scan.intervals.clone(), analytic)
        }
        SearchMode::GridSearch {
            p_steps,
            c_steps,
            phase_steps,
        } => {
            let (n, pair) = grid_search(sys, eval, scenario, &scan.intervals, p_steps, c_steps, phase_steps)?;
            let intervals = rescore(eval, scenario, &scan.intervals, &pair)?;
            (n, intervals, pair)
        }
    };
    Ok(NonMarkovResult {
        n_value,
        growth_intervals,
        argmax_pair,
        scenario,
        search,
        truncated: scan.truncated,
        warnings: scan.warnings,
    })
}

fn rescore(
    eval: &DephasingEvaluator,
    scenario: Scenario,
    intervals: &[GrowthInterval],
    pair: &StatePair,
) -> Result<Vec<GrowthInterval>> {
    let mut out = Vec::new();
    for iv in intervals {
        let delta_d = pair.distance(decay_exponent(eval, scenario, iv.t_end)?)
            - pair.distance(decay_exponent(eval, scenario, iv.t_start)?);
        if delta_d > 0.0 {
            out.push(GrowthInterval { delta_d, ..*iv });
        }
    }
    Ok(out)
}

fn linspace(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 })
}

/// Bloch-ball grid honouring `|c12|² ≤ p11 p22`; states with `c12 = 0` are
/// listed once.
pub fn grid_states(p_steps: usize, c_steps: usize, phase_steps: usize) -> Result<Vec<DensityMatrix2>> {
    if p_steps == 0 || c_steps == 0 || phase_steps == 0 {
        return domain("grid search resolution must be positive in every direction");
    }
    let mut states = Vec::new();
    for p in linspace(p_steps) {
        let radius = (p * (1.0 - p)).sqrt();
        if radius == 0.0 {
            states.push(DensityMatrix2::new(p, Complex64::default())?);
            continue;
        }
        for f in linspace(c_steps) {
            let modulus = f * radius;
            let phases = if modulus == 0.0 { 1 } else { phase_steps };
            for k in 0..phases {
                let phase = 2.0 * std::f64::consts::PI * k as f64 / phase_steps as f64;
                states.push(DensityMatrix2::new(p, Complex64::from_polar(modulus, phase))?);
            }
        }
    }
    Ok(states)
}

fn grid_search(
    sys: &SystemParams,
    eval: &DephasingEvaluator,
    scenario: Scenario,
    intervals: &[GrowthInterval],
    p_steps: usize,
    c_steps: usize,
    phase_steps: usize,
) -> Result<(f64, StatePair)> {
    let states = grid_states(p_steps, c_steps, phase_steps)?;
    let uprime = scenario.superoperator();
    let t1 = scenario.t1();
    let mut kernels = Vec::with_capacity(2 * intervals.len());
    for iv in intervals {
        kernels.push(TwoTimeKernelSet::new(sys, eval, t1, iv.t_start)?);
        kernels.push(TwoTimeKernelSet::new(sys, eval, t1, iv.t_end)?);
    }
    // propagated[s][k]: state s at the k-th interval endpoint
    let propagated: Vec<Vec<DensityMatrix2>> = states
        .iter()
        .map(|s| kernels.iter().map(|k| propagate_with_kernels(s, k, &uprime)).collect())
        .collect::<Result<_>>()?;

    let score = |i: usize, j: usize| -> f64 {
        let (a, b) = (&propagated[i], &propagated[j]);
        (0..intervals.len())
            .map(|k| (trace_distance(&a[2 * k + 1], &b[2 * k + 1]) - trace_distance(&a[2 * k], &b[2 * k])).max(0.0))
            .sum()
    };
    let better = |x: (f64, usize, usize), y: (f64, usize, usize)| {
        if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
            y
        } else {
            x
        }
    };
    let best = (0..states.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..states.len())
                .map(|j| (score(i, j), i, j))
                .fold((0.0, 0, 0), better)
        })
        .reduce(|| (0.0, 0, 0), better);
    let pair = if best.0 > 0.0 {
        StatePair::new(states[best.1], states[best.2])
    } else {
        StatePair::analytic()
    };
    Ok((best.0, pair))
}
