//! Linear and two-pulse photon-echo response kernels in the impulsive limit,
//! with unit dipole and field prefactors.
//!
//! ```text
//! linear:  e^{−iεt} e^{−g(t)}
//! echo:    R(t1, t2) = exp[−2g(t1) − 2g(t2) + g(t1 + t2)]
//! ```
//!
//! Heterodyne detection sees `(Re R, Im R)`, homodyne detection `|R|`. The
//! echo modulus is the decay factor of the trace distance after a coherence
//! flip, `|R| = e^{−E(t2)}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::DephasingEvaluator;
use crate::dynamics::SystemParams;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoKernel {
    pub t1: f64,
    pub t2: f64,
    pub value: Complex64,
}

impl EchoKernel {
    pub fn homodyne(&self) -> f64 {
        self.value.norm()
    }

    pub fn heterodyne(&self) -> (f64, f64) {
        (self.value.re, self.value.im)
    }
}

fn check_times(t1: f64, t2: f64) -> Result<()> {
    if t1 >= 0.0 && t2 >= 0.0 && t1.is_finite() && t2.is_finite() {
        Ok(())
    } else {
        domain(format!("echo times must be finite and non-negative, got ({t1}, {t2})"))
    }
}

fn echo_from_g(g1: Complex64, g2: Complex64, g12: Complex64) -> Complex64 {
    (-2.0 * g1 - 2.0 * g2 + g12).exp()
}

pub fn echo_response(eval: &DephasingEvaluator, t1: f64, t2: f64) -> Result<Complex64> {
    check_times(t1, t2)?;
    Ok(echo_from_g(eval.g(t1)?, eval.g(t2)?, eval.g(t1 + t2)?))
}

/// `R` on the tensor grid `t1s × t2s`, row-major in `t1`.
pub fn echo_grid(eval: &DephasingEvaluator, t1s: &[f64], t2s: &[f64]) -> Result<Vec<EchoKernel>> {
    for &t1 in t1s {
        for &t2 in t2s {
            check_times(t1, t2)?;
        }
    }
    let g = |ts: &[f64]| -> Result<Vec<Complex64>> { Ok(eval.sample_many(ts)?.into_iter().map(|s| s.g).collect()) };
    let g1 = g(t1s)?;
    let g2 = g(t2s)?;
    let rows: Vec<Vec<EchoKernel>> = t1s
        .par_iter()
        .zip(&g1)
        .map(|(&t1, &a)| {
            let sums: Vec<f64> = t2s.iter().map(|t2| t1 + t2).collect();
            let g12 = g(&sums)?;
            Ok(t2s
                .iter()
                .zip(&g2)
                .zip(&g12)
                .map(|((&t2, &b), &c)| EchoKernel {
                    t1,
                    t2,
                    value: echo_from_g(a, b, c),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `e^{−iεt} e^{−g(t)}`
pub fn linear_response(eval: &DephasingEvaluator, sys: &SystemParams, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return domain(format!("time must be non-negative, got {t}"));
    }
    Ok((Complex64::new(0.0, -sys.epsilon * t) - eval.g(t)?).exp())
}

/// Position of the first interior maximum of `|R(t1, ·)|` on `(0, t_max)`:
/// a coarse scan of `|R|` followed by golden-section refinement.
pub fn echo_peak(eval: &DephasingEvaluator, t1: f64, t_max: f64) -> Result<Option<f64>> {
    check_times(t1, t_max)?;
    const SCAN: usize = 2000;
    let modulus = |t2: f64| -> Result<f64> { Ok(echo_response(eval, t1, t2)?.norm()) };
    let h = t_max / SCAN as f64;
    let mut prev = modulus(0.0)?;
    let mut cur = modulus(h)?;
    for i in 1..SCAN {
        let next = modulus((i + 1) as f64 * h)?;
        if cur > prev && cur >= next {
            let (mut a, mut b) = ((i - 1) as f64 * h, (i + 1) as f64 * h);
            let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
            let mut c = b - inv_phi * (b - a);
            let mut d = a + inv_phi * (b - a);
            let (mut fc, mut fd) = (modulus(c)?, modulus(d)?);
            while b - a > 1e-9 {
                if fc > fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - inv_phi * (b - a);
                    fc = modulus(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + inv_phi * (b - a);
                    fd = modulus(d)?;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        prev = cur;
        cur = next;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::BathParams;

    fn figure() -> DephasingEvaluator {
        DephasingEvaluator::analytic(BathParams::figure()).unwrap()
    }

    #[test]
    fn echo_at_origin_is_one() {
        assert_eq!(echo_response(&figure(), 0.0, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        assert!(echo_response(&figure(), -1.0, 0.0).is_err());
    }

    #[test]
    fn echo_without_preparation_is_linear_decay() {
        let eval = figure();
        for &t in &[0.5, 2.0, 7.0] {
            let r = echo_response(&eval, 0.0, t).unwrap();
            assert!((r.norm() - (-eval.g(t).unwrap().re).exp()).abs() < 1e-15);
            let lin = linear_response(&eval, &SystemParams::new(3.0).unwrap(), t).unwrap();
            assert!((lin.norm() - r.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_is_symmetric_and_bounded() {
        let eval = figure();
        let ts: Vec<f64> = (0..30).map(|i| 0.33 * i as f64).collect();
        let grid = echo_grid(&eval, &ts, &ts).unwrap();
        let n = ts.len();
        for i in 0..n {
            for j in 0..n {
                let a = grid[i * n + j];
                let b = grid[j * n + i];
                assert!((a.homodyne() - b.homodyne()).abs() < 1e-14);
                assert!(a.homodyne() <= 1.0 + 1e-15);
                let direct = echo_response(&eval, ts[i], ts[j]).unwrap();
                assert_eq!(a.value, direct);
            }
        }
    }

    #[test]
    fn linear_response_at_zero() {
        let lin = linear_response(&figure(), &SystemParams::new(2.0).unwrap(), 0.0).unwrap();
        assert_eq!(lin, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn high_t_linear_log_slope() {
        let p = BathParams::figure();
        let eval = DephasingEvaluator::high_temperature(p).unwrap();
        let sys = SystemParams::default();
        let (lo, hi) = (5.0 / p.gamma, 10.0 / p.gamma);
        let pts: Vec<(f64, f64)> = (0..=100)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / 100.0;
                (t, linear_response(&eval, &sys, t).unwrap().norm().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let expected = -2.0 * p.eta / (p.beta * p.gamma);
        assert!((slope / expected - 1.0).abs() < 0.01, "{slope}");
    }

    #[test]
    fn echo_peak_regression() {
        let peak = echo_peak(&figure(), 1.0, 10.0).unwrap().unwrap();
        // where the prepared-scenario decay rate changes sign
        assert!((peak - 0.6225844384348502).abs() < 1e-7, "{peak}");
        let hight = DephasingEvaluator::high_temperature(BathParams::figure()).unwrap();
        let peak = echo_peak(&hight, 1.0, 10.0).unwrap().unwrap();
        assert!((peak - (2.0 - (-0.5f64).exp()).ln() / 0.5).abs() < 1e-7);
        assert_eq!(echo_peak(&figure(), 0.0, 10.0).unwrap(), None);
    }
}
