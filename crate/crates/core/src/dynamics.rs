//! Two-level density matrices, Liouville superoperators and bath-averaged
//! propagation.
//!
//! Vectorised states use the ordered basis `|1⟩⟨1|, |1⟩⟨2|, |2⟩⟨1|, |2⟩⟨2|`,
//! i.e. `(ρ11, ρ12, ρ21, ρ22)`. With `H_S = diag(0, ε)` and a fluctuating
//! gap, the coherence `ρ21` picks up the time-ordered factor `ζ` and `ρ12`
//! its conjugate. Bath averages follow from the second cumulant:
//!
//! ```text
//! ⟨ζ(t)⟩     = e^{−iεt} e^{−g(t)}                                  k_single
//! ⟨ζ2 ζ1⟩    = e^{−iε(t1+t2)} e^{−g(t1+t2)}                        k_keep
//! ⟨ζ2 ζ1*⟩   = e^{−iε(t2−t1)} e^{−2g(t1) − 2g(t2) + g(t1+t2)}     k_flip
//! ```
//!
//! with `⟨ζ*⟩ = ⟨ζ⟩*` and so on for the conjugated products.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dephasing::DephasingEvaluator;
use crate::error::{domain, Error, Result};

/// Positivity or trace violations up to this size are clamped, larger ones rejected.
pub const STATE_SLACK: f64 = 1e-10;
const SUPEROPERATOR_TOL: f64 = 1e-12;

/// Reduced state of a two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2 {
    p11: f64,
    c12: Complex64,
}

impl DensityMatrix2 {
    /// Validates `0 ≤ p11 ≤ 1` and `|c12|² ≤ p11 (1 − p11)`.
    pub fn new(p11: f64, c12: Complex64) -> Result<Self> {
        if !(p11.is_finite() && c12.re.is_finite() && c12.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        if !(-STATE_SLACK..=1.0 + STATE_SLACK).contains(&p11) {
            return Err(Error::InvalidState(format!("population {p11} outside [0, 1]")));
        }
        let p11 = p11.clamp(0.0, 1.0);
        let bound = p11 * (1.0 - p11);
        let excess = c12.norm_sqr() - bound;
        if excess > STATE_SLACK {
            return Err(Error::InvalidState(format!(
                "|c12|² = {} exceeds p11(1 - p11) = {bound}",
                c12.norm_sqr()
            )));
        }
        let c12 = if excess > 0.0 {
            log::warn!("clamping coherence: positivity violated by {excess:e}");
            if bound == 0.0 {
                Complex64::default()
            } else {
                c12 * (bound.sqrt() / c12.norm())
            }
        } else {
            c12
        };
        Ok(DensityMatrix2 { p11, c12 })
    }

    /// `|1⟩⟨1|`
    pub fn ground() -> Self {
        DensityMatrix2 {
            p11: 1.0,
            c12: Complex64::default(),
        }
    }

    /// `|2⟩⟨2|`
    pub fn excited() -> Self {
        DensityMatrix2 {
            p11: 0.0,
            c12: Complex64::default(),
        }
    }

    /// Pure equatorial state `p11 = 1/2`, `c12 = e^{iφ}/2`.
    pub fn equatorial(phase: f64) -> Self {
        DensityMatrix2 {
            p11: 0.5,
            c12: Complex64::from_polar(0.5, phase),
        }
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    pub fn p22(&self) -> f64 {
        1.0 - self.p11
    }

    pub fn c12(&self) -> Complex64 {
        self.c12
    }

    pub fn c21(&self) -> Complex64 {
        self.c12.conj()
    }

    /// `(ρ11, ρ12, ρ21, ρ22)`
    pub fn to_vector(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.p11, 0.0),
            self.c12,
            self.c12.conj(),
            Complex64::new(1.0 - self.p11, 0.0),
        ]
    }

    /// Inverse of [`to_vector`](Self::to_vector); rejects vectors that are
    /// not Hermitian, not trace one, or not positive.
    pub fn from_vector(v: [Complex64; 4]) -> Result<Self> {
        let herm = (v[2] - v[1].conj()).norm().max(v[0].im.abs()).max(v[3].im.abs());
        if herm > STATE_SLACK {
            return Err(Error::InvalidState(format!("not Hermitian (violation {herm:e})")));
        }
        let trace = v[0].re + v[3].re;
        if (trace - 1.0).abs() > STATE_SLACK {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        Self::new(v[0].re, 0.5 * (v[1] + v[2].conj()))
    }

    pub fn to_matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(
            Complex64::new(self.p11, 0.0),
            self.c12,
            self.c12.conj(),
            Complex64::new(1.0 - self.p11, 0.0),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    /// level splitting
    pub epsilon: f64,
}

impl SystemParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() {
            return domain(format!("epsilon must be finite, got {epsilon}"));
        }
        Ok(SystemParams { epsilon })
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams { epsilon: 0.0 }
    }
}

/// Impulsive superoperator acting on vectorised two-level density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvilleOp {
    matrix: Matrix4<Complex64>,
}

/// Basis permutation that swaps `ρ12` and `ρ21`.
const SWAP: [usize; 4] = [0, 2, 1, 3];

impl LiouvilleOp {
    /// Accepts `matrix` only if it maps trace-one Hermitian inputs to
    /// trace-one Hermitian outputs.
    pub fn from_matrix(matrix: Matrix4<Complex64>) -> Result<Self> {
        for j in 0..4 {
            let expected = if j == 0 || j == 3 { 1.0 } else { 0.0 };
            let col = matrix[(0, j)] + matrix[(3, j)];
            let err = (col - Complex64::new(expected, 0.0)).norm();
            if err > SUPEROPERATOR_TOL {
                return Err(Error::InvalidSuperoperator(format!(
                    "does not preserve the trace (column {j} off by {err:e})"
                )));
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                let err = (matrix[(SWAP[i], SWAP[j])] - matrix[(i, j)].conj()).norm();
                if err > SUPEROPERATOR_TOL {
                    return Err(Error::InvalidSuperoperator(format!(
                        "does not preserve Hermiticity (entry ({i}, {j}) off by {err:e})"
                    )));
                }
            }
        }
        Ok(LiouvilleOp { matrix })
    }

    pub fn identity() -> Self {
        LiouvilleOp {
            matrix: Matrix4::identity(),
        }
    }

    /// `U'_{11,11} = U'_{22,22} = U'_{12,21} = U'_{21,12} = 1`, all else zero:
    /// swaps the coherences and leaves the populations alone.
    pub fn coherence_flip() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let mut m = Matrix4::zeros();
        m[(0, 0)] = one;
        m[(3, 3)] = one;
        m[(1, 2)] = one;
        m[(2, 1)] = one;
        LiouvilleOp::from_matrix(m).expect("coherence flip is a valid superoperator")
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, v: [Complex64; 4]) -> [Complex64; 4] {
        let mut out = [Complex64::default(); 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.matrix[(i, j)] * v[j]).sum();
        }
        out
    }

    pub fn compose(&self, other: &LiouvilleOp) -> LiouvilleOp {
        LiouvilleOp {
            matrix: self.matrix * other.matrix,
        }
    }
}

pub fn coherence_flip() -> LiouvilleOp {
    LiouvilleOp::coherence_flip()
}

/// Bath averages of the `ζ` factors for one `(t1, t2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTimeKernelSet {
    pub t1: f64,
    pub t2: f64,
    single_t1: Complex64,
    single_t2: Complex64,
    keep: Complex64,
    flip: Complex64,
}

fn single_kernel(epsilon: f64, t: f64, g: Complex64) -> Complex64 {
    (Complex64::new(0.0, -epsilon * t) - g).exp()
}

impl TwoTimeKernelSet {
    pub fn new(sys: &SystemParams, eval: &DephasingEvaluator, t1: f64, t2: f64) -> Result<Self> {
        if !(t1 >= 0.0 && t2 >= 0.0) {
            return domain(format!("two-time propagation needs t1, t2 >= 0, got ({t1}, {t2})"));
        }
        let g1 = eval.g(t1)?;
        let g2 = eval.g(t2)?;
        let g12 = eval.g(t1 + t2)?;
        Ok(Self::from_g(sys.epsilon, t1, t2, g1, g2, g12))
    }

    /// Builds the kernels from precomputed `g(t1)`, `g(t2)`, `g(t1 + t2)`.
    pub fn from_g(epsilon: f64, t1: f64, t2: f64, g1: Complex64, g2: Complex64, g12: Complex64) -> Self {
        let eps = epsilon;
        TwoTimeKernelSet {
            t1,
            t2,
            single_t1: single_kernel(eps, t1, g1),
            single_t2: single_kernel(eps, t2, g2),
            keep: single_kernel(eps, t1 + t2, g12),
            flip: (Complex64::new(0.0, -eps * (t2 - t1)) - 2.0 * g1 - 2.0 * g2 + g12).exp(),
        }
    }

    /// `⟨ζ1⟩`
    pub fn k_single_t1(&self) -> Complex64 {
        self.single_t1
    }

    /// `⟨ζ2⟩`
    pub fn k_single_t2(&self) -> Complex64 {
        self.single_t2
    }

    /// `⟨ζ2 ζ1⟩`
    pub fn k_keep(&self) -> Complex64 {
        self.keep
    }

    /// `⟨ζ2 ζ1*⟩`
    pub fn k_flip(&self) -> Complex64 {
        self.flip
    }

    /// Entrywise bath-averaged factors multiplying `U'_{ij,kl}`.
    pub fn factor_matrix(&self) -> Matrix4<Complex64> {
        // row index carries ζ2 (ρ12 ↔ ζ2*, ρ21 ↔ ζ2), column index ζ1
        let one = Complex64::new(1.0, 0.0);
        let (s1, s2, k, f) = (self.single_t1, self.single_t2, self.keep, self.flip);
        Matrix4::new(
            one, s1.conj(), s1, one,
            s2.conj(), k.conj(), f.conj(), s2.conj(),
            s2, f, k, s2,
            one, s1.conj(), s1, one,
        )
    }

    pub fn propagator(&self, uprime: &LiouvilleOp) -> Matrix4<Complex64> {
        self.factor_matrix().component_mul(uprime.matrix())
    }
}

/// Evolves a state over one interval: populations frozen, `ρ21 → ⟨ζ(t)⟩ ρ21`.
pub fn propagate_single(
    state: &DensityMatrix2,
    sys: &SystemParams,
    eval: &DephasingEvaluator,
    t: f64,
) -> Result<DensityMatrix2> {
    if !(t >= 0.0) {
        return domain(format!("propagation time must be non-negative, got {t}"));
    }
    let k = single_kernel(sys.epsilon, t, eval.g(t)?);
    DensityMatrix2::new(state.p11, state.c12 * k.conj())
}

/// Evolves a factorised state prepared at `−t1` through `t1`, the impulsive
/// superoperator `uprime` at time zero, then `t2`.
pub fn propagate_two_time(
    state0: &DensityMatrix2,
    sys: &SystemParams,
    eval: &DephasingEvaluator,
    uprime: &LiouvilleOp,
    t1: f64,
    t2: f64,
) -> Result<DensityMatrix2> {
    let kernels = TwoTimeKernelSet::new(sys, eval, t1, t2)?;
    propagate_with_kernels(state0, &kernels, uprime)
}

pub fn propagate_with_kernels(
    state0: &DensityMatrix2,
    kernels: &TwoTimeKernelSet,
    uprime: &LiouvilleOp,
) -> Result<DensityMatrix2> {
    let prop = kernels.propagator(uprime);
    let v = state0.to_vector();
    let mut out = [Complex64::default(); 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|j| prop[(i, j)] * v[j]).sum();
    }
    DensityMatrix2::from_vector(out)
}

/// `D = sqrt((ρᴬ11 − ρᴮ11)² + |ρᴬ12 − ρᴮ12|²)`
pub fn trace_distance(a: &DensityMatrix2, b: &DensityMatrix2) -> f64 {
    let dp = a.p11 - b.p11;
    dp.hypot((a.c12 - b.c12).norm())
}

/// `½ Tr |ρᴬ − ρᴮ|` from the eigenvalues of the difference.
pub fn trace_distance_eigen(a: &DensityMatrix2, b: &DensityMatrix2) -> f64 {
    let diff = a.to_matrix() - b.to_matrix();
    0.5 * diff.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>()
}
