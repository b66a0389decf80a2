//! Pure-dephasing dynamics of a two-level system coupled to a harmonic bath.
//!
//! The crate covers the chain from the bath to observables:
//!
//! - [`spectral`]: spectral densities and the correlation function `L(t)`;
//! - [`dephasing`]: the lineshape function `g(t)` and `ġ(t)` from a Matsubara
//!   series and two independent quadratures;
//! - [`dynamics`]: two-level density matrices, Liouville superoperators and
//!   propagation over one interval or two intervals separated by an
//!   impulsive superoperator;
//! - [`measures`]: trace-distance derivative, growth intervals and the
//!   non-Markovianity measure;
//! - [`response`]: linear and photon-echo response kernels;
//! - [`figures`]: the trace-distance curves and surfaces at the reference
//!   bath parameters.
//!
//! Units: `ħ = k_B = 1`.

pub mod dephasing;
pub mod dynamics;
pub mod error;
pub mod figures;
mod matsubara;
pub mod measures;
pub mod quad;
pub mod response;
pub mod spectral;
mod transforms;

pub use dephasing::{DephasingEvaluator, DephasingSample, Engine, EngineKind, SeriesTail};
pub use dynamics::{DensityMatrix2, LiouvilleOp, SystemParams, TwoTimeKernelSet};
pub use error::{Error, Result};
pub use measures::{GrowthInterval, NonMarkovResult, ScanWindow, Scenario, SearchMode, StatePair};
pub use spectral::{BathParams, SpectralDensity, TabulatedDensity};
