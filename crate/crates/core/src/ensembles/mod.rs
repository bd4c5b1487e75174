//! Random matrices from the ten symmetry classes, with entries drawn once per
//! dependence class and spread over the matrix by the class symmetries.
//!
//! Every class is normalized by `1/sqrt(dim)`: `1/sqrt(δn)` for the
//! Wigner–Dyson and Bogoliubov–de Gennes classes, `1/sqrt(s+t)` for AIII and
//! BDI, and `1/sqrt(2(s+t))` for CII.

mod covariance;
mod field;
mod matrix;
mod membership;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::dependence::{DependenceError, DependenceFamily};

pub use covariance::CovarianceConfig;
pub use field::{assemble, sample_entry_field, BlockKind, EntryField, RealProjection};
pub use matrix::HermitianMatrix;
pub use membership::verify_membership;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian at ({row}, {col})")]
    NotHermitian { row: usize, col: usize },
    #[error("entry field has no value for block {block} position ({p}, {q})")]
    IncompleteField { block: usize, p: usize, q: usize },
    #[error("inconsistent entry field: {0}")]
    InconsistentField(String),
    #[error(transparent)]
    Dependence(#[from] DependenceError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("io failed: {0}")]
    Io(#[from] std::io::Error),
}

/// The ten symmetry classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SymmetryClass {
    A,
    AI,
    AII,
    AIII,
    BD,
    BDI,
    DIII,
    C,
    CI,
    CII,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 10] = [
        SymmetryClass::A,
        SymmetryClass::AI,
        SymmetryClass::AII,
        SymmetryClass::AIII,
        SymmetryClass::BD,
        SymmetryClass::BDI,
        SymmetryClass::DIII,
        SymmetryClass::C,
        SymmetryClass::CI,
        SymmetryClass::CII,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SymmetryClass::A => "A",
            SymmetryClass::AI => "AI",
            SymmetryClass::AII => "AII",
            SymmetryClass::AIII => "AIII",
            SymmetryClass::BD => "BD",
            SymmetryClass::BDI => "BDI",
            SymmetryClass::DIII => "DIII",
            SymmetryClass::C => "C",
            SymmetryClass::CI => "CI",
            SymmetryClass::CII => "CII",
        }
    }

    pub fn delta(&self) -> usize {
        use SymmetryClass::*;
        match self {
            AII | DIII | C | CI | CII => 2,
            _ => 1,
        }
    }

    pub fn is_chiral(&self) -> bool {
        matches!(self, SymmetryClass::AIII | SymmetryClass::BDI | SymmetryClass::CII)
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SymmetryClass {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace(['/', ' '], "");
        Self::ALL
            .into_iter()
            .find(|c| c.label() == key)
            .ok_or_else(|| EnsembleError::InvalidConfig(format!("unknown symmetry class `{s}`")))
    }
}

/// Standardized entry laws: centered, `E|a|^2 = 1`, all moments finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryDist {
    /// Independent real and imaginary parts, each `N(0, 1/2)`.
    ComplexGaussian,
    RealGaussian,
    /// `±1` with equal probability.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformPm,
}

impl EntryDist {
    pub const ALL: [EntryDist; 4] =
        [EntryDist::ComplexGaussian, EntryDist::RealGaussian, EntryDist::Rademacher, EntryDist::UniformPm];

    pub fn name(&self) -> &'static str {
        match self {
            EntryDist::ComplexGaussian => "complex_gaussian",
            EntryDist::RealGaussian => "real_gaussian",
            EntryDist::Rademacher => "rademacher",
            EntryDist::UniformPm => "uniform_pm",
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, EntryDist::ComplexGaussian)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self {
            EntryDist::ComplexGaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
            EntryDist::RealGaussian => Complex64::new(rng.sample(StandardNormal), 0.0),
            EntryDist::Rademacher => Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
            EntryDist::UniformPm => {
                let w = 3f64.sqrt();
                Complex64::new(rng.random_range(-w..=w), 0.0)
            }
        }
    }
}

impl fmt::Display for EntryDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntryDist {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s.trim())
            .ok_or_else(|| EnsembleError::InvalidConfig(format!("unknown entry distribution `{s}`")))
    }
}

/// Size parameters of a class: `n` for the non-chiral classes, the block
/// sizes `s`, `t` (with `s + t = n`) for the chiral ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassDims {
    Square { n: usize },
    Chiral { s: usize, t: usize },
}

impl ClassDims {
    /// Dimension of the matrices of `class` with these parameters.
    pub fn dim(&self, class: SymmetryClass) -> usize {
        match *self {
            ClassDims::Square { n } => class.delta() * n,
            ClassDims::Chiral { s, t } => class.delta() * (s + t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub class: SymmetryClass,
    pub n: usize,
    /// Target block ratio `s/n` for the chiral classes.
    pub kappa: Option<f64>,
    /// Explicit `s` for the chiral classes, overriding `kappa`.
    pub split: Option<usize>,
    pub dist: EntryDist,
    pub dependence: DependenceFamily,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(
        class: SymmetryClass,
        n: usize,
        dist: EntryDist,
        dependence: impl Into<DependenceFamily>,
        seed: u64,
    ) -> Self {
        Self { class, n, kappa: None, split: None, dist, dependence: dependence.into(), seed }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    /// Fixes the chiral blocks to `s x t` (and `n = s + t`).
    pub fn with_split(mut self, s: usize, t: usize) -> Self {
        self.n = s + t;
        self.split = Some(s);
        self
    }

    /// The same configuration at another size, keeping `kappa` (an explicit
    /// split is dropped).
    pub fn resized(&self, n: usize) -> Self {
        Self { n, split: None, ..self.clone() }
    }

    pub fn dims(&self) -> Result<ClassDims, EnsembleError> {
        if self.n == 0 {
            return Err(EnsembleError::InvalidConfig("n must be positive".into()));
        }
        if !self.class.is_chiral() {
            return Ok(ClassDims::Square { n: self.n });
        }
        let s = match (self.split, self.kappa) {
            (Some(s), _) => s,
            (None, Some(kappa)) if kappa > 0.0 && kappa < 1.0 => (kappa * self.n as f64).round() as usize,
            (None, Some(kappa)) => {
                return Err(EnsembleError::InvalidConfig(format!("kappa must lie in (0, 1), got {kappa}")))
            }
            (None, None) => return Err(EnsembleError::InvalidConfig(format!("class {} needs kappa", self.class))),
        };
        if s == 0 || s >= self.n {
            return Err(EnsembleError::InvalidConfig(format!(
                "chiral blocks need 1 <= s < n, got s = {s}, n = {}",
                self.n
            )));
        }
        Ok(ClassDims::Chiral { s, t: self.n - s })
    }

    pub fn dim(&self) -> Result<usize, EnsembleError> {
        Ok(self.dims()?.dim(self.class))
    }

    /// Per-replicate generator: one ChaCha stream per `(n, replicate)` under
    /// the configured seed, so replicates and sizes never share draws.
    pub fn rng(&self, replicate: u64) -> ChaCha8Rng {
        replicate_rng(self.seed, self.n, replicate)
    }
}

pub(crate) fn replicate_rng(seed: u64, n: usize, replicate: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) ^ replicate);
    rng
}

/// Draws a full matrix for replicate `replicate`.
pub fn sample_matrix(config: &EnsembleConfig, replicate: u64) -> Result<HermitianMatrix, EnsembleError> {
    let field = sample_entry_field(config, replicate)?;
    assemble(config, &field)
}
