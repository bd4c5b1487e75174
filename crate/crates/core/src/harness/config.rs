use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::combinatorics::MomentLaw;
use crate::dependence::{DependenceFamily, Shape, StructureName};
use crate::ensembles::{CovarianceConfig, EnsembleConfig, EntryDist, SymmetryClass};
use crate::limits::LimitLaw;
use crate::spectra::{MAX_CLASS_MOMENT, MAX_COVARIANCE_MOMENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Matrices from one of the ten symmetry classes.
    #[default]
    Class,
    /// Gram matrices `X* X` of rectangular `s x t` matrices.
    Covariance,
}

/// A named dependence structure with its integer parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependenceSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, usize>,
}

impl Default for DependenceSpec {
    fn default() -> Self {
        Self { name: "wigner_standard".into(), params: BTreeMap::new() }
    }
}

impl DependenceSpec {
    pub fn structure(&self) -> Result<StructureName, HarnessError> {
        Ok(StructureName::parse(&self.name, &self.params)?)
    }
}

impl From<StructureName> for DependenceSpec {
    fn from(name: StructureName) -> Self {
        Self { name: name.base_name().to_string(), params: name.parameters() }
    }
}

/// Configuration of a sampling experiment, read from JSON. Command-line flags
/// override individual fields; the resolved value is what gets recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    /// Symmetry class label (class mode).
    #[serde(default)]
    pub class: Option<String>,
    /// Size ladder, ascending. Moments are compared at every size.
    pub sizes: Vec<usize>,
    /// Block ratio `s/n` (chiral classes) or row ratio (covariance mode).
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Column ratio `t/n` (covariance mode), default 1.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_dist")]
    pub dist: String,
    #[serde(default)]
    pub dependence: DependenceSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Histogram range; derived from the limit law when absent.
    #[serde(default)]
    pub range: Option<(f64, f64)>,
    /// Limit law to compare against. Only the law matching the ensemble is
    /// accepted; when absent it is chosen automatically.
    #[serde(default)]
    pub law: Option<String>,
    /// Judge moments after two-size extrapolation in `1/n` (the largest size
    /// and half of it) rather than at the largest size alone.
    #[serde(default = "default_true")]
    pub extrapolate: bool,
    /// Also require the Kolmogorov–Smirnov distance to the limit law at the
    /// largest size to stay below the threshold.
    #[serde(default)]
    pub ks: bool,
    /// Run the spectral comparison even when the dependence audit fails.
    #[serde(default)]
    pub allow_noncompliant: bool,
}

fn default_dist() -> String {
    EntryDist::ComplexGaussian.name().to_string()
}

fn default_replicates() -> usize {
    50
}

fn default_kmax() -> usize {
    6
}

fn default_bins() -> usize {
    64
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// A class-mode configuration with defaults for everything else.
    pub fn for_class(class: SymmetryClass, sizes: Vec<usize>) -> Self {
        Self {
            mode: Mode::Class,
            class: Some(class.label().to_string()),
            sizes,
            kappa: None,
            mu: None,
            dist: default_dist(),
            dependence: DependenceSpec::default(),
            seed: 0,
            replicates: default_replicates(),
            kmax: default_kmax(),
            bins: default_bins(),
            range: None,
            law: None,
            extrapolate: true,
            ks: false,
            allow_noncompliant: false,
        }
    }

    /// A covariance-mode configuration, `s = round(kappa n)`, `t = round(mu n)`.
    pub fn for_covariance(kappa: f64, mu: f64, sizes: Vec<usize>) -> Self {
        Self {
            mode: Mode::Covariance,
            class: None,
            kappa: Some(kappa),
            mu: Some(mu),
            dependence: StructureName::MpStandard.into(),
            kmax: 5,
            ..Self::for_class(SymmetryClass::A, sizes)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self, HarnessError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be a nonempty list of positive integers".into());
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("sizes must be strictly ascending, got {:?}", self.sizes));
        }
        if self.replicates < 2 {
            return bad(format!("need at least 2 replicates, got {}", self.replicates));
        }
        let cap = match self.mode {
            Mode::Class => MAX_CLASS_MOMENT,
            Mode::Covariance => MAX_COVARIANCE_MOMENT,
        };
        if self.kmax == 0 || self.kmax > cap {
            return bad(format!("kmax must lie in 1..={cap}, got {}", self.kmax));
        }
        if self.bins == 0 {
            return bad("bins must be positive".into());
        }
        if let Some((lo, hi)) = self.range {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return bad(format!("range must satisfy lo < hi, got ({lo}, {hi})"));
            }
        }
        if self.extrapolate && self.sizes.last().is_some_and(|&n| n < 4) {
            return bad("extrapolation needs a largest size of at least 4".into());
        }
        self.entry_dist()?;
        self.dependence.structure()?;
        match self.mode {
            Mode::Class => {
                let class = self.symmetry_class()?;
                if class.is_chiral() {
                    match self.kappa {
                        Some(k) if k > 0.0 && k < 1.0 => {}
                        other => return bad(format!("class {class} needs kappa in (0, 1), got {other:?}")),
                    }
                } else if self.kappa.is_some() || self.mu.is_some() {
                    return bad(format!("class {class} takes neither kappa nor mu"));
                }
            }
            Mode::Covariance => {
                if self.class.is_some() {
                    return bad("covariance mode takes no class".into());
                }
                match (self.kappa, self.mu.unwrap_or(1.0)) {
                    (Some(k), mu) if k > 0.0 && mu > 0.0 && k.is_finite() && mu.is_finite() => {}
                    (k, mu) => return bad(format!("covariance mode needs kappa, mu > 0, got ({k:?}, {mu})")),
                }
            }
        }
        self.law()?;
        Ok(())
    }

    pub fn symmetry_class(&self) -> Result<SymmetryClass, HarnessError> {
        let label = self.class.as_deref().ok_or_else(|| HarnessError::Config("class mode needs a class".into()))?;
        Ok(SymmetryClass::from_str(label)?)
    }

    pub fn entry_dist(&self) -> Result<EntryDist, HarnessError> {
        Ok(EntryDist::from_str(&self.dist)?)
    }

    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or(1.0)
    }

    pub fn largest_size(&self) -> usize {
        *self.sizes.last().expect("validated sizes are nonempty")
    }

    /// Whether the entries are indexed by a square grid (non-chiral classes)
    /// or by a rectangular one.
    pub fn square_dependence(&self) -> Result<bool, HarnessError> {
        Ok(match self.mode {
            Mode::Class => !self.symmetry_class()?.is_chiral(),
            Mode::Covariance => false,
        })
    }

    pub fn ensemble(&self, n: usize) -> Result<EnsembleConfig, HarnessError> {
        let family = DependenceFamily::from(self.dependence.structure()?);
        let mut config = EnsembleConfig::new(self.symmetry_class()?, n, self.entry_dist()?, family, self.seed);
        config.kappa = self.kappa;
        Ok(config)
    }

    pub fn covariance(&self, n: usize) -> Result<CovarianceConfig, HarnessError> {
        let kappa = self.kappa.ok_or_else(|| HarnessError::Config("covariance mode needs kappa".into()))?;
        Ok(CovarianceConfig::from_ratios(
            n,
            kappa,
            self.mu(),
            self.entry_dist()?,
            self.dependence.structure()?,
            self.seed,
        ))
    }

    /// The law the ensemble is compared against: the semicircle for the
    /// Wigner–Dyson and BdG classes, the chiral law for the chiral classes,
    /// the general covariance law in covariance mode.
    pub fn law(&self) -> Result<MomentLaw, HarnessError> {
        let (law, target, accepted): (MomentLaw, String, &[&str]) = match self.mode {
            Mode::Class => {
                let class = self.symmetry_class()?;
                if class.is_chiral() {
                    let kappa = self.kappa.unwrap_or(f64::NAN);
                    (MomentLaw::Chiral { kappa }, format!("class {class}"), &["chiral"])
                } else {
                    (MomentLaw::Semicircle, format!("class {class}"), &["semicircle"])
                }
            }
            Mode::Covariance => {
                let (kappa, mu) = (self.kappa.unwrap_or(f64::NAN), self.mu());
                let accepted: &[&str] = if mu == 1.0 { &["general", "marchenko_pastur", "mp"] } else { &["general"] };
                (MomentLaw::General { kappa, mu }, "covariance mode".to_string(), accepted)
            }
        };
        if let Some(requested) = &self.law {
            if !accepted.contains(&requested.trim().to_ascii_lowercase().as_str()) {
                return Err(HarnessError::UnknownPairing { target, law: requested.clone() });
            }
        }
        Ok(law)
    }

    /// The law with a density, when there is one to compare distributions
    /// and draw overlays with.
    pub fn density_law(&self) -> Result<Option<LimitLaw>, HarnessError> {
        Ok(match self.law()? {
            MomentLaw::Semicircle => Some(LimitLaw::Semicircle),
            MomentLaw::Chiral { kappa } => Some(LimitLaw::Chiral { kappa }),
            MomentLaw::General { kappa, mu: 1.0 } => Some(LimitLaw::MarchenkoPastur { kappa }),
            MomentLaw::MarchenkoPastur { kappa } => Some(LimitLaw::MarchenkoPastur { kappa }),
            MomentLaw::General { .. } => None,
        })
    }

    /// Histogram range: the configured one, or the law's support padded by
    /// a quarter of its width.
    pub fn histogram_range(&self) -> Result<(f64, f64), HarnessError> {
        if let Some(range) = self.range {
            return Ok(range);
        }
        let (lo, hi) = match self.law()? {
            MomentLaw::Semicircle => (-2.0, 2.0),
            MomentLaw::Chiral { kappa } => {
                let r = (1.0 + 2.0 * (kappa * (1.0 - kappa)).sqrt()).sqrt();
                (-r, r)
            }
            MomentLaw::General { kappa, mu } => (0.0, (kappa.sqrt() + mu.sqrt()).powi(2)),
            MomentLaw::MarchenkoPastur { kappa } => (0.0, (1.0 + kappa.sqrt()).powi(2)),
        };
        let pad = 0.25 * (hi - lo);
        Ok((lo - pad, hi + pad))
    }

    /// The dependence structure at size `n`, shaped like the entry grid.
    pub fn dependence_shape(&self, n: usize) -> Result<Shape, HarnessError> {
        Ok(match self.mode {
            Mode::Class => {
                let ens = self.ensemble(n)?;
                match ens.dims()? {
                    crate::ensembles::ClassDims::Square { n } => Shape::Square { n },
                    crate::ensembles::ClassDims::Chiral { s, t } => Shape::Rectangular { s, t },
                }
            }
            Mode::Covariance => {
                let c = self.covariance(n)?;
                Shape::Rectangular { s: c.s, t: c.t }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(r#"{"class": "A", "sizes": [100, 200]}"#).unwrap();
        assert_eq!(c.replicates, 50);
        assert_eq!(c.kmax, 6);
        assert_eq!(c.dist, "complex_gaussian");
        assert_eq!(c.dependence.name, "wigner_standard");
        assert!(c.extrapolate);
        assert_eq!(c.law().unwrap(), MomentLaw::Semicircle);
    }

    #[test]
    fn dependence_with_params() {
        let c = ExperimentConfig::from_json(
            r#"{"class": "AI", "sizes": [64], "dependence": {"name": "tile", "params": {"r": 2}}, "extrapolate": false}"#,
        )
        .unwrap();
        assert_eq!(c.dependence.structure().unwrap(), StructureName::Tile { r: 2 });
    }

    #[test]
    fn law_pairing() {
        let mut c = ExperimentConfig::for_class(SymmetryClass::AIII, vec![100]);
        c.kappa = Some(0.3);
        assert_eq!(c.law().unwrap(), MomentLaw::Chiral { kappa: 0.3 });
        c.law = Some("semicircle".into());
        assert!(matches!(c.law(), Err(HarnessError::UnknownPairing { .. })));
        let mut cov = ExperimentConfig::for_covariance(0.5, 1.0, vec![100]);
        cov.law = Some("mp".into());
        assert_eq!(cov.law().unwrap(), MomentLaw::General { kappa: 0.5, mu: 1.0 });
        assert_eq!(cov.density_law().unwrap(), Some(LimitLaw::MarchenkoPastur { kappa: 0.5 }));
        cov.mu = Some(2.0);
        assert!(cov.law().is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"class": "A", "sizes": []}"#,
            r#"{"class": "A", "sizes": [200, 100]}"#,
            r#"{"class": "A", "sizes": [100], "kmax": 13}"#,
            r#"{"class": "AIII", "sizes": [100]}"#,
            r#"{"class": "A", "sizes": [100], "kappa": 0.5}"#,
            r#"{"class": "Z", "sizes": [100]}"#,
            r#"{"class": "A", "sizes": [100], "dist": "cauchy"}"#,
            r#"{"class": "A", "sizes": [100], "dependence": {"name": "tile"}}"#,
            r#"{"class": "A", "sizes": [100], "unknown": 1}"#,
            r#"{"mode": "covariance", "sizes": [100]}"#,
            r#"{"mode": "covariance", "sizes": [100], "kappa": 0.5, "kmax": 9}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn resolves_ensembles() {
        let mut c = ExperimentConfig::for_class(SymmetryClass::CII, vec![100]);
        c.kappa = Some(0.3);
        let e = c.ensemble(100).unwrap();
        assert_eq!(e.dim().unwrap(), 200);
        assert_eq!(c.dependence_shape(100).unwrap(), Shape::Rectangular { s: 30, t: 70 });
        let cov = ExperimentConfig::for_covariance(0.5, 1.0, vec![300]).covariance(300).unwrap();
        assert_eq!((cov.s, cov.t, cov.n), (150, 300, 300));
    }
}
