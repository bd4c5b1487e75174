//! Experiment plumbing behind the command-line tool: configuration,
//! reproducible output files, and the five commands (enumerate, compare,
//! check-deps, density, sample).

mod census;
mod compare;
mod config;
mod deps;
mod explore;
mod output;

use thiserror::Error;

pub use census::{enumerate, CensusRow, EnumerationReport};
pub use compare::{
    compare, ks_distance, ComparisonReport, ExtrapolatedRows, KsResult, MomentRow, SizeRows, KS_THRESHOLD,
    STDERR_FLOOR, Z_THRESHOLD,
};
pub use config::{DependenceSpec, ExperimentConfig, Mode};
pub use deps::{audit_family, check_deps, DependenceAudit, DEFAULT_AUDIT_LADDER};
pub use explore::{density, parse_law, sample, DensityReport, SampleReport};
pub use output::{OutputDir, RunHeader};

use crate::combinatorics::CombinatoricsError;
use crate::dependence::DependenceError;
use crate::ensembles::EnsembleError;
use crate::limits::LimitError;
use crate::spectra::SpectraError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no {law} comparison is defined for {target}")]
    UnknownPairing { target: String, law: String },
    #[error("dependence structure {structure} fails its condition audit")]
    Noncompliant { structure: String, audit: Box<DependenceAudit> },
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error(transparent)]
    Dependence(#[from] DependenceError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error("output failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Short machine-readable tag for failure records.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::UnknownPairing { .. } => "unknown_pairing",
            HarnessError::Noncompliant { .. } => "noncompliant_dependence",
            HarnessError::Combinatorics(_) => "combinatorics",
            HarnessError::Dependence(_) => "dependence",
            HarnessError::Ensemble(_) => "ensemble",
            HarnessError::Spectra(SpectraError::TooManyFailures { .. }) => "eigensolver_failure_budget",
            HarnessError::Spectra(_) => "spectra",
            HarnessError::Limit(_) => "limit",
            HarnessError::Io(_) | HarnessError::Csv(_) | HarnessError::Json(_) => "output",
        }
    }

    /// A JSON failure record: kind, message, and details where available.
    pub fn to_record(&self) -> serde_json::Value {
        let mut record = serde_json::json!({ "status": "error", "kind": self.kind(), "message": self.to_string() });
        if let HarnessError::Noncompliant { audit, .. } = self {
            record["audit"] = serde_json::to_value(audit.as_ref()).unwrap_or(serde_json::Value::Null);
        }
        record
    }
}
