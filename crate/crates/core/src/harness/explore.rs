use serde::Serialize;

use super::config::{ExperimentConfig, Mode};
use super::output::{num, OutputDir};
use super::HarnessError;
use crate::ensembles::{sample_matrix, verify_membership, HermitianMatrix};
use crate::limits::{density_curve, pushforward_check, quad_moment, write_density_csv, LimitLaw, PushforwardReport};
use crate::spectra::{eigenvalues, DEFAULT_TOL};

const DENSITY_TOL: f64 = 1e-10;

/// Parses `semicircle`, `mp`, `chiral` or `chiral_squared`; all but the
/// first need `kappa`.
pub fn parse_law(name: &str, kappa: Option<f64>) -> Result<LimitLaw, HarnessError> {
    let need = || kappa.ok_or_else(|| HarnessError::Config(format!("law `{name}` needs kappa")));
    let law = match name.trim().to_ascii_lowercase().as_str() {
        "semicircle" => LimitLaw::Semicircle,
        "mp" | "marchenko_pastur" => LimitLaw::MarchenkoPastur { kappa: need()? },
        "chiral" => LimitLaw::Chiral { kappa: need()? },
        "chiral_squared" => LimitLaw::ChiralSquared { kappa: need()? },
        other => return Err(HarnessError::Config(format!("unknown law `{other}`"))),
    };
    law.validate()?;
    Ok(law)
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub law: LimitLaw,
    pub range: (f64, f64),
    pub atom: f64,
    pub support: Vec<(f64, f64)>,
    /// Atom plus the integral of the density.
    pub total_mass: f64,
    #[serde(skip)]
    pub curve: Vec<(f64, f64)>,
    /// For the chiral laws: the pushforward and normalization check.
    pub pushforward: Option<PushforwardReport>,
}

impl DensityReport {
    pub fn write(&self, out: &OutputDir) -> Result<(), HarnessError> {
        out.write_csv("density.csv", |buf| Ok(write_density_csv(&self.curve, buf)?))?;
        out.write_json("density.json", self)?;
        Ok(())
    }

    pub fn summary(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "{}: atom {:.6}, total mass {:.9}, support {:?}",
            self.law.name(),
            self.atom,
            self.total_mass,
            self.support
        )];
        if let Some(p) = &self.pushforward {
            lines.push(format!(
                "pushforward check {}: fitted density constant {:.9}, printed {}",
                if p.passed { "PASS" } else { "FAIL" },
                p.fitted_constant,
                p.printed_constant
            ));
            lines.extend(p.findings.iter().map(|f| format!("finding: {f}")));
        }
        lines
    }
}

/// Density of `law` on `grid` equally spaced points. The range defaults to
/// the support padded by a tenth of its width.
pub fn density(law: LimitLaw, range: Option<(f64, f64)>, grid: usize) -> Result<DensityReport, HarnessError> {
    law.validate()?;
    let support = law.support();
    let range = match range {
        Some(r) => r,
        None => {
            let lo = support.iter().map(|s| s.0).fold(f64::INFINITY, f64::min).min(0.0);
            let hi = support.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            let pad = 0.1 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let curve = density_curve(law, range.0, range.1, grid)?;
    let total_mass = quad_moment(law, 0, DENSITY_TOL)?;
    let pushforward = match law {
        LimitLaw::Chiral { kappa } | LimitLaw::ChiralSquared { kappa } => {
            Some(pushforward_check(kappa, DENSITY_TOL, 6)?)
        }
        _ => None,
    };
    Ok(DensityReport { law, range, atom: law.atom(), support, total_mass, curve, pushforward })
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub target: String,
    pub n: usize,
    pub replicate: u64,
    pub dim: usize,
    /// Whether the matrix has the block pattern of its class (class mode).
    pub member: Option<bool>,
    pub trace: f64,
    pub frobenius_norm: f64,
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub matrix: HermitianMatrix,
}

impl SampleReport {
    pub fn write(&self, out: &OutputDir) -> Result<(), HarnessError> {
        out.write_csv("matrix.csv", |buf| Ok(self.matrix.write_csv(buf)?))?;
        let rows: Vec<Vec<String>> =
            self.eigenvalues.iter().enumerate().map(|(i, x)| vec![(i + 1).to_string(), num(*x)]).collect();
        out.write_table("spectrum.csv", &["index", "eigenvalue"], &rows)?;
        out.write_json("sample.json", self)?;
        Ok(())
    }
}

/// One matrix from the configuration at the largest ladder size, with its
/// spectrum.
pub fn sample(config: &ExperimentConfig, replicate: u64) -> Result<SampleReport, HarnessError> {
    config.validate()?;
    let n = config.largest_size();
    let (target, matrix, member) = match config.mode {
        Mode::Class => {
            let ens = config.ensemble(n)?;
            let m = sample_matrix(&ens, replicate)?;
            let member = verify_membership(&m, ens.class, ens.dims()?)?;
            (format!("class {}", ens.class), m, Some(member))
        }
        Mode::Covariance => ("sample covariance".to_string(), config.covariance(n)?.sample_gram(replicate)?, None),
    };
    let spectrum = eigenvalues(&matrix, DEFAULT_TOL)?;
    Ok(SampleReport {
        target,
        n,
        replicate,
        dim: matrix.dim(),
        member,
        trace: matrix.trace(),
        frobenius_norm: matrix.frobenius_norm(),
        eigenvalues: spectrum.values().to_vec(),
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::SymmetryClass;

    #[test]
    fn laws_parse() {
        assert_eq!(parse_law("semicircle", None).unwrap(), LimitLaw::Semicircle);
        assert!(parse_law("chiral", None).is_err());
        assert!(parse_law("chiral", Some(1.5)).is_err());
        assert!(parse_law("gumbel", None).is_err());
    }

    #[test]
    fn density_reports() {
        let r = density(LimitLaw::Semicircle, None, 101).unwrap();
        assert!((r.total_mass - 1.0).abs() < 1e-9);
        assert_eq!(r.curve.len(), 101);
        assert!(r.pushforward.is_none());
        let r = density(LimitLaw::Chiral { kappa: 0.5 }, Some((-2.5, 2.5)), 11).unwrap();
        assert!(r.pushforward.unwrap().passed);
    }

    #[test]
    fn sample_is_a_member() {
        let mut c = ExperimentConfig::for_class(SymmetryClass::DIII, vec![6]);
        c.extrapolate = false;
        let r = sample(&c, 3).unwrap();
        assert_eq!(r.dim, 12);
        assert_eq!(r.member, Some(true));
        assert_eq!(r.eigenvalues.len(), 12);
    }
}
