//! Eigenvalues of Hermitian matrices, empirical spectral moments, Monte Carlo
//! averages over replicates, and pooled histograms.

use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ensembles::{sample_matrix, CovarianceConfig, EnsembleConfig, EnsembleError, HermitianMatrix};

/// Default relative tolerance for the eigensolver checks.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest moment order the class estimators accept.
pub const MAX_CLASS_MOMENT: usize = 12;
/// Largest moment order the sample-covariance estimator accepts.
pub const MAX_COVARIANCE_MOMENT: usize = 8;
/// Largest side the sample-covariance estimator accepts.
pub const MAX_COVARIANCE_SIDE: usize = 400;
/// Failed replicates tolerated, as a fraction of the requested count.
pub const FAILURE_BUDGET: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("tolerance {0} is below 100 machine epsilons")]
    InvalidTolerance(f64),
    #[error("eigensolver did not converge on a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },
    #[error("{what} check failed: error {error:e} exceeds bound {bound:e}")]
    IdentityCheck { what: &'static str, error: f64, bound: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{failures} of {replicates} replicates failed, over the failure budget")]
    TooManyFailures { failures: usize, replicates: usize },
    #[error("no spectra to bin")]
    EmptyInput,
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

/// Eigenvalues in nondecreasing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts `values`; rejects non-finite entries.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self, SpectraError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpectraError::InvalidArgument("non-finite eigenvalue".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Point masses of weight `1/normalization_n` at each eigenvalue.
    pub fn empirical_distribution(&self, normalization_n: usize) -> EmpiricalDistribution {
        let w = 1.0 / normalization_n as f64;
        EmpiricalDistribution { atoms: self.values.iter().map(|&x| (x, w)).collect(), normalization: w }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub atoms: Vec<(f64, f64)>,
    pub normalization: f64,
}

impl EmpiricalDistribution {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

fn check_tol(tol: f64) -> Result<(), SpectraError> {
    if !(tol >= 100.0 * f64::EPSILON) {
        return Err(SpectraError::InvalidTolerance(tol));
    }
    Ok(())
}

fn is_real(m: &HermitianMatrix) -> bool {
    m.entries().iter().all(|z| z.im == 0.0)
}

/// All eigenvalues of `m`, checked against the trace and Frobenius identities
/// (`|Σλ - tr M|` and `|Σλ² - ‖M‖²|` within `10 tol dim` times `‖M‖` and
/// `‖M‖²`). Real symmetric input takes the real solver.
pub fn eigenvalues(m: &HermitianMatrix, tol: f64) -> Result<Spectrum, SpectraError> {
    check_tol(tol)?;
    let d = m.dim();
    let values = if is_real(m) {
        Mat::<f64>::from_fn(d, d, |i, j| m.get(i, j).re).self_adjoint_eigenvalues(Side::Lower)
    } else {
        Mat::<Complex64>::from_fn(d, d, |i, j| m.get(i, j)).self_adjoint_eigenvalues(Side::Lower)
    }
    .map_err(|_| SpectraError::NoConvergence { dim: d })?;
    let spectrum = Spectrum::from_values(values)?;
    check_identities(m, &spectrum, tol)?;
    Ok(spectrum)
}

fn check_identities(m: &HermitianMatrix, spectrum: &Spectrum, tol: f64) -> Result<(), SpectraError> {
    let fro = m.frobenius_norm();
    let slack = 10.0 * tol * m.dim().max(1) as f64;
    let trace_err = (neumaier_sum(spectrum.values.iter().copied()) - m.trace()).abs();
    let bound = slack * fro;
    if trace_err > bound {
        return Err(SpectraError::IdentityCheck { what: "trace", error: trace_err, bound });
    }
    let square_err = (neumaier_sum(spectrum.values.iter().map(|x| x * x)) - fro * fro).abs();
    let bound = slack * fro * fro;
    if square_err > bound {
        return Err(SpectraError::IdentityCheck { what: "Frobenius", error: square_err, bound });
    }
    Ok(())
}

/// Eigenvalues with unit eigenvectors (as columns), residual-checked.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub spectrum: Spectrum,
    /// `vectors[j]` belongs to `spectrum.values()[j]`.
    pub vectors: Vec<Vec<Complex64>>,
    /// `max_j ‖M v_j - λ_j v_j‖ / ‖M‖₂`
    pub max_relative_residual: f64,
}

pub fn eigen_decomposition(m: &HermitianMatrix, tol: f64) -> Result<EigenDecomposition, SpectraError> {
    check_tol(tol)?;
    let d = m.dim();
    let a = Mat::<Complex64>::from_fn(d, d, |i, j| m.get(i, j));
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| SpectraError::NoConvergence { dim: d })?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let u = evd.U();
    let vectors: Vec<Vec<Complex64>> = (0..d).map(|j| (0..d).map(|i| u[(i, j)]).collect()).collect();
    let spectrum = Spectrum { values };
    check_identities(m, &spectrum, tol)?;
    let norm = spectrum.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let mut worst = 0.0f64;
    for (lambda, v) in spectrum.values.iter().zip(&vectors) {
        let mv = m.matmul_vec(v);
        let r = mv.iter().zip(v).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(if norm > 0.0 { r / norm } else { r });
    }
    if worst > tol {
        return Err(SpectraError::IdentityCheck { what: "residual", error: worst, bound: tol });
    }
    Ok(EigenDecomposition { spectrum, vectors, max_relative_residual: worst })
}

/// `(1/normalization_n) Σ_j λ_j^k`.
pub fn empirical_moment(spectrum: &Spectrum, k: u32, normalization_n: usize) -> f64 {
    neumaier_sum(spectrum.values.iter().map(|x| x.powi(k as i32))) / normalization_n as f64
}

/// Compensated (Neumaier) summation; the result does not depend on how a
/// parallel map ordered its work as long as the inputs arrive in order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

/// Monte Carlo means of the empirical moments `1..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    /// Size parameter the sampler was run at.
    pub n: usize,
    pub dim: usize,
    pub normalization: usize,
    pub replicates: usize,
    pub failures: usize,
    /// `means[k-1]` is the mean of the order-`k` moment.
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
}

impl MomentEstimate {
    pub fn k_max(&self) -> usize {
        self.means.len()
    }

    /// `(mean, stderr)` of order `k` (1-based).
    pub fn get(&self, k: usize) -> Option<(f64, f64)> {
        let i = k.checked_sub(1)?;
        Some((*self.means.get(i)?, self.stderrs[i]))
    }

    /// CSV rows `k, mean, stderr`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SpectraError> {
        write_moment_table(writer, &self.means, &self.stderrs)
    }
}

pub(crate) fn write_moment_table<W: Write>(writer: W, means: &[f64], stderrs: &[f64]) -> Result<(), SpectraError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["k", "mean", "stderr"])?;
    for (i, (m, s)) in means.iter().zip(stderrs).enumerate() {
        w.write_record(&[(i + 1).to_string(), format!("{m:?}"), format!("{s:?}")])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn check_estimator_args(replicates: usize, k_max: usize, cap: usize) -> Result<(), SpectraError> {
    if replicates < 2 {
        return Err(SpectraError::InvalidArgument(format!("need at least 2 replicates, got {replicates}")));
    }
    if k_max == 0 || k_max > cap {
        return Err(SpectraError::InvalidArgument(format!("k_max must lie in 1..={cap}, got {k_max}")));
    }
    Ok(())
}

/// Spectra of independent replicates, in replicate order, with the
/// bookkeeping needed to turn them into moments.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub n: usize,
    pub dim: usize,
    /// Divisor of the empirical measure (the matrix dimension, or `n` for
    /// the rectangular convention).
    pub normalization: usize,
    pub replicates: usize,
    pub failures: usize,
    pub spectra: Vec<Spectrum>,
}

impl SpectrumSample {
    /// Means and standard errors of the empirical moments `1..=k_max`.
    pub fn moments(&self, k_max: usize) -> MomentEstimate {
        let rows: Vec<Vec<f64>> = self
            .spectra
            .iter()
            .map(|s| (1..=k_max as u32).map(|k| empirical_moment(s, k, self.normalization)).collect())
            .collect();
        let r = rows.len() as f64;
        let mut means = Vec::with_capacity(k_max);
        let mut stderrs = Vec::with_capacity(k_max);
        for i in 0..k_max {
            let mean = neumaier_sum(rows.iter().map(|row| row[i])) / r;
            let var = neumaier_sum(rows.iter().map(|row| (row[i] - mean).powi(2))) / (r - 1.0);
            means.push(mean);
            stderrs.push((var / r).sqrt());
        }
        MomentEstimate {
            n: self.n,
            dim: self.dim,
            normalization: self.normalization,
            replicates: self.replicates,
            failures: self.failures,
            means,
            stderrs,
        }
    }
}

/// Runs `sample` and the eigensolver for each replicate in parallel.
/// Sampling errors abort; eigensolver errors count against the failure
/// budget.
fn replicate_spectra<F>(replicates: usize, tol: f64, sample: F) -> Result<(Vec<Spectrum>, usize), SpectraError>
where
    F: Fn(u64) -> Result<HermitianMatrix, EnsembleError> + Sync,
{
    if replicates < 2 {
        return Err(SpectraError::InvalidArgument(format!("need at least 2 replicates, got {replicates}")));
    }
    let outcomes: Vec<Result<Option<Spectrum>, EnsembleError>> =
        (0..replicates as u64).into_par_iter().map(|r| Ok(eigenvalues(&sample(r)?, tol).ok())).collect();
    let mut spectra = Vec::with_capacity(replicates);
    let mut failures = 0;
    for outcome in outcomes {
        match outcome? {
            Some(s) => spectra.push(s),
            None => failures += 1,
        }
    }
    if failures as f64 > FAILURE_BUDGET * replicates as f64 || spectra.len() < 2 {
        return Err(SpectraError::TooManyFailures { failures, replicates });
    }
    Ok((spectra, failures))
}

/// Eigenvalues of `replicates` class matrices, normalized by the dimension.
pub fn class_spectra(config: &EnsembleConfig, replicates: usize) -> Result<SpectrumSample, SpectraError> {
    let dim = config.dim()?;
    let (spectra, failures) = replicate_spectra(replicates, DEFAULT_TOL, |r| sample_matrix(config, r))?;
    Ok(SpectrumSample { n: config.n, dim, normalization: dim, replicates, failures, spectra })
}

/// Eigenvalues of `replicates` Gram matrices `X* X`, normalized by `n`.
pub fn covariance_spectra(config: &CovarianceConfig, replicates: usize) -> Result<SpectrumSample, SpectraError> {
    if config.s > MAX_COVARIANCE_SIDE || config.t > MAX_COVARIANCE_SIDE {
        return Err(SpectraError::InvalidArgument(format!(
            "s and t must not exceed {MAX_COVARIANCE_SIDE}, got {} x {}",
            config.s, config.t
        )));
    }
    config.validate()?;
    let (spectra, failures) = replicate_spectra(replicates, DEFAULT_TOL, |r| config.sample_gram(r))?;
    Ok(SpectrumSample { n: config.n, dim: config.t, normalization: config.n, replicates, failures, spectra })
}

/// Mean empirical moments of a class ensemble, normalized by the matrix
/// dimension. Replicates run in parallel; results are identical for any
/// thread count.
pub fn mean_empirical_moments(
    config: &EnsembleConfig,
    replicates: usize,
    k_max: usize,
) -> Result<MomentEstimate, SpectraError> {
    check_estimator_args(replicates, k_max, MAX_CLASS_MOMENT)?;
    Ok(class_spectra(config, replicates)?.moments(k_max))
}

/// Mean moments of `X* X` under the `1/n` normalization, so the total mass
/// of the empirical measure is `t/n`.
pub fn sample_covariance_moments(
    config: &CovarianceConfig,
    replicates: usize,
    k_max: usize,
) -> Result<MomentEstimate, SpectraError> {
    check_estimator_args(replicates, k_max, MAX_COVARIANCE_MOMENT)?;
    Ok(covariance_spectra(config, replicates)?.moments(k_max))
}

/// Two-size Richardson extrapolation in `1/n`: removes the leading `1/n`
/// finite-size bias, at the price of a larger standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolatedMoments {
    pub fine_n: usize,
    pub coarse_n: usize,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
}

pub fn extrapolate(fine: &MomentEstimate, coarse: &MomentEstimate) -> Result<ExtrapolatedMoments, SpectraError> {
    if coarse.n >= fine.n || coarse.k_max() != fine.k_max() {
        return Err(SpectraError::InvalidArgument(format!(
            "extrapolation needs a smaller coarse size and equal orders, got n = {} and {}",
            fine.n, coarse.n
        )));
    }
    let (n1, n0) = (fine.n as f64, coarse.n as f64);
    let (w1, w0) = (n1 / (n1 - n0), n0 / (n1 - n0));
    let means = fine.means.iter().zip(&coarse.means).map(|(a, b)| w1 * a - w0 * b).collect();
    let stderrs =
        fine.stderrs.iter().zip(&coarse.stderrs).map(|(a, b)| ((w1 * a).powi(2) + (w0 * b).powi(2)).sqrt()).collect();
    Ok(ExtrapolatedMoments { fine_n: fine.n, coarse_n: coarse.n, means, stderrs })
}

impl ExtrapolatedMoments {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SpectraError> {
        write_moment_table(writer, &self.means, &self.stderrs)
    }
}

/// Pooled eigenvalue histogram. Densities are normalized by the total number
/// of eigenvalues, so they integrate to one minus the out-of-range mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub out_of_range_mass: f64,
    pub total_count: usize,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    /// Mass of the bin containing `x`, if `x` is in range.
    pub fn mass_near(&self, x: f64) -> Option<f64> {
        let i = bin_index(x, self.edges[0], *self.edges.last()?, self.bins())?;
        Some(self.densities[i] * self.bin_width())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SpectraError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bin_lo", "bin_hi", "density"])?;
        for (i, d) in self.densities.iter().enumerate() {
            w.write_record(&[format!("{:?}", self.edges[i]), format!("{:?}", self.edges[i + 1]), format!("{d:?}")])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn bin_index(x: f64, lo: f64, hi: f64, bins: usize) -> Option<usize> {
    if !(x >= lo && x <= hi) {
        return None;
    }
    let i = ((x - lo) / (hi - lo) * bins as f64).floor() as usize;
    Some(i.min(bins - 1))
}

pub fn histogram(spectra: &[Spectrum], bins: usize, range: (f64, f64)) -> Result<Histogram, SpectraError> {
    let (lo, hi) = range;
    if bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(SpectraError::InvalidArgument(format!("need bins >= 1 and lo < hi, got {bins} on [{lo}, {hi}]")));
    }
    let total: usize = spectra.iter().map(Spectrum::dim).sum();
    if total == 0 {
        return Err(SpectraError::EmptyInput);
    }
    let mut counts = vec![0usize; bins];
    let mut outside = 0usize;
    for x in spectra.iter().flat_map(|s| s.values.iter().copied()) {
        match bin_index(x, lo, hi, bins) {
            Some(i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * width }).collect();
    let densities = counts.iter().map(|&c| c as f64 / (total as f64 * width)).collect();
    Ok(Histogram { edges, densities, out_of_range_mass: outside as f64 / total as f64, total_count: total })
}
