//! Limit laws: densities, atoms, and moments by quadrature, for the
//! semicircle, Marčenko–Pastur, chiral and chiral-squared laws.
//!
//! With `a, b = 1 ∓ 2 sqrt(κ(1-κ))` the chiral-squared law is
//! `|1-2κ| δ_0 + (1/(πx)) sqrt((x-a)(b-x)) dx` on `[a, b]`, and the chiral law
//! is its symmetric square-root pushforward, with density
//! `c/(π|x|) sqrt((x²-a)(b-x²))` on `sqrt a <= |x| <= sqrt b`. The constant
//! `c` is fixed by normalization; see [`pushforward_check`].

mod quadrature;

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{limit_moment, CombinatoricsError, MomentLaw};

pub use quadrature::{integrate, EdgePoint, Quadrature, QuadratureError};

/// The constant printed in front of the chiral density.
pub const PRINTED_CHIRAL_CONSTANT: f64 = 2.0;
/// The constant the pushforward of the chiral-squared law produces.
pub const CHIRAL_CONSTANT: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("parameter outside the law's domain: {0}")]
    ParameterDomain(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error("csv output failed: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LimitLaw {
    Semicircle,
    MarchenkoPastur { kappa: f64 },
    Chiral { kappa: f64 },
    ChiralSquared { kappa: f64 },
}

impl LimitLaw {
    pub fn validate(&self) -> Result<(), LimitError> {
        match *self {
            LimitLaw::Semicircle => Ok(()),
            LimitLaw::MarchenkoPastur { kappa } if kappa > 0.0 && kappa.is_finite() => Ok(()),
            LimitLaw::Chiral { kappa } | LimitLaw::ChiralSquared { kappa } if kappa > 0.0 && kappa < 1.0 => Ok(()),
            law => Err(LimitError::ParameterDomain(format!("{law:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            LimitLaw::Semicircle => "semicircle".into(),
            LimitLaw::MarchenkoPastur { kappa } => format!("mp({kappa})"),
            LimitLaw::Chiral { kappa } => format!("chiral({kappa})"),
            LimitLaw::ChiralSquared { kappa } => format!("chiral_squared({kappa})"),
        }
    }

    /// Weight of the point mass at 0.
    pub fn atom(&self) -> f64 {
        match *self {
            LimitLaw::Semicircle => 0.0,
            LimitLaw::MarchenkoPastur { kappa } => (1.0 - kappa).max(0.0),
            LimitLaw::Chiral { kappa } | LimitLaw::ChiralSquared { kappa } => (1.0 - 2.0 * kappa).abs(),
        }
    }

    /// Closed intervals carrying the density.
    pub fn support(&self) -> Vec<(f64, f64)> {
        match *self {
            LimitLaw::Semicircle => vec![(-2.0, 2.0)],
            LimitLaw::MarchenkoPastur { kappa } => {
                let r = kappa.sqrt();
                vec![((1.0 - r).powi(2), (1.0 + r).powi(2))]
            }
            LimitLaw::ChiralSquared { kappa } => {
                let (a, b) = chiral_edges(kappa);
                vec![(a, b)]
            }
            LimitLaw::Chiral { kappa } => {
                let (a, b) = chiral_edges(kappa);
                let (ra, rb) = (a.sqrt(), b.sqrt());
                vec![(-rb, -ra), (ra, rb)]
            }
        }
    }

    /// Density at a support point given with its edge distances.
    fn density_at(&self, p: EdgePoint) -> f64 {
        match *self {
            LimitLaw::Semicircle => (p.from_lo * p.to_hi).sqrt() / (2.0 * PI),
            // sqrt(4κ - (x-1-κ)²) = sqrt((x-lo)(hi-x))
            LimitLaw::MarchenkoPastur { .. } => (p.from_lo * p.to_hi).sqrt() / (2.0 * PI * p.x),
            LimitLaw::ChiralSquared { .. } => (p.from_lo * p.to_hi).sqrt() / (PI * p.x),
            LimitLaw::Chiral { kappa } => {
                // on the shell sqrt a <= |x| <= sqrt b; distances are to the
                // shell edges, which swap roles on the negative side
                let (a, b) = chiral_edges(kappa);
                let ax = p.x.abs();
                let (inner, outer) = if p.x >= 0.0 { (p.from_lo, p.to_hi) } else { (p.to_hi, p.from_lo) };
                let lower = inner * (ax + a.sqrt());
                let upper = outer * (ax + b.sqrt());
                CHIRAL_CONSTANT * (lower * upper).sqrt() / (PI * ax)
            }
        }
    }

    /// Moment of order `k` from the combinatorial formulas.
    pub fn exact_moment(&self, k: u32) -> Result<f64, LimitError> {
        self.validate()?;
        if k == 0 {
            return Ok(1.0);
        }
        Ok(match *self {
            LimitLaw::Semicircle => limit_moment(MomentLaw::Semicircle, k as u64)?,
            LimitLaw::MarchenkoPastur { kappa } => limit_moment(MomentLaw::MarchenkoPastur { kappa }, k as u64)?,
            LimitLaw::Chiral { kappa } => limit_moment(MomentLaw::Chiral { kappa }, k as u64)?,
            LimitLaw::ChiralSquared { kappa } => limit_moment(MomentLaw::Chiral { kappa }, 2 * k as u64)?,
        })
    }
}

fn chiral_edges(kappa: f64) -> (f64, f64) {
    let w = 2.0 * (kappa * (1.0 - kappa)).sqrt();
    ((1.0 - w).max(0.0), 1.0 + w)
}

/// Density at `x`; zero off the support. The atom is not included.
pub fn pdf(law: LimitLaw, x: f64) -> Result<f64, LimitError> {
    law.validate()?;
    for (lo, hi) in law.support() {
        if x > lo && x < hi {
            return Ok(law.density_at(EdgePoint { x, from_lo: x - lo, to_hi: hi - x }));
        }
    }
    Ok(0.0)
}

fn integrate_density(
    law: LimitLaw,
    weight: impl Fn(f64) -> f64 + Copy,
    upto: f64,
    tol: f64,
) -> Result<f64, LimitError> {
    let support = law.support();
    let share = tol / support.len() as f64;
    let mut total = 0.0;
    for (lo, hi) in support {
        let u1 = upto.min(hi);
        if u1 > lo {
            total += integrate(|p| weight(p.x) * law.density_at(p), lo, hi, lo, u1, share)?.value;
        }
    }
    Ok(total)
}

/// `∫ x^k dμ`: quadrature over the density plus the atom's share (only at
/// `k = 0`).
pub fn quad_moment(law: LimitLaw, k: u32, tol: f64) -> Result<f64, LimitError> {
    law.validate()?;
    let body = integrate_density(law, |x| x.powi(k as i32), f64::INFINITY, tol)?;
    Ok(body + if k == 0 { law.atom() } else { 0.0 })
}

/// `μ((-∞, x])`.
pub fn cdf(law: LimitLaw, x: f64, tol: f64) -> Result<f64, LimitError> {
    law.validate()?;
    let body = integrate_density(law, |_| 1.0, x, tol)?;
    Ok(body + if x >= 0.0 { law.atom() } else { 0.0 })
}

/// `(x, pdf(x))` on `points` equally spaced points of `[lo, hi]`.
pub fn density_curve(law: LimitLaw, lo: f64, hi: f64, points: usize) -> Result<Vec<(f64, f64)>, LimitError> {
    if points < 2 || !(lo < hi) {
        return Err(LimitError::ParameterDomain(format!("need >= 2 points on a nonempty range, got {points}")));
    }
    (0..points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            Ok((x, pdf(law, x)?))
        })
        .collect()
}

pub fn write_density_csv<W: Write>(curve: &[(f64, f64)], writer: W) -> Result<(), LimitError> {
    let err = |e: csv::Error| LimitError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "pdf"]).map_err(err)?;
    for (x, y) in curve {
        w.write_record(&[format!("{x:?}"), format!("{y:?}")]).map_err(err)?;
    }
    w.flush().map_err(|e| LimitError::Csv(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushforwardRow {
    pub l: u32,
    /// `∫ x^{2l} dμ_ch` with the fitted constant.
    pub chiral_even_moment: f64,
    /// `∫ x^l dμ_{ch,2}`.
    pub squared_moment: f64,
    /// The combinatorial value shared by both.
    pub exact: f64,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushforwardReport {
    pub kappa: f64,
    pub tol: f64,
    pub atom: f64,
    /// Mass of the absolutely continuous part of the chiral-squared law.
    pub squared_density_mass: f64,
    /// The constant `c` that gives the chiral density mass `1 - |1-2κ|`.
    pub fitted_constant: f64,
    pub printed_constant: f64,
    /// Total mass of the chiral law with the printed constant.
    pub printed_total_mass: f64,
    pub rows: Vec<PushforwardRow>,
    pub passed: bool,
    pub findings: Vec<String>,
}

/// Checks that the chiral law is the square-root pushforward of the
/// chiral-squared law: equal even/plain moments for `l = 1..=max_l`, and unit
/// mass. The density constant is fitted rather than assumed; a mismatch with
/// the printed constant is reported as a finding.
pub fn pushforward_check(kappa: f64, tol: f64, max_l: u32) -> Result<PushforwardReport, LimitError> {
    let squared = LimitLaw::ChiralSquared { kappa };
    let chiral = LimitLaw::Chiral { kappa };
    squared.validate()?;
    let atom = squared.atom();
    let squared_density_mass = quad_moment(squared, 0, tol)? - atom;
    // the chiral density is linear in its constant
    let unit_mass = (quad_moment(chiral, 0, tol)? - atom) / CHIRAL_CONSTANT;
    let fitted_constant = (1.0 - atom) / unit_mass;
    let printed_total_mass = atom + PRINTED_CHIRAL_CONSTANT * unit_mass;
    let scale = fitted_constant / CHIRAL_CONSTANT;

    let mut findings = Vec::new();
    let mut passed = true;
    if (squared_density_mass + atom - 1.0).abs() > 10.0 * tol {
        passed = false;
        findings.push(format!("chiral-squared total mass {} differs from 1", squared_density_mass + atom));
    }
    if (fitted_constant - PRINTED_CHIRAL_CONSTANT).abs() > 1e-6 {
        findings.push(format!(
            "fitted density constant {fitted_constant:.9} differs from the printed {PRINTED_CHIRAL_CONSTANT}; \
             with the printed constant the total mass is {printed_total_mass:.9}"
        ));
    }
    let mut rows = Vec::new();
    for l in 1..=max_l {
        let chiral_even_moment = scale * quad_moment(chiral, 2 * l, tol)?;
        let squared_moment = quad_moment(squared, l, tol)?;
        let exact = squared.exact_moment(l)?;
        let max_abs_error = (chiral_even_moment - exact).abs().max((squared_moment - exact).abs());
        // tolerance scales with the size of the moment
        if max_abs_error > 10.0 * tol * exact.max(1.0) {
            passed = false;
            findings.push(format!("order {l}: moment error {max_abs_error:e}"));
        }
        rows.push(PushforwardRow { l, chiral_even_moment, squared_moment, exact, max_abs_error });
    }
    Ok(PushforwardReport {
        kappa,
        tol,
        atom,
        squared_density_mass,
        fitted_constant,
        printed_constant: PRINTED_CHIRAL_CONSTANT,
        printed_total_mass,
        rows,
        passed,
        findings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::catalan;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pdf_examples() {
        assert!(close(pdf(LimitLaw::Semicircle, 0.0).unwrap(), 1.0 / PI, 1e-15));
        assert_eq!(pdf(LimitLaw::MarchenkoPastur { kappa: 1.0 }, 4.0).unwrap(), 0.0);
        assert_eq!(pdf(LimitLaw::Semicircle, 2.5).unwrap(), 0.0);
        assert_eq!(LimitLaw::Chiral { kappa: 0.5 }.atom(), 0.0);
        assert!(close(LimitLaw::ChiralSquared { kappa: 0.2 }.atom(), 0.6, 1e-15));
        assert!(pdf(LimitLaw::Chiral { kappa: 1.2 }, 0.5).is_err());
        assert!(pdf(LimitLaw::MarchenkoPastur { kappa: 0.0 }, 0.5).is_err());
    }

    #[test]
    fn densities_are_nonnegative_and_symmetric() {
        for law in [LimitLaw::Semicircle, LimitLaw::Chiral { kappa: 0.3 }, LimitLaw::Chiral { kappa: 0.5 }] {
            for i in 0..=400 {
                let x = -2.2 + 4.4 * i as f64 / 400.0;
                let (p, q) = (pdf(law, x).unwrap(), pdf(law, -x).unwrap());
                assert!(p >= 0.0);
                assert!(close(p, q, 1e-12 * p.max(1.0)), "{law:?} at {x}");
            }
        }
        for i in 0..=400 {
            let x = 6.0 * i as f64 / 400.0;
            assert!(pdf(LimitLaw::MarchenkoPastur { kappa: 2.0 }, x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        assert!(close(quad_moment(LimitLaw::Semicircle, 0, 1e-10).unwrap(), 1.0, 1e-10));
        assert!(close(quad_moment(LimitLaw::Semicircle, 4, 1e-10).unwrap(), 2.0, 1e-9));
        for k in 1..=10u32 {
            let even = quad_moment(LimitLaw::Semicircle, 2 * k, 1e-10).unwrap();
            let c = catalan(k as u64).to_string().parse::<f64>().unwrap();
            assert!(close(even, c, 1e-8), "k={k}: {even} vs {c}");
            assert!(close(quad_moment(LimitLaw::Semicircle, 2 * k - 1, 1e-10).unwrap(), 0.0, 1e-8));
        }
    }

    #[test]
    fn marchenko_pastur_moments_match_narayana_sums() {
        for kappa in [0.25, 0.5, 1.0, 2.0] {
            let law = LimitLaw::MarchenkoPastur { kappa };
            assert!(close(quad_moment(law, 0, 1e-10).unwrap(), 1.0, 1e-9), "mass at κ={kappa}");
            for k in 1..=8 {
                let q = quad_moment(law, k, 1e-10).unwrap();
                let exact = law.exact_moment(k).unwrap();
                assert!(close(q, exact, 1e-6), "κ={kappa} k={k}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn chiral_squared_moments_match() {
        for kappa in [0.2, 0.5, 0.8] {
            let law = LimitLaw::ChiralSquared { kappa };
            assert!(close(quad_moment(law, 0, 1e-10).unwrap(), 1.0, 1e-9));
            for l in 1..=6 {
                let q = quad_moment(law, l, 1e-8).unwrap();
                let exact = law.exact_moment(l).unwrap();
                assert!(close(q, exact, 1e-6), "κ={kappa} l={l}: {q} vs {exact}");
            }
        }
        let first = quad_moment(LimitLaw::ChiralSquared { kappa: 0.3 }, 1, 1e-10).unwrap();
        assert!(close(first, 0.42, 1e-9));
    }

    #[test]
    fn chiral_moments_match() {
        for kappa in [0.2, 0.5, 0.7] {
            let law = LimitLaw::Chiral { kappa };
            assert!(close(quad_moment(law, 0, 1e-10).unwrap(), 1.0, 1e-9), "κ={kappa}");
            for k in 1..=10 {
                let q = quad_moment(law, k, 1e-10).unwrap();
                assert!(close(q, law.exact_moment(k).unwrap(), 1e-8), "κ={kappa} k={k}");
            }
        }
    }

    #[test]
    fn cdf_examples() {
        assert!(close(cdf(LimitLaw::Semicircle, 0.0, 1e-10).unwrap(), 0.5, 1e-10));
        assert!(close(cdf(LimitLaw::Semicircle, 2.0, 1e-10).unwrap(), 1.0, 1e-10));
        assert_eq!(cdf(LimitLaw::Semicircle, -3.0, 1e-10).unwrap(), 0.0);
        let mp = LimitLaw::MarchenkoPastur { kappa: 0.3 };
        assert!(close(cdf(mp, 0.0, 1e-10).unwrap(), 0.7, 1e-12));
        assert!(close(cdf(mp, f64::INFINITY, 1e-10).unwrap(), 1.0, 1e-9));
        assert!(close(cdf(LimitLaw::Chiral { kappa: 0.3 }, 0.0, 1e-10).unwrap(), 0.5 + 0.2, 1e-9));
    }

    #[test]
    fn cdf_is_monotone_and_matches_pdf() {
        let tol = 1e-10;
        for law in [
            LimitLaw::Semicircle,
            LimitLaw::MarchenkoPastur { kappa: 0.5 },
            LimitLaw::MarchenkoPastur { kappa: 2.0 },
            LimitLaw::Chiral { kappa: 0.3 },
            LimitLaw::ChiralSquared { kappa: 0.5 },
        ] {
            let (lo, hi) = (-3.0, 7.0);
            let mut prev = 0.0;
            for i in 0..1000 {
                let x = lo + (hi - lo) * i as f64 / 999.0;
                let f = cdf(law, x, tol).unwrap();
                assert!(f >= prev - 1e-12, "{law:?} at {x}");
                prev = f;
            }
            let h = 1e-4;
            for x in [-1.3, -0.7, 0.35, 0.8, 1.1, 1.9, 2.6, 4.4] {
                let inside = law.support().iter().any(|&(a, b)| x - h > a && x + h < b);
                if !inside {
                    continue;
                }
                let diff = cdf(law, x + h, tol).unwrap() - cdf(law, x - h, tol).unwrap();
                assert!(close(diff, 2.0 * h * pdf(law, x).unwrap(), 10.0 * tol), "{law:?} at {x}");
            }
        }
    }

    #[test]
    fn pushforward_reports_the_constant() {
        let report = pushforward_check(0.5, 1e-10, 6).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(close(report.atom, 0.0, 1e-15));
        assert!(close(report.squared_density_mass, 1.0, 1e-9));
        assert!(close(report.fitted_constant, 1.0, 1e-8));
        assert!(close(report.printed_total_mass, 2.0, 1e-8));
        assert_eq!(report.findings.len(), 1);

        let report = pushforward_check(0.2, 1e-10, 6).unwrap();
        assert!(close(report.atom, 0.6, 1e-15));
        assert!(close(report.squared_density_mass, 0.4, 1e-9));
        assert!(close(report.fitted_constant, 1.0, 1e-8));
        assert!(close(report.printed_total_mass, 1.4, 1e-8));
        assert!(report.passed);
        assert!(pushforward_check(1.0, 1e-10, 2).is_err());
    }

    #[test]
    fn density_curve_csv() {
        let curve = density_curve(LimitLaw::Semicircle, -2.0, 2.0, 5).unwrap();
        assert_eq!(curve.len(), 5);
        assert_eq!(curve[0], (-2.0, 0.0));
        let mut buf = Vec::new();
        write_density_csv(&curve, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,pdf\n-2.0,0.0\n-1.0,"));
        assert!(density_curve(LimitLaw::Semicircle, 1.0, 0.0, 5).is_err());
    }
}
