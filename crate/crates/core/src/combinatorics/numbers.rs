//! Exact Catalan and Narayana numbers, and the limit-law moment sequences
//! assembled from them.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::CombinatoricsError;

/// `C(n, r)` in exact arithmetic; zero when `r > n`.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// The `k`-th Catalan number `C(2k, k) / (k + 1)`.
pub fn catalan(k: u64) -> BigUint {
    binomial(2 * k, k) / (k + 1)
}

/// The Narayana number `N(k, j) = C(k, j) C(k, j-1) / k`, the number of
/// noncrossing partitions of `{1..=k}` with `j` blocks.
pub fn narayana(k: u64, j: u64) -> Result<BigUint, CombinatoricsError> {
    if k == 0 || j == 0 || j > k {
        return Err(CombinatoricsError::OutOfRange(format!("narayana({k}, {j}) needs 1 <= j <= k")));
    }
    Ok(binomial(k, j) * binomial(k, j - 1) / k)
}

/// Limit laws whose moments are known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum MomentLaw {
    /// Density `sqrt(4 - x^2) / 2π` on `[-2, 2]`.
    Semicircle,
    /// Marčenko–Pastur with ratio `kappa`: `m_k = Σ_i N(k,i) κ^i`.
    MarchenkoPastur { kappa: f64 },
    /// Sample-covariance limit with row ratio `kappa` and column ratio `mu`,
    /// total mass `mu` under the `1/n` normalization.
    General { kappa: f64, mu: f64 },
    /// Eigenvalue limit of the chiral classes with block ratio `kappa`.
    Chiral { kappa: f64 },
}

impl MomentLaw {
    pub fn validate(&self) -> Result<(), CombinatoricsError> {
        let bad = |msg: String| Err(CombinatoricsError::ParameterDomain(msg));
        match *self {
            MomentLaw::Semicircle => Ok(()),
            MomentLaw::MarchenkoPastur { kappa } if !(kappa > 0.0 && kappa.is_finite()) => {
                bad(format!("Marčenko–Pastur needs kappa > 0, got {kappa}"))
            }
            MomentLaw::General { kappa, mu } if !(kappa > 0.0 && mu > 0.0 && kappa.is_finite() && mu.is_finite()) => {
                bad(format!("general law needs kappa, mu > 0, got ({kappa}, {mu})"))
            }
            MomentLaw::Chiral { kappa } if !(kappa > 0.0 && kappa < 1.0) => {
                bad(format!("chiral law needs 0 < kappa < 1, got {kappa}"))
            }
            _ => Ok(()),
        }
    }

    /// Total mass of the limit measure.
    pub fn mass(&self) -> f64 {
        match *self {
            MomentLaw::General { mu, .. } => mu,
            _ => 1.0,
        }
    }
}

/// The `k`-th moment (`k >= 1`) of `law`. Counting is exact; the conversion
/// to floating point happens term by term at the end.
pub fn limit_moment(law: MomentLaw, k: u64) -> Result<f64, CombinatoricsError> {
    law.validate()?;
    if k == 0 {
        return Err(CombinatoricsError::OutOfRange("moment order must be at least 1".into()));
    }
    let weighted = |order: u64, weight: &dyn Fn(u64) -> f64| -> Result<f64, CombinatoricsError> {
        let mut sum = 0.0;
        for j in 1..=order {
            sum += to_f64(&narayana(order, j)?) * weight(j);
        }
        Ok(sum)
    };
    match law {
        MomentLaw::Semicircle => Ok(if k % 2 == 1 { 0.0 } else { to_f64(&catalan(k / 2)) }),
        MomentLaw::MarchenkoPastur { kappa } => weighted(k, &|i| kappa.powi(i as i32)),
        MomentLaw::General { kappa, mu } => weighted(k, &|i| kappa.powi(i as i32) * mu.powi((k - i + 1) as i32)),
        MomentLaw::Chiral { kappa } => {
            if k % 2 == 1 {
                return Ok(0.0);
            }
            let l = k / 2;
            let s = weighted(l, &|j| kappa.powi(j as i32) * (1.0 - kappa).powi((l - j + 1) as i32))?;
            Ok(2.0 * s)
        }
    }
}

/// Moments `1..=k_max` of a law together with its total mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVector {
    /// `values[i]` is the moment of order `i + 1`.
    pub values: Vec<f64>,
    pub mass: f64,
}

impl MomentVector {
    pub fn of_law(law: MomentLaw, k_max: u64) -> Result<Self, CombinatoricsError> {
        let values = (1..=k_max).map(|k| limit_moment(law, k)).collect::<Result<_, _>>()?;
        Ok(Self { values, mass: law.mass() })
    }

    /// Moment of order `k` (1-based).
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }
}

fn to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: &BigUint) -> u64 {
        n.to_u64().unwrap()
    }

    #[test]
    fn catalan_values() {
        let expected = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (k, &c) in expected.iter().enumerate() {
            assert_eq!(u(&catalan(k as u64)), c);
        }
        // exact far past the f64 integer range
        assert_eq!(catalan(30).to_string(), "3814986502092304");
        assert_eq!(catalan(40).to_string(), "2622127042276492108820");
    }

    #[test]
    fn catalan_satisfies_segner_recurrence() {
        let mut seq = vec![BigUint::one()];
        for k in 0..60usize {
            let next: BigUint = (0..=k).map(|i| &seq[i] * &seq[k - i]).sum();
            seq.push(next);
        }
        for (k, c) in seq.iter().enumerate() {
            assert_eq!(&catalan(k as u64), c, "k = {k}");
        }
    }

    #[test]
    fn narayana_values_and_errors() {
        assert_eq!(u(&narayana(3, 2).unwrap()), 3);
        assert_eq!(u(&narayana(4, 2).unwrap()), 6);
        for k in 1..20 {
            assert_eq!(u(&narayana(k, 1).unwrap()), 1);
        }
        assert!(narayana(4, 0).is_err());
        assert!(narayana(4, 5).is_err());
        assert!(narayana(0, 0).is_err());
    }

    #[test]
    fn narayana_rows_sum_to_catalan_and_are_symmetric() {
        for k in 1..=10u64 {
            let row: Vec<BigUint> = (1..=k).map(|j| narayana(k, j).unwrap()).collect();
            assert_eq!(row.iter().sum::<BigUint>(), catalan(k));
            for j in 1..=k {
                assert_eq!(row[(j - 1) as usize], row[(k - j) as usize]);
            }
        }
    }

    #[test]
    fn limit_moment_examples() {
        assert_eq!(limit_moment(MomentLaw::Semicircle, 6).unwrap(), 5.0);
        assert_eq!(limit_moment(MomentLaw::MarchenkoPastur { kappa: 1.0 }, 3).unwrap(), 5.0);
        let c = limit_moment(MomentLaw::Chiral { kappa: 0.5 }, 2).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        let c = limit_moment(MomentLaw::Chiral { kappa: 0.3 }, 2).unwrap();
        assert!((c - 2.0 * 0.3 * 0.7).abs() < 1e-15);
        assert_eq!(limit_moment(MomentLaw::General { kappa: 1.0, mu: 1.0 }, 2).unwrap(), 2.0);
        let g = limit_moment(MomentLaw::General { kappa: 0.5, mu: 1.0 }, 2).unwrap();
        assert!((g - 0.75).abs() < 1e-15);
        let g = limit_moment(MomentLaw::General { kappa: 0.5, mu: 0.5 }, 1).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
    }

    #[test]
    fn odd_moments_of_symmetric_laws_vanish() {
        for k in (1..=15).step_by(2) {
            assert_eq!(limit_moment(MomentLaw::Semicircle, k).unwrap(), 0.0);
            assert_eq!(limit_moment(MomentLaw::Chiral { kappa: 0.2 }, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn general_law_with_unit_mu_is_marchenko_pastur() {
        for &kappa in &[0.25, 0.5, 1.0, 2.0] {
            for k in 1..=10 {
                assert_eq!(
                    limit_moment(MomentLaw::General { kappa, mu: 1.0 }, k).unwrap(),
                    limit_moment(MomentLaw::MarchenkoPastur { kappa }, k).unwrap(),
                );
            }
        }
    }

    #[test]
    fn parameter_domain_errors() {
        assert!(limit_moment(MomentLaw::MarchenkoPastur { kappa: 0.0 }, 2).is_err());
        assert!(limit_moment(MomentLaw::General { kappa: 1.0, mu: -1.0 }, 2).is_err());
        assert!(limit_moment(MomentLaw::Chiral { kappa: 1.0 }, 2).is_err());
        assert!(limit_moment(MomentLaw::Chiral { kappa: f64::NAN }, 2).is_err());
        assert!(limit_moment(MomentLaw::Semicircle, 0).is_err());
    }

    #[test]
    fn moment_vector_indexing() {
        let v = MomentVector::of_law(MomentLaw::Semicircle, 6).unwrap();
        assert_eq!(v.values, vec![0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);
        assert_eq!(v.get(4), Some(2.0));
        assert_eq!(v.get(0), None);
        assert_eq!(v.mass, 1.0);
    }
}
