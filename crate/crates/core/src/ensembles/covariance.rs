//! Rectangular `s x t` matrices `X = (a(p,q) / sqrt n)` and their Gram
//! matrices `X* X`.

use num_complex::Complex64;

use super::{replicate_rng, EnsembleError, EntryDist, HermitianMatrix};
use crate::dependence::{DependenceFamily, Shape};

#[derive(Debug, Clone)]
pub struct CovarianceConfig {
    pub s: usize,
    pub t: usize,
    /// Normalization parameter; `s/n -> kappa`, `t/n -> mu`.
    pub n: usize,
    pub dist: EntryDist,
    pub dependence: DependenceFamily,
    pub seed: u64,
}

impl CovarianceConfig {
    pub fn new(
        s: usize,
        t: usize,
        n: usize,
        dist: EntryDist,
        dependence: impl Into<DependenceFamily>,
        seed: u64,
    ) -> Self {
        Self { s, t, n, dist, dependence: dependence.into(), seed }
    }

    /// `s = round(kappa n)`, `t = round(mu n)`.
    pub fn from_ratios(
        n: usize,
        kappa: f64,
        mu: f64,
        dist: EntryDist,
        dependence: impl Into<DependenceFamily>,
        seed: u64,
    ) -> Self {
        let side = |r: f64| (r * n as f64).round() as usize;
        Self::new(side(kappa), side(mu), n, dist, dependence, seed)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.s == 0 || self.t == 0 || self.n == 0 {
            return Err(EnsembleError::InvalidConfig(format!(
                "covariance sizes must be positive, got s = {}, t = {}, n = {}",
                self.s, self.t, self.n
            )));
        }
        Ok(())
    }

    /// `X`, row-major `s x t`, already divided by `sqrt n`. One draw per
    /// dependence class, classes met in row-major order.
    pub fn sample_factor(&self, replicate: u64) -> Result<Vec<Complex64>, EnsembleError> {
        self.validate()?;
        let structure = self.dependence.instantiate(Shape::Rectangular { s: self.s, t: self.t })?;
        let mut rng = replicate_rng(self.seed, self.n, replicate);
        let mut by_class: Vec<Option<Complex64>> = vec![None; self.s * self.t];
        let scale = 1.0 / (self.n as f64).sqrt();
        let mut x = Vec::with_capacity(self.s * self.t);
        for p in 1..=self.s {
            for q in 1..=self.t {
                let (rp, rq) = structure.class_of(p, q);
                let slot = &mut by_class[(rp - 1) * self.t + (rq - 1)];
                let a = *slot.get_or_insert_with(|| self.dist.sample(&mut rng));
                x.push(a * scale);
            }
        }
        Ok(x)
    }

    /// The `t x t` matrix `X* X`.
    pub fn sample_gram(&self, replicate: u64) -> Result<HermitianMatrix, EnsembleError> {
        let x = self.sample_factor(replicate)?;
        Ok(gram(&x, self.s, self.t))
    }
}

/// `X* X` for row-major `X` of size `s x t`; only the upper triangle is
/// computed, the rest is mirrored.
pub(crate) fn gram(x: &[Complex64], s: usize, t: usize) -> HermitianMatrix {
    let mut g = HermitianMatrix::zeros(t);
    let mut acc = vec![Complex64::new(0.0, 0.0); t];
    for i in 0..t {
        acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for p in 0..s {
            let row = &x[p * t..(p + 1) * t];
            let xi = row[i].conj();
            for (a, x) in acc[i..].iter_mut().zip(&row[i..]) {
                *a += xi * x;
            }
        }
        for (j, a) in acc.iter().enumerate().skip(i) {
            g.set(i, j, *a);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::StructureName;

    #[test]
    fn gram_by_hand() {
        let c = |re, im| Complex64::new(re, im);
        // X = [[1, i], [0, 2]]
        let g = gram(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(2.0, 0.0)], 2, 2);
        assert_eq!(g.entries(), &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(5.0, 0.0)]);
    }

    #[test]
    fn factor_is_scaled_and_reproducible() {
        let cfg = CovarianceConfig::new(3, 5, 4, EntryDist::Rademacher, StructureName::MpStandard, 2);
        let x = cfg.sample_factor(0).unwrap();
        assert_eq!(x.len(), 15);
        assert!(x.iter().all(|z| z.re.abs() == 0.5 && z.im == 0.0));
        assert_eq!(x, cfg.sample_factor(0).unwrap());
        assert_ne!(x, cfg.sample_factor(1).unwrap());
        assert_eq!(cfg.sample_gram(0).unwrap().dim(), 5);
    }

    #[test]
    fn dependence_is_respected() {
        let cfg = CovarianceConfig::new(4, 4, 4, EntryDist::RealGaussian, StructureName::MpTile { r: 2 }, 2);
        let x = cfg.sample_factor(0).unwrap();
        assert_eq!(x[0], x[1]);
        assert_eq!(x[0], x[4 + 1]);
        assert_ne!(x[0], x[2]);
    }

    #[test]
    fn ratios_and_validation() {
        let cfg = CovarianceConfig::from_ratios(10, 0.5, 1.0, EntryDist::RealGaussian, StructureName::MpStandard, 0);
        assert_eq!((cfg.s, cfg.t), (5, 10));
        let bad = CovarianceConfig::new(0, 3, 3, EntryDist::RealGaussian, StructureName::MpStandard, 0);
        assert!(bad.sample_factor(0).is_err());
    }
}
