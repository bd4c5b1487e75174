use std::io::Write;

use num_complex::Complex64;

use super::EnsembleError;

/// A dense Hermitian matrix, row-major. Every write goes through
/// [`HermitianMatrix::set`], which fills the mirrored entry with the exact
/// conjugate, so Hermiticity holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    /// Builds from row-major entries, rejecting anything not exactly Hermitian.
    pub fn from_rows(dim: usize, entries: Vec<Complex64>) -> Result<Self, EnsembleError> {
        if entries.len() != dim * dim {
            return Err(EnsembleError::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        let m = Self { dim, entries };
        for i in 0..dim {
            for j in i..dim {
                if m.get(i, j) != m.get(j, i).conj() {
                    return Err(EnsembleError::NotHermitian { row: i, col: j });
                }
            }
        }
        Ok(m)
    }

    /// Real symmetric matrix from row-major real entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self, EnsembleError> {
        Self::from_rows(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    /// Writes `(i, j) = v` and `(j, i) = conj(v)`. On the diagonal only the
    /// real part is kept.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        if i == j {
            self.entries[i * self.dim + i] = Complex64::new(v.re, 0.0);
        } else {
            self.entries[i * self.dim + j] = v;
            self.entries[j * self.dim + i] = v.conj();
        }
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Dense product with another matrix of the same size (for small oracles).
    pub fn matmul(&self, other: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for l in 0..d {
                let a = self.entries[i * d + l];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other[l * d + j];
                }
            }
        }
        out
    }

    /// `M v`.
    pub fn matmul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim..(i + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Writes the matrix as CSV, one matrix row per line, real and imaginary
    /// parts interleaved.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), EnsembleError> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (1..=self.dim).flat_map(|j| [format!("re_{j}"), format!("im_{j}")]).collect();
        w.write_record(&header)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .flat_map(|j| {
                    let z = self.get(i, j);
                    [format!("{:?}", z.re), format!("{:?}", z.im)]
                })
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
