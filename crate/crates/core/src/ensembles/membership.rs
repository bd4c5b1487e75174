use num_complex::Complex64;

use super::{ClassDims, EnsembleError, HermitianMatrix, SymmetryClass};

/// Exact structural check that `m` lies in the matrix space of `class`.
pub fn verify_membership(m: &HermitianMatrix, class: SymmetryClass, dims: ClassDims) -> Result<bool, EnsembleError> {
    let expected = match (class.is_chiral(), dims) {
        (false, ClassDims::Square { .. }) | (true, ClassDims::Chiral { .. }) => dims.dim(class),
        _ => return Err(EnsembleError::InvalidConfig(format!("class {class} does not take dimensions {dims:?}"))),
    };
    if m.dim() != expected {
        return Err(EnsembleError::DimensionMismatch { expected, found: m.dim() });
    }
    if !m.is_hermitian() {
        return Ok(false);
    }
    let v = View { m };
    Ok(match dims {
        ClassDims::Square { n } => square_class(&v, class, n),
        ClassDims::Chiral { s, t } => chiral_class(&v, class, s, t),
    })
}

struct View<'a> {
    m: &'a HermitianMatrix,
}

impl View<'_> {
    /// Block of size `rows x cols` at offset `(r0, c0)`, as a closure-friendly check.
    fn all(&self, r0: usize, c0: usize, rows: usize, cols: usize, f: impl Fn(usize, usize, Complex64) -> bool) -> bool {
        (0..rows).all(|a| (0..cols).all(|b| f(a, b, self.m.get(r0 + a, c0 + b))))
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.m.get(i, j)
    }
}

fn is_zero(z: Complex64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

fn square_class(v: &View, class: SymmetryClass, n: usize) -> bool {
    let everywhere = |f: &dyn Fn(Complex64) -> bool| v.all(0, 0, v.m.dim(), v.m.dim(), |_, _, z| f(z));
    match class {
        SymmetryClass::A => true,
        SymmetryClass::AI => everywhere(&|z| z.im == 0.0),
        // Hermitian and purely imaginary forces skew symmetry with zero diagonal
        SymmetryClass::BD => everywhere(&|z| z.re == 0.0),
        SymmetryClass::AII => {
            v.all(n, n, n, n, |a, b, z| z == v.at(a, b).conj())
                && v.all(n, 0, n, n, |a, b, z| z == -v.at(a, n + b).conj())
                && v.all(0, n, n, n, |a, b, z| z == -v.at(b, n + a))
        }
        SymmetryClass::DIII => {
            everywhere(&|z| z.re == 0.0)
                && v.all(0, n, n, n, |a, b, z| z == -v.at(b, n + a))
                && v.all(n, 0, n, n, |a, b, z| z == v.at(a, n + b))
                && v.all(n, n, n, n, |a, b, z| z == -v.at(a, b))
        }
        SymmetryClass::C => {
            v.all(0, n, n, n, |a, b, z| z == v.at(b, n + a))
                && v.all(n, 0, n, n, |a, b, z| z == v.at(a, n + b).conj())
                && v.all(n, n, n, n, |a, b, z| z == -v.at(a, b).conj())
        }
        SymmetryClass::CI => {
            everywhere(&|z| z.im == 0.0)
                && v.all(0, n, n, n, |a, b, z| z == v.at(b, n + a))
                && v.all(n, 0, n, n, |a, b, z| z == v.at(a, n + b))
                && v.all(n, n, n, n, |a, b, z| z == -v.at(a, b))
        }
        SymmetryClass::AIII | SymmetryClass::BDI | SymmetryClass::CII => false,
    }
}

fn chiral_class(v: &View, class: SymmetryClass, s: usize, t: usize) -> bool {
    let d = class.delta();
    let (top, bottom) = (d * s, d * t);
    let zero_diagonal_blocks =
        v.all(0, 0, top, top, |_, _, z| is_zero(z)) && v.all(top, top, bottom, bottom, |_, _, z| is_zero(z));
    if !zero_diagonal_blocks {
        return false;
    }
    match class {
        SymmetryClass::AIII => true,
        SymmetryClass::BDI => v.all(0, top, s, t, |_, _, z| z.re == 0.0),
        // Y = [[U, V], [-conj V, conj U]]
        SymmetryClass::CII => {
            v.all(s, top, s, t, |a, b, z| z == -v.at(a, top + t + b).conj())
                && v.all(s, top + t, s, t, |a, b, z| z == v.at(a, top + b).conj())
        }
        _ => false,
    }
}
