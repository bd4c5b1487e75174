//! Entry fields (one value per dependence class of each independent
//! subblock) and their assembly into class matrices.

use num_complex::Complex64;

use super::{ClassDims, EnsembleConfig, EnsembleError, HermitianMatrix, SymmetryClass};
use crate::dependence::{DependenceStructure, Shape};

/// Symmetry type of an independent subblock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Complex Hermitian; the diagonal is real.
    Hermitian,
    RealSymmetric,
    /// Complex skew-symmetric; the diagonal is zero.
    ComplexSkew,
    /// Purely imaginary skew-symmetric (hence Hermitian).
    ImaginarySkew,
    ComplexSymmetric,
    /// Unconstrained rectangular.
    Complex,
    /// Purely imaginary rectangular.
    Imaginary,
}

impl BlockKind {
    fn is_square(&self) -> bool {
        !matches!(self, BlockKind::Complex | BlockKind::Imaginary)
    }

    fn has_free_diagonal(&self) -> bool {
        !matches!(self, BlockKind::ComplexSkew | BlockKind::ImaginarySkew)
    }

    /// Free positions (1-based) in canonical order: row-major over the upper
    /// triangle of square blocks, over everything for rectangular ones.
    fn free_positions(&self, rows: usize, cols: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 1..=rows {
            let first = if !self.is_square() {
                1
            } else if self.has_free_diagonal() {
                p
            } else {
                p + 1
            };
            out.extend((first..=cols).map(|q| (p, q)));
        }
        out
    }

    /// Value at a free position given its class value; diagonal entries and
    /// entries of real or imaginary blocks go through the projection.
    fn entry(&self, diagonal: bool, z: Complex64, projection: RealProjection) -> Complex64 {
        let real = |z| Complex64::new(projection.apply(z), 0.0);
        match self {
            BlockKind::Hermitian if diagonal => real(z),
            BlockKind::RealSymmetric => real(z),
            BlockKind::ImaginarySkew | BlockKind::Imaginary => Complex64::new(0.0, projection.apply(z)),
            _ => z,
        }
    }

    /// Entry at the mirrored position of a square block.
    fn mirror(&self, v: Complex64) -> Complex64 {
        match self {
            BlockKind::Hermitian => v.conj(),
            BlockKind::ComplexSkew | BlockKind::ImaginarySkew => -v,
            _ => v,
        }
    }
}

/// How a class value becomes a real number where the class symmetry forces a
/// real (or purely imaginary) entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealProjection {
    RealPart,
    /// `sqrt 2 * Re z`: keeps a unit second moment for complex laws whose
    /// real part carries only half the variance.
    ScaledRealPart,
}

impl RealProjection {
    fn apply(&self, z: Complex64) -> f64 {
        match self {
            RealProjection::RealPart => z.re,
            RealProjection::ScaledRealPart => std::f64::consts::SQRT_2 * z.re,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Transform {
    Id,
    Conj,
    Neg,
    NegConj,
}

impl Transform {
    fn apply(&self, z: Complex64) -> Complex64 {
        match self {
            Transform::Id => z,
            Transform::Conj => z.conj(),
            Transform::Neg => -z,
            Transform::NegConj => -z.conj(),
        }
    }
}

/// Where a block lands in the class matrix (0-based offsets). Only the part
/// on or above the main diagonal is needed.
struct Placement {
    block: usize,
    row: usize,
    col: usize,
    transform: Transform,
}

struct Layout {
    blocks: Vec<(BlockKind, Shape)>,
    placements: Vec<Placement>,
}

fn layout(class: SymmetryClass, dims: ClassDims) -> Result<Layout, EnsembleError> {
    use BlockKind::*;
    use Transform::*;
    let at = |block, row, col, transform| Placement { block, row, col, transform };
    let square = |n| Shape::Square { n };
    Ok(match (class, dims) {
        (SymmetryClass::A, ClassDims::Square { n }) => {
            Layout { blocks: vec![(Hermitian, square(n))], placements: vec![at(0, 0, 0, Id)] }
        }
        (SymmetryClass::AI, ClassDims::Square { n }) => {
            Layout { blocks: vec![(RealSymmetric, square(n))], placements: vec![at(0, 0, 0, Id)] }
        }
        (SymmetryClass::BD, ClassDims::Square { n }) => {
            Layout { blocks: vec![(ImaginarySkew, square(n))], placements: vec![at(0, 0, 0, Id)] }
        }
        // [[X1, X2], [-conj X2, conj X1]]
        (SymmetryClass::AII, ClassDims::Square { n }) => Layout {
            blocks: vec![(Hermitian, square(n)), (ComplexSkew, square(n))],
            placements: vec![at(0, 0, 0, Id), at(1, 0, n, Id), at(0, n, n, Conj)],
        },
        // [[X1, X2], [X2, -X1]]
        (SymmetryClass::DIII, ClassDims::Square { n }) => Layout {
            blocks: vec![(ImaginarySkew, square(n)), (ImaginarySkew, square(n))],
            placements: vec![at(0, 0, 0, Id), at(1, 0, n, Id), at(0, n, n, Neg)],
        },
        // [[X1, X2], [conj X2, -conj X1]]
        (SymmetryClass::C, ClassDims::Square { n }) => Layout {
            blocks: vec![(Hermitian, square(n)), (ComplexSymmetric, square(n))],
            placements: vec![at(0, 0, 0, Id), at(1, 0, n, Id), at(0, n, n, NegConj)],
        },
        (SymmetryClass::CI, ClassDims::Square { n }) => Layout {
            blocks: vec![(RealSymmetric, square(n)), (RealSymmetric, square(n))],
            placements: vec![at(0, 0, 0, Id), at(1, 0, n, Id), at(0, n, n, Neg)],
        },
        // [[0, X], [X*, 0]]
        (SymmetryClass::AIII, ClassDims::Chiral { s, t }) => {
            Layout { blocks: vec![(Complex, Shape::Rectangular { s, t })], placements: vec![at(0, 0, s, Id)] }
        }
        (SymmetryClass::BDI, ClassDims::Chiral { s, t }) => {
            Layout { blocks: vec![(Imaginary, Shape::Rectangular { s, t })], placements: vec![at(0, 0, s, Id)] }
        }
        // [[0, Y], [Y*, 0]] with Y = [[U, V], [-conj V, conj U]] of size 2s x 2t
        (SymmetryClass::CII, ClassDims::Chiral { s, t }) => {
            let y = 2 * s;
            Layout {
                blocks: vec![(Complex, Shape::Rectangular { s, t }), (Complex, Shape::Rectangular { s, t })],
                placements: vec![at(0, 0, y, Id), at(1, 0, y + t, Id), at(1, s, y, NegConj), at(0, s, y + t, Conj)],
            }
        }
        (class, dims) => {
            return Err(EnsembleError::InvalidConfig(format!("class {class} does not take dimensions {dims:?}")))
        }
    })
}

#[derive(Debug, Clone)]
struct BlockField {
    kind: BlockKind,
    structure: DependenceStructure,
    /// Indexed by the position of the class representative.
    values: Vec<Option<Complex64>>,
}

impl BlockField {
    fn slot(&self, p: usize, q: usize) -> usize {
        let (rp, rq) = self.structure.class_of(p, q);
        (rp - 1) * self.structure.shape().cols() + (rq - 1)
    }
}

/// One value per dependence class of each independent subblock of a class.
#[derive(Debug, Clone)]
pub struct EntryField {
    blocks: Vec<BlockField>,
    projection: RealProjection,
}

impl EntryField {
    /// A field with no values yet, laid out for `config`.
    pub fn empty(config: &EnsembleConfig) -> Result<Self, EnsembleError> {
        let layout = layout(config.class, config.dims()?)?;
        let blocks = layout
            .blocks
            .into_iter()
            .map(|(kind, shape)| {
                let structure = config.dependence.instantiate(shape)?;
                Ok(BlockField { kind, structure, values: vec![None; shape.rows() * shape.cols()] })
            })
            .collect::<Result<_, EnsembleError>>()?;
        Ok(Self { blocks, projection: RealProjection::RealPart })
    }

    pub fn with_projection(mut self, projection: RealProjection) -> Self {
        self.projection = projection;
        self
    }

    pub fn projection(&self) -> RealProjection {
        self.projection
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn structure(&self, block: usize) -> &DependenceStructure {
        &self.blocks[block].structure
    }

    /// Sets the value of the class containing `(p, q)` (1-based) in `block`.
    pub fn set(&mut self, block: usize, p: usize, q: usize, value: Complex64) -> Result<(), EnsembleError> {
        let b = self.block_mut(block, p, q)?;
        let slot = b.slot(p, q);
        b.values[slot] = Some(value);
        Ok(())
    }

    /// Value of the class containing `(p, q)`.
    pub fn value(&self, block: usize, p: usize, q: usize) -> Option<Complex64> {
        let b = self.blocks.get(block)?;
        let shape = b.structure.shape();
        if p == 0 || q == 0 || p > shape.rows() || q > shape.cols() {
            return None;
        }
        b.values[b.slot(p, q)]
    }

    /// Number of classes holding a value.
    pub fn class_count(&self) -> usize {
        self.blocks.iter().map(|b| b.values.iter().filter(|v| v.is_some()).count()).sum()
    }

    fn block_mut(&mut self, block: usize, p: usize, q: usize) -> Result<&mut BlockField, EnsembleError> {
        let count = self.blocks.len();
        let b = self
            .blocks
            .get_mut(block)
            .ok_or_else(|| EnsembleError::InconsistentField(format!("block {block} of {count}")))?;
        let shape = b.structure.shape();
        if p == 0 || q == 0 || p > shape.rows() || q > shape.cols() {
            return Err(EnsembleError::InconsistentField(format!("({p}, {q}) lies outside {shape}")));
        }
        Ok(b)
    }
}

/// Draws one value per dependence class touching a free position, visiting
/// free positions in canonical order. Deterministic in `(seed, n, replicate)`.
pub fn sample_entry_field(config: &EnsembleConfig, replicate: u64) -> Result<EntryField, EnsembleError> {
    let projection = if config.dist.is_complex() { RealProjection::ScaledRealPart } else { RealProjection::RealPart };
    let mut field = EntryField::empty(config)?.with_projection(projection);
    let mut rng = config.rng(replicate);
    for b in &mut field.blocks {
        let shape = b.structure.shape();
        for (p, q) in b.kind.free_positions(shape.rows(), shape.cols()) {
            let slot = b.slot(p, q);
            if b.values[slot].is_none() {
                b.values[slot] = Some(config.dist.sample(&mut rng));
            }
        }
    }
    Ok(field)
}

/// Fills the class matrix from an entry field, scaled by `1/sqrt(dim)`.
pub fn assemble(config: &EnsembleConfig, field: &EntryField) -> Result<HermitianMatrix, EnsembleError> {
    let dims = config.dims()?;
    let layout = layout(config.class, dims)?;
    if layout.blocks.len() != field.blocks.len()
        || layout
            .blocks
            .iter()
            .zip(&field.blocks)
            .any(|(&(kind, shape), b)| kind != b.kind || shape != b.structure.shape())
    {
        return Err(EnsembleError::InconsistentField(format!(
            "field layout does not match class {} with {dims:?}",
            config.class
        )));
    }
    let dense: Vec<Vec<Complex64>> =
        field.blocks.iter().enumerate().map(|(i, b)| dense_block(i, b, field.projection)).collect::<Result<_, _>>()?;
    let dim = dims.dim(config.class);
    let scale = 1.0 / (dim as f64).sqrt();
    let mut m = HermitianMatrix::zeros(dim);
    for pl in &layout.placements {
        let shape = layout.blocks[pl.block].1;
        let cols = shape.cols();
        for a in 0..shape.rows() {
            for b in 0..cols {
                let (i, j) = (pl.row + a, pl.col + b);
                if i <= j {
                    m.set(i, j, pl.transform.apply(dense[pl.block][a * cols + b]) * scale);
                }
            }
        }
    }
    Ok(m)
}

/// Unscaled block entries, row-major, 0-based.
fn dense_block(index: usize, b: &BlockField, projection: RealProjection) -> Result<Vec<Complex64>, EnsembleError> {
    let shape = b.structure.shape();
    let (rows, cols) = (shape.rows(), shape.cols());
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for (p, q) in b.kind.free_positions(rows, cols) {
        let z = b.values[b.slot(p, q)].ok_or(EnsembleError::IncompleteField { block: index, p, q })?;
        let v = b.kind.entry(p == q, z, projection);
        out[(p - 1) * cols + (q - 1)] = v;
        if b.kind.is_square() && p != q {
            out[(q - 1) * cols + (p - 1)] = b.kind.mirror(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::StructureName;
    use crate::ensembles::EntryDist;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(class: SymmetryClass, n: usize, dep: StructureName) -> EnsembleConfig {
        EnsembleConfig::new(class, n, EntryDist::ComplexGaussian, dep, 7)
    }

    #[test]
    fn class_a_by_hand() {
        let config = cfg(SymmetryClass::A, 2, StructureName::WignerStandard);
        let mut field = EntryField::empty(&config).unwrap();
        field.set(0, 1, 1, c(1.0, 0.0)).unwrap();
        field.set(0, 2, 2, c(-1.0, 0.0)).unwrap();
        field.set(0, 1, 2, c(0.0, 1.0)).unwrap();
        let m = assemble(&config, &field).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert_eq!(m.entries(), &[c(r, 0.0), c(0.0, r), c(0.0, -r), c(-r, 0.0)]);
    }

    #[test]
    fn chiral_rank_one_by_hand() {
        let config = cfg(SymmetryClass::AIII, 2, StructureName::MpStandard).with_split(1, 1);
        let mut field = EntryField::empty(&config).unwrap();
        let z = c(0.6, -0.8);
        field.set(0, 1, 1, z).unwrap();
        let m = assemble(&config, &field).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert_eq!(m.get(0, 0), c(0.0, 0.0));
        assert_eq!(m.get(0, 1), z * r);
        assert_eq!(m.get(1, 0), z.conj() * r);
    }

    #[test]
    fn missing_values_are_reported() {
        let config = cfg(SymmetryClass::A, 2, StructureName::WignerStandard);
        let mut field = EntryField::empty(&config).unwrap();
        field.set(0, 1, 1, c(1.0, 0.0)).unwrap();
        assert!(matches!(assemble(&config, &field), Err(EnsembleError::IncompleteField { block: 0, .. })));
        assert!(field.set(0, 3, 1, c(0.0, 0.0)).is_err());
        assert!(field.set(1, 1, 1, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn field_must_match_the_class() {
        let a = cfg(SymmetryClass::A, 3, StructureName::WignerStandard);
        let ai = cfg(SymmetryClass::AI, 3, StructureName::WignerStandard);
        let field = sample_entry_field(&a, 0).unwrap();
        assert!(matches!(assemble(&ai, &field), Err(EnsembleError::InconsistentField(_))));
        assert!(assemble(&a.resized(4), &field).is_err());
    }

    #[test]
    fn tile_classes_share_draws() {
        let config = cfg(SymmetryClass::A, 6, StructureName::Tile { r: 2 });
        let field = sample_entry_field(&config, 3).unwrap();
        assert_eq!(field.value(0, 1, 1), field.value(0, 2, 2));
        assert_eq!(field.value(0, 3, 5), field.value(0, 4, 6));
        assert_eq!(field.value(0, 5, 3), field.value(0, 3, 5));
        assert_ne!(field.value(0, 1, 1), field.value(0, 1, 3));
        // 3 diagonal tiles and 3 off-diagonal tile pairs
        assert_eq!(field.class_count(), 6);
        let m = assemble(&config, &field).unwrap();
        assert_eq!(m.get(0, 2), m.get(1, 3));
        assert_eq!(m.get(0, 1), m.get(1, 0).conj());
        assert_eq!(m.get(0, 0).re, m.get(1, 1).re);
    }

    #[test]
    fn free_position_inventory() {
        assert_eq!(BlockKind::Hermitian.free_positions(3, 3).len(), 6);
        assert_eq!(BlockKind::ComplexSkew.free_positions(3, 3), vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(BlockKind::Complex.free_positions(2, 3).len(), 6);
        assert_eq!(BlockKind::Imaginary.free_positions(2, 3)[0], (1, 1));
    }

    #[test]
    fn projected_entries_keep_unit_variance() {
        // diagonal of a complex Hermitian class and the real class AI
        for class in [SymmetryClass::A, SymmetryClass::AI, SymmetryClass::BD] {
            let config = cfg(class, 448, StructureName::WignerStandard);
            let field = sample_entry_field(&config, 0).unwrap();
            let m = assemble(&config, &field).unwrap();
            let n = 448.0;
            let mut off = 0.0;
            let mut count = 0.0;
            for i in 0..448 {
                for j in i + 1..448 {
                    off += m.get(i, j).norm_sqr() * n;
                    count += 1.0;
                }
            }
            assert!((off / count - 1.0).abs() < 0.02, "{class}: {}", off / count);
            if class != SymmetryClass::BD {
                let diag: f64 = (0..448).map(|i| m.get(i, i).re.powi(2) * n).sum::<f64>() / n;
                assert!((diag - 1.0).abs() < 0.2, "{class}: {diag}");
            }
        }
    }
}
