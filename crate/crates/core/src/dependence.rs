//! Equivalence relations on matrix index pairs, given by canonical
//! representative maps, and exact finite-size audits of the dependence
//! conditions they must satisfy.
//!
//! Indices are 1-based throughout this module. Two pairs are equivalent iff
//! their representatives coincide. For square shapes the builtin relations are
//! defined on unordered pairs, so `(p, q)` and `(q, p)` always share a class
//! (the Hermitian constraint ties them together anyway); `row_constant` is the
//! exception and exists only to be flagged.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// Default largest size the audits accept.
pub const DEFAULT_AUDIT_CAP: usize = 256;
/// A fitted growth exponent below this is read as "plausibly `o(n^2)`".
pub const GROWTH_SLOPE_LIMIT: f64 = 2.0 - 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DependenceError {
    #[error("unknown dependence structure `{0}`")]
    UnknownStructure(String),
    #[error("structure `{name}` needs parameter `{param}` >= 1")]
    MissingParameter { name: String, param: String },
    #[error("structure `{name}` is not defined on a {shape} shape")]
    ShapeMismatch { name: String, shape: String },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("audit size {size} exceeds the cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("growth fit needs at least 3 strictly increasing sizes")]
    BadSizeLadder,
    #[error("growth fit is degenerate: counts {0:?} mix zero and nonzero values")]
    DegenerateFit(Vec<u64>),
}

/// Index set a relation lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Square { n: usize },
    Rectangular { s: usize, t: usize },
}

impl Shape {
    pub fn rows(&self) -> usize {
        match *self {
            Shape::Square { n } => n,
            Shape::Rectangular { s, .. } => s,
        }
    }

    pub fn cols(&self) -> usize {
        match *self {
            Shape::Square { n } => n,
            Shape::Rectangular { t, .. } => t,
        }
    }

    fn check(&self) -> Result<(), DependenceError> {
        if self.rows() == 0 || self.cols() == 0 {
            return Err(DependenceError::InvalidShape(format!("{self} has an empty side")));
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Square { n } => write!(f, "square({n})"),
            Shape::Rectangular { s, t } => write!(f, "rectangular({s}x{t})"),
        }
    }
}

/// The builtin relation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum StructureName {
    /// Classes `{(p,q), (q,p)}`: independent entries on and above the diagonal.
    WignerStandard,
    /// Each `r x r` tile (together with its mirror tile) is one class.
    Tile {
        r: usize,
    },
    /// Diagonal runs of length `r` (and their mirrors) are one class.
    Stripe {
        r: usize,
    },
    /// Singleton classes on a rectangle.
    MpStandard,
    MpTile {
        r: usize,
    },
    MpStripe {
        r: usize,
    },
    /// All entries of a row share a class. Violates the bounded-overlap conditions.
    RowConstant,
}

impl StructureName {
    /// Parses a structure name with its integer parameters (`r` for the tiled
    /// and striped families).
    pub fn parse(name: &str, params: &BTreeMap<String, usize>) -> Result<Self, DependenceError> {
        let width = || match params.get("r") {
            Some(&r) if r >= 1 => Ok(r),
            _ => Err(DependenceError::MissingParameter { name: name.to_string(), param: "r".into() }),
        };
        Ok(match name {
            "wigner_standard" => StructureName::WignerStandard,
            "tile" => StructureName::Tile { r: width()? },
            "stripe" => StructureName::Stripe { r: width()? },
            "mp_standard" => StructureName::MpStandard,
            "mp_tile" => StructureName::MpTile { r: width()? },
            "mp_stripe" => StructureName::MpStripe { r: width()? },
            "row_constant" => StructureName::RowConstant,
            other => return Err(DependenceError::UnknownStructure(other.to_string())),
        })
    }

    /// Parses the compact form used on the command line, e.g. `tile(4)`.
    pub fn parse_compact(spec: &str) -> Result<Self, DependenceError> {
        let spec = spec.trim();
        let (name, params) = match spec.split_once('(') {
            Some((name, rest)) => {
                let r = rest
                    .strip_suffix(')')
                    .and_then(|v| v.trim().parse::<usize>().ok())
                    .ok_or_else(|| DependenceError::UnknownStructure(spec.to_string()))?;
                (name.trim(), BTreeMap::from([("r".to_string(), r)]))
            }
            None => (spec, BTreeMap::new()),
        };
        Self::parse(name, &params)
    }

    pub fn base_name(&self) -> &'static str {
        match self {
            StructureName::WignerStandard => "wigner_standard",
            StructureName::Tile { .. } => "tile",
            StructureName::Stripe { .. } => "stripe",
            StructureName::MpStandard => "mp_standard",
            StructureName::MpTile { .. } => "mp_tile",
            StructureName::MpStripe { .. } => "mp_stripe",
            StructureName::RowConstant => "row_constant",
        }
    }

    pub fn parameters(&self) -> BTreeMap<String, usize> {
        match *self {
            StructureName::Tile { r }
            | StructureName::Stripe { r }
            | StructureName::MpTile { r }
            | StructureName::MpStripe { r } => BTreeMap::from([("r".to_string(), r)]),
            _ => BTreeMap::new(),
        }
    }

    /// The member of the same family that lives on `shape`: square and
    /// rectangular variants are swapped as needed.
    pub fn adapted_to(self, shape: Shape) -> Self {
        use StructureName::*;
        match (self, shape) {
            (MpStandard, Shape::Square { .. }) => WignerStandard,
            (MpTile { r }, Shape::Square { .. }) => Tile { r },
            (MpStripe { r }, Shape::Square { .. }) => Stripe { r },
            (WignerStandard, Shape::Rectangular { .. }) => MpStandard,
            (Tile { r }, Shape::Rectangular { .. }) => MpTile { r },
            (Stripe { r }, Shape::Rectangular { .. }) => MpStripe { r },
            (name, _) => name,
        }
    }

    fn fits(&self, shape: Shape) -> bool {
        use StructureName::*;
        match self {
            WignerStandard | Tile { .. } | Stripe { .. } => matches!(shape, Shape::Square { .. }),
            MpStandard | MpTile { .. } | MpStripe { .. } => matches!(shape, Shape::Rectangular { .. }),
            RowConstant => true,
        }
    }

    fn representative(&self, p: usize, q: usize) -> (usize, usize) {
        match *self {
            StructureName::WignerStandard => (p.min(q), p.max(q)),
            StructureName::Tile { r } => {
                let (a, b) = ((p - 1) / r, (q - 1) / r);
                (a.min(b) * r + 1, a.max(b) * r + 1)
            }
            StructureName::Stripe { r } => stripe_start(p.min(q), p.max(q), r),
            StructureName::MpStandard => (p, q),
            StructureName::MpTile { r } => ((p - 1) / r * r + 1, (q - 1) / r * r + 1),
            StructureName::MpStripe { r } => stripe_start(p, q, r),
            StructureName::RowConstant => (p, 1),
        }
    }
}

/// Walks `(p, q)` back along its diagonal to the start of its run: runs are
/// cut at row-block boundaries of width `r` and at the first column.
fn stripe_start(p: usize, q: usize, r: usize) -> (usize, usize) {
    let back = ((p - 1) % r).min(q - 1);
    (p - back, q - back)
}

impl fmt::Display for StructureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parameters().get("r") {
            Some(r) => write!(f, "{}({r})", self.base_name()),
            None => f.write_str(self.base_name()),
        }
    }
}

/// Extension point for relations outside the builtin families.
///
/// `representative` must be idempotent and must map into the index set of
/// the shape it is called with.
pub trait PairRelation: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn representative(&self, shape: Shape, p: usize, q: usize) -> (usize, usize);
}

#[derive(Debug, Clone)]
enum Kind {
    Builtin(StructureName),
    Custom(Arc<dyn PairRelation>),
}

/// An equivalence relation `~` on the index pairs of a fixed shape.
#[derive(Debug, Clone)]
pub struct DependenceStructure {
    shape: Shape,
    kind: Kind,
}

/// Builds one of the named relations on `shape`.
pub fn builtin_structure(name: StructureName, shape: Shape) -> Result<DependenceStructure, DependenceError> {
    shape.check()?;
    if !name.fits(shape) {
        let shape = match shape {
            Shape::Square { .. } => "square",
            Shape::Rectangular { .. } => "rectangular",
        };
        return Err(DependenceError::ShapeMismatch { name: name.to_string(), shape: shape.into() });
    }
    Ok(DependenceStructure { shape, kind: Kind::Builtin(name) })
}

/// A relation family not yet tied to a shape. Ensembles instantiate it once
/// per independent subblock.
#[derive(Debug, Clone)]
pub enum DependenceFamily {
    Builtin(StructureName),
    Custom(Arc<dyn PairRelation>),
}

impl DependenceFamily {
    pub fn instantiate(&self, shape: Shape) -> Result<DependenceStructure, DependenceError> {
        match self {
            DependenceFamily::Builtin(name) => builtin_structure(name.adapted_to(shape), shape),
            DependenceFamily::Custom(rel) => DependenceStructure::custom(rel.clone(), shape),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DependenceFamily::Builtin(name) => name.to_string(),
            DependenceFamily::Custom(rel) => rel.name(),
        }
    }
}

impl From<StructureName> for DependenceFamily {
    fn from(name: StructureName) -> Self {
        DependenceFamily::Builtin(name)
    }
}

impl DependenceStructure {
    pub fn custom(relation: Arc<dyn PairRelation>, shape: Shape) -> Result<Self, DependenceError> {
        shape.check()?;
        Ok(Self { shape, kind: Kind::Custom(relation) })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Builtin(name) => name.to_string(),
            Kind::Custom(rel) => rel.name(),
        }
    }

    pub fn builtin(&self) -> Option<StructureName> {
        match self.kind {
            Kind::Builtin(name) => Some(name),
            Kind::Custom(_) => None,
        }
    }

    pub fn parameters(&self) -> BTreeMap<String, usize> {
        self.builtin().map(|n| n.parameters()).unwrap_or_default()
    }

    /// Canonical representative of the class of the 1-based pair `(p, q)`.
    pub fn class_of(&self, p: usize, q: usize) -> (usize, usize) {
        debug_assert!(p >= 1 && p <= self.shape.rows() && q >= 1 && q <= self.shape.cols());
        match &self.kind {
            Kind::Builtin(name) => name.representative(p, q),
            Kind::Custom(rel) => rel.representative(self.shape, p, q),
        }
    }

    pub fn equivalent(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        self.class_of(a.0, a.1) == self.class_of(b.0, b.1)
    }
}

/// Exact counts for the three dependence conditions at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionReport {
    Square {
        n: usize,
        /// `max_p #{(q,p',q') : (p,q) ~ (p',q')}`
        w1_max_count: u64,
        /// `max_{p,q,p'} #{q' : (p,q) ~ (p',q')}`
        w2_bound: u64,
        /// `#{(p,q,p') : (p,q) ~ (q,p'), p != p'}`
        w3_count: u64,
        max_class_size: u64,
    },
    Rectangular {
        s: usize,
        t: usize,
        mp1_max_count: u64,
        /// larger of the row-wise and column-wise fiber maxima
        mp2_bound: u64,
        /// `#{(p,q,q') : (p,q) ~ (p,q'), q != q'}`
        mp3_row_count: u64,
        /// `#{(p,p',q) : (p,q) ~ (p',q), p != p'}`
        mp3_col_count: u64,
        max_class_size: u64,
    },
}

impl ConditionReport {
    pub fn bound(&self) -> u64 {
        match *self {
            ConditionReport::Square { w2_bound, .. } => w2_bound,
            ConditionReport::Rectangular { mp2_bound, .. } => mp2_bound,
        }
    }

    pub fn spread(&self) -> u64 {
        match *self {
            ConditionReport::Square { w1_max_count, .. } => w1_max_count,
            ConditionReport::Rectangular { mp1_max_count, .. } => mp1_max_count,
        }
    }

    /// W3 count, or the sum of the two MP3 counts.
    pub fn overlap(&self) -> u64 {
        match *self {
            ConditionReport::Square { w3_count, .. } => w3_count,
            ConditionReport::Rectangular { mp3_row_count, mp3_col_count, .. } => mp3_row_count + mp3_col_count,
        }
    }
}

/// Class ids for every pair of the shape, row-major, plus the class sizes.
struct ClassTable {
    rows: usize,
    cols: usize,
    ids: Vec<u32>,
    sizes: Vec<u64>,
}

impl ClassTable {
    fn build(structure: &DependenceStructure) -> Self {
        let (rows, cols) = (structure.shape.rows(), structure.shape.cols());
        let mut index: HashMap<(usize, usize), u32> = HashMap::new();
        let mut sizes = Vec::new();
        let mut ids = Vec::with_capacity(rows * cols);
        for p in 1..=rows {
            for q in 1..=cols {
                let next = index.len() as u32;
                let id = *index.entry(structure.class_of(p, q)).or_insert(next);
                if id as usize == sizes.len() {
                    sizes.push(0);
                }
                sizes[id as usize] += 1;
                ids.push(id);
            }
        }
        Self { rows, cols, ids, sizes }
    }

    fn id(&self, p: usize, q: usize) -> u32 {
        self.ids[(p - 1) * self.cols + (q - 1)]
    }

    /// `max_p Σ_q |class(p,q)|`
    fn max_row_spread(&self) -> u64 {
        (1..=self.rows)
            .map(|p| (1..=self.cols).map(|q| self.sizes[self.id(p, q) as usize]).sum::<u64>())
            .max()
            .unwrap_or(0)
    }

    /// Number of members of each class in each row (`by_row`) or column.
    fn fibers(&self, by_row: bool) -> HashMap<(u32, usize), u64> {
        let mut counts = HashMap::new();
        for p in 1..=self.rows {
            for q in 1..=self.cols {
                let line = if by_row { p } else { q };
                *counts.entry((self.id(p, q), line)).or_insert(0) += 1;
            }
        }
        counts
    }
}

fn check_cap(size: usize, cap: usize) -> Result<(), DependenceError> {
    if size > cap {
        return Err(DependenceError::CapExceeded { size, cap });
    }
    Ok(())
}

pub fn audit_square(structure: &DependenceStructure) -> Result<ConditionReport, DependenceError> {
    audit_square_capped(structure, DEFAULT_AUDIT_CAP)
}

/// Exact W1/W2/W3 counts in `O(n^2)` time: every count is a sum over pairs of
/// per-class (or per class-and-row) tallies.
pub fn audit_square_capped(structure: &DependenceStructure, cap: usize) -> Result<ConditionReport, DependenceError> {
    let Shape::Square { n } = structure.shape else {
        return Err(DependenceError::ShapeMismatch { name: structure.name(), shape: "square".into() });
    };
    check_cap(n, cap)?;
    let table = ClassTable::build(structure);
    let rows = table.fibers(true);
    let w2_bound = rows.values().copied().max().unwrap_or(0);
    let mut w3_count = 0u64;
    for p in 1..=n {
        for q in 1..=n {
            let id = table.id(p, q);
            // p' ranges over row q of the class of (p, q); drop p' = p
            let in_row_q = rows.get(&(id, q)).copied().unwrap_or(0);
            w3_count += in_row_q - u64::from(table.id(q, p) == id);
        }
    }
    Ok(ConditionReport::Square {
        n,
        w1_max_count: table.max_row_spread(),
        w2_bound,
        w3_count,
        max_class_size: table.sizes.iter().copied().max().unwrap_or(0),
    })
}

pub fn audit_rectangular(structure: &DependenceStructure) -> Result<ConditionReport, DependenceError> {
    audit_rectangular_capped(structure, DEFAULT_AUDIT_CAP)
}

pub fn audit_rectangular_capped(
    structure: &DependenceStructure,
    cap: usize,
) -> Result<ConditionReport, DependenceError> {
    let Shape::Rectangular { s, t } = structure.shape else {
        return Err(DependenceError::ShapeMismatch { name: structure.name(), shape: "rectangular".into() });
    };
    check_cap(s.max(t), cap)?;
    let table = ClassTable::build(structure);
    let rows = table.fibers(true);
    let cols = table.fibers(false);
    let mut mp3_row_count = 0;
    let mut mp3_col_count = 0;
    for p in 1..=s {
        for q in 1..=t {
            let id = table.id(p, q);
            mp3_row_count += rows[&(id, p)] - 1;
            mp3_col_count += cols[&(id, q)] - 1;
        }
    }
    let max_row = rows.values().copied().max().unwrap_or(0);
    let max_col = cols.values().copied().max().unwrap_or(0);
    Ok(ConditionReport::Rectangular {
        s,
        t,
        mp1_max_count: table.max_row_spread(),
        mp2_bound: max_row.max(max_col),
        mp3_row_count,
        mp3_col_count,
        max_class_size: table.sizes.iter().copied().max().unwrap_or(0),
    })
}

/// Audits a structure with whichever condition set matches its shape.
pub fn audit(structure: &DependenceStructure) -> Result<ConditionReport, DependenceError> {
    match structure.shape {
        Shape::Square { .. } => audit_square(structure),
        Shape::Rectangular { .. } => audit_rectangular(structure),
    }
}

/// The `o(n^2)` conditions, tracked by growth fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    W1,
    W3,
    MP1,
    MP3,
}

impl Condition {
    fn is_square(&self) -> bool {
        matches!(self, Condition::W1 | Condition::W3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CompliantPlausible,
    Fail,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::CompliantPlausible)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CompliantPlausible => "compliant-plausible",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub structure: String,
    pub condition: Condition,
    pub sizes: Vec<usize>,
    pub counts: Vec<u64>,
    /// Least-squares slope of `log count` against `log n`; `-inf` when every
    /// count is zero.
    #[serde(serialize_with = "serialize_slope")]
    pub slope: f64,
    pub verdict: Verdict,
}

fn serialize_slope<S: serde::Serializer>(slope: &f64, s: S) -> Result<S::Ok, S::Error> {
    if slope.is_finite() {
        s.serialize_f64(*slope)
    } else {
        s.serialize_str(if *slope < 0.0 { "-inf" } else { "inf" })
    }
}

/// The shape a family is instantiated on at ladder size `n` (`s = t = n` for
/// rectangular families).
pub fn ladder_shape(square: bool, n: usize) -> Shape {
    if square {
        Shape::Square { n }
    } else {
        Shape::Rectangular { s: n, t: n }
    }
}

fn check_ladder(sizes: &[usize]) -> Result<(), DependenceError> {
    if sizes.len() < 3 || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(DependenceError::BadSizeLadder);
    }
    Ok(())
}

/// Fits the growth exponent of an `o(n^2)` condition count over a size ladder.
pub fn growth_exponent(
    family: StructureName,
    condition: Condition,
    sizes: &[usize],
) -> Result<GrowthFit, DependenceError> {
    check_ladder(sizes)?;
    let square = condition.is_square();
    let mut counts = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let shape = ladder_shape(square, n);
        let report = audit(&builtin_structure(family.adapted_to(shape), shape)?)?;
        counts.push(match condition {
            Condition::W1 | Condition::MP1 => report.spread(),
            Condition::W3 | Condition::MP3 => report.overlap(),
        });
    }
    let (slope, verdict) = if counts.iter().all(|&c| c == 0) {
        (f64::NEG_INFINITY, Verdict::CompliantPlausible)
    } else if counts.contains(&0) {
        return Err(DependenceError::DegenerateFit(counts));
    } else {
        let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
        let slope = least_squares_slope(&xs, &ys);
        let verdict = if slope < GROWTH_SLOPE_LIMIT { Verdict::CompliantPlausible } else { Verdict::Fail };
        (slope, verdict)
    };
    Ok(GrowthFit {
        structure: family.adapted_to(ladder_shape(square, sizes[0])).to_string(),
        condition,
        sizes: sizes.to_vec(),
        counts,
        slope,
        verdict,
    })
}

/// Bounded-fiber check (W2 / MP2) over a ladder: compliant iff the bound does
/// not grow from the smallest to the largest size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub structure: String,
    pub sizes: Vec<usize>,
    pub bounds: Vec<u64>,
    pub verdict: Verdict,
}

pub fn bound_check(family: StructureName, square: bool, sizes: &[usize]) -> Result<BoundCheck, DependenceError> {
    check_ladder(sizes)?;
    let mut bounds = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let shape = ladder_shape(square, n);
        bounds.push(audit(&builtin_structure(family.adapted_to(shape), shape)?)?.bound());
    }
    let verdict = if bounds.last() <= bounds.first() { Verdict::CompliantPlausible } else { Verdict::Fail };
    Ok(BoundCheck {
        structure: family.adapted_to(ladder_shape(square, sizes[0])).to_string(),
        sizes: sizes.to_vec(),
        bounds,
        verdict,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(name: StructureName, n: usize) -> DependenceStructure {
        builtin_structure(name, Shape::Square { n }).unwrap()
    }

    fn rect(name: StructureName, s: usize, t: usize) -> DependenceStructure {
        builtin_structure(name, Shape::Rectangular { s, t }).unwrap()
    }

    /// Straight from the definitions, `O(n^4)`.
    fn brute_square(st: &DependenceStructure) -> (u64, u64, u64) {
        let n = st.shape().rows();
        let idx = || 1..=n;
        let mut w1 = 0;
        for p in idx() {
            let mut c = 0;
            for q in idx() {
                for pp in idx() {
                    for qq in idx() {
                        c += u64::from(st.equivalent((p, q), (pp, qq)));
                    }
                }
            }
            w1 = w1.max(c);
        }
        let mut w2 = 0;
        let mut w3 = 0;
        for p in idx() {
            for q in idx() {
                for pp in idx() {
                    w2 = w2.max(idx().filter(|&qq| st.equivalent((p, q), (pp, qq))).count() as u64);
                    w3 += u64::from(p != pp && st.equivalent((p, q), (q, pp)));
                }
            }
        }
        (w1, w2, w3)
    }

    fn brute_rect(st: &DependenceStructure) -> (u64, u64, u64, u64) {
        let (s, t) = (st.shape().rows(), st.shape().cols());
        let mut mp1 = 0;
        for p in 1..=s {
            let mut c = 0;
            for q in 1..=t {
                for pp in 1..=s {
                    for qq in 1..=t {
                        c += u64::from(st.equivalent((p, q), (pp, qq)));
                    }
                }
            }
            mp1 = mp1.max(c);
        }
        let mut mp2 = 0;
        let (mut rows, mut cols) = (0, 0);
        for p in 1..=s {
            for q in 1..=t {
                for pp in 1..=s {
                    mp2 = mp2.max((1..=t).filter(|&qq| st.equivalent((p, q), (pp, qq))).count() as u64);
                    cols += u64::from(p != pp && st.equivalent((p, q), (pp, q)));
                }
                for qq in 1..=t {
                    mp2 = mp2.max((1..=s).filter(|&pp| st.equivalent((p, q), (pp, qq))).count() as u64);
                    rows += u64::from(q != qq && st.equivalent((p, q), (p, qq)));
                }
            }
        }
        (mp1, mp2, rows, cols)
    }

    #[test]
    fn builtin_examples() {
        let w = square(StructureName::WignerStandard, 10);
        assert_eq!(w.class_of(2, 5), w.class_of(5, 2));
        assert_ne!(w.class_of(2, 5), w.class_of(2, 6));
        let t = square(StructureName::Tile { r: 2 }, 6);
        let c = t.class_of(1, 1);
        assert!([(1, 2), (2, 1), (2, 2)].iter().all(|&(p, q)| t.class_of(p, q) == c));
        assert_ne!(t.class_of(1, 3), c);
        let rc = square(StructureName::RowConstant, 8);
        assert_eq!(rc.class_of(3, 1), rc.class_of(3, 7));
    }

    #[test]
    fn shape_and_name_errors() {
        assert!(matches!(
            builtin_structure(StructureName::WignerStandard, Shape::Rectangular { s: 2, t: 3 }),
            Err(DependenceError::ShapeMismatch { .. })
        ));
        assert!(builtin_structure(StructureName::MpTile { r: 2 }, Shape::Square { n: 4 }).is_err());
        assert!(builtin_structure(StructureName::RowConstant, Shape::Square { n: 0 }).is_err());
        assert!(matches!(StructureName::parse("banded", &BTreeMap::new()), Err(DependenceError::UnknownStructure(_))));
        assert!(matches!(
            StructureName::parse("tile", &BTreeMap::new()),
            Err(DependenceError::MissingParameter { .. })
        ));
        assert_eq!(StructureName::parse_compact("tile(4)").unwrap(), StructureName::Tile { r: 4 });
        assert_eq!(StructureName::parse_compact("row_constant").unwrap(), StructureName::RowConstant);
        assert!(StructureName::parse_compact("tile(x)").is_err());
        assert_eq!(StructureName::Tile { r: 3 }.to_string(), "tile(3)");
    }

    #[test]
    fn family_adaptation_round_trips() {
        let sq = Shape::Square { n: 4 };
        let re = Shape::Rectangular { s: 2, t: 4 };
        for name in [
            StructureName::WignerStandard,
            StructureName::Tile { r: 2 },
            StructureName::Stripe { r: 3 },
            StructureName::RowConstant,
        ] {
            assert_eq!(name.adapted_to(re).adapted_to(sq), name);
            assert!(builtin_structure(name.adapted_to(re), re).is_ok());
        }
    }

    #[test]
    fn audits_match_brute_force() {
        let names = [
            StructureName::WignerStandard,
            StructureName::Tile { r: 2 },
            StructureName::Tile { r: 3 },
            StructureName::Stripe { r: 2 },
            StructureName::Stripe { r: 3 },
            StructureName::RowConstant,
        ];
        for name in names {
            for n in [1, 2, 5, 7] {
                let st = square(name, n);
                let ConditionReport::Square { w1_max_count, w2_bound, w3_count, .. } = audit_square(&st).unwrap()
                else {
                    unreachable!()
                };
                assert_eq!((w1_max_count, w2_bound, w3_count), brute_square(&st), "{name} n={n}");
            }
            for (s, t) in [(1, 3), (4, 6), (6, 5)] {
                let shape = Shape::Rectangular { s, t };
                let st = builtin_structure(name.adapted_to(shape), shape).unwrap();
                let ConditionReport::Rectangular { mp1_max_count, mp2_bound, mp3_row_count, mp3_col_count, .. } =
                    audit_rectangular(&st).unwrap()
                else {
                    unreachable!()
                };
                assert_eq!((mp1_max_count, mp2_bound, mp3_row_count, mp3_col_count), brute_rect(&st), "{name} {s}x{t}");
            }
        }
    }

    #[test]
    fn spec_audit_values() {
        let r = audit_square(&square(StructureName::WignerStandard, 10)).unwrap();
        assert_eq!(r.bound(), 1);
        assert_eq!(r.overlap(), 0);
        assert_eq!(r.spread(), 19);
        let r = audit_square(&square(StructureName::RowConstant, 10)).unwrap();
        assert_eq!(r.bound(), 10);
        let r = audit_rectangular(&rect(StructureName::MpStandard, 6, 9)).unwrap();
        assert_eq!(r.bound(), 1);
        assert_eq!(r.overlap(), 0);
        // 2x2 tiles: every entry has exactly one row-mate and one column-mate
        let r = audit_rectangular(&rect(StructureName::MpTile { r: 2 }, 8, 8)).unwrap();
        let ConditionReport::Rectangular { mp3_row_count, mp3_col_count, mp2_bound, .. } = r else { unreachable!() };
        assert_eq!((mp3_row_count, mp3_col_count, mp2_bound), (64, 64, 2));
    }

    #[test]
    fn wigner_standard_is_independent_up_to_conjugation() {
        for n in 1..=64 {
            let r = audit_square(&square(StructureName::WignerStandard, n)).unwrap();
            assert_eq!(r.bound(), 1, "n = {n}");
            assert_eq!(r.overlap(), 0, "n = {n}");
            assert_eq!(r.spread(), 2 * n as u64 - 1);
        }
    }

    #[test]
    fn tile_classes_stay_bounded() {
        for r in [1usize, 2, 4] {
            for n in 1..=64 {
                let rep = audit_square(&square(StructureName::Tile { r }, n)).unwrap();
                let ConditionReport::Square { w1_max_count, w2_bound, max_class_size, .. } = rep else {
                    unreachable!()
                };
                assert!(w2_bound <= r as u64, "r={r} n={n}");
                assert!(max_class_size <= 2 * (r * r) as u64);
                assert!(w1_max_count <= 2 * (r * r * n) as u64);
            }
        }
    }

    #[test]
    fn tile_overlap_grows_quadratically() {
        // (p,q) ~ (q,p') for every p' in the row block of p
        for r in [2usize, 4] {
            let n = 32;
            let rep = audit_square(&square(StructureName::Tile { r }, n)).unwrap();
            assert_eq!(rep.overlap(), ((r - 1) * n * n) as u64);
        }
    }

    #[test]
    fn stripe_stays_within_the_conditions() {
        for r in [1usize, 2, 4] {
            for n in [8, 16, 64] {
                let rep = audit_square(&square(StructureName::Stripe { r }, n)).unwrap();
                assert!(rep.bound() <= 2);
                assert!(rep.spread() <= (2 * r * n) as u64);
                assert!(rep.overlap() <= (2 * r * n) as u64, "r={r} n={n} {rep:?}");
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let st = square(StructureName::WignerStandard, 300);
        assert!(matches!(audit_square(&st), Err(DependenceError::CapExceeded { size: 300, cap: 256 })));
        assert!(audit_square_capped(&st, 300).is_ok());
        assert!(audit_rectangular(&st).is_err());
    }

    #[test]
    fn growth_fits() {
        let fit = growth_exponent(StructureName::WignerStandard, Condition::W1, &[32, 64, 128]).unwrap();
        assert_eq!(fit.counts, vec![63, 127, 255]);
        assert!((fit.slope - 1.0).abs() < 0.03);
        assert_eq!(fit.verdict, Verdict::CompliantPlausible);

        let fit = growth_exponent(StructureName::RowConstant, Condition::W1, &[32, 64, 128]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        assert_eq!(fit.verdict, Verdict::Fail);

        let fit = growth_exponent(StructureName::WignerStandard, Condition::W3, &[32, 64, 128]).unwrap();
        assert_eq!(fit.slope, f64::NEG_INFINITY);
        assert!(fit.verdict.is_pass());

        let fit = growth_exponent(StructureName::MpStandard, Condition::MP3, &[8, 16, 32]).unwrap();
        assert!(fit.verdict.is_pass());

        assert!(matches!(
            growth_exponent(StructureName::WignerStandard, Condition::W1, &[32, 64]),
            Err(DependenceError::BadSizeLadder)
        ));
        assert!(growth_exponent(StructureName::WignerStandard, Condition::W1, &[64, 32, 128]).is_err());
    }

    #[test]
    fn degenerate_fit_is_reported() {
        // tile(2) overlap vanishes at n = 1 but not later
        assert!(matches!(
            growth_exponent(StructureName::Tile { r: 2 }, Condition::W3, &[1, 4, 8]),
            Err(DependenceError::DegenerateFit(_))
        ));
    }

    #[test]
    fn bound_checks() {
        let grows = bound_check(StructureName::RowConstant, true, &[16, 32, 64]).unwrap();
        assert_eq!(grows.bounds, vec![16, 32, 64]);
        assert_eq!(grows.verdict, Verdict::Fail);
        let flat = bound_check(StructureName::Tile { r: 4 }, true, &[16, 32, 64]).unwrap();
        assert_eq!(flat.bounds, vec![4, 4, 4]);
        assert!(flat.verdict.is_pass());
    }

    #[derive(Debug)]
    struct Antidiagonal;

    impl PairRelation for Antidiagonal {
        fn name(&self) -> String {
            "antidiagonal".into()
        }
        fn representative(&self, shape: Shape, p: usize, q: usize) -> (usize, usize) {
            let sum = p + q;
            let first = sum.saturating_sub(shape.cols()).max(1);
            (first, sum - first)
        }
    }

    #[test]
    fn custom_relations_plug_into_audits() {
        let st = DependenceStructure::custom(Arc::new(Antidiagonal), Shape::Square { n: 6 }).unwrap();
        assert_eq!(st.name(), "antidiagonal");
        assert!(st.equivalent((1, 4), (3, 2)));
        let rep = audit_square(&st).unwrap();
        assert_eq!((rep.spread(), rep.bound(), rep.overlap()), brute_square(&st));
    }
}
