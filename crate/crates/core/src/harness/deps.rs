use std::fmt::Write as _;

use serde::Serialize;

use super::output::OutputDir;
use super::HarnessError;
use crate::dependence::{
    audit, bound_check, builtin_structure, growth_exponent, ladder_shape, BoundCheck, Condition, ConditionReport,
    GrowthFit, StructureName, Verdict,
};

/// Sizes the pre-comparison audit runs at.
pub const DEFAULT_AUDIT_LADDER: [usize; 3] = [64, 128, 256];

/// Exact condition counts over a size ladder, growth fits for the two
/// `o(n^2)` conditions and the bounded-fiber check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceAudit {
    pub structure: String,
    pub square: bool,
    pub sizes: Vec<usize>,
    pub reports: Vec<ConditionReport>,
    pub growth: Vec<GrowthFit>,
    pub bound: BoundCheck,
    pub verdict: Verdict,
}

impl DependenceAudit {
    /// Plain-text table of the counts followed by the verdicts.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let (spread, bound, overlap) = if self.square { ("W1", "W2 (B)", "W3") } else { ("MP1", "MP2 (B)", "MP3") };
        let _ =
            writeln!(s, "structure: {} ({} grid)", self.structure, if self.square { "square" } else { "rectangular" });
        let _ = writeln!(s, "{:>6} {:>12} {:>8} {:>14} {:>10}", "n", spread, bound, overlap, "max class");
        for (n, r) in self.sizes.iter().zip(&self.reports) {
            let class = match r {
                ConditionReport::Square { max_class_size, .. }
                | ConditionReport::Rectangular { max_class_size, .. } => *max_class_size,
            };
            let _ = writeln!(s, "{n:>6} {:>12} {:>8} {:>14} {class:>10}", r.spread(), r.bound(), r.overlap());
        }
        for g in &self.growth {
            let _ = writeln!(s, "{:?} growth exponent {:.3}: {}", g.condition, g.slope, g.verdict);
        }
        let _ = writeln!(s, "{bound} bound {:?}: {}", self.bound.bounds, self.bound.verdict);
        let _ = writeln!(s, "overall: {}", self.verdict);
        s
    }

    pub fn write(&self, out: &OutputDir) -> Result<(), HarnessError> {
        out.write_json("check_deps.json", self)?;
        out.write_text("check_deps.txt", &self.table())?;
        let rows: Vec<Vec<String>> = self
            .sizes
            .iter()
            .zip(&self.reports)
            .map(|(n, r)| vec![n.to_string(), r.spread().to_string(), r.bound().to_string(), r.overlap().to_string()])
            .collect();
        out.write_table("check_deps.csv", &["n", "spread", "bound", "overlap"], &rows)?;
        Ok(())
    }
}

/// Audits `family` on a square (`n x n`) or rectangular (`n x n` entry
/// grid of an `s x t` family) ladder.
pub fn audit_family(family: StructureName, square: bool, sizes: &[usize]) -> Result<DependenceAudit, HarnessError> {
    let mut reports = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let shape = ladder_shape(square, n);
        reports.push(audit(&builtin_structure(family.adapted_to(shape), shape)?)?);
    }
    let conditions = if square { [Condition::W1, Condition::W3] } else { [Condition::MP1, Condition::MP3] };
    let growth = conditions.into_iter().map(|c| growth_exponent(family, c, sizes)).collect::<Result<Vec<_>, _>>()?;
    let bound = bound_check(family, square, sizes)?;
    let verdict = if growth.iter().all(|g| g.verdict.is_pass()) && bound.verdict.is_pass() {
        Verdict::CompliantPlausible
    } else {
        Verdict::Fail
    };
    Ok(DependenceAudit {
        structure: family.adapted_to(ladder_shape(square, sizes[0])).to_string(),
        square,
        sizes: sizes.to_vec(),
        reports,
        growth,
        bound,
        verdict,
    })
}

/// The check-deps command: audits on both grids unless one is requested.
pub fn check_deps(
    family: StructureName,
    square: Option<bool>,
    sizes: &[usize],
) -> Result<Vec<DependenceAudit>, HarnessError> {
    let grids: Vec<bool> = match square {
        Some(s) => vec![s],
        None => vec![true, false],
    };
    grids.into_iter().map(|sq| audit_family(family, sq, sizes)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_is_compliant() {
        let a = audit_family(StructureName::WignerStandard, true, &DEFAULT_AUDIT_LADDER).unwrap();
        assert_eq!(a.verdict, Verdict::CompliantPlausible);
        assert!(a.reports.iter().all(|r| r.bound() == 1));
        let a = audit_family(StructureName::WignerStandard, false, &DEFAULT_AUDIT_LADDER).unwrap();
        assert_eq!(a.structure, "mp_standard");
        assert!(a.verdict.is_pass());
    }

    #[test]
    fn row_constant_fails_on_the_bound() {
        let a = audit_family(StructureName::RowConstant, true, &DEFAULT_AUDIT_LADDER).unwrap();
        assert_eq!(a.bound.verdict, Verdict::Fail);
        assert_eq!(a.verdict, Verdict::Fail);
        assert!(a.table().contains("overall: FAIL"));
    }

    #[test]
    fn tile_keeps_the_bound_but_not_the_overlap() {
        let a = audit_family(StructureName::Tile { r: 4 }, true, &DEFAULT_AUDIT_LADDER).unwrap();
        assert!(a.reports.iter().all(|r| r.bound() <= 4));
        assert!(a.bound.verdict.is_pass());
        assert!(a.growth[0].verdict.is_pass());
        assert_eq!(a.growth[1].verdict, Verdict::Fail);
    }

    #[test]
    fn cap_is_reported() {
        assert!(audit_family(StructureName::WignerStandard, true, &[64, 128, 512]).is_err());
        assert_eq!(check_deps(StructureName::Stripe { r: 2 }, None, &DEFAULT_AUDIT_LADDER).unwrap().len(), 2);
    }
}
