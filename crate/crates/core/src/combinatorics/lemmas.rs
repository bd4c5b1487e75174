//! The pair partitions `m` and `n` of `{1..=2k}` and exhaustive checks of the
//! join identities behind the sample-covariance moment formula.

use std::collections::{BTreeMap, HashSet};

use num_traits::ToPrimitive;
use serde::Serialize;

use super::{enumerate_noncrossing, enumerate_noncrossing_pairings, narayana, CombinatoricsError, SetPartition};

/// Largest `k` for which the lemma checks run (NC_2(14) has 429 members, but
/// the bijection check also enumerates P(k) for NC(k)).
pub const MAX_LEMMA_K: usize = 7;

/// `m = {{1,2},{3,4},...,{k-1,k}}` for even `k`.
pub fn special_m(k: usize) -> Result<SetPartition, CombinatoricsError> {
    if k == 0 || !k.is_multiple_of(2) {
        return Err(CombinatoricsError::OddSize(k));
    }
    let labels: Vec<usize> = (0..k).map(|i| i / 2).collect();
    SetPartition::from_labels(&labels)
}

/// `n = {{2,3},{4,5},...,{k,1}}` for even `k`; the last pair wraps around.
pub fn special_n(k: usize) -> Result<SetPartition, CombinatoricsError> {
    if k == 0 || !k.is_multiple_of(2) {
        return Err(CombinatoricsError::OddSize(k));
    }
    // 1-based element e pairs with its cyclic successor when e is even
    let labels: Vec<usize> = (1..=k).map(|e| if e == 1 { k / 2 } else { e / 2 }).collect();
    SetPartition::from_labels(&labels)
}

/// A pair partition that breaks one of the join identities.
#[derive(Debug, Clone, Serialize)]
pub struct JoinCounterexample {
    pub partition: SetPartition,
    pub join_m_blocks: usize,
    pub join_n_blocks: usize,
    pub reason: String,
}

/// Outcome of checking `|p ∨ m| + |p ∨ n| = k + 1` and the odd/even block
/// property over all of `NC_2(2k)`.
#[derive(Debug, Clone, Serialize)]
pub struct JoinIdentityReport {
    pub k: usize,
    pub checked: usize,
    pub passed: bool,
    pub counterexample: Option<JoinCounterexample>,
}

/// `(|p ∨ m|, |p ∨ n|)` for a pair partition of `{1..=2k}`.
pub fn join_block_counts(p: &SetPartition) -> Result<(usize, usize), CombinatoricsError> {
    let k2 = p.ground_size();
    Ok((p.join(&special_m(k2)?)?.block_count(), p.join(&special_n(k2)?)?.block_count()))
}

pub fn verify_join_identity(k: usize) -> Result<JoinIdentityReport, CombinatoricsError> {
    check_k(k)?;
    let pairings = enumerate_noncrossing_pairings(2 * k)?;
    let mut counterexample = None;
    for p in &pairings {
        let (jm, jn) = join_block_counts(p)?;
        let reason = if jm + jn != k + 1 {
            Some(format!("|p∨m| + |p∨n| = {} != {}", jm + jn, k + 1))
        } else if !p.blocks().iter().all(|b| b.iter().filter(|&&e| e % 2 == 1).count() == 1) {
            Some("a block does not hold exactly one odd and one even element".to_string())
        } else {
            None
        };
        if let Some(reason) = reason {
            counterexample =
                Some(JoinCounterexample { partition: p.clone(), join_m_blocks: jm, join_n_blocks: jn, reason });
            break;
        }
    }
    Ok(JoinIdentityReport { k, checked: pairings.len(), passed: counterexample.is_none(), counterexample })
}

/// Outcome of comparing the histogram of `|p ∨ m|` over `NC_2(2k)` with the
/// Narayana numbers, plus the stronger claim that `p ↦ p ∨ m` (collapsed to
/// `{1..=k}`) maps `NC_2(2k)` bijectively onto `NC(k)`.
#[derive(Debug, Clone, Serialize)]
pub struct CountBijectionReport {
    pub k: usize,
    pub histogram: BTreeMap<usize, u64>,
    pub narayana: BTreeMap<usize, u64>,
    pub injective: bool,
    pub onto_noncrossing: bool,
    pub passed: bool,
}

pub fn verify_count_bijection(k: usize) -> Result<CountBijectionReport, CombinatoricsError> {
    check_k(k)?;
    let m = special_m(2 * k)?;
    let mut histogram = BTreeMap::new();
    let mut images = HashSet::new();
    let pairings = enumerate_noncrossing_pairings(2 * k)?;
    for p in &pairings {
        let joined = p.join(&m)?;
        *histogram.entry(joined.block_count()).or_insert(0u64) += 1;
        images.insert(collapse_pairs(&joined)?);
    }
    let narayana: BTreeMap<usize, u64> = (1..=k)
        .map(|j| Ok((j, narayana(k as u64, j as u64)?.to_u64().unwrap_or(u64::MAX))))
        .collect::<Result<_, CombinatoricsError>>()?;
    let injective = images.len() == pairings.len();
    let targets: HashSet<SetPartition> = enumerate_noncrossing(k)?.into_iter().collect();
    let onto_noncrossing = images == targets;
    Ok(CountBijectionReport {
        k,
        passed: histogram == narayana && injective && onto_noncrossing,
        histogram,
        narayana,
        injective,
        onto_noncrossing,
    })
}

/// Identifies a partition of `{1..=2k}` whose blocks are unions of blocks of
/// `m` with the partition of `{1..=k}` obtained by merging `2i-1, 2i` into `i`.
pub fn collapse_pairs(p: &SetPartition) -> Result<SetPartition, CombinatoricsError> {
    let labels = p.labels();
    if !labels.len().is_multiple_of(2) || labels.chunks(2).any(|c| c[0] != c[1]) {
        return Err(CombinatoricsError::InvalidPartition(format!("{p} is not coarser than m")));
    }
    let collapsed: Vec<u8> = labels.iter().step_by(2).copied().collect();
    SetPartition::from_labels(&collapsed)
}

fn check_k(k: usize) -> Result<(), CombinatoricsError> {
    if k == 0 {
        return Err(CombinatoricsError::OutOfRange("k must be at least 1".into()));
    }
    if k > MAX_LEMMA_K {
        return Err(CombinatoricsError::SizeLimit { requested: k, limit: MAX_LEMMA_K });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(k: usize, blocks: &[&[usize]]) -> SetPartition {
        SetPartition::from_blocks(k, blocks).unwrap()
    }

    #[test]
    fn special_partitions() {
        assert_eq!(special_m(4).unwrap(), part(4, &[&[1, 2], &[3, 4]]));
        assert_eq!(special_n(4).unwrap(), part(4, &[&[1, 4], &[2, 3]]));
        assert_eq!(special_n(6).unwrap(), part(6, &[&[2, 3], &[4, 5], &[6, 1]]));
        assert_eq!(special_m(2).unwrap(), part(2, &[&[1, 2]]));
        assert_eq!(special_n(2).unwrap(), special_m(2).unwrap());
        assert!(special_m(3).is_err());
        assert!(special_n(0).is_err());
    }

    #[test]
    fn hand_computed_join_counts() {
        assert_eq!(join_block_counts(&part(4, &[&[1, 2], &[3, 4]])).unwrap(), (2, 1));
        assert_eq!(join_block_counts(&part(4, &[&[1, 4], &[2, 3]])).unwrap(), (1, 2));
        assert_eq!(join_block_counts(&part(2, &[&[1, 2]])).unwrap(), (1, 1));
    }

    #[test]
    fn join_identity_holds_through_the_cap() {
        for k in 1..=MAX_LEMMA_K {
            let report = verify_join_identity(k).unwrap();
            assert!(report.passed, "{report:?}");
        }
        assert!(verify_join_identity(8).is_err());
    }

    #[test]
    fn join_identity_fails_off_the_noncrossing_set() {
        // the crossing pairing {1,3},{2,4} has |p∨m| = |p∨n| = 1
        assert_eq!(join_block_counts(&part(4, &[&[1, 3], &[2, 4]])).unwrap(), (1, 1));
    }

    #[test]
    fn count_histograms() {
        let h = |k| verify_count_bijection(k).unwrap().histogram.into_iter().collect::<Vec<_>>();
        assert_eq!(h(2), vec![(1, 1), (2, 1)]);
        assert_eq!(h(3), vec![(1, 1), (2, 3), (3, 1)]);
        assert_eq!(h(4), vec![(1, 1), (2, 6), (3, 6), (4, 1)]);
        for k in 1..=MAX_LEMMA_K {
            assert!(verify_count_bijection(k).unwrap().passed);
        }
    }

    #[test]
    fn collapse_requires_m_coarsening() {
        assert!(collapse_pairs(&part(4, &[&[1, 3], &[2, 4]])).is_err());
        assert_eq!(collapse_pairs(&part(6, &[&[1, 2, 5, 6], &[3, 4]])).unwrap(), part(3, &[&[1, 3], &[2]]));
    }
}
