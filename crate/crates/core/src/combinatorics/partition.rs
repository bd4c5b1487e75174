use std::fmt;

use serde::{Serialize, Serializer};

use super::CombinatoricsError;

/// A partition of `{1, ..., k}` into nonempty disjoint blocks.
///
/// Stored as a restricted growth string: `labels[i]` is the index of the block
/// holding element `i + 1`, and blocks are numbered in order of their least
/// element. That form is canonical, so derived equality is partition equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    labels: Vec<u8>,
}

impl SetPartition {
    /// Largest ground set this type can represent.
    pub const MAX_GROUND_SIZE: usize = 64;

    /// Builds a partition from an arbitrary labelling of `1..=k`; elements
    /// with equal labels share a block.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Result<Self, CombinatoricsError> {
        check_ground_size(labels.len())?;
        let mut seen: Vec<&T> = Vec::new();
        let canonical = labels
            .iter()
            .map(|l| match seen.iter().position(|s| *s == l) {
                Some(i) => i as u8,
                None => {
                    seen.push(l);
                    (seen.len() - 1) as u8
                }
            })
            .collect();
        Ok(Self { labels: canonical })
    }

    /// Builds a partition of `{1..=k}` from 1-based blocks, validating that
    /// the blocks are nonempty, disjoint and cover the ground set.
    pub fn from_blocks<B: AsRef<[usize]>>(ground_size: usize, blocks: &[B]) -> Result<Self, CombinatoricsError> {
        check_ground_size(ground_size)?;
        let mut owner: Vec<Option<usize>> = vec![None; ground_size];
        for (b, block) in blocks.iter().enumerate() {
            let block = block.as_ref();
            if block.is_empty() {
                return Err(CombinatoricsError::InvalidPartition("empty block".into()));
            }
            for &e in block {
                if e == 0 || e > ground_size {
                    return Err(CombinatoricsError::InvalidPartition(format!("element {e} outside 1..={ground_size}")));
                }
                if owner[e - 1].replace(b).is_some() {
                    return Err(CombinatoricsError::InvalidPartition(format!("element {e} appears in two blocks")));
                }
            }
        }
        let labels: Vec<usize> = owner
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                o.ok_or_else(|| CombinatoricsError::InvalidPartition(format!("element {} not covered", i + 1)))
            })
            .collect::<Result<_, _>>()?;
        Self::from_labels(&labels)
    }

    /// Wraps a restricted growth string that is already canonical.
    pub(crate) fn from_canonical(labels: Vec<u8>) -> Self {
        debug_assert!(is_restricted_growth(&labels));
        Self { labels }
    }

    /// The single-block partition of `{1..=k}`.
    pub fn one_block(ground_size: usize) -> Result<Self, CombinatoricsError> {
        check_ground_size(ground_size)?;
        Ok(Self { labels: vec![0; ground_size] })
    }

    /// The partition of `{1..=k}` into singletons.
    pub fn singletons(ground_size: usize) -> Result<Self, CombinatoricsError> {
        check_ground_size(ground_size)?;
        Ok(Self { labels: (0..ground_size as u8).collect() })
    }

    pub fn ground_size(&self) -> usize {
        self.labels.len()
    }

    /// Number of blocks, `|p|`.
    pub fn block_count(&self) -> usize {
        self.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }

    /// The canonical restricted growth string (0-based block indices).
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Blocks as sorted 1-based element lists, ordered by least element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(i + 1);
        }
        blocks
    }

    /// Whether the 1-based elements `i` and `j` lie in the same block.
    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i - 1] == self.labels[j - 1]
    }

    pub fn is_pair_partition(&self) -> bool {
        let mut sizes = vec![0usize; self.block_count()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes.iter().all(|&s| s == 2)
    }

    /// True iff there are `p1 < q1 < p2 < q2` with `p1 ~ p2`, `q1 ~ q2` and
    /// `p1 !~ q1`.
    ///
    /// Two blocks interleave exactly when their merged element sequence,
    /// with runs collapsed, alternates at least four times.
    pub fn is_crossing(&self) -> bool {
        let count = self.block_count();
        for a in 0..count as u8 {
            for b in (a + 1)..count as u8 {
                let mut runs = 0;
                let mut last = None;
                for &l in &self.labels {
                    if (l == a || l == b) && last != Some(l) {
                        runs += 1;
                        last = Some(l);
                        if runs >= 4 {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// `self ∨ other`: the finest partition coarser than both, computed as the
    /// connected components of the union of the two relations.
    pub fn join(&self, other: &SetPartition) -> Result<SetPartition, CombinatoricsError> {
        if self.ground_size() != other.ground_size() {
            return Err(CombinatoricsError::GroundSizeMismatch {
                left: self.ground_size(),
                right: other.ground_size(),
            });
        }
        let mut sets = DisjointSets::new(self.ground_size());
        for p in [self, other] {
            let mut first: Vec<Option<usize>> = vec![None; p.block_count()];
            for (i, &l) in p.labels.iter().enumerate() {
                match first[l as usize] {
                    Some(root) => sets.union(root, i),
                    None => first[l as usize] = Some(i),
                }
            }
        }
        let roots: Vec<usize> = (0..self.ground_size()).map(|i| sets.find(i)).collect();
        SetPartition::from_labels(&roots)
    }

    /// Whether every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &SetPartition) -> bool {
        if self.ground_size() != coarser.ground_size() {
            return false;
        }
        // every block of `self` must map to a single block of `coarser`
        let mut image: Vec<Option<u8>> = vec![None; self.block_count()];
        self.labels
            .iter()
            .zip(&coarser.labels)
            .all(|(&fine, &coarse)| *image[fine as usize].get_or_insert(coarse) == coarse)
    }
}

fn check_ground_size(k: usize) -> Result<(), CombinatoricsError> {
    if k == 0 {
        return Err(CombinatoricsError::InvalidPartition("empty ground set".into()));
    }
    if k > SetPartition::MAX_GROUND_SIZE {
        return Err(CombinatoricsError::SizeLimit { requested: k, limit: SetPartition::MAX_GROUND_SIZE });
    }
    Ok(())
}

fn is_restricted_growth(labels: &[u8]) -> bool {
    let mut next = 0u8;
    for &l in labels {
        if l > next {
            return false;
        }
        if l == next {
            next += 1;
        }
    }
    true
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (b, block) in self.blocks().iter().enumerate() {
            if b > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (i, e) in block.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for SetPartition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.blocks().serialize(serializer)
    }
}

/// Union by size with path halving.
struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(k: usize, blocks: &[&[usize]]) -> SetPartition {
        SetPartition::from_blocks(k, blocks).unwrap()
    }

    #[test]
    fn canonical_form_sorts_blocks_by_least_element() {
        let p = part(4, &[&[4, 1], &[3, 2]]);
        assert_eq!(p.blocks(), vec![vec![1, 4], vec![2, 3]]);
        assert_eq!(p.labels(), &[0, 1, 1, 0]);
        assert_eq!(p.to_string(), "{{1,4},{2,3}}");
        assert_eq!(p, part(4, &[&[2, 3], &[1, 4]]));
    }

    #[test]
    fn rejects_malformed_blocks() {
        assert!(SetPartition::from_blocks(3, &[&[1, 2][..], &[2, 3]]).is_err());
        assert!(SetPartition::from_blocks(3, &[&[1, 2][..]]).is_err());
        assert!(SetPartition::from_blocks(3, &[&[1, 2, 3][..], &[]]).is_err());
        assert!(SetPartition::from_blocks(2, &[&[1, 3][..]]).is_err());
        assert!(SetPartition::from_blocks(0, &[] as &[&[usize]]).is_err());
    }

    #[test]
    fn crossing_examples() {
        assert!(part(4, &[&[1, 3], &[2, 4]]).is_crossing());
        assert!(!part(4, &[&[1, 2], &[3, 4]]).is_crossing());
        assert!(!part(4, &[&[1, 4], &[2, 3]]).is_crossing());
        assert!(part(5, &[&[1, 3, 5], &[2, 4]]).is_crossing());
        assert!(!part(5, &[&[1, 5], &[2, 3, 4]]).is_crossing());
    }

    #[test]
    fn join_examples() {
        let m = part(4, &[&[1, 2], &[3, 4]]);
        let n = part(4, &[&[2, 3], &[4, 1]]);
        assert_eq!(m.join(&n).unwrap(), SetPartition::one_block(4).unwrap());
        assert_eq!(m.join(&m).unwrap(), m);
        let q = part(4, &[&[2, 3], &[1], &[4]]);
        assert_eq!(m.join(&q).unwrap(), SetPartition::one_block(4).unwrap());
        let a = part(4, &[&[1, 2], &[3], &[4]]);
        assert_eq!(a.join(&q).unwrap(), part(4, &[&[1, 2, 3], &[4]]));
    }

    #[test]
    fn join_rejects_mismatched_ground_sets() {
        let a = SetPartition::singletons(3).unwrap();
        let b = SetPartition::singletons(4).unwrap();
        assert!(matches!(a.join(&b), Err(CombinatoricsError::GroundSizeMismatch { left: 3, right: 4 })));
    }

    #[test]
    fn refinement_order() {
        let fine = part(4, &[&[1, 2], &[3], &[4]]);
        let coarse = part(4, &[&[1, 2, 4], &[3]]);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(SetPartition::singletons(4).unwrap().refines(&fine));
    }
}

#[cfg(test)]
mod proptests {
    use proptest::prelude::*;

    use super::*;

    fn partition_of(k: usize) -> impl Strategy<Value = SetPartition> {
        proptest::collection::vec(0usize..k, k).prop_map(|l| SetPartition::from_labels(&l).unwrap())
    }

    fn triple() -> impl Strategy<Value = (SetPartition, SetPartition, SetPartition)> {
        (1usize..=10).prop_flat_map(|k| (partition_of(k), partition_of(k), partition_of(k)))
    }

    proptest! {
        #[test]
        fn join_is_a_lattice_operation((a, b, c) in triple()) {
            let ab = a.join(&b).unwrap();
            prop_assert_eq!(&ab, &b.join(&a).unwrap());
            prop_assert_eq!(ab.join(&c).unwrap(), a.join(&b.join(&c).unwrap()).unwrap());
            prop_assert_eq!(a.join(&a).unwrap(), a.clone());
            prop_assert!(a.refines(&ab) && b.refines(&ab));
            // least upper bound: anything above a and b is above a ∨ b
            if a.refines(&c) && b.refines(&c) {
                prop_assert!(ab.refines(&c));
            }
            prop_assert!(ab.block_count() <= a.block_count().min(b.block_count()));
        }
    }

    #[test]
    fn joins_with_m_stay_crossing_only_if_the_pairing_crosses() {
        use crate::combinatorics::{enumerate_pair_partitions, special_m};
        for k in 1..=5 {
            let m = special_m(2 * k).unwrap();
            for p in enumerate_pair_partitions(2 * k).unwrap() {
                if p.join(&m).unwrap().is_crossing() {
                    assert!(p.is_crossing(), "{p}");
                }
            }
        }
    }
}
