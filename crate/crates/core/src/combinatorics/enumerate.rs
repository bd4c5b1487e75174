//! Exhaustive enumeration of set partitions under hard size caps.

use super::{CombinatoricsError, SetPartition};

/// Largest `k` accepted by [`enumerate_partitions`] (Bell(12) = 4 213 597).
pub const MAX_PARTITION_SIZE: usize = 12;
/// Largest ground set accepted by the pair-partition enumerators (15!! = 2 027 025).
pub const MAX_PAIRING_SIZE: usize = 16;

/// Iterator over all partitions of `{1..=k}` in lexicographic order of their
/// restricted growth strings.
pub struct Partitions {
    labels: Vec<u8>,
    // running maximum of labels[..=i]
    maxima: Vec<u8>,
    done: bool,
}

impl Partitions {
    pub fn new(k: usize) -> Result<Self, CombinatoricsError> {
        check_cap(k, MAX_PARTITION_SIZE)?;
        Ok(Self { labels: vec![0; k], maxima: vec![0; k], done: false })
    }
}

impl Iterator for Partitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let current = SetPartition::from_canonical(self.labels.clone());
        // advance: bump the rightmost position that may still grow
        let k = self.labels.len();
        let mut i = k;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.labels[i] <= self.maxima[i - 1] {
                self.labels[i] += 1;
                self.maxima[i] = self.maxima[i - 1].max(self.labels[i]);
                for j in i + 1..k {
                    self.labels[j] = 0;
                    self.maxima[j] = self.maxima[i];
                }
                break;
            }
        }
        Some(current)
    }
}

/// All of `P(k)`, canonical and without duplicates.
pub fn enumerate_partitions(k: usize) -> Result<Vec<SetPartition>, CombinatoricsError> {
    Ok(Partitions::new(k)?.collect())
}

/// All pair partitions `P_2(k)`; there are `(k-1)!!` of them.
pub fn enumerate_pair_partitions(k: usize) -> Result<Vec<SetPartition>, CombinatoricsError> {
    check_even(k)?;
    check_cap(k, MAX_PAIRING_SIZE)?;
    let mut out = Vec::new();
    let mut labels = vec![u8::MAX; k];
    pair_up(&mut labels, 0, &mut out, false);
    Ok(out)
}

/// All noncrossing partitions `NC(k)`.
pub fn enumerate_noncrossing(k: usize) -> Result<Vec<SetPartition>, CombinatoricsError> {
    Ok(Partitions::new(k)?.filter(|p| !p.is_crossing()).collect())
}

/// All noncrossing partitions of `{1..=k}` with exactly `blocks` blocks, `NC^(i)(k)`.
pub fn enumerate_noncrossing_with_blocks(k: usize, blocks: usize) -> Result<Vec<SetPartition>, CombinatoricsError> {
    Ok(Partitions::new(k)?.filter(|p| p.block_count() == blocks && !p.is_crossing()).collect())
}

/// All noncrossing pair partitions `NC_2(k)`.
///
/// Generated directly (an element may only pair with a partner that leaves an
/// even, self-contained stretch between them), not by filtering `P_2(k)`.
pub fn enumerate_noncrossing_pairings(k: usize) -> Result<Vec<SetPartition>, CombinatoricsError> {
    check_even(k)?;
    check_cap(k, MAX_PAIRING_SIZE)?;
    let mut out = Vec::new();
    let mut labels = vec![u8::MAX; k];
    pair_up(&mut labels, 0, &mut out, true);
    Ok(out)
}

/// Pairs the first unpaired element with every admissible later one.
/// `next_label` doubles as the number of pairs placed so far; labels are
/// handed out in order of least element, so the result is canonical.
fn pair_up(labels: &mut [u8], next_label: u8, out: &mut Vec<SetPartition>, noncrossing: bool) {
    let Some(first) = labels.iter().position(|&l| l == u8::MAX) else {
        out.push(SetPartition::from_canonical(labels.to_vec()));
        return;
    };
    labels[first] = next_label;
    for partner in first + 1..labels.len() {
        if labels[partner] != u8::MAX {
            continue;
        }
        if noncrossing && !encloses_closed_stretch(labels, first, partner) {
            continue;
        }
        labels[partner] = next_label;
        pair_up(labels, next_label + 1, out, noncrossing);
        labels[partner] = u8::MAX;
    }
    labels[first] = u8::MAX;
}

/// Whether the open stretch between `first` and `partner` can be matched
/// among itself: every element is still free and the count is even. The first
/// free element is always the leftmost, so nothing inside is paired yet.
fn encloses_closed_stretch(labels: &[u8], first: usize, partner: usize) -> bool {
    let inside = &labels[first + 1..partner];
    inside.len().is_multiple_of(2) && inside.iter().all(|&l| l == u8::MAX)
}

fn check_cap(k: usize, cap: usize) -> Result<(), CombinatoricsError> {
    if k == 0 {
        return Err(CombinatoricsError::InvalidPartition("empty ground set".into()));
    }
    if k > cap {
        return Err(CombinatoricsError::SizeLimit { requested: k, limit: cap });
    }
    Ok(())
}

fn check_even(k: usize) -> Result<(), CombinatoricsError> {
    if !k.is_multiple_of(2) {
        return Err(CombinatoricsError::OddSize(k));
    }
    Ok(())
}
