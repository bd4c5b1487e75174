use num_traits::ToPrimitive;
use serde::Serialize;

use super::output::OutputDir;
use super::HarnessError;
use crate::combinatorics::{
    catalan, enumerate_noncrossing, enumerate_noncrossing_pairings, enumerate_noncrossing_with_blocks,
    enumerate_pair_partitions, narayana, verify_count_bijection, verify_join_identity, CombinatoricsError,
    CountBijectionReport, JoinIdentityReport, Partitions, MAX_LEMMA_K,
};

/// Enumerated counts for one size `m`: partitions of `{1..=m}` and pair
/// partitions of `{1..=2m}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub m: usize,
    pub partitions: u64,
    pub noncrossing: u64,
    /// `noncrossing_by_blocks[i - 1] = #NC^(i)(m)`
    pub noncrossing_by_blocks: Vec<u64>,
    pub pair_partitions: u64,
    pub noncrossing_pairings: u64,
    pub catalan: u64,
    pub narayana: Vec<u64>,
}

impl CensusRow {
    pub fn consistent(&self) -> bool {
        self.noncrossing == self.catalan
            && self.noncrossing_pairings == self.catalan
            && self.noncrossing_by_blocks == self.narayana
            && self.narayana.iter().sum::<u64>() == self.catalan
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationReport {
    pub k: usize,
    pub census: Vec<CensusRow>,
    pub join_identity: Vec<JoinIdentityReport>,
    pub count_bijection: Vec<CountBijectionReport>,
    pub passed: bool,
}

fn count(n: usize) -> u64 {
    n as u64
}

fn big(n: num_bigint::BigUint) -> u64 {
    n.to_u64().unwrap_or(u64::MAX)
}

/// Censuses for `m = 1..=k` and the two lemma checks at every `m`.
pub fn enumerate(k: usize) -> Result<EnumerationReport, HarnessError> {
    if k == 0 || k > MAX_LEMMA_K {
        return Err(CombinatoricsError::SizeLimit { requested: k, limit: MAX_LEMMA_K }.into());
    }
    let mut census = Vec::with_capacity(k);
    let mut join_identity = Vec::with_capacity(k);
    let mut count_bijection = Vec::with_capacity(k);
    for m in 1..=k {
        let noncrossing_by_blocks = (1..=m)
            .map(|i| Ok(count(enumerate_noncrossing_with_blocks(m, i)?.len())))
            .collect::<Result<Vec<_>, CombinatoricsError>>()?;
        let narayana =
            (1..=m).map(|i| Ok(big(narayana(m as u64, i as u64)?))).collect::<Result<Vec<_>, CombinatoricsError>>()?;
        census.push(CensusRow {
            m,
            partitions: count(Partitions::new(m)?.count()),
            noncrossing: count(enumerate_noncrossing(m)?.len()),
            noncrossing_by_blocks,
            pair_partitions: count(enumerate_pair_partitions(2 * m)?.len()),
            noncrossing_pairings: count(enumerate_noncrossing_pairings(2 * m)?.len()),
            catalan: big(catalan(m as u64)),
            narayana,
        });
        join_identity.push(verify_join_identity(m)?);
        count_bijection.push(verify_count_bijection(m)?);
    }
    let passed = census.iter().all(CensusRow::consistent)
        && join_identity.iter().all(|r| r.passed)
        && count_bijection.iter().all(|r| r.passed);
    Ok(EnumerationReport { k, census, join_identity, count_bijection, passed })
}

fn joined(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

impl EnumerationReport {
    pub fn write(&self, out: &OutputDir) -> Result<(), HarnessError> {
        let rows: Vec<Vec<String>> = self
            .census
            .iter()
            .map(|r| {
                vec![
                    r.m.to_string(),
                    r.partitions.to_string(),
                    r.noncrossing.to_string(),
                    r.pair_partitions.to_string(),
                    r.noncrossing_pairings.to_string(),
                    r.catalan.to_string(),
                ]
            })
            .collect();
        out.write_table(
            "census.csv",
            &["m", "partitions", "noncrossing", "pair_partitions_2m", "noncrossing_pairings_2m", "catalan"],
            &rows,
        )?;
        let rows: Vec<Vec<String>> = self
            .census
            .iter()
            .map(|r| vec![r.m.to_string(), joined(&r.noncrossing_by_blocks), joined(&r.narayana)])
            .collect();
        out.write_table("noncrossing_by_blocks.csv", &["m", "counts", "narayana"], &rows)?;
        let rows: Vec<Vec<String>> = self
            .join_identity
            .iter()
            .zip(&self.count_bijection)
            .map(|(j, c)| vec![j.k.to_string(), j.checked.to_string(), pass(j.passed).into(), pass(c.passed).into()])
            .collect();
        out.write_table("lemmas.csv", &["k", "pairings_checked", "join_identity", "count_bijection"], &rows)?;
        out.write_json("enumerate.json", self)?;
        Ok(())
    }

    /// Human-readable summary lines.
    pub fn summary(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .census
            .iter()
            .map(|r| {
                format!(
                    "m={}: |P|={} |NC|={} NC by blocks {} |P2(2m)|={} |NC2(2m)|={}",
                    r.m,
                    r.partitions,
                    r.noncrossing,
                    joined(&r.noncrossing_by_blocks),
                    r.pair_partitions,
                    r.noncrossing_pairings
                )
            })
            .collect();
        for (j, c) in self.join_identity.iter().zip(&self.count_bijection) {
            lines.push(format!("k={}: join identity {}, count bijection {}", j.k, pass(j.passed), pass(c.passed)));
        }
        lines.push(format!("overall: {}", pass(self.passed)));
        lines
    }
}

pub(crate) fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
