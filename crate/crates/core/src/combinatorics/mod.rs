//! Set partitions, noncrossing and pair partitions, partition joins, and the
//! Catalan/Narayana counts that give the limit-law moments.

mod enumerate;
mod lemmas;
mod numbers;
mod partition;

use thiserror::Error;

pub use enumerate::{
    enumerate_noncrossing, enumerate_noncrossing_pairings, enumerate_noncrossing_with_blocks,
    enumerate_pair_partitions, enumerate_partitions, Partitions, MAX_PAIRING_SIZE, MAX_PARTITION_SIZE,
};
pub use lemmas::{
    collapse_pairs, join_block_counts, special_m, special_n, verify_count_bijection, verify_join_identity,
    CountBijectionReport, JoinCounterexample, JoinIdentityReport, MAX_LEMMA_K,
};
pub use numbers::{binomial, catalan, limit_moment, narayana, MomentLaw, MomentVector};
pub use partition::SetPartition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombinatoricsError {
    #[error("size {requested} exceeds the enumeration cap {limit}")]
    SizeLimit { requested: usize, limit: usize },
    #[error("pair partitions need an even ground set, got {0}")]
    OddSize(usize),
    #[error("partitions of different ground sets ({left} vs {right})")]
    GroundSizeMismatch { left: usize, right: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("parameter outside the law's domain: {0}")]
    ParameterDomain(String),
}
