//! Random matrices from the ten classical symmetry classes with dependent
//! entries, their empirical spectral moments, and the limit laws those
//! moments converge to.

// `!(a < b)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod dependence;
pub mod ensembles;
pub mod harness;
pub mod limits;
pub mod spectra;
