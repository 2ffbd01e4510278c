//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong when building codes, partitioning them, or
/// evaluating bounds and oracles.
#[derive(Debug, Error)]
pub enum Error {
    /// Generator matrix rows are linearly dependent over GF(2).
    #[error("rank-deficient generator matrix: rank {rank} < {rows} rows")]
    Rank { rank: usize, rows: usize },

    /// A configured size cap would be exceeded.
    #[error("size cap exceeded: {what} is {value}, cap is {cap}")]
    Size {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    /// An argument is outside its documented domain.
    #[error("{0}")]
    Domain(String),

    /// A shortened class addressed by key does not exist.
    #[error("shortened class {key:?} is empty")]
    EmptyClass { key: String },

    /// The shortened codes of the pattern are not pairwise disjoint, so the
    /// weight-statistics bounds do not apply.
    #[error("shortened classes are not pairwise disjoint for erasure pattern {pattern}")]
    Disjointness { pattern: String },

    /// An operation-specific precondition failed.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A density operator fails its Hermiticity / positivity / trace checks.
    #[error("malformed density operator: {0}")]
    MalformedState(String),

    /// A state vector is not normalized.
    #[error("state vector not normalized: |⟨ψ|ψ⟩ - 1| = {0:e}")]
    Normalization(f64),

    /// The family has zero weighted weight-variance, so the estimator
    /// precision bound is undefined.
    #[error("family has zero weighted weight variance; precision bound undefined")]
    DegenerateFamily,

    /// Malformed input file or string.
    #[error("parse error: {0}")]
    Parse(String),
}
