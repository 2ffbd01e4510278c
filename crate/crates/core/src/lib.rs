//! Quantum probe states built from classical binary codes, and what qubit
//! erasures do to their field-sensing power.
//!
//! A binary code `C ⊆ {0,1}^n` defines the n-qubit probe state
//! `|ψ_C⟩ = |C|^{-1/2} Σ_{x∈C} |x⟩`. Erasing a known set `E` of qubits leaves
//! a mixture of uniform superpositions over the shortened codes `C_z[E]`, one
//! per bit pattern `z` on `E`. The quantum Fisher information (QFI) of the
//! erased probe under the collective generator `H = Z_1 + … + Z_{n-|E|}` is
//! then sandwiched by closed-form expressions in the weight statistics of
//! those shortened codes.
//!
//! The crate is organized around that pipeline:
//!
//! - [`codes`]: bit-packed binary codes and their constructors (Reed-Muller,
//!   repetition, concatenation with inner repetition codes, cosets, duals).
//! - [`shorten`]: erasure patterns, the partition of a code into shortened
//!   classes, class probabilities, and exact weight moments.
//! - [`bounds`]: rational-arithmetic QFI lower/upper bounds from weight
//!   statistics, the repetition-boosting shortcut, and erasure-pattern sweeps.
//! - [`oracle`]: exact QFI of the erased probe via dense symmetric
//!   eigendecomposition, on a restricted codeword basis and on the full
//!   Hilbert space as an independent cross-check.
//! - [`estimator`]: the explicit commutator observable, its exact moment
//!   curves in the phase, and the error-propagation mean squared error.
//!
//! All bound arithmetic is exact (`BigRational`); floats appear only where a
//! spectral decomposition is inherently numeric.

pub mod bits;
pub mod bounds;
pub mod codes;
pub mod eigen;
pub mod error;
pub mod estimator;
pub mod oracle;
pub mod shorten;

pub use bits::{BitVector, GeneratorMatrix};
pub use bounds::{QfiReport, SweepMode, SweepOptions, SweepSummary, SymmetricSandwich};
pub use codes::BinaryCode;
pub use error::Error;
pub use estimator::{ClassMoments, EstimatorCurve, Observable};
pub use num_rational::BigRational;
pub use oracle::{DensityOperator, HamiltonianDiag, OracleTriple};
pub use shorten::{ErasurePattern, ShortenedClass, ShortenedFamily, WeightStats};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Hard cap on code length: codewords are stored in single machine words.
pub const MAX_CODE_LEN: usize = 64;

/// Default cap on generator-matrix rows when enumerating all 2^k codewords.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Default cap on |C| for the dense restricted-basis oracle.
pub const DEFAULT_ORACLE_CAP: usize = 4096;
