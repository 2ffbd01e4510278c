//! Erasure-pattern geometry: partitioning a code by its values on erased
//! coordinates, shortened codes, class probabilities, and exact weight
//! moments.
//!
//! For an erasure pattern `E = {j_1 < … < j_t}` every codeword falls into
//! exactly one class keyed by its bit pattern `z` on `E`; deleting the `E`
//! coordinates inside a class is injective (class members agree there), so
//! the shortened code `C_z[E]` has the cardinality of its class. Empty
//! classes are never stored. All probabilities and moments are exact
//! rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::bits::{format_bits, parse_bits};
use crate::codes::BinaryCode;
use crate::{error::Error, Result};

/// Rational from integers.
pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Rational from an integer.
pub fn int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Exact rational as a `num/den` string, denominator always printed.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A set of erased coordinate positions, 1-based and strictly increasing.
/// Erasing every position is disallowed; the empty pattern is fine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    n: usize,
    indices: Vec<usize>,
}

impl ErasurePattern {
    pub fn new(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::Domain("repeated erasure index".into()));
        }
        if indices.iter().any(|&j| j < 1 || j > n) {
            return Err(Error::Domain(format!(
                "erasure indices must lie in 1..={n}"
            )));
        }
        if indices.len() >= n {
            return Err(Error::Domain(format!("cannot erase all {n} positions")));
        }
        Ok(Self { n, indices })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// Ambient code length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of erased positions.
    pub fn t(&self) -> usize {
        self.indices.len()
    }

    /// Erased positions, 1-based ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Bits of `word` (packed, length `n`) on the erased positions, packed
    /// with `j_1` leftmost, as a width-`t` value.
    pub(crate) fn extract_key(&self, word: u64) -> u64 {
        let mut key = 0u64;
        for &j in &self.indices {
            key = (key << 1) | ((word >> (self.n - j)) & 1);
        }
        key
    }

    /// `word` with the erased positions deleted, packed at width `n - t`.
    pub(crate) fn puncture(&self, word: u64) -> u64 {
        let mut out = 0u64;
        let mut e = self.indices.iter().peekable();
        for p in 1..=self.n {
            if e.peek() == Some(&&p) {
                e.next();
                continue;
            }
            out = (out << 1) | ((word >> (self.n - p)) & 1);
        }
        out
    }

    /// Inverse of [`Self::puncture`] given the erased bits `key`.
    pub fn merge(&self, punctured: u64, key: u64) -> u64 {
        let t = self.t();
        let mut out = 0u64;
        let mut e = self.indices.iter().enumerate().peekable();
        let mut kept = self.n - t;
        for p in 1..=self.n {
            let bit = match e.peek() {
                Some(&(i, &j)) if j == p => {
                    e.next();
                    (key >> (t - 1 - i)) & 1
                }
                _ => {
                    kept -= 1;
                    (punctured >> kept) & 1
                }
            };
            out = (out << 1) | bit;
        }
        out
    }
}

/// Exact integer moments of a weight distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightStats {
    count: u64,
    sum_w: u64,
    sum_w2: u64,
}

impl WeightStats {
    fn from_weights(weights: impl Iterator<Item = u32>) -> Self {
        let mut count = 0u64;
        let mut sum_w = 0u64;
        let mut sum_w2 = 0u64;
        for w in weights {
            count += 1;
            sum_w += u64::from(w);
            sum_w2 += u64::from(w) * u64::from(w);
        }
        Self {
            count,
            sum_w,
            sum_w2,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum_weights(&self) -> u64 {
        self.sum_w
    }

    pub fn sum_squared_weights(&self) -> u64 {
        self.sum_w2
    }

    /// First moment of the weight distribution.
    pub fn mean(&self) -> BigRational {
        ratio(self.sum_w, self.count)
    }

    /// Second moment E[X²].
    pub fn second_moment(&self) -> BigRational {
        ratio(self.sum_w2, self.count)
    }

    /// Variance E[X²] − E[X]².
    pub fn variance(&self) -> BigRational {
        let mean = self.mean();
        self.second_moment() - &mean * &mean
    }
}

/// Exact weight statistics of a code.
pub fn weight_stats(code: &BinaryCode) -> WeightStats {
    WeightStats::from_weights(code.packed_words().iter().map(|w| w.count_ones()))
}

/// One nonempty class of a partition: the key `z`, the shortened code, and
/// its cached weight statistics.
#[derive(Debug, Clone)]
pub struct ShortenedClass {
    key_bits: u64,
    key_len: usize,
    code: BinaryCode,
    stats: WeightStats,
}

impl ShortenedClass {
    /// The key `z` as its bit string (`j_1` first); empty for `t = 0`.
    pub fn key(&self) -> String {
        format_bits_allow_empty(self.key_bits, self.key_len)
    }

    /// Hamming weight of the key.
    pub fn key_weight(&self) -> u32 {
        self.key_bits.count_ones()
    }

    /// The shortened code `C_z[E]`, length `n - t`.
    pub fn code(&self) -> &BinaryCode {
        &self.code
    }

    /// Punctured-weight statistics of the class.
    pub fn stats(&self) -> &WeightStats {
        &self.stats
    }

    /// Number of codewords in the class.
    pub fn size(&self) -> u64 {
        self.code.size() as u64
    }
}

fn format_bits_allow_empty(bits: u64, len: usize) -> String {
    if len == 0 {
        String::new()
    } else {
        format_bits(bits, len)
    }
}

/// The partition of a code by an erasure pattern: shortened classes with
/// their probabilities, plus the pairwise-disjointness flag.
#[derive(Debug, Clone)]
pub struct ShortenedFamily {
    source_id: Option<String>,
    source_size: u64,
    n: usize,
    pattern: ErasurePattern,
    classes: Vec<ShortenedClass>,
    disjoint: bool,
}

impl ShortenedFamily {
    pub fn source_id(&self) -> Option<&str> {
        self.source_id.as_deref()
    }

    /// |C| of the source code.
    pub fn source_size(&self) -> u64 {
        self.source_size
    }

    /// Ambient length of the source code.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pattern(&self) -> &ErasurePattern {
        &self.pattern
    }

    /// Number of erased positions.
    pub fn t(&self) -> usize {
        self.pattern.t()
    }

    /// Length of the shortened codes, `n - t`.
    pub fn shortened_len(&self) -> usize {
        self.n - self.pattern.t()
    }

    /// Nonempty classes, sorted by key value.
    pub fn classes(&self) -> &[ShortenedClass] {
        &self.classes
    }

    /// Class probability `p_z = |C_z[E]| / |C|`.
    pub fn probability(&self, class: &ShortenedClass) -> BigRational {
        ratio(class.size(), self.source_size)
    }

    /// True iff all shortened codes are pairwise disjoint as sets.
    pub fn is_disjoint(&self) -> bool {
        self.disjoint
    }

    /// Look up a class by its key string.
    pub fn class_by_key(&self, key: &str) -> Option<&ShortenedClass> {
        let bits = if key.is_empty() {
            0
        } else {
            parse_bits(key).ok()?
        };
        if key.len() != self.pattern.t() {
            return None;
        }
        self.classes.iter().find(|c| c.key_bits == bits)
    }

    /// JSON form: `{"E":[..], "classes":[{"z","p","weights"},..]}` with exact
    /// `num/den` probabilities and a weight histogram per class.
    pub fn to_json(&self) -> Value {
        let classes: Vec<Value> = self
            .classes
            .iter()
            .map(|c| {
                let weights: BTreeMap<String, u64> = c
                    .code
                    .weight_enumerator()
                    .into_iter()
                    .map(|(w, count)| (w.to_string(), count))
                    .collect();
                json!({
                    "z": c.key(),
                    "p": rational_string(&self.probability(c)),
                    "weights": weights,
                })
            })
            .collect();
        json!({ "E": self.pattern.indices(), "classes": classes })
    }
}

/// Partition `code` by its values on the erased positions.
pub fn partition(code: &BinaryCode, pattern: &ErasurePattern) -> Result<ShortenedFamily> {
    if pattern.n() != code.n() {
        return Err(Error::Domain(format!(
            "pattern is for length {} but code has length {}",
            pattern.n(),
            code.n()
        )));
    }
    let mut buckets: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &w in code.packed_words() {
        buckets
            .entry(pattern.extract_key(w))
            .or_default()
            .push(pattern.puncture(w));
    }
    let shortened_len = code.n() - pattern.t();
    let mut classes = Vec::with_capacity(buckets.len());
    let mut total = 0usize;
    for (key_bits, words) in buckets {
        total += words.len();
        let shortened = BinaryCode::new(shortened_len, words, None)?;
        let stats = weight_stats(&shortened);
        classes.push(ShortenedClass {
            key_bits,
            key_len: pattern.t(),
            code: shortened,
            stats,
        });
    }
    debug_assert_eq!(
        total,
        code.size(),
        "every codeword lands in exactly one class"
    );

    // Disjoint iff no punctured word is shared across classes; within a class
    // puncturing is injective, so comparing counts against the union suffices.
    let mut all: Vec<u64> = classes
        .iter()
        .flat_map(|c| c.code.packed_words().iter().copied())
        .collect();
    all.sort_unstable();
    all.dedup();
    let disjoint = all.len() == code.size();

    Ok(ShortenedFamily {
        source_id: code.origin().map(str::to_owned),
        source_size: code.size() as u64,
        n: code.n(),
        pattern: pattern.clone(),
        classes,
        disjoint,
    })
}

/// True iff all shortened codes of the pattern are pairwise disjoint.
pub fn is_t_disjoint(code: &BinaryCode, pattern: &ErasurePattern) -> Result<bool> {
    Ok(partition(code, pattern)?.is_disjoint())
}

/// Variance of the weights of the un-punctured class `C_{z,E}` (codewords of
/// `C` matching `z` on `E`, coordinates kept). Equals the variance of the
/// punctured class: puncturing shifts every weight by the constant `wt(z)`.
/// This function recomputes it from the source code so the equality stays a
/// checkable property.
pub fn unpunctured_variance(
    code: &BinaryCode,
    pattern: &ErasurePattern,
    key: &str,
) -> Result<BigRational> {
    if pattern.n() != code.n() {
        return Err(Error::Domain(format!(
            "pattern is for length {} but code has length {}",
            pattern.n(),
            code.n()
        )));
    }
    if key.len() != pattern.t() {
        return Err(Error::Domain(format!(
            "class key {key:?} has length {}, expected {}",
            key.len(),
            pattern.t()
        )));
    }
    let key_bits = if key.is_empty() { 0 } else { parse_bits(key)? };
    let stats = WeightStats::from_weights(
        code.packed_words()
            .iter()
            .copied()
            .filter(|&w| pattern.extract_key(w) == key_bits)
            .map(|w| w.count_ones()),
    );
    if stats.count() == 0 {
        return Err(Error::EmptyClass {
            key: key.to_owned(),
        });
    }
    Ok(stats.variance())
}
