//! Binary block codes: construction, enumeration, and elementary algebra.
//!
//! A [`BinaryCode`] is an explicit set of codewords; linearity is a property,
//! not a requirement, because shortened codes of a linear code are in general
//! non-linear. Codewords are stored sorted as unsigned integers (the bit
//! string read as a binary number), which makes equality, JSON round-trips,
//! and report ordering deterministic.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::bits::{format_bits, mask, BitVector, GeneratorMatrix};
use crate::{error::Error, Result, DEFAULT_ENUMERATION_CAP, MAX_CODE_LEN};

/// A length-`n` binary code as an explicit, sorted, duplicate-free set of
/// packed codewords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryCode {
    n: usize,
    words: Vec<u64>,
    origin: Option<String>,
}

impl BinaryCode {
    /// Build from packed words. Words are sorted; duplicates are rejected.
    pub fn new(n: usize, mut words: Vec<u64>, origin: Option<String>) -> Result<Self> {
        if n == 0 || n > MAX_CODE_LEN {
            return Err(Error::Domain(format!(
                "code length must be in 1..={MAX_CODE_LEN}, got {n}"
            )));
        }
        if words.is_empty() {
            return Err(Error::Domain(
                "a code must contain at least one codeword".into(),
            ));
        }
        for &w in &words {
            if w & !mask(n) != 0 {
                return Err(Error::Domain(format!(
                    "codeword {w:#x} does not fit in {n} bits"
                )));
            }
        }
        words.sort_unstable();
        if words.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::Domain("duplicate codewords".into()));
        }
        Ok(Self { n, words, origin })
    }

    /// Build from [`BitVector`] codewords, all of the same length.
    pub fn from_bitvectors(words: &[BitVector], origin: Option<String>) -> Result<Self> {
        let n = match words.first() {
            Some(w) => w.len(),
            None => {
                return Err(Error::Domain(
                    "a code must contain at least one codeword".into(),
                ))
            }
        };
        if words.iter().any(|w| w.len() != n) {
            return Err(Error::Domain("codewords have differing lengths".into()));
        }
        Self::new(n, words.iter().map(|w| w.value()).collect(), origin)
    }

    /// Parse codewords from `0`/`1` strings.
    pub fn parse_words(words: &[impl AsRef<str>], origin: Option<String>) -> Result<Self> {
        let parsed = words
            .iter()
            .map(|s| BitVector::parse(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_bitvectors(&parsed, origin)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of codewords.
    pub fn size(&self) -> usize {
        self.words.len()
    }

    /// Packed codewords, sorted ascending.
    pub fn packed_words(&self) -> &[u64] {
        &self.words
    }

    pub fn words(&self) -> impl Iterator<Item = BitVector> + '_ {
        let n = self.n;
        self.words
            .iter()
            .map(move |&bits| BitVector::new(n, bits).expect("stored word is valid"))
    }

    /// Provenance tag, e.g. `rm(1,3)` or the source file stem.
    pub fn origin(&self) -> Option<&str> {
        self.origin.as_deref()
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = Some(origin.into());
        self
    }

    pub fn contains(&self, word: u64) -> bool {
        self.words.binary_search(&word).is_ok()
    }

    /// Histogram of Hamming weights over all codewords.
    pub fn weight_enumerator(&self) -> BTreeMap<u32, u64> {
        let mut hist = BTreeMap::new();
        for &w in &self.words {
            *hist.entry(w.count_ones()).or_insert(0) += 1;
        }
        hist
    }

    /// True iff the zero word is present and the set is closed under XOR.
    pub fn is_linear(&self) -> bool {
        if !self.contains(0) {
            return false;
        }
        let set: HashSet<u64> = self.words.iter().copied().collect();
        for (i, &a) in self.words.iter().enumerate() {
            for &b in &self.words[i + 1..] {
                if !set.contains(&(a ^ b)) {
                    return false;
                }
            }
        }
        true
    }

    /// Minimum distance: the least nonzero codeword weight for linear codes,
    /// the least pairwise Hamming distance otherwise. Needs at least two
    /// codewords.
    pub fn min_distance(&self) -> Result<u32> {
        if self.size() < 2 {
            return Err(Error::Domain(
                "minimum distance needs at least two codewords".into(),
            ));
        }
        if self.is_linear() {
            Ok(self
                .words
                .iter()
                .filter(|&&w| w != 0)
                .map(|w| w.count_ones())
                .min()
                .expect("linear code with |C| >= 2 has a nonzero word"))
        } else {
            let mut best = u32::MAX;
            for (i, &a) in self.words.iter().enumerate() {
                for &b in &self.words[i + 1..] {
                    best = best.min((a ^ b).count_ones());
                }
            }
            Ok(best)
        }
    }
}

/// Enumerate all 2^k XOR combinations of the rows of a full-rank generator
/// matrix, with the default row cap of [`DEFAULT_ENUMERATION_CAP`].
pub fn from_generator(g: &GeneratorMatrix) -> Result<BinaryCode> {
    from_generator_capped(g, DEFAULT_ENUMERATION_CAP)
}

/// As [`from_generator`] with an explicit cap on the number of rows.
pub fn from_generator_capped(g: &GeneratorMatrix, cap: usize) -> Result<BinaryCode> {
    if g.k() > cap {
        return Err(Error::Size {
            what: "generator rows",
            value: g.k(),
            cap,
        });
    }
    let rows = g.packed_rows();
    let mut words = Vec::with_capacity(1usize << g.k());
    words.push(0u64);
    for &row in rows {
        for i in 0..words.len() {
            words.push(words[i] ^ row);
        }
    }
    BinaryCode::new(
        g.n(),
        words,
        Some(format!("generator({}x{})", g.k(), g.n())),
    )
}

/// Generator matrix of the Reed-Muller code RM(r, m): rows are evaluation
/// vectors of all monomials of degree ≤ r in m binary variables over the 2^m
/// points, degree-ascending and lexicographic within a degree. Column `j`
/// evaluates the point with binary expansion `j - 1`, variable `i` reading
/// bit `i - 1` of the point index.
pub fn reed_muller(r: usize, m: usize) -> Result<GeneratorMatrix> {
    if m == 0 || m > 6 || r > m {
        return Err(Error::Domain(format!(
            "reed_muller requires 0 <= r <= m and 1 <= m <= 6, got r={r}, m={m}"
        )));
    }
    let n = 1usize << m;
    let mut rows = Vec::new();
    for degree in 0..=r {
        for vars in monomials(m, degree) {
            let mut row = 0u64;
            for point in 0..n {
                let value = vars.iter().all(|&i| (point >> (i - 1)) & 1 == 1);
                if value {
                    // column j = point + 1, stored at bit n - j
                    row |= 1u64 << (n - 1 - point);
                }
            }
            rows.push(row);
        }
    }
    GeneratorMatrix::new(n, rows)
}

/// All `degree`-subsets of {1..m} in lexicographic order.
fn monomials(m: usize, degree: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (1..=m).combinations(degree).collect()
}

/// The RM(r, m) code itself.
pub fn reed_muller_code(r: usize, m: usize) -> Result<BinaryCode> {
    Ok(from_generator(&reed_muller(r, m)?)?.with_origin(format!("rm({r},{m})")))
}

/// The length-`n` repetition code {0^n, 1^n}.
pub fn repetition(n: usize) -> Result<BinaryCode> {
    if n == 0 {
        return Err(Error::Domain("repetition length must be positive".into()));
    }
    if n > MAX_CODE_LEN {
        return Err(Error::Domain(format!(
            "code length must be in 1..={MAX_CODE_LEN}, got {n}"
        )));
    }
    BinaryCode::new(n, vec![0, mask(n)], Some(format!("rep({n})")))
}

/// Concatenate with an inner length-`r` repetition code: every codeword bit
/// is repeated `r` times in place. Output length is `n·r`, codeword count is
/// unchanged, and every codeword weight is scaled by exactly `r`.
pub fn concatenate_repetition(code: &BinaryCode, r: usize) -> Result<BinaryCode> {
    if r == 0 {
        return Err(Error::Domain(
            "inner repetition length must be positive".into(),
        ));
    }
    let n_out = code
        .n()
        .checked_mul(r)
        .filter(|&n| n <= MAX_CODE_LEN)
        .ok_or(Error::Size {
            what: "concatenated length",
            value: code.n().saturating_mul(r),
            cap: MAX_CODE_LEN,
        })?;
    let block = mask(r);
    let words = code
        .packed_words()
        .iter()
        .map(|&w| {
            let mut out = 0u64;
            for p in 0..code.n() {
                if (w >> (code.n() - 1 - p)) & 1 == 1 {
                    out |= block << (n_out - (p + 1) * r);
                }
            }
            out
        })
        .collect();
    let origin = match code.origin() {
        Some(o) => format!("concat({o},{r})"),
        None => format!("concat(?,{r})"),
    };
    BinaryCode::new(n_out, words, Some(origin))
}

/// The coset `{shift ⊕ c : c ∈ code}`. The caller supplies a linear `code`
/// when a coset of a subspace is wanted; only the length is checked.
pub fn coset_code(code: &BinaryCode, shift: &BitVector) -> Result<BinaryCode> {
    if shift.len() != code.n() {
        return Err(Error::Domain(format!(
            "shift length {} does not match code length {}",
            shift.len(),
            code.n()
        )));
    }
    let s = shift.value();
    let words = code.packed_words().iter().map(|&w| w ^ s).collect();
    let origin = match code.origin() {
        Some(o) => format!("coset({o},{shift})"),
        None => format!("coset(?,{shift})"),
    };
    BinaryCode::new(code.n(), words, Some(origin))
}

/// JSON form of a code file: either explicit codewords or a generator matrix.
#[derive(Debug, Serialize, Deserialize)]
struct CodeJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    codewords: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<Vec<String>>,
}

/// Load a code from its JSON form: `{"n": .., "codewords": ["0101", ..]}` or
/// `{"generator": ["1111", ..]}` (expanded through [`from_generator`]).
pub fn load_code(json: &str) -> Result<BinaryCode> {
    let parsed: CodeJson =
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("code JSON: {e}")))?;
    match (parsed.codewords, parsed.generator) {
        (Some(_), Some(_)) => Err(Error::Parse(
            "code JSON must have either \"codewords\" or \"generator\", not both".into(),
        )),
        (Some(words), None) => {
            let code = BinaryCode::parse_words(&words, None)?;
            if let Some(n) = parsed.n {
                if n != code.n() {
                    return Err(Error::Parse(format!(
                        "declared n = {n} but codewords have length {}",
                        code.n()
                    )));
                }
            }
            Ok(code)
        }
        (None, Some(rows)) => {
            let g = GeneratorMatrix::parse_rows(&rows)?;
            if let Some(n) = parsed.n {
                if n != g.n() {
                    return Err(Error::Parse(format!(
                        "declared n = {n} but generator rows have length {}",
                        g.n()
                    )));
                }
            }
            from_generator(&g)
        }
        (None, None) => Err(Error::Parse(
            "code JSON needs a \"codewords\" or \"generator\" field".into(),
        )),
    }
}

/// Serialize to the explicit-codeword JSON form, codewords sorted as unsigned
/// integers. `load_code(save_code(c))` reproduces `c` exactly.
pub fn save_code(code: &BinaryCode) -> String {
    let doc = CodeJson {
        n: Some(code.n()),
        codewords: Some(
            code.packed_words()
                .iter()
                .map(|&w| format_bits(w, code.n()))
                .collect(),
        ),
        generator: None,
    };
    serde_json::to_string_pretty(&doc).expect("code JSON serializes")
}
