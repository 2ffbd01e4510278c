//! Bit vectors and binary generator matrices, packed into machine words.
//!
//! Positions are 1-based and position 1 is the leftmost character of the
//! printed string (qubit 1). A length-`L` vector lives in the low `L` bits of
//! a `u64` with position `p` stored at bit `L - p`, so the packed value equals
//! the bit string read as a big-endian binary number. Sorting by packed value
//! therefore sorts codewords as unsigned integers.

use std::fmt;

use crate::{error::Error, Result, MAX_CODE_LEN};

/// A fixed-length vector over GF(2), at most [`MAX_CODE_LEN`] bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    bits: u64,
}

impl BitVector {
    /// Wrap a packed word. `bits` must fit in `len` bits, `1 ≤ len ≤ 64`.
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len == 0 || len > MAX_CODE_LEN {
            return Err(Error::Domain(format!(
                "bit vector length must be in 1..={MAX_CODE_LEN}, got {len}"
            )));
        }
        if bits & !mask(len) != 0 {
            return Err(Error::Domain(format!(
                "value {bits:#x} does not fit in {len} bits"
            )));
        }
        Ok(Self { len, bits })
    }

    /// Parse a string of `0`/`1` characters, position 1 leftmost.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = parse_bits(s)?;
        Self::new(s.len(), bits)
    }

    /// The all-zeros vector of length `len`.
    pub fn zero(len: usize) -> Result<Self> {
        Self::new(len, 0)
    }

    /// The all-ones vector of length `len`.
    pub fn ones(len: usize) -> Result<Self> {
        Self::new(len, mask(len))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false: a bit vector has at least one position.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Packed value; equals the bit string read as a binary number.
    pub fn value(&self) -> u64 {
        self.bits
    }

    /// Number of ones.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Bit at 1-based position `p` (position 1 = leftmost).
    pub fn get(&self, p: usize) -> bool {
        assert!(
            p >= 1 && p <= self.len,
            "position {p} out of 1..={}",
            self.len
        );
        (self.bits >> (self.len - p)) & 1 == 1
    }

    /// Entrywise XOR. Both operands must have the same length.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::Domain(format!(
                "length mismatch: {} vs {}",
                self.len, other.len
            )));
        }
        Ok(Self {
            len: self.len,
            bits: self.bits ^ other.bits,
        })
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_bits(self.bits, self.len))
    }
}

/// Low-`len` bit mask.
pub(crate) fn mask(len: usize) -> u64 {
    debug_assert!((1..=64).contains(&len));
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

pub(crate) fn parse_bits(s: &str) -> Result<u64> {
    if s.is_empty() || s.len() > MAX_CODE_LEN {
        return Err(Error::Parse(format!(
            "bit string length must be in 1..={MAX_CODE_LEN}, got {}",
            s.len()
        )));
    }
    let mut bits = 0u64;
    for c in s.chars() {
        bits <<= 1;
        match c {
            '0' => {}
            '1' => bits |= 1,
            other => {
                return Err(Error::Parse(format!(
                    "invalid character {other:?} in bit string {s:?}"
                )))
            }
        }
    }
    Ok(bits)
}

pub(crate) fn format_bits(bits: u64, len: usize) -> String {
    (1..=len)
        .map(|p| {
            if (bits >> (len - p)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// A full-row-rank k×n matrix over GF(2), rows packed like [`BitVector`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    k: usize,
    n: usize,
    rows: Vec<u64>,
}

impl GeneratorMatrix {
    /// Build from packed rows, verifying full row rank. `k = 0` (an empty
    /// matrix spanning only the zero word) is allowed.
    pub fn new(n: usize, rows: Vec<u64>) -> Result<Self> {
        if n == 0 || n > MAX_CODE_LEN {
            return Err(Error::Domain(format!(
                "matrix width must be in 1..={MAX_CODE_LEN}, got {n}"
            )));
        }
        let k = rows.len();
        if k > n {
            return Err(Error::Domain(format!("more rows ({k}) than columns ({n})")));
        }
        for &row in &rows {
            if row & !mask(n) != 0 {
                return Err(Error::Domain(format!(
                    "row {row:#x} does not fit in {n} bits"
                )));
            }
        }
        let rank = gf2_rank(&rows);
        if rank < k {
            return Err(Error::Rank { rank, rows: k });
        }
        Ok(Self { k, n, rows })
    }

    /// Build from row vectors.
    pub fn from_rows(rows: &[BitVector]) -> Result<Self> {
        let n = match rows.first() {
            Some(r) => r.len(),
            None => {
                return Err(Error::Domain(
                    "cannot infer width of a matrix with no rows".into(),
                ))
            }
        };
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("rows have differing lengths".into()));
        }
        Self::new(n, rows.iter().map(|r| r.value()).collect())
    }

    /// Parse rows of `0`/`1` strings.
    pub fn parse_rows(rows: &[impl AsRef<str>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|s| BitVector::parse(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&parsed)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn packed_rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn rows(&self) -> impl Iterator<Item = BitVector> + '_ {
        let n = self.n;
        self.rows
            .iter()
            .map(move |&bits| BitVector { len: n, bits })
    }

    /// Generator matrix of the dual code: an (n−k)×n full-rank matrix whose
    /// rows have even overlap with every row of `self`. Computed as a basis
    /// of the right kernel from the reduced row echelon form.
    pub fn dual(&self) -> Result<Self> {
        let n = self.n;
        let rref = gf2_rref(&self.rows, n);
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; n];
            for (i, &(col, _)) in rref.iter().enumerate() {
                v[col] = Some(i);
            }
            v
        };
        let mut dual_rows = Vec::with_capacity(n - self.k);
        for (free, pivot) in pivot_of_col.iter().enumerate() {
            if pivot.is_some() {
                continue;
            }
            // x_free = 1, x_pivot = entry of the pivot row at the free column.
            let mut row = bit_at(n, free);
            for &(col, r) in &rref {
                if (r >> (n - 1 - free)) & 1 == 1 {
                    row |= bit_at(n, col);
                }
            }
            dual_rows.push(row);
        }
        Self::new(n, dual_rows)
    }
}

/// Packed word with a 1 at 0-based column `col` (column 0 = leftmost).
fn bit_at(n: usize, col: usize) -> u64 {
    1u64 << (n - 1 - col)
}

/// Rank over GF(2) of packed rows, by leading-bit elimination.
pub(crate) fn gf2_rank(rows: &[u64]) -> usize {
    let mut pivot: [u64; 64] = [0; 64];
    let mut rank = 0;
    for &row in rows {
        let mut v = row;
        while v != 0 {
            let lead = 63 - v.leading_zeros() as usize;
            if pivot[lead] == 0 {
                pivot[lead] = v;
                rank += 1;
                break;
            }
            v ^= pivot[lead];
        }
    }
    rank
}

/// Reduced row echelon form. Returns `(pivot_column, row)` pairs ordered by
/// pivot column (0-based, leftmost column first). Zero rows are dropped.
fn gf2_rref(rows: &[u64], n: usize) -> Vec<(usize, u64)> {
    let mut work: Vec<u64> = rows.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (column, row index)
    let mut next = 0usize;
    for col in 0..n {
        let bit = bit_at(n, col);
        let Some(pivot_row) = (next..work.len()).find(|&i| work[i] & bit != 0) else {
            continue;
        };
        work.swap(next, pivot_row);
        let pivot = work[next];
        for (i, row) in work.iter_mut().enumerate() {
            if i != next && *row & bit != 0 {
                *row ^= pivot;
            }
        }
        pivots.push((col, next));
        next += 1;
        if next == work.len() {
            break;
        }
    }
    pivots.into_iter().map(|(col, i)| (col, work[i])).collect()
}
