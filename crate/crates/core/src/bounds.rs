//! Closed-form QFI bounds computed from shortened-code weight statistics,
//! plus repetition boosting and erasure-pattern sweeps.
//!
//! With the probe erased on a pattern of size `t` and shortened classes
//! `(p_z, C_z[E])`, the QFI `Q` of the erased probe under `H = ΣZ` satisfies
//!
//! ```text
//! 8 Σ_z p_z² Var(X_z)  ≤  Q  ≤  16 [ Σ_z p_z E(X_z²) − (Σ_z p_z E(X_z))² ]
//! ```
//!
//! whenever the shortened codes are pairwise disjoint, where `X_z` is the
//! weight distribution of class `z`. Everything here is exact rational
//! arithmetic; floats only appear when a report also carries oracle values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::codes::BinaryCode;
use crate::oracle;
use crate::shorten::{int, partition, ratio, rational_string, ErasurePattern, ShortenedFamily};
use crate::{error::Error, Result, DEFAULT_ORACLE_CAP};

/// `num/den` string or JSON null.
fn rational_json(r: &Option<BigRational>) -> Value {
    match r {
        Some(r) => Value::String(rational_string(r)),
        None => Value::Null,
    }
}

/// Nearest float to an exact rational.
pub fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn float_json(v: &Option<f64>) -> Value {
    match v {
        Some(x) => json!(x),
        None => Value::Null,
    }
}

/// Deterministic 17-significant-digit float formatting for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn pattern_label(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn require_disjoint(family: &ShortenedFamily) -> Result<()> {
    if family.is_disjoint() {
        Ok(())
    } else {
        Err(Error::Disjointness {
            pattern: format!("[{}]", pattern_label(family.pattern().indices())),
        })
    }
}

/// QFI lower bound `8 Σ_z p_z² Var(X_z)`. Valid only for disjoint families;
/// errors otherwise (see [`lower_bound_unchecked`]).
pub fn lower_bound(family: &ShortenedFamily) -> Result<BigRational> {
    require_disjoint(family)?;
    Ok(lower_bound_unchecked(family))
}

/// The lower-bound expression evaluated regardless of disjointness. For a
/// non-disjoint family the returned number carries no guarantee about the
/// QFI; callers opt in explicitly.
pub fn lower_bound_unchecked(family: &ShortenedFamily) -> BigRational {
    let mut sum = BigRational::zero();
    for class in family.classes() {
        let p = ratio(class.size(), family.source_size());
        sum += &p * &p * class.stats().variance();
    }
    int(8) * sum
}

/// QFI upper bound `16 [Σ p_z E(X_z²) − (Σ p_z E(X_z))²]` for disjoint
/// families.
pub fn upper_bound(family: &ShortenedFamily) -> Result<BigRational> {
    require_disjoint(family)?;
    Ok(upper_bound_unchecked(family))
}

/// The upper-bound expression without the disjointness check; unproven for
/// non-disjoint families.
pub fn upper_bound_unchecked(family: &ShortenedFamily) -> BigRational {
    let mut second = BigRational::zero();
    let mut first = BigRational::zero();
    for class in family.classes() {
        let p = family.probability(class);
        second += &p * class.stats().second_moment();
        first += &p * class.stats().mean();
    }
    int(16) * (second - &first * &first)
}

/// Mixture mean weight `Σ_z p_z E(X_z)`.
pub fn mixture_mean(family: &ShortenedFamily) -> BigRational {
    family
        .classes()
        .iter()
        .map(|c| family.probability(c) * c.stats().mean())
        .sum()
}

/// The tightest admissible `s` for [`simple_upper_bound`]: the mixture mean
/// when it is at least 1, otherwise `None`.
pub fn default_s(family: &ShortenedFamily) -> Option<BigRational> {
    let s = mixture_mean(family);
    if s >= BigRational::one() {
        Some(s)
    } else {
        None
    }
}

/// Looser variance-form upper bound
/// `16 (s/n') Σ p Var + 16 (1 − s/n') Σ p E(X²)` with `n' = n − t`, valid for
/// disjoint families when `1 ≤ s ≤ Σ p_z E(X_z)`.
pub fn simple_upper_bound(family: &ShortenedFamily, s: &BigRational) -> Result<BigRational> {
    require_disjoint(family)?;
    if s < &BigRational::one() {
        return Err(Error::Precondition(format!(
            "s must be at least 1, got {}",
            rational_string(s)
        )));
    }
    let mean = mixture_mean(family);
    if &mean < s {
        return Err(Error::Precondition(format!(
            "s = {} exceeds the mixture mean weight {}",
            rational_string(s),
            rational_string(&mean)
        )));
    }
    let np = int(family.shortened_len() as u64);
    let frac = s / np;
    let mut var_term = BigRational::zero();
    let mut second_term = BigRational::zero();
    for class in family.classes() {
        let p = family.probability(class);
        var_term += &p * class.stats().variance();
        second_term += &p * class.stats().second_moment();
    }
    Ok(int(16) * (&frac * var_term + (BigRational::one() - frac) * second_term))
}

/// Literal evaluation of the symmetric-regime two-sided expression, with
/// flags reporting how far the family is from its assumptions.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSandwich {
    /// `(4/2^{t+1}) [ (4/2^t) Σ_z E(X_z²) − n'² ]`
    pub lower: BigRational,
    /// `4 [ (4/2^t) Σ_z E(X_z²) − n'² ]`
    pub upper: BigRational,
    /// True iff every `p_z` equals exactly `2^{-t}`.
    pub uniform_probabilities: bool,
    /// `max_z |E(X_z) − n'/2|` over nonempty classes.
    pub max_mean_deviation: BigRational,
}

/// Evaluate the symmetric-regime sandwich literally on the family's actual
/// second moments. No approximation is substituted: the flags quantify how
/// closely the family matches uniform probabilities and centered means, and
/// the caller decides what the numbers are worth. Degenerate (even negative)
/// values are reported as-is.
pub fn symmetric_sandwich(family: &ShortenedFamily) -> SymmetricSandwich {
    let t = family.t();
    let np = int(family.shortened_len() as u64);
    let two_t = BigInt::from(1u8) << t;
    let s2: BigRational = family
        .classes()
        .iter()
        .map(|c| c.stats().second_moment())
        .sum();
    let inner = ratio(4, two_t.clone()) * s2 - &np * &np;
    let lower = ratio(4, two_t.clone() * BigInt::from(2u8)) * &inner;
    let upper = int(4) * inner;

    let class_count = BigInt::from(family.classes().len());
    let uniform_probabilities = class_count == two_t
        && family
            .classes()
            .iter()
            .all(|c| c.size() == family.classes()[0].size());
    let half = &np / int(2);
    let max_mean_deviation = family
        .classes()
        .iter()
        .map(|c| (c.stats().mean() - &half).abs())
        .max()
        .unwrap_or_else(BigRational::zero);

    SymmetricSandwich {
        lower,
        upper,
        uniform_probabilities,
        max_mean_deviation,
    }
}

/// Erased outer blocks of a pattern on the `r`-fold repetition concatenation:
/// `{⌊(i−1)/r⌋ + 1 : i ∈ E}`, deduplicated and sorted.
pub fn project_pattern(pattern: &ErasurePattern, r: usize) -> Vec<usize> {
    let mut blocks: Vec<usize> = pattern.indices().iter().map(|&i| (i - 1) / r + 1).collect();
    blocks.sort_unstable();
    blocks.dedup();
    blocks
}

/// QFI lower bound for the concatenation of `outer` with an inner length-`r`
/// repetition code, under an erasure pattern on the concatenated length
/// `m·r`, computed on the outer code alone: `8 r² Σ p² Var` over the
/// projected pattern. Equals the plain lower bound of the explicitly
/// concatenated code.
pub fn boosted_lower_bound(
    outer: &BinaryCode,
    r: usize,
    pattern: &ErasurePattern,
) -> Result<BigRational> {
    if r == 0 {
        return Err(Error::Domain(
            "inner repetition length must be positive".into(),
        ));
    }
    let expected = outer.n().saturating_mul(r);
    if pattern.n() != expected {
        return Err(Error::Domain(format!(
            "pattern is for length {}, expected {} = {} x {r}",
            pattern.n(),
            expected,
            outer.n()
        )));
    }
    let blocks = project_pattern(pattern, r);
    let outer_pattern = ErasurePattern::new(outer.n(), blocks)?;
    let family = partition(outer, &outer_pattern)?;
    require_disjoint(&family)?;
    let r2 = int((r * r) as u64);
    Ok(r2 * lower_bound_unchecked(&family))
}

/// How an erasure-pattern sweep enumerates patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// All `C(n,t)` subsets, lexicographic.
    All,
    /// All `n − t + 1` windows of `t` consecutive positions.
    Burst,
}

/// Options for [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub mode: SweepMode,
    /// Also run the exact restricted-basis oracle per pattern (within cap).
    pub exact: bool,
    /// Max |C| for which the oracle runs.
    pub oracle_cap: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            mode: SweepMode::All,
            exact: false,
            oracle_cap: DEFAULT_ORACLE_CAP,
        }
    }
}

/// Enumerate the erasure patterns of a sweep in deterministic order.
pub fn sweep_patterns(n: usize, t: usize, mode: SweepMode) -> Result<Vec<ErasurePattern>> {
    if t >= n {
        return Err(Error::Domain(format!(
            "cannot sweep t = {t} erasures on length {n}"
        )));
    }
    let patterns = match (mode, t) {
        (_, 0) => vec![ErasurePattern::empty(n)?],
        (SweepMode::All, _) => {
            use itertools::Itertools;
            (1..=n)
                .combinations(t)
                .map(|idx| ErasurePattern::new(n, idx))
                .collect::<Result<Vec<_>>>()?
        }
        (SweepMode::Burst, _) => (1..=n - t + 1)
            .map(|start| ErasurePattern::new(n, (start..start + t).collect()))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(patterns)
}

/// Every bound value for one `(code, pattern)` instance, rationals exact,
/// oracle fields filled when the exact oracle ran.
#[derive(Debug, Clone)]
pub struct QfiReport {
    pub code_id: String,
    pub pattern: Vec<usize>,
    pub t: usize,
    pub disjoint: bool,
    /// `8 Σ p² Var`; `None` when the family is not disjoint.
    pub thm1_lower: Option<BigRational>,
    /// `16 [Σ p E(X²) − (Σ p E(X))²]`; `None` when not disjoint.
    pub thm2_upper: Option<BigRational>,
    /// Looser upper bound together with the `s` it used.
    pub simple_upper: Option<(BigRational, BigRational)>,
    pub sandwich: Option<SymmetricSandwich>,
    pub exact_qfi: Option<f64>,
    pub gen2norm_lower: Option<f64>,
    pub var_upper: Option<f64>,
}

impl QfiReport {
    /// Internal consistency: bounds ordered, exact QFI inside the bracket.
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = &self.thm1_lower {
            if l < &BigRational::zero() {
                return Err(Error::Precondition("negative lower bound".into()));
            }
        }
        if let (Some(l), Some(u)) = (&self.thm1_lower, &self.thm2_upper) {
            if u < l {
                return Err(Error::Precondition("upper bound below lower bound".into()));
            }
        }
        if let Some(q) = self.exact_qfi {
            let eps = 1e-9 * (1.0 + q.abs());
            if let Some(l) = &self.thm1_lower {
                if q < rat_f64(l) - eps {
                    return Err(Error::Precondition(format!(
                        "exact QFI {q} below the lower bound {}",
                        rational_string(l)
                    )));
                }
            }
            if let Some(u) = &self.thm2_upper {
                if q > rat_f64(u) + eps {
                    return Err(Error::Precondition(format!(
                        "exact QFI {q} above the upper bound {}",
                        rational_string(u)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let simple = match &self.simple_upper {
            Some((s, value)) => json!({
                "s": rational_string(s),
                "value": rational_string(value),
                "value_float": rat_f64(value),
            }),
            None => Value::Null,
        };
        let sandwich = match &self.sandwich {
            Some(sw) => json!({
                "lower": rational_string(&sw.lower),
                "upper": rational_string(&sw.upper),
                "lower_float": rat_f64(&sw.lower),
                "upper_float": rat_f64(&sw.upper),
                "p_uniform": sw.uniform_probabilities,
                "max_mean_deviation": rational_string(&sw.max_mean_deviation),
            }),
            None => Value::Null,
        };
        json!({
            "code_id": self.code_id,
            "E": self.pattern,
            "t": self.t,
            "disjoint": self.disjoint,
            "thm1_lower": rational_json(&self.thm1_lower),
            "thm1_lower_float": float_json(&self.thm1_lower.as_ref().map(rat_f64)),
            "thm2_upper": rational_json(&self.thm2_upper),
            "thm2_upper_float": float_json(&self.thm2_upper.as_ref().map(rat_f64)),
            "simple_upper": simple,
            "sandwich_symmetric": sandwich,
            "exact_qfi": float_json(&self.exact_qfi),
            "gen2norm_lower": float_json(&self.gen2norm_lower),
            "var_upper": float_json(&self.var_upper),
        })
    }
}

/// Build the full report for one erasure pattern. Bounds are omitted (not
/// fabricated) when the family is not disjoint; oracle fields are filled when
/// `exact` is set and `|C|` is within `oracle_cap`.
pub fn report_for(
    code: &BinaryCode,
    pattern: &ErasurePattern,
    exact: bool,
    oracle_cap: usize,
) -> Result<QfiReport> {
    let family = partition(code, pattern)?;
    let disjoint = family.is_disjoint();
    let thm1_lower = disjoint.then(|| lower_bound_unchecked(&family));
    let thm2_upper = disjoint.then(|| upper_bound_unchecked(&family));
    let simple_upper = if disjoint {
        default_s(&family).map(|s| {
            let value = simple_upper_bound(&family, &s).expect("default s is admissible");
            (s, value)
        })
    } else {
        None
    };
    let sandwich = Some(symmetric_sandwich(&family));

    let mut report = QfiReport {
        code_id: code.origin().unwrap_or("custom").to_owned(),
        pattern: pattern.indices().to_vec(),
        t: pattern.t(),
        disjoint,
        thm1_lower,
        thm2_upper,
        simple_upper,
        sandwich,
        exact_qfi: None,
        gen2norm_lower: None,
        var_upper: None,
    };
    if exact && code.size() <= oracle_cap {
        let triple = oracle::restricted_triple(&family)?;
        report.exact_qfi = Some(triple.exact_qfi);
        report.gen2norm_lower = Some(triple.gen2norm_lower);
        report.var_upper = Some(triple.var_upper);
    }
    Ok(report)
}

/// Summary statistics of the lower bound across a sweep (disjoint rows only).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: usize,
    pub min: Option<BigRational>,
    pub max: Option<BigRational>,
    pub mean: Option<BigRational>,
}

/// Run every pattern of the sweep in parallel; row order is the pattern
/// enumeration order regardless of the execution schedule. The headline
/// statistic is the minimum lower bound over patterns (worst-case erasure).
pub fn sweep(
    code: &BinaryCode,
    t: usize,
    opts: &SweepOptions,
) -> Result<(Vec<QfiReport>, SweepSummary)> {
    let patterns = sweep_patterns(code.n(), t, opts.mode)?;
    let reports: Vec<QfiReport> = patterns
        .par_iter()
        .map(|p| report_for(code, p, opts.exact, opts.oracle_cap))
        .collect::<Result<Vec<_>>>()?;

    let defined: Vec<&BigRational> = reports
        .iter()
        .filter_map(|r| r.thm1_lower.as_ref())
        .collect();
    let summary = SweepSummary {
        rows: reports.len(),
        min: defined.iter().copied().min().cloned(),
        max: defined.iter().copied().max().cloned(),
        mean: if defined.is_empty() {
            None
        } else {
            let sum: BigRational = defined.iter().copied().cloned().sum();
            Some(sum / int(defined.len() as u64))
        },
    };
    Ok((reports, summary))
}

fn csv_header(exact: bool) -> &'static str {
    if exact {
        "pattern,t,disjoint,thm1_lower,thm1_lower_float,thm2_upper,thm2_upper_float,exact_qfi"
    } else {
        "pattern,t,disjoint,thm1_lower,thm1_lower_float,thm2_upper,thm2_upper_float"
    }
}

fn rat_cells(r: &Option<BigRational>) -> String {
    match r {
        Some(r) => format!("{},{}", rational_string(r), fmt_f64(rat_f64(r))),
        None => ",".to_owned(),
    }
}

fn csv_row(out: &mut String, report: &QfiReport, exact: bool) {
    out.push_str(&format!(
        "{},{},{},{},{}",
        pattern_label(&report.pattern),
        report.t,
        report.disjoint,
        rat_cells(&report.thm1_lower),
        rat_cells(&report.thm2_upper),
    ));
    if exact {
        out.push(',');
        if let Some(q) = report.exact_qfi {
            out.push_str(&fmt_f64(q));
        }
    }
    out.push('\n');
}

/// One report as a header plus a single CSV row.
pub fn report_csv(report: &QfiReport, exact: bool) -> String {
    let mut out = String::from(csv_header(exact));
    out.push('\n');
    csv_row(&mut out, report, exact);
    out
}

/// Render sweep rows as CSV:
/// `pattern,t,disjoint,thm1_lower,thm1_lower_float,thm2_upper,thm2_upper_float[,exact_qfi]`,
/// followed by `summary:min/max/mean` footer rows carrying the lower-bound
/// statistics. Rationals are exact `num/den`; floats use 17 significant
/// digits; non-disjoint rows leave their bound cells empty.
pub fn sweep_csv(reports: &[QfiReport], summary: &SweepSummary, exact: bool) -> String {
    let mut out = String::from(csv_header(exact));
    out.push('\n');
    for report in reports {
        csv_row(&mut out, report, exact);
    }
    for (label, value) in [
        ("summary:min", &summary.min),
        ("summary:max", &summary.max),
        ("summary:mean", &summary.mean),
    ] {
        out.push_str(&format!("{label},,,{},,", rat_cells(value)));
        if exact {
            out.push(',');
        }
        out.push('\n');
    }
    out
}
