//! Built-in verification table: recompute the headline bound values from
//! scratch and compare them against their expected constants, plus the
//! quantum-advantage curve for the boosted family.

use std::fmt::Write as _;
use std::path::Path;

use codeprobe_core::bounds::{
    boosted_lower_bound, lower_bound, rat_f64, sweep, SweepMode, SweepOptions,
};
use codeprobe_core::codes::{self, BinaryCode};
use codeprobe_core::oracle;
use codeprobe_core::shorten::{int, partition, ratio, rational_string, ErasurePattern};
use codeprobe_core::{BigRational, Error};

/// One expected-vs-computed comparison.
#[derive(Debug, Clone)]
pub struct ReproRow {
    pub label: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl ReproRow {
    fn exact(label: &str, expected: &BigRational, computed: &BigRational) -> Self {
        Self {
            label: label.to_owned(),
            expected: rational_string(expected),
            computed: rational_string(computed),
            pass: expected == computed,
        }
    }

    fn float(label: &str, expected: f64, computed: f64, tol: f64) -> Self {
        Self {
            label: label.to_owned(),
            expected: format!("{expected}"),
            computed: format!("{computed}"),
            pass: (expected - computed).abs() <= tol,
        }
    }
}

/// Verification outcome: comparison rows plus the advantage curve data
/// `(r, n, qfi_lower, log_n(qfi_lower))`.
#[derive(Debug, Clone)]
pub struct ReproReport {
    pub rows: Vec<ReproRow>,
    pub advantage: Vec<(usize, usize, u64, f64)>,
}

impl ReproReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReproRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn render_table(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:width$}  expected {:>10}  computed {:>10}  {}",
                row.label,
                row.expected,
                row.computed,
                if row.pass { "PASS" } else { "FAIL" },
            );
        }
        let verdict = if self.all_pass() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{} of {} rows pass: {verdict}",
            self.rows.iter().filter(|r| r.pass).count(),
            self.rows.len()
        );
        out
    }

    pub fn advantage_csv(&self) -> String {
        let mut out = String::from("r,n,qfi_lower,log_n_qfi_lower\n");
        for &(r, n, q, log) in &self.advantage {
            let _ = writeln!(out, "{r},{n},{q},{}", codeprobe_core::bounds::fmt_f64(log));
        }
        out
    }
}

fn single_erasure_values(code: &BinaryCode, t: usize) -> Result<Vec<BigRational>, Error> {
    let (reports, _) = sweep(code, t, &SweepOptions::default())?;
    Ok(reports
        .into_iter()
        .map(|r| r.thm1_lower.expect("these families are disjoint"))
        .collect())
}

fn constant_row(label: &str, expected: &BigRational, values: &[BigRational]) -> ReproRow {
    let all_equal = values.iter().all(|v| v == expected);
    let computed = if all_equal {
        format!("{} (x{})", rational_string(expected), values.len())
    } else {
        let mut distinct: Vec<String> = values.iter().map(rational_string).collect();
        distinct.sort();
        distinct.dedup();
        distinct.join(" ")
    };
    ReproRow {
        label: label.to_owned(),
        expected: format!("{} (x{})", rational_string(expected), values.len()),
        computed,
        pass: all_equal,
    }
}

/// Recompute everything. `rm13_file` overrides the internally constructed
/// base code, which is how a deliberately tampered input shows up as FAIL
/// rows.
pub fn reproduce(rm13_file: Option<&Path>) -> Result<ReproReport, Error> {
    let code = match rm13_file {
        Some(path) => crate::load_code_file(path)?,
        None => codes::reed_muller_code(1, 3)?,
    };
    let n = code.n();
    let mut rows = Vec::new();

    // noiseless bound, exact and through the oracle
    let noiseless = partition(&code, &ErasurePattern::empty(n)?)?;
    rows.push(ReproRow::exact(
        "noiseless lower bound (t=0)",
        &int(16),
        &lower_bound(&noiseless)?,
    ));
    let triple = oracle::restricted_triple(&noiseless)?;
    rows.push(ReproRow::float(
        "noiseless generator 2-norm (oracle)",
        16.0,
        triple.gen2norm_lower,
        1e-9,
    ));

    // erasure sweeps: the bound is position-independent at each size
    for (t, expected) in [(1usize, 7u64), (2, 3), (3, 1)] {
        let values = single_erasure_values(&code, t)?;
        rows.push(constant_row(
            &format!("lower bound, every |E| = {t}"),
            &int(expected),
            &values,
        ));
    }

    // normalized lower bounds
    for (t, num) in [(1usize, 7u64), (2, 3), (3, 1)] {
        let values = single_erasure_values(&code, t)?;
        let normalized: Vec<BigRational> = values.into_iter().map(|v| v / int(n as u64)).collect();
        rows.push(constant_row(
            &format!("normalized lower bound, |E| = {t}"),
            &ratio(num, n as u64),
            &normalized,
        ));
    }

    // boosting: single erasure anywhere on the blown-up code
    for (r, expected) in [(3usize, 63u64), (5, 175), (8, 448)] {
        let mut values = Vec::with_capacity(n * r);
        for i in 1..=n * r {
            let pat = ErasurePattern::new(n * r, vec![i])?;
            values.push(boosted_lower_bound(&code, r, &pat)?);
        }
        rows.push(constant_row(
            &format!("boosted lower bound, r = {r}, single erasure"),
            &int(expected),
            &values,
        ));
    }

    // burst windows on the 24-qubit concatenation: windows inside one block
    // give 63, windows straddling two blocks give 27
    let cat = codes::concatenate_repetition(&code, 3)?;
    let opts = SweepOptions {
        mode: SweepMode::Burst,
        ..SweepOptions::default()
    };
    let (reports, _) = sweep(&cat, 3, &opts)?;
    let mut in_block = Vec::new();
    let mut straddling = Vec::new();
    for report in reports {
        let pat = ErasurePattern::new(cat.n(), report.pattern.clone())?;
        let blocks = codeprobe_core::bounds::project_pattern(&pat, 3);
        let value = report.thm1_lower.expect("burst families are disjoint");
        if blocks.len() == 1 {
            in_block.push(value);
        } else {
            straddling.push(value);
        }
    }
    rows.push(constant_row(
        "24-qubit burst, window inside one block",
        &int(63),
        &in_block,
    ));
    rows.push(constant_row(
        "24-qubit burst, window across two blocks",
        &int(27),
        &straddling,
    ));

    // advantage curve: n = 8r qubits, lower bound 7r² under one erasure
    let mut advantage = Vec::new();
    let mut all_above_one = true;
    for r in 2..=16usize {
        let nn = n * r;
        let pat = ErasurePattern::new(nn, vec![1])?;
        let q = boosted_lower_bound(&code, r, &pat)?;
        let qf = rat_f64(&q);
        let log = qf.ln() / (nn as f64).ln();
        if log <= 1.0 {
            all_above_one = false;
        }
        advantage.push((r, nn, u64::try_from(q.to_integer()).unwrap_or(0), log));
    }
    rows.push(ReproRow {
        label: "advantage curve: log_n(bound) > 1 for r in 2..=16".to_owned(),
        expected: "all > 1".to_owned(),
        computed: if all_above_one {
            "all > 1".to_owned()
        } else {
            "violated".to_owned()
        },
        pass: all_above_one,
    });

    Ok(ReproReport { rows, advantage })
}
