//! Implementation of the `codeprobe` subcommands, kept in a library so the
//! reproduction table and output formatting stay testable in-process.

pub mod reproduce;

use std::fs;
use std::path::{Path, PathBuf};

use codeprobe_core::bounds::{self, rat_f64, QfiReport, SweepMode, SweepOptions};
use codeprobe_core::codes::{self, BinaryCode};
use codeprobe_core::estimator;
use codeprobe_core::oracle;
use codeprobe_core::shorten::{partition, rational_string, ErasurePattern};
use codeprobe_core::{Error, DEFAULT_ORACLE_CAP};

/// What a command produced: a primary artifact and an optional auxiliary
/// summary. With `--out` the artifact goes to the file and the summary to
/// stdout; without it the artifact takes stdout and the summary moves to
/// stderr.
pub struct CommandOutput {
    pub artifact: String,
    pub summary: Option<String>,
}

pub fn emit(output: &CommandOutput, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, &output.artifact)?;
            if let Some(summary) = &output.summary {
                println!("{summary}");
            }
        }
        None => {
            print!("{}", output.artifact);
            if !output.artifact.ends_with('\n') {
                println!();
            }
            if let Some(summary) = &output.summary {
                eprintln!("{summary}");
            }
        }
    }
    Ok(())
}

pub fn load_code_file(path: &Path) -> Result<BinaryCode, Error> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let code = codes::load_code(&text)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(match code.origin() {
        Some(_) => code,
        None => code.with_origin(stem),
    })
}

/// Constructor spec for `codeprobe code`.
pub enum CodeSpec {
    ReedMuller { r: usize, m: usize },
    Repetition { n: usize },
    Concat { input: PathBuf, r: usize },
    Coset { input: PathBuf, shift: String },
    FromGenerator { input: PathBuf },
}

pub fn cmd_code(spec: &CodeSpec) -> Result<CommandOutput, Error> {
    let code = match spec {
        CodeSpec::ReedMuller { r, m } => codes::reed_muller_code(*r, *m)?,
        CodeSpec::Repetition { n } => codes::repetition(*n)?,
        CodeSpec::Concat { input, r } => {
            let base = load_code_file(input)?;
            codes::concatenate_repetition(&base, *r)?
        }
        CodeSpec::Coset { input, shift } => {
            let base = load_code_file(input)?;
            let shift = codeprobe_core::BitVector::parse(shift)?;
            codes::coset_code(&base, &shift)?
        }
        CodeSpec::FromGenerator { input } => load_code_file(input)?,
    };
    let d = match code.min_distance() {
        Ok(d) => d.to_string(),
        Err(_) => "-".to_owned(),
    };
    let summary = format!(
        "n={} size={} d={} linear={}",
        code.n(),
        code.size(),
        d,
        code.is_linear()
    );
    Ok(CommandOutput {
        artifact: codes::save_code(&code),
        summary: Some(summary),
    })
}

pub enum BoundFormat {
    Json,
    Csv,
}

pub fn cmd_bound(
    code: &BinaryCode,
    erase: &[usize],
    exact: bool,
    format: &BoundFormat,
) -> Result<CommandOutput, Error> {
    let pattern = ErasurePattern::new(code.n(), erase.to_vec())?;
    let report = bounds::report_for(code, &pattern, exact, DEFAULT_ORACLE_CAP)?;
    if !report.disjoint {
        return Err(Error::Disjointness {
            pattern: format!("{:?}", report.pattern),
        });
    }
    let artifact = match format {
        BoundFormat::Json => format!("{:#}", report.to_json()),
        BoundFormat::Csv => bounds::report_csv(&report, exact),
    };
    Ok(CommandOutput {
        artifact,
        summary: None,
    })
}

pub fn cmd_sweep(
    code: &BinaryCode,
    t: usize,
    mode: SweepMode,
    exact: bool,
    as_json: bool,
) -> Result<CommandOutput, Error> {
    let opts = SweepOptions {
        mode,
        exact,
        oracle_cap: DEFAULT_ORACLE_CAP,
    };
    let (reports, summary) = bounds::sweep(code, t, &opts)?;
    let artifact = if as_json {
        let rows: Vec<serde_json::Value> = reports.iter().map(QfiReport::to_json).collect();
        let summary = serde_json::json!({
            "rows": summary.rows,
            "min": summary.min.as_ref().map(rational_string),
            "max": summary.max.as_ref().map(rational_string),
            "mean": summary.mean.as_ref().map(rational_string),
        });
        format!(
            "{:#}",
            serde_json::json!({ "reports": rows, "summary": summary })
        )
    } else {
        bounds::sweep_csv(&reports, &summary, exact)
    };
    Ok(CommandOutput {
        artifact,
        summary: None,
    })
}

pub fn cmd_boost(code: &BinaryCode, r: usize, erase: &[usize]) -> Result<CommandOutput, Error> {
    if r == 0 {
        return Err(Error::Domain(
            "inner repetition length must be positive".into(),
        ));
    }
    let pattern = ErasurePattern::new(code.n() * r, erase.to_vec())?;
    let blocks = bounds::project_pattern(&pattern, r);
    let value = bounds::boosted_lower_bound(code, r, &pattern)?;
    let artifact = format!(
        "{:#}",
        serde_json::json!({
            "outer": code.origin().unwrap_or("custom"),
            "r": r,
            "E": pattern.indices(),
            "projected_blocks": blocks,
            "boosted_lower": rational_string(&value),
            "boosted_lower_float": rat_f64(&value),
        })
    );
    Ok(CommandOutput {
        artifact,
        summary: None,
    })
}

pub fn cmd_estimator(
    code: &BinaryCode,
    erase: &[usize],
    theta_max: f64,
    steps: usize,
) -> Result<CommandOutput, Error> {
    let pattern = ErasurePattern::new(code.n(), erase.to_vec())?;
    let family = partition(code, &pattern)?;
    let grid = estimator::default_grid(theta_max, steps);
    let curve = estimator::moment_curves(&family, &grid)?;
    let exact_qfi = if code.size() <= DEFAULT_ORACLE_CAP {
        let q = oracle::restricted_triple(&family)?.exact_qfi;
        (q.abs() > 1e-12).then_some(q)
    } else {
        None
    };
    let summary = estimator::summary_json(&family, exact_qfi)?;
    Ok(CommandOutput {
        artifact: estimator::curve_csv(&curve),
        summary: Some(format!("{summary}")),
    })
}

/// Structured object printed on a disjointness failure (exit code 3).
pub fn disjointness_error_json(err: &Error) -> String {
    format!(
        "{:#}",
        serde_json::json!({
            "error": "disjointness",
            "message": err.to_string(),
        })
    )
}
