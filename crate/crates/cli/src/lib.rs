//! Batch driver: loads scenario files, runs the matching computation, checks
//! the scenario's tolerances and writes JSON reports and CSV series.

pub mod runners;
pub mod scenario;

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use actionlab_core::Complex64;
use serde::Serialize;

pub use scenario::{OutputFormat, Scenario, ScenarioKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or invalid scenario, or bad command-line input.
    Usage(String),
    /// The computation itself failed.
    Numerical(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<actionlab_core::Error> for CliError {
    fn from(e: actionlab_core::Error) -> Self {
        Self::Numerical(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Numerical(_) | Self::Io(_) => EXIT_NUMERICAL,
        }
    }
}

/// How a measured value is judged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Limit {
    /// `value <= bound · tolerance_scale`.
    Max { bound: f64 },
    /// `lo <= value <= hi`, never loosened.
    Range { lo: f64, hi: f64 },
    /// `value == 0`.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: Limit,
    pub passed: bool,
}

impl Check {
    pub fn describe(&self) -> String {
        let verdict = if self.passed { "ok  " } else { "FAIL" };
        let limit = match self.limit {
            Limit::Max { bound } => format!("<= {bound:.3e}"),
            Limit::Range { lo, hi } => format!("in [{lo}, {hi}]"),
            Limit::Exact => "== 0".to_string(),
        };
        format!("{verdict} {:<32} {:>12.4e} {limit}", self.name, self.value)
    }
}

/// One line of the closed form / oracle / lattice comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub method: String,
    pub step: f64,
    pub value: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub kind: String,
    pub tolerance_scale: f64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<TableRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    pub data: serde_json::Value,
    /// CSV series keyed by file-name suffix (empty for the main series).
    #[serde(skip)]
    pub series: Vec<(String, String)>,
}

impl Report {
    pub fn new(name: &str, kind: &str, tolerance_scale: f64) -> Self {
        Self {
            name: name.into(),
            kind: kind.into(),
            tolerance_scale,
            checks: Vec::new(),
            table: Vec::new(),
            order: None,
            data: serde_json::Value::Null,
            series: Vec::new(),
        }
    }

    /// Adds `value <= bound`, loosened by the tolerance scale.
    pub fn check_max(&mut self, name: &str, value: f64, bound: f64) {
        let passed = value <= bound * self.tolerance_scale;
        self.checks.push(Check {
            name: name.into(),
            value,
            limit: Limit::Max { bound },
            passed,
        });
    }

    pub fn check_range(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            limit: Limit::Range { lo, hi },
            passed: value >= lo && value <= hi,
        });
    }

    pub fn check_exact(&mut self, name: &str, value: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            limit: Limit::Exact,
            passed: value == 0.0,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let mut s = format!(
            "[{}] {} ({}): {ok}/{} checks\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.kind,
            self.checks.len()
        );
        for c in &self.checks {
            s.push_str("    ");
            s.push_str(&c.describe());
            s.push('\n');
        }
        s
    }

    /// The comparison table as aligned text.
    pub fn table_text(&self) -> String {
        let mut s = format!(
            "{:<14} {:>11} {:>22} {:>22} {:>11} {:>11}\n",
            "method", "step", "re", "im", "abs_err", "rel_err"
        );
        for r in &self.table {
            s.push_str(&format!(
                "{:<14} {:>11.3e} {:>22.15e} {:>22.15e} {:>11.3e} {:>11.3e}\n",
                r.method, r.step, r.value.re, r.value.im, r.abs_err, r.rel_err
            ));
        }
        if let Some(o) = self.order {
            s.push_str(&format!("lattice convergence slope: {o:.4}\n"));
        }
        s
    }
}

pub fn run_scenario(s: &Scenario, tolerance_scale: f64) -> Result<Report, CliError> {
    let mut r = Report::new(&s.name, s.kind.label(), tolerance_scale);
    match &s.kind {
        ScenarioKind::Oscillator(p) => runners::oscillator(p, &mut r)?,
        ScenarioKind::Keldysh(p) => runners::keldysh(p, &mut r)?,
        ScenarioKind::OracleCompare(p) => runners::oracle_compare(p, &mut r)?,
        ScenarioKind::PathIntegral(p) => runners::path_integral(p, &mut r)?,
        ScenarioKind::Scatter(p) => runners::scatter(p, &mut r)?,
        ScenarioKind::BoundStates(p) => runners::bound_states(p, &mut r)?,
        ScenarioKind::Algebra(p) => runners::algebra(p, &mut r)?,
        ScenarioKind::Classical(p) => runners::classical(p, &mut r)?,
    }
    Ok(r)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Files a scenario writes, relative to the output directory.
pub fn output_files(s: &Scenario, report: &Report) -> Vec<PathBuf> {
    let mut out = vec![PathBuf::from(format!("{}.json", s.output.path))];
    if s.output.format == OutputFormat::Csv {
        for (suffix, _) in &report.series {
            out.push(PathBuf::from(series_name(&s.output.path, suffix)));
        }
    }
    out
}

fn series_name(stem: &str, suffix: &str) -> String {
    if suffix.is_empty() {
        format!("{stem}.csv")
    } else {
        format!("{stem}_{suffix}.csv")
    }
}

pub fn write_outputs(s: &Scenario, report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let json = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    let p = out_dir.join(format!("{}.json", s.output.path));
    write_atomic(&p, (json + "\n").as_bytes())?;
    written.push(p);
    if s.output.format == OutputFormat::Csv {
        for (suffix, body) in &report.series {
            let p = out_dir.join(series_name(&s.output.path, suffix));
            write_atomic(&p, body.as_bytes())?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Rejects scenario sets whose outputs would overwrite each other.
pub fn check_distinct_outputs(scenarios: &[Scenario]) -> Result<(), CliError> {
    let mut seen = BTreeSet::new();
    for s in scenarios {
        if !seen.insert(s.output.path.clone()) {
            return Err(CliError::Usage(format!("two scenarios write to '{}'", s.output.path)));
        }
    }
    Ok(())
}

/// Result of one scenario inside a batch.
pub struct Outcome {
    pub file: PathBuf,
    pub result: Result<Report, CliError>,
}

/// Runs every scenario with at most `jobs` workers and writes the outputs.
/// Outcomes come back in input order whatever the scheduling.
pub fn run_batch(scenarios: &[(PathBuf, Scenario)], out_dir: &Path, jobs: usize, tolerance_scale: f64) -> Vec<Outcome> {
    use rayon::prelude::*;
    let work = || {
        scenarios
            .par_iter()
            .map(|(file, s)| {
                let result = run_scenario(s, tolerance_scale).and_then(|r| {
                    write_outputs(s, &r, out_dir)?;
                    Ok(r)
                });
                Outcome {
                    file: file.clone(),
                    result,
                }
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

/// Process exit status for a finished batch: usage errors dominate, then
/// numerical failures, then tolerance violations.
pub fn batch_status(outcomes: &[Outcome]) -> i32 {
    let mut status = EXIT_OK;
    for o in outcomes {
        let code = match &o.result {
            Ok(r) if r.passed() => EXIT_OK,
            Ok(_) => EXIT_TOLERANCE,
            Err(e) => e.exit_code(),
        };
        let rank = |c: i32| match c {
            EXIT_USAGE => 3,
            EXIT_NUMERICAL => 2,
            EXIT_TOLERANCE => 1,
            _ => 0,
        };
        if rank(code) > rank(status) {
            status = code;
        }
    }
    status
}
