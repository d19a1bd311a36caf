//! Event reports and their CSV form.
//!
//! The file starts with a `# xctl-report/<version>` comment line followed by
//! the header `experiment,params,event,estimate,stderr,exact_flag,pass`.
//! `params` is a `;`-separated `key=value` list that always carries the
//! tolerance policy as `check=...` and, for exact rows, `exact=<value>`.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;
pub const COLUMNS: [&str; 7] = ["experiment", "params", "event", "estimate", "stderr", "exact_flag", "pass"];

/// How a row is judged.
#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    /// Exact value compared without tolerance (or 1e-12 for irrational parameters).
    ExactAtLeast(String),
    ExactWithin { lo: String, hi: String },
    /// `estimate + 3σ ≥ bound`.
    AtLeast(f64),
    /// `[estimate − 3σ, estimate + 3σ]` meets `[lo, hi]`.
    Within { lo: f64, hi: f64 },
    /// Wilson lower bound (3σ) above the given value.
    WilsonAbove(f64),
    /// Count that must be zero.
    Zero,
    ReportOnly,
}

impl Check {
    pub fn describe(&self) -> String {
        match self {
            Check::ExactAtLeast(b) => format!("exact>={b}"),
            Check::ExactWithin { lo, hi } => format!("exact in [{lo},{hi}]"),
            Check::AtLeast(b) => format!("est+3se>={b}"),
            Check::Within { lo, hi } => format!("est+-3se meets [{lo},{hi}]"),
            Check::WilsonAbove(b) => format!("est>0 and wilson3_lo>{b}"),
            Check::Zero => "count==0".into(),
            Check::ReportOnly => "report".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventReport {
    pub experiment: String,
    pub params: Vec<(String, String)>,
    pub event: String,
    pub estimate: f64,
    /// Exact value as text (a rational, or a float for irrational parameters).
    pub exact: Option<String>,
    pub stderr: f64,
    pub trials: u64,
    pub check: Check,
    pub pass: Option<bool>,
}

impl EventReport {
    pub fn exact(experiment: &str, event: &str, value: f64, text: String, check: Check, pass: Option<bool>) -> Self {
        EventReport {
            experiment: experiment.into(),
            params: Vec::new(),
            event: event.into(),
            estimate: value,
            exact: Some(text),
            stderr: 0.0,
            trials: 0,
            check,
            pass,
        }
    }

    pub fn estimate(experiment: &str, event: &str, estimate: f64, stderr: f64, trials: u64, check: Check, pass: Option<bool>) -> Self {
        EventReport {
            experiment: experiment.into(),
            params: Vec::new(),
            event: event.into(),
            estimate,
            exact: None,
            stderr,
            trials,
            check,
            pass,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn with_params(mut self, params: &[(String, String)]) -> Self {
        self.params.extend_from_slice(params);
        self
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }

    pub fn params_field(&self) -> String {
        let mut parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if !self.is_exact() {
            parts.push(format!("trials={}", self.trials));
        }
        parts.push(format!("check={}", self.check.describe()));
        if let Some(e) = &self.exact {
            parts.push(format!("exact={e}"));
        }
        parts.join(";")
    }

    fn pass_field(&self) -> &'static str {
        match self.pass {
            Some(true) => "true",
            Some(false) => "false",
            None => "na",
        }
    }

    pub fn record(&self) -> [String; 7] {
        [
            self.experiment.clone(),
            self.params_field(),
            self.event.clone(),
            fmt_num(self.estimate),
            fmt_num(self.stderr),
            (self.is_exact() as u8).to_string(),
            self.pass_field().into(),
        ]
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let verdict = match self.pass {
            Some(true) => "ok  ",
            Some(false) => "FAIL",
            None => "    ",
        };
        let value = match &self.exact {
            Some(e) => format!("{} (exact {e})", fmt_num(self.estimate)),
            None => format!("{} +- {} (n={})", fmt_num(self.estimate), fmt_num(self.stderr), self.trials),
        };
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{verdict} {} {} [{}] {value} [{}]", self.experiment, self.event, params.join(" "), self.check.describe())
    }
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.10}")
    }
}

pub fn write_csv<W: Write>(mut w: W, rows: &[EventReport]) -> Result<()> {
    writeln!(w, "# xctl-report/{SCHEMA_VERSION}")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMNS)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[EventReport]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(f), rows)
}

/// Reads a report back as raw records, checking the schema line and header.
pub fn read_csv(text: &str) -> Result<Vec<[String; 7]>> {
    let first = text.lines().next().unwrap_or("");
    if first.trim() != format!("# xctl-report/{SCHEMA_VERSION}") {
        return crate::error::usage(format!("unsupported report schema line '{first}'"));
    }
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != COLUMNS {
        return crate::error::usage(format!("unexpected header {header:?}"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let v: Vec<String> = rec.iter().map(String::from).collect();
        rows.push(v.try_into().map_err(|_| crate::error::XctlError::Usage("short record".into()))?);
    }
    Ok(rows)
}
