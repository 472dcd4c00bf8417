//! Per-instance records, aggregates and their line-delimited form.
//!
//! A report is emitted as JSON lines: one `instance` line per record, sorted
//! by id, followed by a `summary` line. Loading a report recomputes the
//! summary from the records and rejects a mismatch.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::{Evidence, ExplanationKind, TraceStep};

/// Relative slack when comparing a stored aggregate with its recomputation.
const AGGREGATE_TOLERANCE: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Axp,
    Lmpaxp,
    Ffa,
    Ffaxp,
    Lmpffaxp,
    MinpaxpOracle,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Axp,
        Command::Lmpaxp,
        Command::Ffa,
        Command::Ffaxp,
        Command::Lmpffaxp,
        Command::MinpaxpOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Axp => "axp",
            Command::Lmpaxp => "lmpaxp",
            Command::Ffa => "ffa",
            Command::Ffaxp => "ffaxp",
            Command::Lmpffaxp => "lmpffaxp",
            Command::MinpaxpOracle => "minpaxp-oracle",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown command `{s}`")))
    }
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Timeout,
    Error,
}

/// Serialized form of [`Evidence`]. Counts are decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub method: String,
    pub numerator: String,
    pub denominator: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_calls: Option<u64>,
}

impl From<&Evidence> for EvidenceRecord {
    fn from(ev: &Evidence) -> Self {
        let value = ev.value::<f64>();
        match ev {
            Evidence::Exact { hits, total } => EvidenceRecord {
                method: "exact".into(),
                numerator: hits.to_string(),
                denominator: total.to_string(),
                value,
                epsilon: None,
                delta: None,
                seed: None,
                oracle_calls: None,
            },
            Evidence::Counted {
                count,
                total,
                epsilon,
                delta,
                seed,
                oracle_calls,
            } => EvidenceRecord {
                method: "amc".into(),
                numerator: count.to_string(),
                denominator: total.to_string(),
                value,
                epsilon: Some(*epsilon),
                delta: Some(*delta),
                seed: Some(*seed),
                oracle_calls: Some(*oracle_calls),
            },
            Evidence::Sampled(e) => EvidenceRecord {
                method: "mc".into(),
                numerator: e.hits.to_string(),
                denominator: e.n.to_string(),
                value,
                epsilon: Some(e.epsilon),
                delta: Some(e.delta),
                seed: Some(e.seed),
                oracle_calls: None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub features: Vec<usize>,
    pub removed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<EvidenceRecord>,
}

impl From<&TraceStep> for StepRecord {
    fn from(s: &TraceStep) -> Self {
        StepRecord {
            features: s.features.clone(),
            removed: s.removed,
            evidence: s.evidence.as_ref().map(EvidenceRecord::from),
        }
    }
}

/// Outcome for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: usize,
    pub values: Vec<i64>,
    pub label: String,
    pub command: Command,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExplanationKind>,
    pub features: Vec<usize>,
    pub names: Vec<String>,
    pub length: usize,
    /// Length of the explanation the ratio is taken against: the AXp for
    /// `lmpaxp`, the FFAXp for `lmpffaxp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_length: Option<usize>,
    /// `100 * length / reference_length`, or 100 for an empty reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<EvidenceRecord>,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ffa: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

/// Table statistics over a set of records. Len, % and Prec average the
/// records with status `ok`; Time averages every record that carries one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub ok: usize,
    pub timeouts: usize,
    pub errors: usize,
    pub mean_length: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub mean_precision: Option<f64>,
    pub mean_time_ms: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl Aggregate {
    pub fn from_records(records: &[Record]) -> Self {
        let ok = || records.iter().filter(|r| r.status == Status::Ok);
        let count = |s: Status| records.iter().filter(|r| r.status == s).count();
        Aggregate {
            instances: records.len(),
            ok: count(Status::Ok),
            timeouts: count(Status::Timeout),
            errors: count(Status::Error),
            mean_length: mean(ok().map(|r| r.length as f64)),
            mean_ratio: mean(ok().filter_map(|r| r.ratio)),
            mean_precision: mean(ok().filter_map(|r| r.precision)),
            mean_time_ms: mean(records.iter().filter_map(|r| r.elapsed_ms)),
        }
    }

    fn agrees(&self, other: &Aggregate) -> bool {
        let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() <= AGGREGATE_TOLERANCE * a.abs().max(b.abs()).max(1.0),
            _ => false,
        };
        self.instances == other.instances
            && self.ok == other.ok
            && self.timeouts == other.timeouts
            && self.errors == other.errors
            && close(self.mean_length, other.mean_length)
            && close(self.mean_ratio, other.mean_ratio)
            && close(self.mean_precision, other.mean_precision)
            && close(self.mean_time_ms, other.mean_time_ms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Instance(Box<Record>),
    Summary { command: Command, aggregate: Aggregate },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: Command,
    pub records: Vec<Record>,
    pub aggregate: Aggregate,
}

impl Report {
    /// Report over `records`, sorted by id.
    pub fn new(command: Command, mut records: Vec<Record>) -> Self {
        records.sort_by_key(|r| r.id);
        let aggregate = Aggregate::from_records(&records);
        Report {
            command,
            records,
            aggregate,
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let lines = self
            .records
            .iter()
            .map(|r| Line::Instance(Box::new(r.clone())))
            .chain(std::iter::once(Line::Summary {
                command: self.command,
                aggregate: self.aggregate.clone(),
            }));
        for line in lines {
            out.push_str(&serde_json::to_string(&line).expect("report lines serialize"));
            out.push('\n');
        }
        out
    }

    /// Parses a report and checks its summary against the records.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        let mut summary = None;
        let mut offset = 0;
        for (n, raw) in text.split_inclusive('\n').enumerate() {
            let line = raw.trim_end();
            if !line.is_empty() {
                if summary.is_some() {
                    return Err(invalid("content after the summary line"));
                }
                match serde_json::from_str::<Line>(line) {
                    Ok(Line::Instance(r)) => records.push(*r),
                    Ok(Line::Summary { command, aggregate }) => summary = Some((command, aggregate)),
                    Err(e) => {
                        let mut err = super::document::parse_error(line, &e);
                        if let Error::Parse { offset: o, line: l, .. } = &mut err {
                            *o += offset;
                            *l = n + 1;
                        }
                        return Err(err);
                    }
                }
            }
            offset += raw.len();
        }
        let (command, stored) = summary.ok_or_else(|| invalid("missing summary line"))?;
        if records.windows(2).any(|w| w[0].id >= w[1].id) {
            return Err(invalid("records are not sorted by id"));
        }
        let report = Report::new(command, records);
        if !report.aggregate.agrees(&stored) {
            return Err(invalid("summary does not match its records"));
        }
        Ok(report)
    }

    /// Fixed-width human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>5}  {:<8}  {:>4}  {:>7}  {:>6}  {:>10}  features",
            "id", "status", "len", "%", "prec", "time(ms)"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:>5}  {:<8}  {:>4}  {:>7}  {:>6}  {:>10}  {}",
                r.id,
                status_name(r.status),
                r.length,
                opt(r.ratio, 1),
                opt(r.precision, 3),
                opt(r.elapsed_ms, 1),
                if r.status == Status::Error {
                    r.error.clone().unwrap_or_default()
                } else {
                    format!("{{{}}}", r.names.join(", "))
                }
            );
        }
        let a = &self.aggregate;
        let _ = writeln!(
            out,
            "{}: {} instances, Len {}, % {}, Prec {}, Time {} ms, #TO {}, errors {}",
            self.command,
            a.instances,
            opt(a.mean_length, 2),
            opt(a.mean_ratio, 1),
            opt(a.mean_precision, 3),
            opt(a.mean_time_ms, 1),
            a.timeouts,
            a.errors
        );
        out
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Timeout => "timeout",
        Status::Error => "error",
    }
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.digits$}"))
}

fn invalid(msg: &str) -> Error {
    Error::Parameter(format!("malformed report: {msg}"))
}
