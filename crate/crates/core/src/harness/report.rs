use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::Mode;
use crate::error::{Error, Result};
use crate::fractal::FdEstimate;
use crate::lfwa::HistoryRecord;

/// One seeded trial of one method on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub dataset: String,
    pub method: Mode,
    pub seed: u64,
    /// Selected features, 1-based.
    pub mask: Vec<usize>,
    /// Holdout accuracy in percent.
    pub accuracy: f64,
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<HistoryRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub dataset: String,
    pub method: Mode,
    pub seed: u64,
    /// `config`, `data` or `runtime`.
    pub kind: String,
    pub message: String,
}

/// Per dataset and method summary. Accuracy fields are `None` when no trial
/// completed (and always for the reduction-rate report).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: String,
    pub method: Mode,
    pub n_rows: usize,
    pub n_features: usize,
    pub trials: usize,
    pub mean_accuracy: Option<f64>,
    pub std_accuracy: Option<f64>,
    pub best_accuracy: Option<f64>,
    pub most_frequent_mask: Option<Vec<usize>>,
    pub fd: Option<FdEstimate>,
    /// Cardinality used by the constrained methods.
    pub cardinality: Option<usize>,
    pub reduction_rate: Option<f64>,
    /// FD-constrained mean accuracy minus this method's mean accuracy.
    pub delta_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub base_seed: u64,
    pub repeats: usize,
    /// Ordered by dataset, then method, then seed.
    pub trials: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
    pub aggregates: Vec<Aggregate>,
}

impl RunReport {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// One line of the `records` format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Run { mode: Mode, base_seed: u64, repeats: usize },
    Trial(TrialRecord),
    Failure(TrialFailure),
    Aggregate(Aggregate),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Records,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Format::Table),
            "records" | "jsonl" => Ok(Format::Records),
            _ => Err(Error::config(format!("unknown format {s:?}"))),
        }
    }
}

pub fn emit_report(report: &RunReport, format: Format) -> String {
    match format {
        Format::Records => emit_records(report),
        Format::Table => emit_table(report),
    }
}

fn emit_records(report: &RunReport) -> String {
    let mut records = vec![Record::Run {
        mode: report.mode,
        base_seed: report.base_seed,
        repeats: report.repeats,
    }];
    records.extend(report.trials.iter().cloned().map(Record::Trial));
    records.extend(report.failures.iter().cloned().map(Record::Failure));
    records.extend(report.aggregates.iter().cloned().map(Record::Aggregate));
    let mut out = String::new();
    for r in &records {
        out.push_str(&serde_json::to_string(r).expect("report records serialize"));
        out.push('\n');
    }
    out
}

/// Inverse of the `records` format. Blank lines are ignored.
pub fn parse_records(text: &str) -> Result<RunReport> {
    let mut report: Option<RunReport> = None;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line)
            .map_err(|e| Error::data(format!("record line {}: {e}", n + 1)))?;
        match (record, report.as_mut()) {
            (Record::Run { mode, base_seed, repeats }, None) => {
                report = Some(RunReport {
                    mode,
                    base_seed,
                    repeats,
                    trials: Vec::new(),
                    failures: Vec::new(),
                    aggregates: Vec::new(),
                })
            }
            (Record::Run { .. }, Some(_)) => {
                return Err(Error::data(format!("record line {}: second run record", n + 1)))
            }
            (_, None) => {
                return Err(Error::data(format!("record line {}: missing run record", n + 1)))
            }
            (Record::Trial(t), Some(r)) => r.trials.push(t),
            (Record::Failure(f), Some(r)) => r.failures.push(f),
            (Record::Aggregate(a), Some(r)) => r.aggregates.push(a),
        }
    }
    report.ok_or_else(|| Error::data("no run record found"))
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

fn fmt_mask(mask: &Option<Vec<usize>>) -> String {
    match mask {
        None => "-".to_string(),
        Some(m) => {
            let items: Vec<String> = m.iter().map(|i| i.to_string()).collect();
            format!("{{{}}}", items.join(", "))
        }
    }
}

fn fmt_delta(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:+.2}"))
}

fn render(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&line(rule.iter().map(String::as_str).collect()));
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn emit_table(report: &RunReport) -> String {
    let mut out = match report.mode {
        Mode::FdReduction => {
            let rows: Vec<Vec<String>> = report
                .aggregates
                .iter()
                .map(|a| {
                    vec![
                        a.dataset.clone(),
                        fmt_opt(a.fd.as_ref().map(|f| f.fd), 4),
                        a.cardinality.map_or_else(|| "-".into(), |k| k.to_string()),
                        fmt_opt(a.reduction_rate, 2),
                    ]
                })
                .collect();
            render(&["Dataset", "Fractal dimension", "⌈FD⌉", "Reduction rate (%)"], &rows)
        }
        Mode::LfwaFd => {
            let rows: Vec<Vec<String>> = report
                .aggregates
                .iter()
                .filter(|a| a.trials > 0)
                .map(|a| {
                    vec![
                        a.dataset.clone(),
                        a.method.method_label().to_string(),
                        fmt_mask(&a.most_frequent_mask),
                        fmt_opt(a.mean_accuracy, 2),
                        fmt_opt(a.std_accuracy, 2),
                        fmt_opt(a.best_accuracy, 2),
                        a.trials.to_string(),
                    ]
                })
                .collect();
            render(
                &["Dataset", "Method", "Feature subset", "Acc (%)", "Std", "Best (%)", "Trials"],
                &rows,
            )
        }
        _ => {
            let rows: Vec<Vec<String>> = report
                .aggregates
                .iter()
                .filter(|a| a.trials > 0)
                .map(|a| {
                    let dims = a.most_frequent_mask.as_ref().map(Vec::len);
                    vec![
                        a.dataset.clone(),
                        a.method.method_label().to_string(),
                        fmt_mask(&a.most_frequent_mask),
                        dims.map_or_else(|| "-".into(), |k| k.to_string()),
                        fmt_opt(a.mean_accuracy, 2),
                        fmt_delta(a.delta_accuracy),
                        fmt_opt(a.std_accuracy, 2),
                        fmt_opt(a.best_accuracy, 2),
                        a.trials.to_string(),
                    ]
                })
                .collect();
            render(
                &[
                    "Dataset",
                    "Method",
                    "Feature subset",
                    "Feature dimension",
                    "Acc (%)",
                    "ΔAcc (%)",
                    "Std",
                    "Best (%)",
                    "Trials",
                ],
                &rows,
            )
        }
    };
    for f in &report.failures {
        out.push_str(&format!(
            "failed: {} {} seed {} ({}): {}\n",
            f.dataset, f.method, f.seed, f.kind, f.message
        ));
    }
    out
}
