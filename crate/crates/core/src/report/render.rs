use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AceReport, ReportError, Thresholds};
use crate::retrieval::{AceRow, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected markdown or csv)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    #[serde(rename = "HIGH")]
    High,
    #[serde(rename = "LOW")]
    Low,
    #[serde(rename = "")]
    None,
}

impl Flag {
    pub fn label(self) -> &'static str {
        match self {
            Flag::High => "HIGH",
            Flag::Low => "LOW",
            Flag::None => "",
        }
    }
}

pub fn flag(ace: Option<f64>, t: &Thresholds) -> Flag {
    match ace {
        Some(v) if v >= t.high => Flag::High,
        Some(v) if v < t.low => Flag::Low,
        _ => Flag::None,
    }
}

/// Rows grouped by (model, task, code) in first-appearance order.
fn groups(rows: &[AceRow]) -> Vec<Vec<&AceRow>> {
    let mut out: Vec<Vec<&AceRow>> = Vec::new();
    for r in rows {
        match out
            .iter_mut()
            .find(|g| g[0].model == r.model && g[0].task == r.task && g[0].code == r.code)
        {
            Some(g) => g.push(r),
            None => out.push(vec![r]),
        }
    }
    out
}

pub fn render_markdown(report: &AceReport) -> String {
    let t = &report.thresholds;
    let mut out = String::from("# ACE report\n\n");
    let _ = writeln!(out, "Cells at or above {} are marked HIGH; cells below {} are marked LOW.\n", t.high, t.low);
    for task in Task::ALL {
        let rows: Vec<AceRow> = report.rows.iter().filter(|r| r.task == task).cloned().collect();
        if rows.is_empty() {
            continue;
        }
        let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
        ks.sort_unstable();
        ks.dedup();
        let _ = writeln!(out, "## {task}\n");
        let mut header = String::from("| model | code | n |");
        let mut rule = String::from("|---|---|---:|");
        for k in &ks {
            let _ = write!(header, " R@{k} | R@{k} edited | ACE R@{k} |");
            rule.push_str("---:|---:|---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for g in groups(&rows) {
            let _ = write!(out, "| {} | {} | {} |", g[0].model, g[0].code, g[0].n);
            for k in &ks {
                match g.iter().find(|r| r.k == *k) {
                    Some(r) => {
                        let cell = match (r.ace, &r.error) {
                            (Some(v), _) => match flag(Some(v), t) {
                                Flag::None => format!("{v:.2}"),
                                f => format!("{v:.2} {}", f.label()),
                            },
                            (None, Some(e)) => format!("n/a ({e})"),
                            (None, None) => "n/a".into(),
                        };
                        let _ = write!(out, " {:.4} | {:.4} | {cell} |", r.o, r.o_star);
                    }
                    None => out.push_str(" | | |"),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// One CSV line. Reals are written with four decimals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub model: String,
    pub task: Task,
    pub code: String,
    pub k: usize,
    pub o: f64,
    pub o_star: f64,
    pub n: usize,
    pub scale: u64,
    pub ace: Option<f64>,
    pub flag: Flag,
    pub error: Option<String>,
}

#[derive(Serialize)]
struct CsvOut<'a> {
    model: &'a str,
    task: Task,
    code: &'a str,
    k: usize,
    o: String,
    o_star: String,
    n: usize,
    scale: u64,
    ace: String,
    flag: &'static str,
    error: &'a str,
}

fn dp4(x: f64) -> String {
    format!("{x:.4}")
}

pub fn render_csv(report: &AceReport) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(CsvOut {
            model: &r.model,
            task: r.task,
            code: &r.code,
            k: r.k,
            o: dp4(r.o),
            o_star: dp4(r.o_star),
            n: r.n,
            scale: r.scale,
            ace: r.ace.map(dp4).unwrap_or_default(),
            flag: flag(r.ace, &report.thresholds).label(),
            error: r.error.as_deref().unwrap_or(""),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<CsvRow>, _>>()?)
}
