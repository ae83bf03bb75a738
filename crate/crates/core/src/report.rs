//! Case-by-section score tables and error-frequency listings.
//!
//! One internal model renders to aligned text, CSV and JSON lines; the CSV
//! form reads back losslessly.

use crate::promptgen::paper_matrix;
use crate::scorer::{FrequencyReport, ScoreReport, SectionTotals};
use crate::taxonomy::Section;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub const CSV_HEADER: [&str; 11] =
    ["scenario", "case", "cont", "dom", "dec", "pre", "pos", "sig", "op", "cos", "total"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub case_id: u32,
    pub per_section: SectionTotals,
    pub total: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

/// Input category of a matrix case: the grammar-free pair, then four blocks
/// of nine by (theory, emotional prompt).
pub fn group_of(case_id: u32) -> &'static str {
    match case_id {
        1..=2 => "No grammar",
        3..=11 => "Grammar, no theory, no prompt",
        12..=20 => "Grammar, no theory, prompt",
        21..=29 => "Grammar, theory, no prompt",
        30..=38 => "Grammar, theory, prompt",
        _ => "Other",
    }
}

fn matrix_label(case_id: u32) -> String {
    paper_matrix()
        .into_iter()
        .find(|c| c.case_id.map(u32::from) == Some(case_id))
        .map(|c| c.scenario_label())
        .unwrap_or_else(|| "-".to_string())
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Invalid { row: usize, message: String },
}

impl ReportTable {
    /// Rows for scored reports, sorted by case id. Reports without a case id
    /// are skipped.
    pub fn from_reports(reports: &[ScoreReport]) -> Self {
        let mut rows: Vec<ReportRow> = reports
            .iter()
            .filter_map(|r| {
                let case_id = r.case_id?;
                Some(ReportRow { scenario: matrix_label(case_id), case_id, per_section: r.per_section, total: r.total })
            })
            .collect();
        rows.sort_by_key(|r| r.case_id);
        ReportTable { rows }
    }

    pub fn reports(&self) -> Vec<ScoreReport> {
        self.rows
            .iter()
            .map(|r| ScoreReport { case_id: Some(r.case_id), per_section: r.per_section, total: r.total })
            .collect()
    }

    /// Column sums. No grand total across sections is computed.
    pub fn section_totals(&self) -> SectionTotals {
        let mut t = SectionTotals::default();
        for r in &self.rows {
            t.add(&r.per_section);
        }
        t
    }

    /// Cases whose stated total differs from the sum of their sections.
    pub fn inconsistent_rows(&self) -> Vec<u32> {
        self.rows.iter().filter(|r| r.total != r.per_section.sum()).map(|r| r.case_id).collect()
    }

    pub fn row(&self, case_id: u32) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.case_id == case_id)
    }

    /// CSV with a header and a final `Total` row holding section sums.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let cells = |t: &SectionTotals| t.values().map(|v| v.to_string());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.scenario.clone(), r.case_id.to_string()];
            rec.extend(cells(&r.per_section));
            rec.push(r.total.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        let mut rec = vec!["Total".to_string(), String::new()];
        rec.extend(cells(&self.section_totals()));
        rec.push(String::new());
        w.write_record(&rec).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    /// Reads the CSV form. The `Total` row is recomputed, so it is skipped.
    /// A row's stated total is kept as written even when it disagrees with its
    /// sections; see [`ReportTable::inconsistent_rows`].
    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_lowercase).collect();
        if header != CSV_HEADER {
            return Err(ReportError::Invalid { row: 1, message: format!("expected header {}", CSV_HEADER.join(",")) });
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            if rec.get(1).is_some_and(str::is_empty) {
                continue;
            }
            let num = |j: usize| -> Result<u32, ReportError> {
                let cell = rec.get(j).unwrap_or("");
                cell.parse().map_err(|_| ReportError::Invalid {
                    row,
                    message: format!("`{cell}` in column {} is not a number", CSV_HEADER[j]),
                })
            };
            let v: Vec<u32> = (2..10).map(num).collect::<Result<_, _>>()?;
            let per_section = SectionTotals {
                cont: v[0],
                dom: v[1],
                dec: v[2],
                pre: v[3],
                pos: v[4],
                sig: v[5],
                op: v[6],
                cos: v[7],
            };
            let total = num(10)?;
            rows.push(ReportRow {
                scenario: rec.get(0).unwrap_or("").to_string(),
                case_id: num(1)?,
                per_section,
                total,
            });
        }
        Ok(ReportTable { rows })
    }

    /// Aligned table with a header line before each input category.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let head = |out: &mut String| {
            let _ = write!(out, "{:<8}{:>4}", "Scen", "Cas");
            for s in Section::ALL {
                let _ = write!(out, "{:>6}", s.code());
            }
            let _ = writeln!(out, "{:>6}", "Tot");
        };
        head(&mut out);
        let mut group = "";
        for r in &self.rows {
            let g = group_of(r.case_id);
            if g != group {
                let _ = writeln!(out, "-- {g}");
                group = g;
            }
            let _ = write!(out, "{:<8}{:>4}", r.scenario, r.case_id);
            for v in r.per_section.values() {
                let _ = write!(out, "{v:>6}");
            }
            let _ = writeln!(out, "{:>6}", r.total);
        }
        let _ = write!(out, "{:<8}{:>4}", "Total", "");
        for v in self.section_totals().values() {
            let _ = write!(out, "{v:>6}");
        }
        out.push('\n');
        out
    }

    /// One JSON object per row.
    pub fn to_json_lines(&self) -> String {
        self.rows.iter().map(|r| serde_json::to_string(r).expect("plain data") + "\n").collect()
    }

    pub fn from_json_lines(text: &str) -> Result<Self, serde_json::Error> {
        let rows = text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect::<Result<_, _>>()?;
        Ok(ReportTable { rows })
    }
}

/// Per-type counts, descending, with shares; then band shares.
pub fn frequency_text(f: &FrequencyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>3}  {:<44}{:>7}{:>9}", "id", "error type", "count", "share");
    for t in &f.types {
        let _ = writeln!(out, "{:>3}  {:<44}{:>7}{:>8.2}%", t.taxonomy.id(), t.taxonomy.name(), t.count, t.share);
    }
    let _ = writeln!(out, "{:>3}  {:<44}{:>7}", "", "total", f.total);
    for b in &f.bands {
        let _ = writeln!(out, "band {:<40}{:>7}{:>8.2}%", b.name, b.count, b.share);
    }
    out
}

pub fn frequency_csv(f: &FrequencyReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "id", "name", "count", "share"]).expect("in-memory write");
    for t in &f.types {
        w.write_record([
            "type",
            &t.taxonomy.id().to_string(),
            t.taxonomy.name(),
            &t.count.to_string(),
            &format!("{:.2}", t.share),
        ])
        .expect("in-memory write");
    }
    for b in &f.bands {
        w.write_record(["band", "", &b.name, &b.count.to_string(), &format!("{:.2}", b.share)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}
