use crate::Format;
use serde::Serialize;
use symboleo_core::diagnostic::{Diagnostic, DiagnosticRecord};

/// Stdout sink that honours `--quiet`.
pub struct Out {
    quiet: bool,
    buf: String,
}

impl Out {
    pub fn new(quiet: bool) -> Self {
        Out { quiet, buf: String::new() }
    }

    pub fn push(&mut self, text: &str) {
        self.buf.push_str(text);
    }

    pub fn line(&mut self, text: &str) {
        self.buf.push_str(text);
        self.buf.push('\n');
    }

    pub fn json<T: Serialize>(&mut self, value: &T) {
        self.line(&serde_json::to_string(value).expect("plain data"));
    }
}

impl Drop for Out {
    fn drop(&mut self) {
        if !self.quiet {
            print!("{}", self.buf);
        }
    }
}

pub fn csv_rows<T: Serialize>(rows: &[T], header: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

const DIAGNOSTIC_HEADER: [&str; 11] = [
    "file",
    "start_line",
    "start_col",
    "end_line",
    "end_col",
    "section",
    "taxonomy_id",
    "taxonomy_name",
    "weight",
    "origin",
    "message",
];

pub fn diagnostics(out: &mut Out, format: Format, file: &str, diags: &[Diagnostic]) {
    match format {
        Format::Text => {
            if diags.is_empty() {
                out.line(&format!("{file}: no diagnostics"));
            }
            for d in diags {
                out.line(&format!("{file}:{d}"));
            }
        }
        Format::Csv => {
            let recs: Vec<DiagnosticRecord> = diags.iter().map(|d| DiagnosticRecord::new(file, d)).collect();
            out.push(&csv_rows(&recs, &DIAGNOSTIC_HEADER));
        }
        Format::JsonLines => {
            for d in diags {
                out.json(&DiagnosticRecord::new(file, d));
            }
        }
    }
}
