use crate::ast::{SourceSpan, Span};
use crate::taxonomy::{ErrorType, Section};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Auto,
    Manual,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Auto => "auto",
            Origin::Manual => "manual",
        })
    }
}

/// One detected error, attributed to a taxonomy type and a section.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub taxonomy: ErrorType,
    pub weight: u32,
    pub section: Section,
    pub span: Option<SourceSpan>,
    pub origin: Origin,
    pub message: String,
}

impl Diagnostic {
    /// Tool-produced diagnostic; the weight comes from the registry.
    pub fn auto(taxonomy: ErrorType, section: Section, span: impl Into<Span>, message: impl Into<String>) -> Self {
        Diagnostic {
            taxonomy,
            weight: taxonomy.weight(),
            section,
            span: span.into().get(),
            origin: Origin::Auto,
            message: message.into(),
        }
    }

    pub(crate) fn sort_key(&self) -> (Option<SourceSpan>, u8) {
        (self.span, self.taxonomy.id())
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{s}")?,
            None => f.write_str("-")?,
        }
        write!(
            f,
            " [{}] {} (#{}, weight {}): {}",
            self.section,
            self.taxonomy.name(),
            self.taxonomy.id(),
            self.weight,
            self.message
        )
    }
}

/// Flat record used by the delimiter-separated and JSON-lines outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub file: String,
    pub start_line: Option<u32>,
    pub start_col: Option<u32>,
    pub end_line: Option<u32>,
    pub end_col: Option<u32>,
    pub section: Section,
    pub taxonomy_id: u8,
    pub taxonomy_name: String,
    pub weight: u32,
    pub origin: Origin,
    pub message: String,
}

impl DiagnosticRecord {
    pub fn new(file: &str, d: &Diagnostic) -> Self {
        DiagnosticRecord {
            file: file.to_string(),
            start_line: d.span.map(|s| s.start_line),
            start_col: d.span.map(|s| s.start_col),
            end_line: d.span.map(|s| s.end_line),
            end_col: d.span.map(|s| s.end_col),
            section: d.section,
            taxonomy_id: d.taxonomy.id(),
            taxonomy_name: d.taxonomy.name().to_string(),
            weight: d.weight,
            origin: d.origin,
            message: d.message.clone(),
        }
    }

    /// Rebuilds the diagnostic; fails on an unknown taxonomy id or a
    /// partially specified span.
    pub fn to_diagnostic(&self) -> Result<Diagnostic, String> {
        let taxonomy = ErrorType::try_from(self.taxonomy_id)?;
        let span = match (self.start_line, self.start_col, self.end_line, self.end_col) {
            (Some(a), Some(b), Some(c), Some(d)) => Some(SourceSpan::new(a, b, c, d)),
            (None, None, None, None) => None,
            _ => return Err("partial span".into()),
        };
        Ok(Diagnostic {
            taxonomy,
            weight: self.weight,
            section: self.section,
            span,
            origin: self.origin,
            message: self.message.clone(),
        })
    }
}
