use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{ErrorCode, MeasureError};

/// Byte range into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

/// Line starts of a source text, for turning byte offsets into positions.
#[derive(Clone, Debug)]
pub struct SourceMap<'a> {
    source: &'a str,
    line_starts: Vec<usize>,
}

/// Resolved location: 1-based line, 0-based character column, length in
/// characters (at least 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Location {
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

impl<'a> SourceMap<'a> {
    pub fn new(source: &'a str) -> Self {
        let line_starts = std::iter::once(0)
            .chain(source.match_indices('\n').map(|(i, _)| i + 1))
            .collect();
        SourceMap {
            source,
            line_starts,
        }
    }

    fn line_index(&self, offset: usize) -> usize {
        match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    pub fn locate(&self, span: Span) -> Location {
        let start = span.start.min(self.source.len());
        let end = span.end.clamp(start, self.source.len());
        let idx = self.line_index(start);
        let line_start = self.line_starts[idx];
        let col = self.source[line_start..start].chars().count();
        let len = self.source[start..end].chars().count().max(1);
        Location {
            line: idx + 1,
            col,
            len,
        }
    }

    pub fn line_text(&self, line: usize) -> &'a str {
        let start = self.line_starts[line - 1];
        let end = self
            .line_starts
            .get(line)
            .map(|e| e - 1)
            .unwrap_or(self.source.len());
        self.source[start..end].trim_end_matches('\r')
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub code: ErrorCode,
    pub message: String,
    pub span: Span,
    pub severity: Severity,
}

impl Diagnostic {
    pub fn error(code: ErrorCode, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span,
            severity: Severity::Error,
        }
    }

    pub fn warning(code: ErrorCode, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span,
            severity: Severity::Warning,
        }
    }

    pub fn from_error(e: MeasureError, span: Span) -> Self {
        Diagnostic::error(e.code, e.message, span)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Sorts diagnostics by position, then code.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (a.span.start, a.code, a.span.end).cmp(&(b.span.start, b.code, b.span.end))
    });
}

/// Renders one block per diagnostic: header, source line, caret underline.
pub fn format_diagnostics(diags: &[Diagnostic], source: &str) -> String {
    let map = SourceMap::new(source);
    let mut sorted = diags.to_vec();
    sort_diagnostics(&mut sorted);
    let mut out = String::new();
    for d in &sorted {
        let loc = map.locate(d.span);
        let severity = match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let text = map.line_text(loc.line);
        let gutter = loc.line.to_string().len();
        let pad = " ".repeat(gutter);
        let _ = writeln!(out, "{severity}[{}]: {}", d.code, d.message);
        let _ = writeln!(out, "{pad}--> line {}, col {}", loc.line, loc.col);
        let _ = writeln!(out, "{pad} |");
        let _ = writeln!(out, "{} | {}", loc.line, text);
        let width = loc
            .len
            .min(text.chars().count().saturating_sub(loc.col).max(1));
        let _ = writeln!(out, "{pad} | {}{}", " ".repeat(loc.col), "^".repeat(width));
    }
    out
}
