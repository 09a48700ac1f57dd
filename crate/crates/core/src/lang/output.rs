//! Machine-readable (JSON) rendering of check and eval runs.

use serde::Serialize;

use super::diagnostic::{Diagnostic, SourceMap};
use super::eval::{Evaluation, ResultKind};
use crate::error::ErrorCode;
use crate::registry::Registry;
use crate::sort::Sort;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SortJson {
    pub tag: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<i32>,
}

impl SortJson {
    pub fn new(registry: &Registry, sort: Sort) -> Self {
        let family = sort.family().map(|f| registry.family(f).name.clone());
        match sort {
            Sort::Scalar => SortJson {
                tag: "scalar",
                family,
                power: None,
            },
            Sort::Power(_, k) => SortJson {
                tag: "power",
                family,
                power: Some(k),
            },
            Sort::Point(_) => SortJson {
                tag: "point",
                family,
                power: None,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticJson {
    pub code: ErrorCode,
    pub message: String,
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

impl DiagnosticJson {
    pub fn new(d: &Diagnostic, map: &SourceMap<'_>) -> Self {
        let loc = map.locate(d.span);
        DiagnosticJson {
            code: d.code,
            message: d.message.clone(),
            line: loc.line,
            col: loc.col,
            len: loc.len,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultJson {
    pub stmt_index: usize,
    pub kind: &'static str,
    pub sort: SortJson,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunJson {
    pub status: &'static str,
    pub diagnostics: Vec<DiagnosticJson>,
    pub results: Vec<ResultJson>,
}

impl RunJson {
    pub fn from_diagnostics(diags: &[Diagnostic], source: &str) -> Self {
        let map = SourceMap::new(source);
        RunJson {
            status: if diags.iter().any(Diagnostic::is_error) {
                "error"
            } else {
                "ok"
            },
            diagnostics: diags.iter().map(|d| DiagnosticJson::new(d, &map)).collect(),
            results: Vec::new(),
        }
    }

    pub fn from_evaluation(eval: &Evaluation, source: &str) -> Self {
        let mut run = RunJson::from_diagnostics(&eval.diagnostics, source);
        let reg = &eval.registry;
        run.results = eval
            .results
            .iter()
            .map(|r| ResultJson {
                stmt_index: r.stmt_index,
                kind: match r.kind {
                    ResultKind::Check => "check",
                    ResultKind::Assert => "assert",
                },
                sort: SortJson::new(reg, r.value.sort),
                value: r.value.value,
                scale: r.value.scale.map(|s| reg.scale(s).name.clone()),
            })
            .collect();
        run
    }
}
