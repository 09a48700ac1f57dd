//! The `.msr` language: lexer, parser, printer, sort checker and evaluator.

pub mod ast;
pub mod check;
pub mod diagnostic;
pub mod eval;
pub mod lexer;
pub mod output;
pub mod parser;
pub mod printer;

pub use ast::{Expr, ExprKind, Program, Stmt, StmtKind};
pub use check::{check_program, infer_sort, load_registry, Checked, SortEnv};
pub use diagnostic::{format_diagnostics, Diagnostic, Severity, SourceMap, Span};
pub use eval::{eval_expr, eval_raw, evaluate_program, Env, Evaluation};
pub use parser::{parse_expr, parse_program};
pub use printer::{print_expr, print_program};
