//! Evaluation of checked programs.
//!
//! Two evaluators share one tree walk: the typed one computes [`Quantity`]s
//! through the value algebra, the raw one erases sorts and treats every leaf
//! as a plain real on its reference scale. Both accept a leaf map, which the
//! meaningfulness oracle uses to re-describe every literal and binding under
//! an admissible transformation.

use std::collections::HashMap;

use super::ast::*;
use super::check::{check_program, literal_sort};
use super::diagnostic::{sort_diagnostics, Diagnostic};
use super::lexer::CmpOp;
use crate::error::{ErrorCode, MeasureError};
use crate::numfmt::approx_eq;
use crate::quantity::{self, Quantity};
use crate::registry::{FamilyKind, Registry};
use crate::sort::BinOp;

pub type Env = HashMap<String, Quantity>;

/// Applied to every leaf (literal or bound value) after it has been rewritten
/// to its family's reference scale.
pub type LeafMap<'a> = &'a (dyn Fn(&Quantity) -> Result<Quantity, MeasureError> + Sync);

/// The quantity a literal denotes, on the scale it names. In raw mode a point
/// literal on a linear family is read as a difference, since such families
/// have no points.
pub fn literal_quantity(
    registry: &Registry,
    value: f64,
    unit: Option<&Unit>,
    raw: bool,
) -> Result<Quantity, Diagnostic> {
    if raw {
        if let Some(u) = unit {
            if let Some(s) = registry.scale_id(&u.scale.name) {
                let fam = registry.family(registry.scale(s).family);
                if fam.kind == FamilyKind::Linear && u.kind == UnitKind::Point {
                    return Quantity::difference(registry, value, s)
                        .map_err(|e| Diagnostic::from_error(e, u.scale.span));
                }
            }
        }
    }
    let (sort, scale) = literal_sort(registry, unit)?;
    let span = unit.map(|u| u.scale.span).unwrap_or_default();
    Quantity::new(registry, value, sort, scale).map_err(|e| Diagnostic::from_error(e, span))
}

struct Walker<'a> {
    registry: &'a Registry,
    env: &'a Env,
    leaf: Option<LeafMap<'a>>,
}

impl Walker<'_> {
    fn leaf(&self, q: Quantity, expr: &Expr) -> Result<Quantity, Diagnostic> {
        let at = |e: MeasureError| Diagnostic::from_error(e, expr.span);
        let q = self.registry.to_reference(&q).map_err(at)?;
        match self.leaf {
            Some(f) => f(&q).map_err(at),
            None => Ok(q),
        }
    }

    fn lookup(&self, name: &str, expr: &Expr) -> Result<Quantity, Diagnostic> {
        self.env.get(name).copied().ok_or_else(|| {
            Diagnostic::error(
                ErrorCode::UnboundName,
                format!("`{name}` is not bound"),
                expr.span,
            )
        })
    }

    fn typed(&self, expr: &Expr) -> Result<Quantity, Diagnostic> {
        let reg = self.registry;
        let at = |e: MeasureError| Diagnostic::from_error(e, expr.span);
        match &expr.kind {
            ExprKind::Number { value, unit } => {
                let q = literal_quantity(reg, *value, unit.as_ref(), false)?;
                self.leaf(q, expr)
            }
            ExprKind::Name(n) => self.leaf(self.lookup(n, expr)?, expr),
            ExprKind::Paren(inner) => self.typed(inner),
            ExprKind::Binary {
                op,
                op_span,
                lhs,
                rhs,
            } => {
                let a = self.typed(lhs)?;
                let b = self.typed(rhs)?;
                quantity::apply_binary(reg, *op, &a, &b)
                    .map_err(|e| Diagnostic::from_error(e, *op_span))
            }
            ExprKind::Neg(inner) => quantity::negate(reg, &self.typed(inner)?).map_err(at),
            ExprKind::Power { base, exponent } => {
                quantity::power_int(reg, &self.typed(base)?, *exponent).map_err(at)
            }
            ExprKind::Mix(args) => {
                let weights: Vec<f64> = args.iter().map(|(w, _)| w.value()).collect();
                let points = args
                    .iter()
                    .map(|(_, e)| self.typed(e))
                    .collect::<Result<Vec<_>, _>>()?;
                quantity::mix(reg, &weights, &points).map_err(at)
            }
        }
    }

    fn raw(&self, expr: &Expr) -> Result<f64, Diagnostic> {
        let fail = |code, msg: &str, e: &Expr| Err(Diagnostic::error(code, msg, e.span));
        let finite = |x: f64, e: &Expr| {
            if x.is_finite() {
                Ok(x)
            } else {
                fail(ErrorCode::NonFinite, "result is not a finite real", e)
            }
        };
        match &expr.kind {
            ExprKind::Number { value, unit } => {
                let q = literal_quantity(self.registry, *value, unit.as_ref(), true)?;
                Ok(self.leaf(q, expr)?.value)
            }
            ExprKind::Name(n) => Ok(self.leaf(self.lookup(n, expr)?, expr)?.value),
            ExprKind::Paren(inner) => self.raw(inner),
            ExprKind::Binary {
                op,
                op_span,
                lhs,
                rhs,
            } => {
                let a = self.raw(lhs)?;
                let b = self.raw(rhs)?;
                if *op == BinOp::Div && b == 0.0 {
                    return Err(Diagnostic::error(
                        ErrorCode::DivZero,
                        "division by zero",
                        *op_span,
                    ));
                }
                finite(op.apply(a, b), expr)
            }
            ExprKind::Neg(inner) => Ok(-self.raw(inner)?),
            ExprKind::Power { base, exponent } => {
                let a = self.raw(base)?;
                if *exponent < 0 && a == 0.0 {
                    return fail(ErrorCode::DivZero, "negative power of zero", expr);
                }
                finite(a.powi(*exponent), expr)
            }
            ExprKind::Mix(args) => {
                let mut acc = 0.0;
                for (w, e) in args {
                    acc += w.value() * self.raw(e)?;
                }
                finite(acc, expr)
            }
        }
    }
}

/// Evaluates `expr` through the value algebra; the result is on its family's
/// reference scale.
pub fn eval_expr(
    expr: &Expr,
    env: &Env,
    registry: &Registry,
    leaf: Option<LeafMap<'_>>,
) -> Result<Quantity, Diagnostic> {
    let q = Walker {
        registry,
        env,
        leaf,
    }
    .typed(expr)?;
    registry
        .to_reference(&q)
        .map_err(|e| Diagnostic::from_error(e, expr.span))
}

/// Evaluates `expr` with sorts erased: `+ - * /`, powers and weighted sums on
/// bare reference-scale readings.
pub fn eval_raw(
    expr: &Expr,
    env: &Env,
    registry: &Registry,
    leaf: Option<LeafMap<'_>>,
) -> Result<f64, Diagnostic> {
    Walker {
        registry,
        env,
        leaf,
    }
    .raw(expr)
}

pub fn compare(cmp: CmpOp, a: f64, b: f64) -> bool {
    let eq = approx_eq(a, b);
    match cmp {
        CmpOp::Eq => eq,
        CmpOp::Ne => !eq,
        CmpOp::Lt => a < b && !eq,
        CmpOp::Le => a <= b || eq,
        CmpOp::Gt => a > b && !eq,
        CmpOp::Ge => a >= b || eq,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResultKind {
    Check,
    Assert,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StmtResult {
    pub stmt_index: usize,
    pub kind: ResultKind,
    /// Check value, or the left-hand side of an assertion, on the reference
    /// scale.
    pub value: Quantity,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub registry: Registry,
    pub results: Vec<StmtResult>,
    pub diagnostics: Vec<Diagnostic>,
    /// Values bound by `let`, for tooling that inspects a finished run.
    pub env: Env,
}

impl Evaluation {
    pub fn is_clean(&self) -> bool {
        !self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

/// Checks, then (if clean) evaluates statements in order. A run-time error
/// stops evaluation; a failed assertion is reported and evaluation continues.
pub fn evaluate_program(program: &Program) -> Evaluation {
    let checked = check_program(program);
    let mut eval = Evaluation {
        registry: checked.registry,
        results: Vec::new(),
        diagnostics: checked.diagnostics,
        env: Env::new(),
    };
    if eval.diagnostics.iter().any(Diagnostic::is_error) {
        return eval;
    }
    for (index, stmt) in program.statements.iter().enumerate() {
        let outcome = run_statement(&eval.registry, &mut eval.env, index, stmt);
        match outcome {
            Ok(Some((result, failure))) => {
                eval.results.push(result);
                eval.diagnostics.extend(failure);
            }
            Ok(None) => {}
            Err(d) => {
                eval.diagnostics.push(d);
                break;
            }
        }
    }
    sort_diagnostics(&mut eval.diagnostics);
    eval
}

type StmtOutcome = Option<(StmtResult, Option<Diagnostic>)>;

fn run_statement(
    registry: &Registry,
    env: &mut Env,
    index: usize,
    stmt: &Stmt,
) -> Result<StmtOutcome, Diagnostic> {
    match &stmt.kind {
        StmtKind::Family { .. } | StmtKind::Scale { .. } => Ok(None),
        StmtKind::Let { name, value } => {
            let q = eval_expr(value, env, registry, None)?;
            env.insert(name.name.clone(), q);
            Ok(None)
        }
        StmtKind::Check(e) => {
            let q = eval_expr(e, env, registry, None)?;
            Ok(Some((
                StmtResult {
                    stmt_index: index,
                    kind: ResultKind::Check,
                    value: q,
                    holds: None,
                },
                None,
            )))
        }
        StmtKind::Assert {
            lhs,
            cmp,
            cmp_span,
            rhs,
        } => {
            let a = eval_expr(lhs, env, registry, None)?;
            let b = eval_expr(rhs, env, registry, None)?;
            let holds = compare(*cmp, a.value, b.value);
            let failure = (!holds).then(|| {
                Diagnostic::error(
                    ErrorCode::AssertFailed,
                    format!(
                        "assertion failed: {} {} {} ({})",
                        a.value,
                        cmp.symbol(),
                        b.value,
                        registry.describe(a.sort)
                    ),
                    *cmp_span,
                )
            });
            Ok(Some((
                StmtResult {
                    stmt_index: index,
                    kind: ResultKind::Assert,
                    value: a,
                    holds: Some(holds),
                },
                failure,
            )))
        }
    }
}
