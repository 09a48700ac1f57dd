//! Static sort inference. Every rule comes from [`crate::sort`], so a program
//! the checker accepts can only fail at run time on values (division by zero,
//! weights, overflow), never on sorts.

use std::collections::HashMap;

use super::ast::*;
use super::diagnostic::{sort_diagnostics, Diagnostic, Span};
use crate::error::ErrorCode;
use crate::registry::{FamilyKind, Registry, ScaleId};
use crate::sort::{self, Sort, SortError};

/// Sorts of bound names; `None` marks a binding whose definition failed to
/// check, so uses of it are silently skipped instead of cascading.
pub type SortEnv = HashMap<String, Option<Sort>>;

/// Sort and scale of a numeric literal with an optional unit tag.
pub fn literal_sort(
    registry: &Registry,
    unit: Option<&Unit>,
) -> Result<(Sort, Option<ScaleId>), Diagnostic> {
    let Some(unit) = unit else {
        return Ok((Sort::Scalar, None));
    };
    let scale = registry.scale_id(&unit.scale.name).ok_or_else(|| {
        Diagnostic::error(
            ErrorCode::UnknownScale,
            format!("unknown scale `{}`", unit.scale.name),
            unit.scale.span,
        )
    })?;
    let family = registry.scale(scale).family;
    let fam = registry.family(family);
    match (fam.kind, unit.kind) {
        (FamilyKind::Absolute, _) => Ok((Sort::Scalar, None)),
        (FamilyKind::Affine, UnitKind::Point) => Ok((Sort::Point(family), Some(scale))),
        (FamilyKind::Linear, UnitKind::Point) => Err(Diagnostic::error(
            ErrorCode::SortKind,
            format!(
                "linear family `{}` has no points; write a difference literal `d@{}`",
                fam.name, unit.scale.name
            ),
            unit.scale.span,
        )),
        (_, UnitKind::Difference) => Ok((Sort::Power(family, 1), Some(scale))),
    }
}

fn sort_diag(e: SortError, span: Span, what: String) -> Diagnostic {
    Diagnostic::error(e.code, format!("{what}: {}", e.detail), span)
}

/// Infers the sort of `expr`, collecting every independent error.
pub fn infer_sort(
    expr: &Expr,
    env: &SortEnv,
    registry: &Registry,
) -> Result<Sort, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    match infer(expr, env, registry, &mut diags) {
        Some(s) if diags.is_empty() => Ok(s),
        _ => {
            sort_diagnostics(&mut diags);
            Err(diags)
        }
    }
}

fn infer(
    expr: &Expr,
    env: &SortEnv,
    registry: &Registry,
    diags: &mut Vec<Diagnostic>,
) -> Option<Sort> {
    match &expr.kind {
        ExprKind::Number { unit, .. } => match literal_sort(registry, unit.as_ref()) {
            Ok((s, _)) => Some(s),
            Err(d) => {
                diags.push(d);
                None
            }
        },
        ExprKind::Name(n) => match env.get(n) {
            Some(s) => *s,
            None => {
                diags.push(Diagnostic::error(
                    ErrorCode::UnboundName,
                    format!("`{n}` is not bound"),
                    expr.span,
                ));
                None
            }
        },
        ExprKind::Paren(inner) => infer(inner, env, registry, diags),
        ExprKind::Binary {
            op,
            op_span,
            lhs,
            rhs,
        } => {
            let a = infer(lhs, env, registry, diags);
            let b = infer(rhs, env, registry, diags);
            let (a, b) = (a?, b?);
            sort::binary_sort(*op, a, b)
                .map_err(|e| {
                    diags.push(sort_diag(
                        e,
                        *op_span,
                        format!("{} {op} {}", registry.describe(a), registry.describe(b)),
                    ))
                })
                .ok()
        }
        ExprKind::Neg(inner) => {
            let a = infer(inner, env, registry, diags)?;
            sort::negate_sort(a)
                .map_err(|e| {
                    diags.push(sort_diag(
                        e,
                        expr.span,
                        format!("cannot negate {}", registry.describe(a)),
                    ))
                })
                .ok()
        }
        ExprKind::Power { base, exponent } => {
            let a = infer(base, env, registry, diags)?;
            sort::power_sort(a, *exponent)
                .map_err(|e| {
                    diags.push(sort_diag(
                        e,
                        expr.span,
                        format!(
                            "cannot raise {} to the power {exponent}",
                            registry.describe(a)
                        ),
                    ))
                })
                .ok()
        }
        ExprKind::Mix(args) => {
            let sorts: Vec<Option<Sort>> = args
                .iter()
                .map(|(_, e)| infer(e, env, registry, diags))
                .collect();
            let sorts: Option<Vec<Sort>> = sorts.into_iter().collect();
            let sorts = sorts?;
            let first = sorts[0];
            if !first.is_point() {
                diags.push(Diagnostic::error(
                    ErrorCode::MixSort,
                    format!("mix operand {} is not a point", registry.describe(first)),
                    args[0].1.span,
                ));
                return None;
            }
            if let Some(i) = sorts.iter().position(|s| *s != first) {
                diags.push(Diagnostic::error(
                    ErrorCode::MixSort,
                    format!(
                        "mix operand {} is not a {}",
                        registry.describe(sorts[i]),
                        registry.describe(first)
                    ),
                    args[i].1.span,
                ));
                return None;
            }
            Some(first)
        }
    }
}

/// Error, if any, for comparing values of sorts `a` and `b`.
pub fn comparison_error(registry: &Registry, a: Sort, b: Sort) -> Option<(ErrorCode, String)> {
    if a == b {
        return None;
    }
    let code = match (a, b) {
        _ if a.family().is_some() && b.family().is_some() && a.family() != b.family() => {
            ErrorCode::FamilyMix
        }
        (Sort::Power(_, _), Sort::Power(_, _)) => ErrorCode::PowerMismatch,
        _ => ErrorCode::SortMismatch,
    };
    Some((
        code,
        format!(
            "cannot compare {} with {}",
            registry.describe(a),
            registry.describe(b)
        ),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtSort {
    Declaration,
    Let(Option<Sort>),
    Check(Option<Sort>),
    /// Sort of both sides when they agree.
    Assert(Option<Sort>),
}

/// Result of checking a whole program: the registry its declarations built,
/// one entry per statement and every diagnostic in source order.
#[derive(Clone, Debug)]
pub struct Checked {
    pub registry: Registry,
    pub statements: Vec<StmtSort>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Checked {
    pub fn is_clean(&self) -> bool {
        !self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

/// Loads declarations into a registry, ignoring every other statement.
pub fn load_registry(program: &Program) -> (Registry, Vec<Diagnostic>) {
    let mut registry = Registry::new();
    let mut diags = Vec::new();
    for stmt in &program.statements {
        declare(&mut registry, stmt, &mut diags);
    }
    sort_diagnostics(&mut diags);
    (registry, diags)
}

fn declare(registry: &mut Registry, stmt: &Stmt, diags: &mut Vec<Diagnostic>) {
    match &stmt.kind {
        StmtKind::Family { name, kind, owner } => {
            if let Err(e) =
                registry.register_family(&name.name, *kind, owner.as_ref().map(|o| o.name.as_str()))
            {
                diags.push(Diagnostic::from_error(e, name.span));
            }
        }
        StmtKind::Scale {
            name,
            family,
            constants,
        } => {
            let Some(fid) = registry.family_id(&family.name) else {
                diags.push(Diagnostic::error(
                    ErrorCode::UnknownFamily,
                    format!("unknown family `{}`", family.name),
                    family.span,
                ));
                return;
            };
            let (offset, factor) = constants
                .map(|(o, f)| (o.value(), f.value()))
                .unwrap_or((0.0, 1.0));
            if let Err(e) = registry.register_scale(&name.name, fid, offset, factor) {
                let span = match e.code {
                    ErrorCode::DupScale => name.span,
                    _ => stmt.span,
                };
                diags.push(Diagnostic::from_error(e, span));
            }
        }
        _ => {}
    }
}

/// Registers declarations and infers the sort of every expression statement.
pub fn check_program(program: &Program) -> Checked {
    let mut registry = Registry::new();
    let mut env = SortEnv::new();
    let mut diags = Vec::new();
    let mut statements = Vec::with_capacity(program.statements.len());

    for stmt in &program.statements {
        let entry = match &stmt.kind {
            StmtKind::Family { .. } | StmtKind::Scale { .. } => {
                declare(&mut registry, stmt, &mut diags);
                StmtSort::Declaration
            }
            StmtKind::Let { name, value } => {
                let sort = infer(value, &env, &registry, &mut diags);
                if env.contains_key(&name.name) {
                    diags.push(Diagnostic::error(
                        ErrorCode::Rebind,
                        format!("`{}` is already bound", name.name),
                        name.span,
                    ));
                } else {
                    env.insert(name.name.clone(), sort);
                }
                StmtSort::Let(sort)
            }
            StmtKind::Check(e) => StmtSort::Check(infer(e, &env, &registry, &mut diags)),
            StmtKind::Assert {
                lhs, cmp_span, rhs, ..
            } => {
                let a = infer(lhs, &env, &registry, &mut diags);
                let b = infer(rhs, &env, &registry, &mut diags);
                let sort = match (a, b) {
                    (Some(a), Some(b)) => match comparison_error(&registry, a, b) {
                        None => Some(a),
                        Some((code, msg)) => {
                            diags.push(Diagnostic::error(code, msg, *cmp_span));
                            None
                        }
                    },
                    _ => None,
                };
                StmtSort::Assert(sort)
            }
        };
        statements.push(entry);
    }
    sort_diagnostics(&mut diags);
    Checked {
        registry,
        statements,
        diagnostics: diags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_expr, parse_program};

    const DECLS: &str = "family time kind affine\nscale s of time\nscale min of time offset 0 factor 60\n\
                         family mass kind linear\nscale kg of mass\nscale g of mass offset 0 factor 1/1000\n\
                         family count kind absolute\n";

    fn checked(body: &str) -> Checked {
        let src = format!("{DECLS}{body}");
        check_program(&parse_program(&src).unwrap())
    }

    fn codes(body: &str) -> Vec<ErrorCode> {
        checked(body).diagnostics.iter().map(|d| d.code).collect()
    }

    fn setup() -> (Registry, SortEnv) {
        let (registry, diags) = load_registry(&parse_program(DECLS).unwrap());
        assert!(diags.is_empty());
        let time = registry.family_id("time").unwrap();
        let mass = registry.family_id("mass").unwrap();
        let mut env = SortEnv::new();
        for t in ["t1", "t2", "t3"] {
            env.insert(t.into(), Some(Sort::Point(time)));
        }
        env.insert("m".into(), Some(Sort::Power(mass, 1)));
        (registry, env)
    }

    #[test]
    fn ratio_of_differences_is_scalar() {
        let (reg, env) = setup();
        let e = parse_expr("(t2 - t1) / (t3 - t1)").unwrap();
        assert_eq!(infer_sort(&e, &env, &reg).unwrap(), Sort::Scalar);
    }

    #[test]
    fn point_ratio_reported_at_operator() {
        let (reg, env) = setup();
        let src = "t1 / t2";
        let e = parse_expr(src).unwrap();
        let d = infer_sort(&e, &env, &reg).unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, ErrorCode::PointRatio);
        assert_eq!(d[0].span, Span::new(3, 4));
        assert!(
            d[0].message.contains("Point(time) / Point(time)"),
            "{}",
            d[0].message
        );
    }

    #[test]
    fn scalar_scaling_of_vector() {
        let (reg, env) = setup();
        let e = parse_expr("2.5 * m").unwrap();
        let mass = reg.family_id("mass").unwrap();
        assert_eq!(infer_sort(&e, &env, &reg).unwrap(), Sort::Power(mass, 1));
    }

    #[test]
    fn independent_errors_are_all_reported() {
        let (reg, env) = setup();
        let e = parse_expr("t1 / t2 + (t1 + t2) + q").unwrap();
        let d = infer_sort(&e, &env, &reg).unwrap_err();
        let codes: Vec<_> = d.iter().map(|d| d.code).collect();
        assert_eq!(
            codes,
            vec![
                ErrorCode::PointRatio,
                ErrorCode::PointSum,
                ErrorCode::UnboundName
            ]
        );
    }

    #[test]
    fn literal_kinds() {
        assert!(codes("check 5 d@kg * 2").is_empty());
        assert_eq!(codes("check 5 @kg"), vec![ErrorCode::SortKind]);
        assert_eq!(codes("check 5 @furlong"), vec![ErrorCode::UnknownScale]);
        let c = checked("check 3 @count.ref + 1");
        assert_eq!(
            c.statements.last(),
            Some(&StmtSort::Check(Some(Sort::Scalar)))
        );
    }

    #[test]
    fn statement_level_rules() {
        assert_eq!(codes("let a = 1\nlet a = 2"), vec![ErrorCode::Rebind]);
        assert_eq!(codes("assert 1 @s == 1 d@s"), vec![ErrorCode::SortMismatch]);
        assert_eq!(codes("assert 1 d@s == 1 d@kg"), vec![ErrorCode::FamilyMix]);
        assert_eq!(
            codes("assert 1 d@s * 1 d@s < 1 d@s"),
            vec![ErrorCode::PowerMismatch]
        );
        assert!(codes("assert 1 @s < 2 @min").is_empty());
        assert_eq!(codes("scale x of nothing"), vec![ErrorCode::UnknownFamily]);
        assert_eq!(
            codes("scale lb of mass offset 1 factor 2"),
            vec![ErrorCode::OffsetOnLinear]
        );
        assert_eq!(codes("family time kind linear"), vec![ErrorCode::DupFamily]);
        assert_eq!(
            codes("scale dozen of count offset 0 factor 12"),
            vec![ErrorCode::ScaleOnAbsolute]
        );
    }

    #[test]
    fn poisoned_bindings_do_not_cascade() {
        let c = checked("let bad = 1 @s / 2 @s\ncheck bad + 1\ncheck 1 @s * 2");
        let codes: Vec<_> = c.diagnostics.iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![ErrorCode::PointRatio, ErrorCode::PointSum]);
    }

    #[test]
    fn mix_rules() {
        assert!(codes("check mix(1/2: 1 @s, 1/2: 2 @min)").is_empty());
        assert_eq!(
            codes("check mix(1/2: 1 @s, 1/2: 2 d@s)"),
            vec![ErrorCode::MixSort]
        );
        assert_eq!(codes("check mix(1: 1 d@s)"), vec![ErrorCode::MixSort]);
    }
}
