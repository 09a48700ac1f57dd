//! Pretty-printer. Output reparses to the same tree (spans aside); trees built
//! without explicit [`ExprKind::Paren`] nodes get the parentheses their
//! precedence requires.

use std::fmt::Write as _;

use super::ast::*;
use crate::sort::BinOp;

pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for stmt in &program.statements {
        out.push_str(&print_stmt(stmt));
        out.push('\n');
    }
    out
}

pub fn print_stmt(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Family { name, kind, owner } => {
            let mut s = format!("family {} kind {}", name.name, kind);
            if let Some(o) = owner {
                let _ = write!(s, " owner {}", o.name);
            }
            s
        }
        StmtKind::Scale {
            name,
            family,
            constants,
        } => {
            let mut s = format!("scale {} of {}", name.name, family.name);
            if let Some((offset, factor)) = constants {
                let _ = write!(
                    s,
                    " offset {} factor {}",
                    print_rational(offset),
                    print_rational(factor)
                );
            }
            s
        }
        StmtKind::Let { name, value } => format!("let {} = {}", name.name, print_expr(value)),
        StmtKind::Check(e) => format!("check {}", print_expr(e)),
        StmtKind::Assert { lhs, cmp, rhs, .. } => format!(
            "assert {} {} {}",
            print_expr(lhs),
            cmp.symbol(),
            print_expr(rhs)
        ),
    }
}

pub fn print_rational(r: &Rational) -> String {
    let mut s = String::new();
    if r.negative {
        s.push('-');
    }
    s.push_str(&print_number(r.numerator));
    if let Some(d) = r.denominator {
        s.push('/');
        s.push_str(&print_number(d));
    }
    s
}

fn print_number(x: f64) -> String {
    // Display is shortest round-trip and never uses exponent notation
    format!("{x}")
}

// Binding strength: 0 additive, 1 multiplicative, 2 unary, 3 power, 4 atom.
fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary {
            op: BinOp::Add | BinOp::Sub,
            ..
        } => 0,
        ExprKind::Binary { .. } => 1,
        ExprKind::Neg(_) => 2,
        ExprKind::Number { value, .. } if value.is_sign_negative() => 2,
        ExprKind::Power { .. } => 3,
        _ => 4,
    }
}

fn print_at(e: &Expr, min_level: u8) -> String {
    let s = print_expr(e);
    if level(e) < min_level {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Number { value, unit } => {
            let mut s = print_number(*value);
            if let Some(u) = unit {
                let tag = match u.kind {
                    UnitKind::Point => "@",
                    UnitKind::Difference => "d@",
                };
                let _ = write!(s, " {tag}{}", u.scale.name);
            }
            s
        }
        ExprKind::Name(n) => n.clone(),
        ExprKind::Binary { op, lhs, rhs, .. } => {
            let (l, r) = match op {
                BinOp::Add | BinOp::Sub => (print_at(lhs, 0), print_at(rhs, 1)),
                BinOp::Mul | BinOp::Div => (print_at(lhs, 1), print_at(rhs, 2)),
            };
            format!("{l} {} {r}", op.symbol())
        }
        ExprKind::Neg(inner) => format!("-{}", print_at(inner, 2)),
        ExprKind::Power { base, exponent } => format!("{}^{exponent}", print_at(base, 4)),
        ExprKind::Mix(args) => {
            let parts: Vec<String> = args
                .iter()
                .map(|(w, e)| format!("{}: {}", print_rational(w), print_expr(e)))
                .collect();
            format!("mix({})", parts.join(", "))
        }
        ExprKind::Paren(inner) => format!("({})", print_expr(inner)),
    }
}
