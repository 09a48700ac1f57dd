use super::diagnostic::Span;
use super::lexer::CmpOp;
use crate::registry::FamilyKind;
use crate::sort::BinOp;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub statements: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Family {
        name: Ident,
        kind: FamilyKind,
        owner: Option<Ident>,
    },
    Scale {
        name: Ident,
        family: Ident,
        /// `(offset, factor)`; absent for a reference-scale alias.
        constants: Option<(Rational, Rational)>,
    },
    Let {
        name: Ident,
        value: Expr,
    },
    Check(Expr),
    Assert {
        lhs: Expr,
        cmp: CmpOp,
        cmp_span: Span,
        rhs: Expr,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

/// `["-"] NUMBER ["/" NUMBER]`, kept in source form so it prints back
/// unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rational {
    pub negative: bool,
    pub numerator: f64,
    pub denominator: Option<f64>,
}

impl Rational {
    pub fn value(&self) -> f64 {
        let v = match self.denominator {
            Some(d) => self.numerator / d,
            None => self.numerator,
        };
        if self.negative {
            -v
        } else {
            v
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitKind {
    /// `@S`: a point reading on scale S.
    Point,
    /// `d@S`: a difference reading on scale S.
    Difference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unit {
    pub kind: UnitKind,
    pub scale: Ident,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Number {
        value: f64,
        unit: Option<Unit>,
    },
    Name(String),
    Binary {
        op: BinOp,
        op_span: Span,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Neg(Box<Expr>),
    Power {
        base: Box<Expr>,
        exponent: i32,
    },
    Mix(Vec<(Rational, Expr)>),
    Paren(Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Expr {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn number(value: f64) -> Expr {
        Expr::new(ExprKind::Number { value, unit: None })
    }

    pub fn literal(value: f64, kind: UnitKind, scale: &str) -> Expr {
        Expr::new(ExprKind::Number {
            value,
            unit: Some(Unit {
                kind,
                scale: Ident::unspanned(scale),
            }),
        })
    }

    pub fn name(name: &str) -> Expr {
        Expr::new(ExprKind::Name(name.to_string()))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::new(ExprKind::Binary {
            op,
            op_span: Span::default(),
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    pub fn negation(inner: Expr) -> Expr {
        Expr::new(ExprKind::Neg(Box::new(inner)))
    }

    pub fn power(base: Expr, exponent: i32) -> Expr {
        Expr::new(ExprKind::Power {
            base: Box::new(base),
            exponent,
        })
    }

    pub fn paren(inner: Expr) -> Expr {
        Expr::new(ExprKind::Paren(Box::new(inner)))
    }

    pub fn mix(args: Vec<(Rational, Expr)>) -> Expr {
        Expr::new(ExprKind::Mix(args))
    }

    /// Height of the tree, leaves at depth 0; parentheses do not count.
    pub fn depth(&self) -> usize {
        match &self.kind {
            ExprKind::Number { .. } | ExprKind::Name(_) => 0,
            ExprKind::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
            ExprKind::Neg(e) | ExprKind::Power { base: e, .. } => 1 + e.depth(),
            ExprKind::Paren(e) => e.depth(),
            ExprKind::Mix(args) => 1 + args.iter().map(|(_, e)| e.depth()).max().unwrap_or(0),
        }
    }

    pub fn erase_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            ExprKind::Number { unit, .. } => {
                if let Some(u) = unit {
                    u.scale.span = Span::default();
                }
            }
            ExprKind::Name(_) => {}
            ExprKind::Binary {
                op_span, lhs, rhs, ..
            } => {
                *op_span = Span::default();
                lhs.erase_spans();
                rhs.erase_spans();
            }
            ExprKind::Neg(e) | ExprKind::Paren(e) | ExprKind::Power { base: e, .. } => {
                e.erase_spans()
            }
            ExprKind::Mix(args) => args.iter_mut().for_each(|(_, e)| e.erase_spans()),
        }
    }

    /// Names referenced anywhere in the expression, in first-use order.
    pub fn free_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.kind {
            ExprKind::Name(n) => {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
            ExprKind::Number { .. } => {}
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.collect_names(out);
                rhs.collect_names(out);
            }
            ExprKind::Neg(e) | ExprKind::Paren(e) | ExprKind::Power { base: e, .. } => {
                e.collect_names(out)
            }
            ExprKind::Mix(args) => args.iter().for_each(|(_, e)| e.collect_names(out)),
        }
    }
}

impl Ident {
    pub fn unspanned(name: &str) -> Ident {
        Ident {
            name: name.to_string(),
            span: Span::default(),
        }
    }
}

impl Stmt {
    pub fn erase_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            StmtKind::Family { name, owner, .. } => {
                name.span = Span::default();
                if let Some(o) = owner {
                    o.span = Span::default();
                }
            }
            StmtKind::Scale { name, family, .. } => {
                name.span = Span::default();
                family.span = Span::default();
            }
            StmtKind::Let { name, value } => {
                name.span = Span::default();
                value.erase_spans();
            }
            StmtKind::Check(e) => e.erase_spans(),
            StmtKind::Assert {
                lhs, cmp_span, rhs, ..
            } => {
                *cmp_span = Span::default();
                lhs.erase_spans();
                rhs.erase_spans();
            }
        }
    }
}

impl Program {
    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Program {
        let mut p = self.clone();
        p.statements.iter_mut().for_each(Stmt::erase_spans);
        p
    }
}
