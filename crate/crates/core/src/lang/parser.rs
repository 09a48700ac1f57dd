//! Recursive-descent parser for `.msr` programs.
//!
//! ```text
//! program     := { statement [";"] }
//! statement   := family_decl | scale_decl | let | check | assert
//! family_decl := "family" IDENT "kind" ("affine"|"linear"|"absolute") ["owner" IDENT]
//! scale_decl  := "scale" IDENT "of" IDENT ["offset" snum "factor" snum]
//! let         := "let" IDENT "=" expr
//! check       := "check" expr
//! assert      := "assert" expr CMP expr
//! expr        := term {("+"|"-") term}
//! term        := unary {("*"|"/") unary}
//! unary       := "-" unary | factor      (a minus before a unit literal
//!                                        without "^" signs the reading)
//! factor      := base ["^" ["-"] INT]
//! base        := NUMBER [("@"|"d@") IDENT] | IDENT | "(" expr ")"
//!              | "mix" "(" snum ":" expr {"," snum ":" expr} ")"
//! snum        := ["-"] NUMBER ["/" NUMBER]
//! ```
//!
//! Errors recover at the next statement keyword, so one pass reports every
//! syntax error.

use super::ast::*;
use super::diagnostic::{sort_diagnostics, Diagnostic, Span};
use super::lexer::{tokenize, CmpOp, Keyword, Token, TokenKind};
use crate::error::ErrorCode;
use crate::registry::FamilyKind;
use crate::sort::BinOp;

type PResult<T> = Result<T, Diagnostic>;

pub fn parse_program(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let (tokens, mut diags) = tokenize(source);
    let mut parser = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
        lex_errors: diags.iter().map(|d| d.span.start).collect(),
    };
    let program = parser.program();
    diags.append(&mut parser.diags);
    if diags.is_empty() {
        Ok(program)
    } else {
        sort_diagnostics(&mut diags);
        Err(diags)
    }
}

/// Parses a single expression (used by tests and the oracle tooling).
pub fn parse_expr(source: &str) -> Result<Expr, Vec<Diagnostic>> {
    let (tokens, mut diags) = tokenize(source);
    let mut parser = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
        lex_errors: Vec::new(),
    };
    let result = parser.expr().and_then(|e| {
        if parser.at_eof() {
            Ok(e)
        } else {
            Err(parser.unexpected("end of expression"))
        }
    });
    match result {
        Ok(e) if diags.is_empty() => Ok(e),
        Ok(_) => Err(diags),
        Err(d) => {
            diags.push(d);
            sort_diagnostics(&mut diags);
            Err(diags)
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    /// Offsets of characters the lexer rejected; a statement holding one
    /// reports only that, not the parse errors it causes.
    lex_errors: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            self.span()
        } else {
            self.tokens[self.pos - 1].span
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), TokenKind::Eof)
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if !self.at_eof() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: &TokenKind) -> Option<Span> {
        if self.peek() == kind {
            Some(self.bump().span)
        } else {
            None
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        // at end of input, point at the last real token
        let span = if self.at_eof() {
            self.prev_span()
        } else {
            self.span()
        };
        Diagnostic::error(
            ErrorCode::Syntax,
            format!("expected {expected}, found {}", self.peek().describe()),
            span,
        )
    }

    fn expect(&mut self, kind: &TokenKind, expected: &str) -> PResult<Span> {
        self.eat(kind).ok_or_else(|| self.unexpected(expected))
    }

    fn ident(&mut self, expected: &str) -> PResult<Ident> {
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    fn contextual(&mut self, word: &str) -> PResult<Span> {
        match self.peek() {
            TokenKind::Ident(s) if s == word => Ok(self.bump().span),
            _ => Err(self.unexpected(&format!("`{word}`"))),
        }
    }

    fn at_contextual(&self, word: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == word)
    }

    fn at_statement_start(&self) -> bool {
        matches!(self.peek(), TokenKind::Keyword(k) if k.starts_statement())
    }

    fn synchronize(&mut self) {
        // always make progress past the offending token
        if !self.at_eof() && !self.at_statement_start() {
            self.bump();
        }
        while !self.at_eof() && !self.at_statement_start() {
            if self.eat(&TokenKind::Semi).is_some() {
                return;
            }
            self.bump();
        }
    }

    fn program(&mut self) -> Program {
        let mut statements = Vec::new();
        while !self.at_eof() {
            if self.eat(&TokenKind::Semi).is_some() {
                continue;
            }
            let start = self.span().start;
            match self.statement() {
                Ok(stmt) => {
                    statements.push(stmt);
                    if !(self.at_eof()
                        || self.at_statement_start()
                        || self.eat(&TokenKind::Semi).is_some())
                    {
                        let d = self.unexpected("end of statement");
                        self.report(start, d);
                        self.synchronize();
                    }
                }
                Err(d) => {
                    self.report(start, d);
                    self.synchronize();
                }
            }
        }
        Program { statements }
    }

    fn report(&mut self, stmt_start: usize, d: Diagnostic) {
        let caused_by_lexer = self
            .lex_errors
            .iter()
            .any(|&at| at >= stmt_start && at <= d.span.end);
        if !caused_by_lexer {
            self.diags.push(d);
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek() {
            TokenKind::Keyword(Keyword::Family) => {
                self.bump();
                let name = self.ident("family name")?;
                self.contextual("kind")?;
                let kind = match self.peek() {
                    TokenKind::Ident(s) => match s.parse::<FamilyKind>() {
                        Ok(k) => {
                            self.bump();
                            k
                        }
                        Err(_) => return Err(self.unexpected("`affine`, `linear` or `absolute`")),
                    },
                    _ => return Err(self.unexpected("`affine`, `linear` or `absolute`")),
                };
                let owner = if self.at_contextual("owner") {
                    self.bump();
                    Some(self.ident("owner name")?)
                } else {
                    None
                };
                StmtKind::Family { name, kind, owner }
            }
            TokenKind::Keyword(Keyword::Scale) => {
                self.bump();
                let name = self.ident("scale name")?;
                self.contextual("of")?;
                let family = self.ident("family name")?;
                let constants = if self.at_contextual("offset") {
                    self.bump();
                    let offset = self.snum()?;
                    self.contextual("factor")?;
                    let factor = self.snum()?;
                    Some((offset, factor))
                } else {
                    None
                };
                StmtKind::Scale {
                    name,
                    family,
                    constants,
                }
            }
            TokenKind::Keyword(Keyword::Let) => {
                self.bump();
                let name = self.ident("binding name")?;
                let eq = self.expect(&TokenKind::Assign, "`=`")?;
                let value = self.operand(eq, "=")?;
                StmtKind::Let { name, value }
            }
            TokenKind::Keyword(Keyword::Check) => {
                let kw = self.bump().span;
                StmtKind::Check(self.operand(kw, "check")?)
            }
            TokenKind::Keyword(Keyword::Assert) => {
                let kw = self.bump().span;
                let lhs = self.operand(kw, "assert")?;
                let (cmp, cmp_span) = match self.peek() {
                    TokenKind::Cmp(c) => {
                        let c: CmpOp = *c;
                        (c, self.bump().span)
                    }
                    _ => return Err(self.unexpected("comparison operator")),
                };
                let rhs = self.operand(cmp_span, cmp.symbol())?;
                StmtKind::Assert {
                    lhs,
                    cmp,
                    cmp_span,
                    rhs,
                }
            }
            _ => return Err(self.unexpected("statement")),
        };
        Ok(Stmt {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    /// An expression that must follow the token at `after`; a missing operand
    /// is reported at that token.
    fn operand(&mut self, after: Span, what: &str) -> PResult<Expr> {
        if self.starts_expr() {
            self.expr()
        } else {
            Err(Diagnostic::error(
                ErrorCode::Syntax,
                format!(
                    "expected expression after `{what}`, found {}",
                    self.peek().describe()
                ),
                after,
            ))
        }
    }

    fn starts_expr(&self) -> bool {
        matches!(
            self.peek(),
            TokenKind::Number(_)
                | TokenKind::Ident(_)
                | TokenKind::LParen
                | TokenKind::Minus
                | TokenKind::Keyword(Keyword::Mix)
        )
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let op_span = self.bump().span;
            let rhs = if self.starts_expr() {
                self.term()?
            } else {
                return Err(self.missing_operand(op, op_span));
            };
            lhs = binary(op, op_span, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let op_span = self.bump().span;
            let rhs = if self.starts_expr() {
                self.unary()?
            } else {
                return Err(self.missing_operand(op, op_span));
            };
            lhs = binary(op, op_span, lhs, rhs);
        }
    }

    fn missing_operand(&self, op: BinOp, op_span: Span) -> Diagnostic {
        Diagnostic::error(
            ErrorCode::Syntax,
            format!(
                "expected operand after `{}`, found {}",
                op.symbol(),
                self.peek().describe()
            ),
            op_span,
        )
    }

    fn unary(&mut self) -> PResult<Expr> {
        if let Some(minus) = self.eat(&TokenKind::Minus) {
            let inner = if self.starts_expr() {
                self.unary()?
            } else {
                return Err(Diagnostic::error(
                    ErrorCode::Syntax,
                    format!(
                        "expected operand after `-`, found {}",
                        self.peek().describe()
                    ),
                    minus,
                ));
            };
            let span = minus.to(inner.span);
            // the sign of a unit literal is part of the reading: `-40 @F` is a point
            if let ExprKind::Number {
                value,
                unit: unit @ Some(_),
            } = inner.kind
            {
                return Ok(Expr {
                    kind: ExprKind::Number {
                        value: -value,
                        unit,
                    },
                    span,
                });
            }
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.factor()
    }

    fn factor(&mut self) -> PResult<Expr> {
        let base = self.base()?;
        if self.eat(&TokenKind::Caret).is_none() {
            return Ok(base);
        }
        let negative = self.eat(&TokenKind::Minus).is_some();
        let (text, span) = match self.peek().clone() {
            TokenKind::Number(t) => (t, self.bump().span),
            _ => return Err(self.unexpected("integer exponent")),
        };
        let magnitude: i32 = text.parse().map_err(|_| {
            Diagnostic::error(
                ErrorCode::Syntax,
                format!("exponent `{text}` is not an integer literal"),
                span,
            )
        })?;
        Ok(Expr {
            span: base.span.to(span),
            kind: ExprKind::Power {
                base: Box::new(base),
                exponent: if negative { -magnitude } else { magnitude },
            },
        })
    }

    fn number(&mut self) -> PResult<(f64, Span)> {
        match self.peek().clone() {
            TokenKind::Number(text) => {
                let span = self.bump().span;
                let value = text.parse::<f64>().map_err(|_| {
                    Diagnostic::error(ErrorCode::Syntax, format!("bad number `{text}`"), span)
                })?;
                if !value.is_finite() {
                    return Err(Diagnostic::error(
                        ErrorCode::Syntax,
                        format!("number `{text}` is out of range"),
                        span,
                    ));
                }
                Ok((value, span))
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn snum(&mut self) -> PResult<Rational> {
        let negative = self.eat(&TokenKind::Minus).is_some();
        let (numerator, _) = self.number()?;
        let denominator = if self.eat(&TokenKind::Slash).is_some() {
            Some(self.number()?.0)
        } else {
            None
        };
        Ok(Rational {
            negative,
            numerator,
            denominator,
        })
    }

    fn base(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            TokenKind::Number(_) => {
                let (value, span) = self.number()?;
                let unit_kind = match self.peek() {
                    TokenKind::At => Some(UnitKind::Point),
                    TokenKind::DiffAt => Some(UnitKind::Difference),
                    _ => None,
                };
                let unit = match unit_kind {
                    Some(kind) => {
                        self.bump();
                        let scale = self.ident("scale name")?;
                        Some(Unit { kind, scale })
                    }
                    None => None,
                };
                Ok(Expr {
                    kind: ExprKind::Number { value, unit },
                    span: span.to(self.prev_span()),
                })
            }
            TokenKind::Ident(name) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Name(name),
                    span: start,
                })
            }
            TokenKind::LParen => {
                let open = self.bump().span;
                let inner = self.operand(open, "(")?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(Expr {
                    kind: ExprKind::Paren(Box::new(inner)),
                    span: start.to(self.prev_span()),
                })
            }
            TokenKind::Keyword(Keyword::Mix) => {
                self.bump();
                self.expect(&TokenKind::LParen, "`(` after `mix`")?;
                let mut args = Vec::new();
                loop {
                    let weight = self.snum()?;
                    let colon = self.expect(&TokenKind::Colon, "`:` after mix weight")?;
                    let arg = self.operand(colon, ":")?;
                    args.push((weight, arg));
                    if self.eat(&TokenKind::Comma).is_none() {
                        break;
                    }
                }
                self.expect(&TokenKind::RParen, "`,` or `)`")?;
                Ok(Expr {
                    kind: ExprKind::Mix(args),
                    span: start.to(self.prev_span()),
                })
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

fn binary(op: BinOp, op_span: Span, lhs: Expr, rhs: Expr) -> Expr {
    let span = lhs.span.to(rhs.span);
    Expr {
        kind: ExprKind::Binary {
            op,
            op_span,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        },
        span,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::diagnostic::SourceMap;

    fn parse_ok(src: &str) -> Program {
        parse_program(src).unwrap_or_else(|d| panic!("{src}: {d:?}"))
    }

    #[test]
    fn let_point_literal() {
        let p = parse_ok("let t1 = 20 @C");
        let StmtKind::Let { name, value } = &p.statements[0].kind else {
            panic!()
        };
        assert_eq!(name.name, "t1");
        let ExprKind::Number {
            value,
            unit: Some(u),
        } = &value.kind
        else {
            panic!()
        };
        assert_eq!(*value, 20.0);
        assert_eq!((u.kind, u.scale.name.as_str()), (UnitKind::Point, "C"));
    }

    #[test]
    fn ratio_of_differences_parses() {
        let p = parse_ok("check (t2 - t1) / (1 d@C)");
        let StmtKind::Check(e) = &p.statements[0].kind else {
            panic!()
        };
        assert!(matches!(e.kind, ExprKind::Binary { op: BinOp::Div, .. }));
    }

    #[test]
    fn dangling_operator_reports_at_operator() {
        let src = "let x = 2 +";
        let diags = parse_program(src).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, ErrorCode::Syntax);
        let loc = SourceMap::new(src).locate(diags[0].span);
        assert_eq!((loc.line, loc.col), (1, 10));
    }

    #[test]
    fn recovers_and_reports_every_error() {
        let src = "let a = 2 +\nlet b = 3\ncheck * b\nfamily x kind weird\ncheck b";
        let diags = parse_program(src).unwrap_err();
        assert_eq!(diags.len(), 3, "{diags:?}");
        let lines: Vec<usize> = diags
            .iter()
            .map(|d| SourceMap::new(src).locate(d.span).line)
            .collect();
        assert_eq!(lines, vec![1, 3, 4]);
    }

    #[test]
    fn declarations() {
        let p = parse_ok(
            "family temperature kind affine owner alice\nscale F of temperature offset -160/9 factor 5/9\nscale C of temperature",
        );
        let StmtKind::Family { kind, owner, .. } = &p.statements[0].kind else {
            panic!()
        };
        assert_eq!(*kind, FamilyKind::Affine);
        assert_eq!(owner.as_ref().unwrap().name, "alice");
        let StmtKind::Scale {
            constants: Some((off, fac)),
            ..
        } = &p.statements[1].kind
        else {
            panic!()
        };
        assert_eq!(off.value(), -160.0 / 9.0);
        assert_eq!(fac.value(), 5.0 / 9.0);
        assert!(matches!(
            p.statements[2].kind,
            StmtKind::Scale {
                constants: None,
                ..
            }
        ));
    }

    #[test]
    fn precedence_and_powers() {
        let e = parse_expr("-a^2 * b + c").unwrap();
        let ExprKind::Binary {
            op: BinOp::Add,
            lhs,
            ..
        } = &e.kind
        else {
            panic!()
        };
        let ExprKind::Binary {
            op: BinOp::Mul,
            lhs: neg,
            ..
        } = &lhs.kind
        else {
            panic!()
        };
        let ExprKind::Neg(pow) = &neg.kind else {
            panic!()
        };
        assert!(matches!(pow.kind, ExprKind::Power { exponent: 2, .. }));
        assert!(matches!(
            parse_expr("x^-3").unwrap().kind,
            ExprKind::Power { exponent: -3, .. }
        ));
        assert!(parse_expr("x^2.5").is_err());
        assert!(parse_expr("x^2^3").is_err());
    }

    #[test]
    fn mix_arguments() {
        let e = parse_expr("mix(1/3: a, 1/3: b, 1/3: 20 @C)").unwrap();
        let ExprKind::Mix(args) = &e.kind else {
            panic!()
        };
        assert_eq!(args.len(), 3);
        assert!(parse_expr("mix()").is_err());
        assert!(parse_expr("mix(0.5 a)").is_err());
    }

    #[test]
    fn semicolons_separate_statements() {
        let p = parse_ok("let a=20 @C; let b=68 @F; check b-a");
        assert_eq!(p.statements.len(), 3);
        assert!(parse_program("check 1 2").is_err());
    }

    #[test]
    fn assert_needs_comparison() {
        let d = parse_program("assert 1 + 1").unwrap_err();
        assert_eq!(d[0].code, ErrorCode::Syntax);
        parse_ok("assert 1 + 1 == 2");
        parse_ok("assert t1 <= t2");
    }
}
