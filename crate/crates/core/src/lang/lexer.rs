use super::diagnostic::{Diagnostic, Span};
use crate::error::ErrorCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Family,
    Scale,
    Let,
    Check,
    Assert,
    Mix,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Keyword> {
        Some(match s {
            "family" => Keyword::Family,
            "scale" => Keyword::Scale,
            "let" => Keyword::Let,
            "check" => Keyword::Check,
            "assert" => Keyword::Assert,
            "mix" => Keyword::Mix,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Family => "family",
            Keyword::Scale => "scale",
            Keyword::Let => "let",
            Keyword::Check => "check",
            Keyword::Assert => "assert",
            Keyword::Mix => "mix",
        }
    }

    pub fn starts_statement(self) -> bool {
        self != Keyword::Mix
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// Source text of a numeric literal.
    Number(String),
    Keyword(Keyword),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Assign,
    Cmp(CmpOp),
    /// `@`, introducing a point literal's scale.
    At,
    /// `d@`, introducing a difference literal's scale.
    DiffAt,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Number(s) => format!("number `{s}`"),
            TokenKind::Keyword(k) => format!("keyword `{}`", k.as_str()),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Caret => "^",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Semi => ";",
            TokenKind::Assign => "=",
            TokenKind::Cmp(c) => c.symbol(),
            TokenKind::At => "@",
            TokenKind::DiffAt => "d@",
            _ => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

/// Splits source text into tokens. Unknown characters and malformed numbers
/// become `E_SYNTAX` diagnostics and are skipped.
pub fn tokenize(source: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut i = 0;

    while i < bytes.len() {
        let c = source[i..].chars().next().expect("char boundary");
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let single = |kind| (kind, 1usize);
        let (kind, width) = match c {
            'd' if bytes.get(i + 1) == Some(&b'@') => (TokenKind::DiffAt, 2),
            _ if is_ident_start(c) => {
                let mut j = i;
                while j < bytes.len() && is_ident_continue(bytes[j] as char) {
                    j += 1;
                }
                let text = &source[i..j];
                let kind = match Keyword::from_ident(text) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(text.to_string()),
                };
                (kind, j - i)
            }
            '0'..='9' => {
                let j = scan_number(bytes, i);
                let text = &source[i..j];
                if j < bytes.len() && is_ident_continue(bytes[j] as char) && bytes[j] != b'.' {
                    // e.g. `12abc` or `1e` with no exponent digits
                    let mut k = j;
                    while k < bytes.len() && is_ident_continue(bytes[k] as char) {
                        k += 1;
                    }
                    diags.push(Diagnostic::error(
                        ErrorCode::Syntax,
                        format!("malformed number `{}`", &source[i..k]),
                        Span::new(i, k),
                    ));
                    i = k;
                    continue;
                }
                (TokenKind::Number(text.to_string()), j - i)
            }
            '+' => single(TokenKind::Plus),
            '-' => single(TokenKind::Minus),
            '*' => single(TokenKind::Star),
            '/' => single(TokenKind::Slash),
            '^' => single(TokenKind::Caret),
            '(' => single(TokenKind::LParen),
            ')' => single(TokenKind::RParen),
            ',' => single(TokenKind::Comma),
            ':' => single(TokenKind::Colon),
            ';' => single(TokenKind::Semi),
            '@' => single(TokenKind::At),
            '=' if bytes.get(i + 1) == Some(&b'=') => (TokenKind::Cmp(CmpOp::Eq), 2),
            '=' => single(TokenKind::Assign),
            '!' if bytes.get(i + 1) == Some(&b'=') => (TokenKind::Cmp(CmpOp::Ne), 2),
            '<' if bytes.get(i + 1) == Some(&b'=') => (TokenKind::Cmp(CmpOp::Le), 2),
            '<' => single(TokenKind::Cmp(CmpOp::Lt)),
            '>' if bytes.get(i + 1) == Some(&b'=') => (TokenKind::Cmp(CmpOp::Ge), 2),
            '>' => single(TokenKind::Cmp(CmpOp::Gt)),
            _ => {
                diags.push(Diagnostic::error(
                    ErrorCode::Syntax,
                    format!("unexpected character `{c}`"),
                    Span::new(i, i + c.len_utf8()),
                ));
                i += c.len_utf8();
                continue;
            }
        };
        tokens.push(Token {
            kind,
            span: Span::new(start, start + width),
        });
        i += width;
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span::new(source.len(), source.len()),
    });
    (tokens, diags)
}

// digits ["." digits] [("e"|"E") ["+"|"-"] digits]
fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    let digits = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    i = digits(i);
    if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
        i = digits(i + 1);
    }
    if matches!(bytes.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(bytes.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if bytes.get(j).is_some_and(u8::is_ascii_digit) {
            i = digits(j);
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        let (toks, diags) = tokenize(src);
        assert!(diags.is_empty(), "{diags:?}");
        toks.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn literals_with_units() {
        assert_eq!(
            kinds("20 @C 1 d@C 2.5e-3"),
            vec![
                TokenKind::Number("20".into()),
                TokenKind::At,
                TokenKind::Ident("C".into()),
                TokenKind::Number("1".into()),
                TokenKind::DiffAt,
                TokenKind::Ident("C".into()),
                TokenKind::Number("2.5e-3".into()),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn dotted_identifiers_and_comments() {
        assert_eq!(
            kinds("check x @temperature.ref # trailing\n"),
            vec![
                TokenKind::Keyword(Keyword::Check),
                TokenKind::Ident("x".into()),
                TokenKind::At,
                TokenKind::Ident("temperature.ref".into()),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn comparison_operators() {
        assert_eq!(
            kinds("== != < <= > >= ="),
            vec![
                TokenKind::Cmp(CmpOp::Eq),
                TokenKind::Cmp(CmpOp::Ne),
                TokenKind::Cmp(CmpOp::Lt),
                TokenKind::Cmp(CmpOp::Le),
                TokenKind::Cmp(CmpOp::Gt),
                TokenKind::Cmp(CmpOp::Ge),
                TokenKind::Assign,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn bad_characters_are_reported() {
        let (_, diags) = tokenize("let a = 3 $ 4");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, ErrorCode::Syntax);
        assert_eq!(diags[0].span, Span::new(10, 11));
        let (_, diags) = tokenize("check 12abc");
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn identifier_named_d() {
        assert_eq!(
            kinds("d dx d@K"),
            vec![
                TokenKind::Ident("d".into()),
                TokenKind::Ident("dx".into()),
                TokenKind::DiffAt,
                TokenKind::Ident("K".into()),
                TokenKind::Eof,
            ]
        );
    }
}
