//! Indentation-aware tokenizer for the Python-shaped DSL.

use std::fmt;

use super::ast::Span;
use super::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Name(String),
    Number(f64),
    Str,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Semicolon,
    Plus,
    Minus,
    Star,
    DoubleStar,
    Slash,
    DoubleSlash,
    Percent,
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    /// Comparison or other operator outside the subset (`<`, `==`, `@`, ...).
    Other(String),
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Name(n) => return write!(f, "`{n}`"),
            TokenKind::Number(v) => return write!(f, "number {v}"),
            TokenKind::Str => "string literal",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::Comma => "`,`",
            TokenKind::Colon => "`:`",
            TokenKind::Dot => "`.`",
            TokenKind::Semicolon => "`;`",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::DoubleStar => "`**`",
            TokenKind::Slash => "`/`",
            TokenKind::DoubleSlash => "`//`",
            TokenKind::Percent => "`%`",
            TokenKind::Assign => "`=`",
            TokenKind::PlusAssign => "`+=`",
            TokenKind::MinusAssign => "`-=`",
            TokenKind::StarAssign => "`*=`",
            TokenKind::SlashAssign => "`/=`",
            TokenKind::Other(op) => return write!(f, "`{op}`"),
            TokenKind::Newline => "end of line",
            TokenKind::Indent => "indent",
            TokenKind::Dedent => "dedent",
            TokenKind::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut indents: Vec<usize> = vec![0];
    let mut depth = 0usize;

    for (line_idx, raw_line) in source.lines().enumerate() {
        let line_no = line_idx as u32 + 1;
        let chars: Vec<char> = raw_line.chars().collect();

        if depth == 0 {
            let mut width = 0usize;
            let mut first = None;
            for (i, c) in chars.iter().enumerate() {
                match c {
                    ' ' => width += 1,
                    '\t' => width += 8 - width % 8,
                    _ => {
                        first = Some(i);
                        break;
                    }
                }
            }
            // Blank and comment-only lines carry no indentation meaning.
            let Some(first) = first else { continue };
            if chars[first] == '#' {
                continue;
            }
            let span = Span::new(line_no, first as u32 + 1);
            let current = *indents.last().unwrap_or(&0);
            if width > current {
                indents.push(width);
                tokens.push(Token { kind: TokenKind::Indent, span });
            } else {
                while width < *indents.last().unwrap_or(&0) {
                    indents.pop();
                    tokens.push(Token { kind: TokenKind::Dedent, span });
                }
                if width != *indents.last().unwrap_or(&0) {
                    return Err(ParseError::syntax(span, ["consistent indentation"], "dedent"));
                }
            }
        }

        let mut i = 0usize;
        let mut emitted = false;
        while i < chars.len() {
            let c = chars[i];
            let span = Span::new(line_no, i as u32 + 1);
            if c == ' ' || c == '\t' || c == '\r' {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            if c == '\\' && i + 1 == chars.len() {
                // explicit line continuation
                i += 1;
                continue;
            }
            emitted = true;
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '_') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let save = i;
                    i += 1;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        i += 1;
                    }
                    if i < chars.len() && chars[i].is_ascii_digit() {
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        i = save;
                    }
                }
                let text: String = chars[start..i].iter().filter(|c| **c != '_').collect();
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::syntax(span, ["number"], &text))?;
                tokens.push(Token { kind: TokenKind::Number(value), span });
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                tokens.push(Token { kind: TokenKind::Name(name), span });
                continue;
            }
            if c == '"' || c == '\'' {
                // Strings only appear in unsupported constructs; consume for a clean diagnostic.
                let quote = c;
                i += 1;
                while i < chars.len() && chars[i] != quote {
                    if chars[i] == '\\' {
                        i += 1;
                    }
                    i += 1;
                }
                i += 1;
                tokens.push(Token { kind: TokenKind::Str, span });
                continue;
            }
            let next = chars.get(i + 1).copied();
            let (kind, width) = match (c, next) {
                ('*', Some('*')) => (TokenKind::DoubleStar, 2),
                ('/', Some('/')) => (TokenKind::DoubleSlash, 2),
                ('+', Some('=')) => (TokenKind::PlusAssign, 2),
                ('-', Some('=')) => (TokenKind::MinusAssign, 2),
                ('*', Some('=')) => (TokenKind::StarAssign, 2),
                ('/', Some('=')) => (TokenKind::SlashAssign, 2),
                ('=', Some('=')) | ('!', Some('=')) | ('<', Some('=')) | ('>', Some('=')) | ('-', Some('>')) => {
                    (TokenKind::Other(format!("{c}{}", next.unwrap_or_default())), 2)
                }
                ('(', _) => (TokenKind::LParen, 1),
                (')', _) => (TokenKind::RParen, 1),
                ('[', _) => (TokenKind::LBracket, 1),
                (']', _) => (TokenKind::RBracket, 1),
                ('{', _) => (TokenKind::LBrace, 1),
                ('}', _) => (TokenKind::RBrace, 1),
                (',', _) => (TokenKind::Comma, 1),
                (':', _) => (TokenKind::Colon, 1),
                ('.', _) => (TokenKind::Dot, 1),
                (';', _) => (TokenKind::Semicolon, 1),
                ('+', _) => (TokenKind::Plus, 1),
                ('-', _) => (TokenKind::Minus, 1),
                ('*', _) => (TokenKind::Star, 1),
                ('/', _) => (TokenKind::Slash, 1),
                ('%', _) => (TokenKind::Percent, 1),
                ('=', _) => (TokenKind::Assign, 1),
                (other, _) => (TokenKind::Other(other.to_string()), 1),
            };
            match kind {
                TokenKind::LParen | TokenKind::LBracket | TokenKind::LBrace => depth += 1,
                TokenKind::RParen | TokenKind::RBracket | TokenKind::RBrace => depth = depth.saturating_sub(1),
                _ => {}
            }
            tokens.push(Token { kind, span });
            i += width;
        }
        let continued = raw_line.trim_end().ends_with('\\');
        if emitted && depth == 0 && !continued {
            tokens.push(Token {
                kind: TokenKind::Newline,
                span: Span::new(line_no, chars.len() as u32 + 1),
            });
        }
    }

    let end_line = source.lines().count() as u32 + 1;
    let eof_span = Span::new(end_line, 1);
    if depth > 0 {
        return Err(ParseError::syntax(eof_span, ["closing bracket"], "end of input"));
    }
    if tokens.last().is_some_and(|t| t.kind != TokenKind::Newline) {
        tokens.push(Token { kind: TokenKind::Newline, span: eof_span });
    }
    while indents.len() > 1 {
        indents.pop();
        tokens.push(Token { kind: TokenKind::Dedent, span: eof_span });
    }
    tokens.push(Token { kind: TokenKind::Eof, span: eof_span });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn indentation_produces_indent_dedent_pairs() {
        let k = kinds("for i in range(2):\n    aw.land()\naw.takeoff()\n");
        assert_eq!(k.iter().filter(|t| **t == TokenKind::Indent).count(), 1);
        assert_eq!(k.iter().filter(|t| **t == TokenKind::Dedent).count(), 1);
    }

    #[test]
    fn brackets_suppress_newlines() {
        let k = kinds("aw.fly_to([1,\n  2,\n  3])\n");
        assert_eq!(k.iter().filter(|t| **t == TokenKind::Newline).count(), 1);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let k = kinds("# header\n\n   # indented comment\naw.takeoff()  # trailing\n");
        assert_eq!(k[0], TokenKind::Name("aw".into()));
        assert!(!k.contains(&TokenKind::Indent));
    }

    #[test]
    fn numbers_with_exponent_and_fraction() {
        let k = kinds("x = 1.5e1 + .5\n");
        assert!(k.contains(&TokenKind::Number(15.0)));
        assert!(k.contains(&TokenKind::Number(0.5)));
    }

    #[test]
    fn inconsistent_dedent_is_rejected() {
        let err = tokenize("for i in range(2):\n    pass\n  pass\n").unwrap_err();
        assert_eq!(err.span().line, 3);
    }

    #[test]
    fn unclosed_bracket_is_rejected() {
        assert!(tokenize("aw.fly_to([1, 2, 3)\n").is_err());
    }
}
