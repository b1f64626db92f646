//! Tokenizer for the `.fcs` format. Tracks 1-based line/column spans and
//! strips `#` comments.

use super::{ParseError, ParseErrorKind, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Word(String),
    Number(f64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();

    while let Some(&c) = chars.peek() {
        let span = SourceSpan { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Word(word),
                    span,
                });
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut literal = String::new();
                let mut seen_dot = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || (c == '.' && !seen_dot) {
                        seen_dot |= c == '.';
                        literal.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let value: f64 = literal.parse().map_err(|_| ParseError {
                    span,
                    kind: ParseErrorKind::InvalidNumber,
                    message: format!("invalid numeric literal `{literal}`"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    span,
                });
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let kind = match c {
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '/' => TokenKind::Slash,
                    '^' => TokenKind::Caret,
                    '(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                chars.next();
                col += 1;
                tokens.push(Token { kind, span });
            }
            other => {
                return Err(ParseError {
                    span,
                    kind: ParseErrorKind::UnexpectedToken,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_are_one_based() {
        let tokens = tokenize("system koch\n  step S").unwrap();
        assert_eq!(tokens[0].span, SourceSpan { line: 1, col: 1 });
        assert_eq!(tokens[1].span, SourceSpan { line: 1, col: 8 });
        assert_eq!(tokens[2].span, SourceSpan { line: 2, col: 3 });
        assert_eq!(tokens[3].span, SourceSpan { line: 2, col: 8 });
    }

    #[test]
    fn comments_are_skipped() {
        let tokens = tokenize("# a comment\nend # trailing\n").unwrap();
        assert_eq!(tokens.len(), 1);
        assert_eq!(tokens[0].kind, TokenKind::Word("end".into()));
    }

    #[test]
    fn numbers_and_operators() {
        let tokens = tokenize("1.5 + .25 ^ 2").unwrap();
        assert_eq!(tokens[0].kind, TokenKind::Number(1.5));
        assert_eq!(tokens[1].kind, TokenKind::Plus);
        assert_eq!(tokens[2].kind, TokenKind::Number(0.25));
        assert_eq!(tokens[3].kind, TokenKind::Caret);
    }

    #[test]
    fn stray_character_is_an_error() {
        let err = tokenize("segment $").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedToken);
        assert_eq!(err.span, SourceSpan { line: 1, col: 9 });
    }
}
