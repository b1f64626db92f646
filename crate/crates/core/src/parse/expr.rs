//! The arithmetic expression language used for lengths and angles.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | 'pi' | 'phi' | ('sqrt'|'sin'|'cos') '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-2^2 = -4` while `2^-2 = 0.25`. Trigonometric arguments are radians.

use super::lexer::{Token, TokenKind};
use super::{ParseError, ParseErrorKind, SourceSpan};

/// Golden ratio, `(1 + sqrt 5) / 2`: the `phi` constant of the language.
pub const PHI: f64 = 1.618033988749894848204586834365638118;

/// Evaluates expression tokens starting at `pos`, consuming greedily.
/// Returns the value and the position of the first token past the
/// expression.
pub fn eval_tokens(tokens: &[Token], pos: usize) -> Result<(f64, usize), ParseError> {
    let mut cursor = Cursor { tokens, pos };
    let value = cursor.expr()?;
    Ok((value, cursor.pos))
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn end_span(&self) -> SourceSpan {
        super::span_after(self.tokens)
    }

    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut value = self.term()?;
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Plus) => {
                    let op = self.tokens[self.pos].span;
                    self.pos += 1;
                    value = finite(value + self.term()?, op)?;
                }
                Some(TokenKind::Minus) => {
                    let op = self.tokens[self.pos].span;
                    self.pos += 1;
                    value = finite(value - self.term()?, op)?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut value = self.factor()?;
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Star) => {
                    let op = self.tokens[self.pos].span;
                    self.pos += 1;
                    value = finite(value * self.factor()?, op)?;
                }
                Some(TokenKind::Slash) => {
                    let op = self.tokens[self.pos].span;
                    self.pos += 1;
                    let divisor = self.factor()?;
                    if divisor == 0.0 {
                        return Err(ParseError {
                            span: op,
                            kind: ParseErrorKind::DivisionByZero,
                            message: "division by zero".into(),
                        });
                    }
                    value = finite(value / divisor, op)?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        if let Some(TokenKind::Minus) = self.peek().map(|t| &t.kind) {
            self.pos += 1;
            return Ok(-self.factor()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<f64, ParseError> {
        let base = self.atom()?;
        if let Some(TokenKind::Caret) = self.peek().map(|t| &t.kind) {
            let op = self.tokens[self.pos].span;
            self.pos += 1;
            let exponent = self.factor()?;
            return finite(base.powf(exponent), op);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, ParseError> {
        let token = match self.peek() {
            Some(t) => t.clone(),
            None => {
                return Err(ParseError {
                    span: self.end_span(),
                    kind: ParseErrorKind::UnexpectedEnd,
                    message: "expected an expression".into(),
                })
            }
        };
        match token.kind {
            TokenKind::Number(value) => {
                self.pos += 1;
                Ok(value)
            }
            TokenKind::LParen => {
                self.pos += 1;
                let value = self.expr()?;
                self.close_paren(token.span)?;
                Ok(value)
            }
            TokenKind::Word(ref word) => match word.as_str() {
                "pi" => {
                    self.pos += 1;
                    Ok(std::f64::consts::PI)
                }
                "phi" => {
                    self.pos += 1;
                    Ok(PHI)
                }
                "sqrt" | "sin" | "cos" => {
                    self.pos += 1;
                    match self.peek().map(|t| &t.kind) {
                        Some(TokenKind::LParen) => self.pos += 1,
                        _ => {
                            return Err(ParseError {
                                span: token.span,
                                kind: ParseErrorKind::UnexpectedToken,
                                message: format!("{word} must be followed by `(`"),
                            })
                        }
                    }
                    let argument = self.expr()?;
                    self.close_paren(token.span)?;
                    let value = match word.as_str() {
                        "sqrt" => {
                            if argument < 0.0 {
                                return Err(ParseError {
                                    span: token.span,
                                    kind: ParseErrorKind::SqrtOfNegative,
                                    message: format!("sqrt of negative value {argument}"),
                                });
                            }
                            argument.sqrt()
                        }
                        "sin" => argument.sin(),
                        _ => argument.cos(),
                    };
                    finite(value, token.span)
                }
                _ => Err(ParseError {
                    span: token.span,
                    kind: ParseErrorKind::UnexpectedToken,
                    message: format!("`{word}` is not a number, constant or function"),
                }),
            },
            _ => Err(ParseError {
                span: token.span,
                kind: ParseErrorKind::UnexpectedToken,
                message: "expected a number, constant, function or `(`".into(),
            }),
        }
    }

    fn close_paren(&mut self, open: SourceSpan) -> Result<(), ParseError> {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::RParen) => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(ParseError {
                span: self.tokens[self.pos].span,
                kind: ParseErrorKind::UnexpectedToken,
                message: "expected `)`".into(),
            }),
            None => Err(ParseError {
                span: open,
                kind: ParseErrorKind::UnexpectedEnd,
                message: "unclosed `(`".into(),
            }),
        }
    }
}

fn finite(value: f64, span: SourceSpan) -> Result<f64, ParseError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ParseError {
            span,
            kind: ParseErrorKind::NonFiniteValue,
            message: "expression overflows double precision".into(),
        })
    }
}
