//! Text format for curve systems (`.fcs`) and its expression language.
//!
//! ```text
//! document  = header { segment } { generator } initiator
//! header    = "system" NAME [ "angle_unit" ("degrees" | "radians") ]
//! segment   = "segment" NAME "length" EXPR
//! generator = "generator" NAME [ "scale" EXPR ] { step } "end"
//! step      = "step" NAME "angle" EXPR [ "reversed" ] [ "mirrored" ]
//! initiator = "initiator" NAME
//! ```
//!
//! `#` starts a comment running to end of line. The default angle unit is
//! degrees. A declared `scale` is redundant — scales are always derived
//! from the chain geometry — but is checked against the derived value and
//! rejected on mismatch. Keywords are reserved and cannot name segments.
//!
//! [`parse_system`] validates the parsed system at the default closure
//! tolerance, so a successful parse always yields a usable system.

pub(crate) mod expr;
mod lexer;

pub use expr::PHI;

use crate::model::{
    FindingCode, FractalSystem, Generator, GeneratorStep, Location, ModelError, SegmentType,
    Severity, DEFAULT_CLOSURE_TOLERANCE,
};
use lexer::{Token, TokenKind};
use std::fmt;
use thiserror::Error;

/// 1-based position of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken,
    UnexpectedEnd,
    InvalidNumber,
    ReservedName,
    UnknownSegment,
    DuplicateSegment,
    DuplicateGenerator,
    MissingSegment,
    MissingGenerator,
    MissingInitiator,
    EmptyGenerator,
    DivisionByZero,
    SqrtOfNegative,
    NonFiniteValue,
    ScaleMismatch,
    Validation(FindingCode),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedToken => f.write_str("unexpected-token"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected-end"),
            ParseErrorKind::InvalidNumber => f.write_str("invalid-number"),
            ParseErrorKind::ReservedName => f.write_str("reserved-name"),
            ParseErrorKind::UnknownSegment => f.write_str("unknown-segment"),
            ParseErrorKind::DuplicateSegment => f.write_str("duplicate-segment"),
            ParseErrorKind::DuplicateGenerator => f.write_str("duplicate-generator"),
            ParseErrorKind::MissingSegment => f.write_str("missing-segment"),
            ParseErrorKind::MissingGenerator => f.write_str("missing-generator"),
            ParseErrorKind::MissingInitiator => f.write_str("missing-initiator"),
            ParseErrorKind::EmptyGenerator => f.write_str("empty-generator"),
            ParseErrorKind::DivisionByZero => f.write_str("division-by-zero"),
            ParseErrorKind::SqrtOfNegative => f.write_str("sqrt-of-negative"),
            ParseErrorKind::NonFiniteValue => f.write_str("non-finite-value"),
            ParseErrorKind::ScaleMismatch => f.write_str("scale-mismatch"),
            ParseErrorKind::Validation(code) => write!(f, "{code}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {message} ({kind})")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub message: String,
}

/// Source locations of the parsed constructs, for mapping validation
/// findings back onto the document.
#[derive(Debug, Clone)]
pub struct SystemSpans {
    pub system: SourceSpan,
    pub types: Vec<SourceSpan>,
    /// Indexed by type, like the generators themselves.
    pub generators: Vec<SourceSpan>,
    pub initiator: SourceSpan,
}

impl SystemSpans {
    /// Best span for a validation finding location.
    pub fn for_location(&self, location: Location) -> SourceSpan {
        match location {
            Location::System => self.system,
            Location::Type(i) => *self.types.get(i).unwrap_or(&self.system),
            Location::Generator(i) | Location::Step { generator: i, .. } => {
                *self.generators.get(i).unwrap_or(&self.system)
            }
        }
    }
}

/// A syntactically and semantically well-formed system plus its spans.
/// Geometric validation has *not* run yet.
#[derive(Debug, Clone)]
pub struct ParsedSystem {
    pub system: FractalSystem,
    pub spans: SystemSpans,
    /// Declared `scale` values to check against the derived ones.
    declared_scales: Vec<(usize, f64, SourceSpan)>,
}

const KEYWORDS: [&str; 14] = [
    "system",
    "angle_unit",
    "degrees",
    "radians",
    "segment",
    "length",
    "generator",
    "scale",
    "step",
    "angle",
    "reversed",
    "mirrored",
    "end",
    "initiator",
];

fn span_after(tokens: &[Token]) -> SourceSpan {
    match tokens.last() {
        Some(t) => {
            let width = match &t.kind {
                TokenKind::Word(w) => w.len(),
                TokenKind::Number(n) => format!("{n}").len(),
                _ => 1,
            };
            SourceSpan {
                line: t.span.line,
                col: t.span.col + width,
            }
        }
        None => SourceSpan { line: 1, col: 1 },
    }
}

/// Evaluates a standalone expression string.
pub fn eval_expr(text: &str) -> Result<f64, ParseError> {
    let tokens = lexer::tokenize(text)?;
    let (value, next) = expr::eval_tokens(&tokens, 0)?;
    if next != tokens.len() {
        return Err(ParseError {
            span: tokens[next].span,
            kind: ParseErrorKind::UnexpectedToken,
            message: "trailing input after expression".into(),
        });
    }
    Ok(value)
}

/// Parses a document and validates the result at the default tolerance.
pub fn parse_system(text: &str) -> Result<FractalSystem, ParseError> {
    parse_system_with_tolerance(text, DEFAULT_CLOSURE_TOLERANCE)
}

/// Parses and validates at an explicit closure tolerance.
pub fn parse_system_with_tolerance(
    text: &str,
    tolerance: f64,
) -> Result<FractalSystem, ParseError> {
    let parsed = parse_document(text)?;
    parsed.ensure_valid(tolerance)?;
    Ok(parsed.system)
}

impl ParsedSystem {
    /// Runs geometric validation and the declared-scale check, converting
    /// the first error finding into a [`ParseError`] at its source span.
    pub fn ensure_valid(&self, tolerance: f64) -> Result<(), ParseError> {
        let report = self.system.validate(tolerance);
        if let Some(finding) = report
            .findings
            .iter()
            .find(|f| f.severity == Severity::Error)
        {
            return Err(ParseError {
                span: self.spans.for_location(finding.location),
                kind: ParseErrorKind::Validation(finding.code),
                message: finding.message.clone(),
            });
        }
        self.check_declared_scales()
    }

    /// Compares `scale` declarations against the derived values. Only
    /// meaningful once validation has passed.
    pub fn check_declared_scales(&self) -> Result<(), ParseError> {
        for &(type_index, declared, span) in &self.declared_scales {
            let derived = self.system.generators[type_index]
                .derive_scale(&self.system)
                .map_err(|e| {
                    let code = match e {
                        ModelError::DegenerateGenerator { .. } => FindingCode::DegenerateChain,
                        ModelError::NonContracting { .. } => FindingCode::ScaleOutOfRange,
                        ModelError::InvalidTypeIndex { .. } => FindingCode::InvalidTypeIndex,
                    };
                    ParseError {
                        span,
                        kind: ParseErrorKind::Validation(code),
                        message: e.to_string(),
                    }
                })?;
            if (declared - derived).abs() > 1e-9 {
                return Err(ParseError {
                    span,
                    kind: ParseErrorKind::ScaleMismatch,
                    message: format!(
                        "declared scale {declared} does not match derived scale {derived}"
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Parses a document without running geometric validation, retaining spans.
pub fn parse_document(text: &str) -> Result<ParsedSystem, ParseError> {
    let tokens = lexer::tokenize(text)?;
    Parser { tokens, pos: 0 }.document()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_word(&self) -> Option<&str> {
        match self.tokens.get(self.pos).map(|t| &t.kind) {
            Some(TokenKind::Word(w)) => Some(w.as_str()),
            _ => None,
        }
    }

    fn current_span(&self) -> SourceSpan {
        self.tokens
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or_else(|| span_after(&self.tokens))
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<SourceSpan, ParseError> {
        match self.tokens.get(self.pos) {
            Some(Token {
                kind: TokenKind::Word(w),
                span,
            }) if w == keyword => {
                let span = *span;
                self.pos += 1;
                Ok(span)
            }
            Some(t) => Err(ParseError {
                span: t.span,
                kind: ParseErrorKind::UnexpectedToken,
                message: format!("expected `{keyword}`"),
            }),
            None => Err(ParseError {
                span: span_after(&self.tokens),
                kind: ParseErrorKind::UnexpectedEnd,
                message: format!("expected `{keyword}`"),
            }),
        }
    }

    fn expect_name(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.tokens.get(self.pos) {
            Some(Token {
                kind: TokenKind::Word(w),
                span,
            }) => {
                if KEYWORDS.contains(&w.as_str()) {
                    return Err(ParseError {
                        span: *span,
                        kind: ParseErrorKind::ReservedName,
                        message: format!("`{w}` is a reserved word and cannot be a name"),
                    });
                }
                let out = (w.clone(), *span);
                self.pos += 1;
                Ok(out)
            }
            Some(t) => Err(ParseError {
                span: t.span,
                kind: ParseErrorKind::UnexpectedToken,
                message: "expected a name".into(),
            }),
            None => Err(ParseError {
                span: span_after(&self.tokens),
                kind: ParseErrorKind::UnexpectedEnd,
                message: "expected a name".into(),
            }),
        }
    }

    fn expression(&mut self) -> Result<f64, ParseError> {
        let (value, next) = expr::eval_tokens(&self.tokens, self.pos)?;
        self.pos = next;
        Ok(value)
    }

    fn document(mut self) -> Result<ParsedSystem, ParseError> {
        let system_span = self.expect_keyword("system")?;
        let (name, _) = self.expect_name()?;

        let mut degrees = true;
        if self.peek_word() == Some("angle_unit") {
            self.pos += 1;
            match self.peek_word() {
                Some("degrees") => {
                    self.pos += 1;
                }
                Some("radians") => {
                    degrees = false;
                    self.pos += 1;
                }
                _ => {
                    return Err(ParseError {
                        span: self.current_span(),
                        kind: ParseErrorKind::UnexpectedToken,
                        message: "expected `degrees` or `radians`".into(),
                    })
                }
            }
        }

        let mut types: Vec<SegmentType> = Vec::new();
        let mut type_spans: Vec<SourceSpan> = Vec::new();
        while self.peek_word() == Some("segment") {
            let span = self.current_span();
            self.pos += 1;
            let (type_name, name_span) = self.expect_name()?;
            if types.iter().any(|t| t.name == type_name) {
                return Err(ParseError {
                    span: name_span,
                    kind: ParseErrorKind::DuplicateSegment,
                    message: format!("segment `{type_name}` is already declared"),
                });
            }
            self.expect_keyword("length")?;
            let length = self.expression()?;
            types.push(SegmentType::new(type_name, length));
            type_spans.push(span);
        }
        if types.is_empty() {
            return Err(ParseError {
                span: self.current_span(),
                kind: ParseErrorKind::MissingSegment,
                message: "expected at least one `segment` declaration".into(),
            });
        }

        let resolve = |name: &str, span: SourceSpan, types: &[SegmentType]| {
            types
                .iter()
                .position(|t| t.name == name)
                .ok_or_else(|| ParseError {
                    span,
                    kind: ParseErrorKind::UnknownSegment,
                    message: format!("unknown segment `{name}`"),
                })
        };

        let mut generators: Vec<Option<Generator>> = vec![None; types.len()];
        let mut generator_spans: Vec<SourceSpan> = vec![system_span; types.len()];
        let mut declared_scales: Vec<(usize, f64, SourceSpan)> = Vec::new();
        while self.peek_word() == Some("generator") {
            let gen_span = self.current_span();
            self.pos += 1;
            let (target_name, name_span) = self.expect_name()?;
            let target = resolve(&target_name, name_span, &types)?;
            if generators[target].is_some() {
                return Err(ParseError {
                    span: name_span,
                    kind: ParseErrorKind::DuplicateGenerator,
                    message: format!("segment `{target_name}` already has a generator"),
                });
            }
            if self.peek_word() == Some("scale") {
                let scale_span = self.current_span();
                self.pos += 1;
                let declared = self.expression()?;
                declared_scales.push((target, declared, scale_span));
            }
            let mut steps = Vec::new();
            loop {
                match self.peek_word() {
                    Some("step") => {
                        self.pos += 1;
                        let (step_name, step_span) = self.expect_name()?;
                        let type_index = resolve(&step_name, step_span, &types)?;
                        self.expect_keyword("angle")?;
                        let raw = self.expression()?;
                        let angle = if degrees { raw.to_radians() } else { raw };
                        let mut reversed = false;
                        let mut mirrored = false;
                        loop {
                            match self.peek_word() {
                                Some("reversed") if !reversed => {
                                    reversed = true;
                                    self.pos += 1;
                                }
                                Some("mirrored") if !mirrored => {
                                    mirrored = true;
                                    self.pos += 1;
                                }
                                _ => break,
                            }
                        }
                        steps.push(GeneratorStep::with_flags(
                            type_index, angle, reversed, mirrored,
                        ));
                    }
                    Some("end") => {
                        self.pos += 1;
                        break;
                    }
                    Some(_) => {
                        return Err(ParseError {
                            span: self.current_span(),
                            kind: ParseErrorKind::UnexpectedToken,
                            message: "expected `step` or `end`".into(),
                        })
                    }
                    None => {
                        return Err(ParseError {
                            span: span_after(&self.tokens),
                            kind: ParseErrorKind::UnexpectedEnd,
                            message: "generator block is not closed with `end`".into(),
                        })
                    }
                }
            }
            if steps.is_empty() {
                return Err(ParseError {
                    span: gen_span,
                    kind: ParseErrorKind::EmptyGenerator,
                    message: format!("generator for `{target_name}` has no steps"),
                });
            }
            generators[target] = Some(Generator::new(target, steps));
            generator_spans[target] = gen_span;
        }

        if self.pos >= self.tokens.len() {
            return Err(ParseError {
                span: span_after(&self.tokens),
                kind: ParseErrorKind::MissingInitiator,
                message: "expected an `initiator` line".into(),
            });
        }
        let initiator_span = self.expect_keyword("initiator").map_err(|e| ParseError {
            kind: if e.kind == ParseErrorKind::UnexpectedEnd {
                ParseErrorKind::MissingInitiator
            } else {
                e.kind
            },
            ..e
        })?;
        let (initiator_name, init_name_span) = self.expect_name()?;
        let initiator_type = resolve(&initiator_name, init_name_span, &types)?;

        if self.pos < self.tokens.len() {
            return Err(ParseError {
                span: self.current_span(),
                kind: ParseErrorKind::UnexpectedToken,
                message: "unexpected input after the initiator line".into(),
            });
        }

        let mut resolved = Vec::with_capacity(types.len());
        for (i, gen) in generators.into_iter().enumerate() {
            match gen {
                Some(g) => resolved.push(g),
                None => {
                    return Err(ParseError {
                        span: initiator_span,
                        kind: ParseErrorKind::MissingGenerator,
                        message: format!("segment `{}` has no generator", types[i].name),
                    })
                }
            }
        }

        Ok(ParsedSystem {
            system: FractalSystem::new(name, types, resolved, initiator_type),
            spans: SystemSpans {
                system: system_span,
                types: type_spans,
                generators: generator_spans,
                initiator: initiator_span,
            },
            declared_scales,
        })
    }
}

/// Writes a system in canonical form: fixed section order, angles in
/// degrees, derived values omitted. Parsing the output reproduces the
/// system (identifiers exactly; numbers to within 1e-12).
pub fn serialize_system(system: &FractalSystem) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "system {}", system.name).unwrap();
    writeln!(out, "angle_unit degrees").unwrap();
    for ty in &system.types {
        writeln!(out, "segment {} length {}", ty.name, ty.length).unwrap();
    }
    for gen in &system.generators {
        writeln!(out, "generator {}", system.types[gen.target_type].name).unwrap();
        for step in &gen.steps {
            write!(
                out,
                "  step {} angle {}",
                system.types[step.type_index()].name,
                format_angle_degrees(step.angle())
            )
            .unwrap();
            if step.reversed() {
                out.push_str(" reversed");
            }
            if step.mirrored() {
                out.push_str(" mirrored");
            }
            out.push('\n');
        }
        writeln!(out, "end").unwrap();
    }
    writeln!(
        out,
        "initiator {}",
        system.types[system.initiator_type].name
    )
    .unwrap();
    out
}

/// Formats a radian angle as degrees with up to 12 significant digits.
/// Falls back to the full shortest representation in the rare case where
/// 12 digits would not re-parse to within 1e-13 radians.
fn format_angle_degrees(radians: f64) -> String {
    let degrees = radians.to_degrees();
    let rounded = format_significant(degrees, 12);
    let back: f64 = rounded.parse().unwrap_or(f64::NAN);
    if (back.to_radians() - radians).abs() <= 1e-13 {
        rounded
    } else {
        format!("{degrees}")
    }
}

fn format_significant(value: f64, digits: i32) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}
