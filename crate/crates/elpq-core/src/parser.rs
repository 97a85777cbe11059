//! Text frontend for the ELP surface language.
//!
//! Grammar (terminated rules, `%` line comments):
//!
//! ```text
//! program  := (rule ".")*
//! rule     := headlist | headlist ":-" body? | ":-" body?
//! headlist := atom ("v" atom)*
//! body     := elem ("," elem)*
//! elem     := atom | "not" atom | "knot" lit | "K" lit | "M" lit
//! lit      := atom | "-" atom
//! atom     := ident ("(" term ("," term)* ")")?
//! ```
//!
//! Variables match `[A-Z][A-Za-z0-9_]*`; constants and predicate names
//! match `[a-z_][A-Za-z0-9_]*` or digit strings (the leading-underscore
//! form is reserved for machine-generated atoms such as query guards).
//! Classical negation `-` is only legal directly under `K`/`M`/`knot`.
//! `K l` and `M l` are desugared while parsing; serialization emits the
//! canonical form, so `M l` sugar never round-trips verbatim.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{Atom, EpiElement, Literal, Program, Rule, Term};
use crate::quant::{Query, QueryItem, QueryOp};

/// Byte range plus 1-based line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("arity mismatch at {span}: predicate `{predicate}` used with arities {first} and {second}")]
    ArityMismatch {
        span: SourceSpan,
        predicate: String,
        first: usize,
        second: usize,
    },
    #[error("classical negation outside an epistemic element at {span}")]
    ClassicalNegationOutsideEpistemic { span: SourceSpan },
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::ArityMismatch { span, .. }
            | ParseError::ClassicalNegationOutsideEpistemic { span } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    UpperIdent(String),
    Number(String),
    Not,
    Knot,
    Dot,
    Comma,
    LParen,
    RParen,
    ColonDash,
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::UpperIdent(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Not => write!(f, "`not`"),
            Tok::Knot => write!(f, "`knot`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::ColonDash => write!(f, "`:-`"),
            Tok::Minus => write!(f, "`-`"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
    }

    fn span_from(&self, start: usize, line: u32, column: u32) -> SourceSpan {
        SourceSpan {
            start,
            end: self.pos,
            line,
            column,
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        while let Some(c) = self.src[self.pos..].chars().next() {
            let (start, line, column) = (self.pos, self.line, self.column);
            if c.is_whitespace() {
                self.bump(c);
                continue;
            }
            if c == '%' {
                while let Some(c) = self.src[self.pos..].chars().next() {
                    self.bump(c);
                    if c == '\n' {
                        break;
                    }
                }
                continue;
            }
            let tok = match c {
                '.' => {
                    self.bump(c);
                    Tok::Dot
                }
                ',' => {
                    self.bump(c);
                    Tok::Comma
                }
                '(' => {
                    self.bump(c);
                    Tok::LParen
                }
                ')' => {
                    self.bump(c);
                    Tok::RParen
                }
                '-' => {
                    self.bump(c);
                    Tok::Minus
                }
                ':' => {
                    self.bump(c);
                    match self.src[self.pos..].chars().next() {
                        Some('-') => {
                            self.bump('-');
                            Tok::ColonDash
                        }
                        _ => {
                            return Err(ParseError::Syntax {
                                span: self.span_from(start, line, column),
                                message: "expected `:-`".into(),
                            });
                        }
                    }
                }
                c if c.is_ascii_digit() => {
                    while let Some(d) = self.src[self.pos..].chars().next() {
                        if d.is_ascii_digit() {
                            self.bump(d);
                        } else {
                            break;
                        }
                    }
                    Tok::Number(self.src[start..self.pos].to_string())
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while let Some(d) = self.src[self.pos..].chars().next() {
                        if d.is_ascii_alphanumeric() || d == '_' {
                            self.bump(d);
                        } else {
                            break;
                        }
                    }
                    let word = &self.src[start..self.pos];
                    match word {
                        "not" => Tok::Not,
                        "knot" => Tok::Knot,
                        _ if c.is_ascii_uppercase() => Tok::UpperIdent(word.to_string()),
                        _ => Tok::Ident(word.to_string()),
                    }
                }
                other => {
                    self.bump(other);
                    return Err(ParseError::Syntax {
                        span: self.span_from(start, line, column),
                        message: format!("unexpected character `{other}`"),
                    });
                }
            };
            out.push((tok, self.span_from(start, line, column)));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    idx: usize,
    eof: SourceSpan,
    arities: BTreeMap<String, usize>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        let toks = Lexer::new(src).tokenize()?;
        let line = src.lines().count().max(1) as u32;
        let eof = SourceSpan {
            start: src.len(),
            end: src.len(),
            line,
            column: src.lines().last().map_or(0, |l| l.chars().count() as u32) + 1,
        };
        Ok(Parser {
            toks,
            idx: 0,
            eof,
            arities: BTreeMap::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn peek_span(&self) -> SourceSpan {
        self.toks.get(self.idx).map_or(self.eof, |(_, s)| *s)
    }

    fn next(&mut self) -> Option<(Tok, SourceSpan)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            span: self.peek_span(),
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<SourceSpan, ParseError> {
        match self.next() {
            Some((t, s)) if t == want => Ok(s),
            Some((t, s)) => Err(ParseError::Syntax {
                span: s,
                message: format!("expected {want}, found {t}"),
            }),
            None => Err(ParseError::Syntax {
                span: self.eof,
                message: format!("expected {want}, found end of input"),
            }),
        }
    }

    fn record_arity(&mut self, atom: &Atom, span: SourceSpan) -> Result<(), ParseError> {
        match self.arities.get(&atom.predicate) {
            Some(&n) if n != atom.arity() => Err(ParseError::ArityMismatch {
                span,
                predicate: atom.predicate.clone(),
                first: n,
                second: atom.arity(),
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(atom.predicate.clone(), atom.arity());
                Ok(())
            }
        }
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.next() {
            Some((Tok::Ident(name), _)) => Ok(Term::constant(name)),
            Some((Tok::Number(name), _)) => Ok(Term::constant(name)),
            Some((Tok::UpperIdent(name), _)) => Ok(Term::variable(name)),
            Some((t, s)) => Err(ParseError::Syntax {
                span: s,
                message: format!("expected term, found {t}"),
            }),
            None => Err(ParseError::Syntax {
                span: self.eof,
                message: "expected term, found end of input".into(),
            }),
        }
    }

    fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        let start = self.peek_span();
        let predicate = match self.next() {
            Some((Tok::Ident(name), _)) => name,
            Some((Tok::Minus, s)) => {
                return Err(ParseError::ClassicalNegationOutsideEpistemic { span: s });
            }
            Some((t, s)) => {
                return Err(ParseError::Syntax {
                    span: s,
                    message: format!("expected predicate name, found {t}"),
                });
            }
            None => {
                return Err(ParseError::Syntax {
                    span: self.eof,
                    message: "expected predicate name, found end of input".into(),
                });
            }
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.next();
            loop {
                args.push(self.parse_term()?);
                match self.next() {
                    Some((Tok::Comma, _)) => continue,
                    Some((Tok::RParen, _)) => break,
                    Some((t, s)) => {
                        return Err(ParseError::Syntax {
                            span: s,
                            message: format!("expected `,` or `)`, found {t}"),
                        });
                    }
                    None => {
                        return Err(ParseError::Syntax {
                            span: self.eof,
                            message: "unterminated argument list".into(),
                        });
                    }
                }
            }
        }
        let atom = Atom::new(predicate, args);
        let span = SourceSpan {
            end: self.toks.get(self.idx.saturating_sub(1)).map_or(start.end, |(_, s)| s.end),
            ..start
        };
        self.record_arity(&atom, span)?;
        Ok(atom)
    }

    fn parse_lit(&mut self) -> Result<Literal, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.next();
            Ok(Literal::negative(self.parse_atom()?))
        } else {
            Ok(Literal::positive(self.parse_atom()?))
        }
    }

    /// One body element, desugaring `K`/`M` on the way in.
    fn parse_elem(&mut self, rule: &mut RuleParts) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.next();
                let a = self.parse_atom()?;
                rule.body_neg.push(a);
            }
            Some(Tok::Knot) => {
                self.next();
                let l = self.parse_lit()?;
                rule.body_epi.push(EpiElement::knot(l));
            }
            Some(Tok::UpperIdent(u)) if u == "K" => {
                self.next();
                let l = self.parse_lit()?;
                rule.body_epi.push(EpiElement::k(l));
            }
            Some(Tok::UpperIdent(u)) if u == "M" => {
                self.next();
                let l = self.parse_lit()?;
                rule.body_epi.push(EpiElement::m(l));
            }
            Some(Tok::Minus) => {
                let span = self.peek_span();
                return Err(ParseError::ClassicalNegationOutsideEpistemic { span });
            }
            Some(Tok::UpperIdent(_)) => {
                return Err(self.err("a variable cannot stand alone as a body element"));
            }
            _ => {
                let a = self.parse_atom()?;
                rule.body_pos.push(a);
            }
        }
        Ok(())
    }

    fn parse_rule(&mut self) -> Result<Rule, ParseError> {
        let mut parts = RuleParts::default();
        if self.peek() != Some(&Tok::ColonDash) {
            loop {
                parts.head.push(self.parse_atom()?);
                // an `v` between head atoms separates disjuncts
                match self.peek() {
                    Some(Tok::Ident(id)) if id == "v" => {
                        self.next();
                        continue;
                    }
                    _ => break,
                }
            }
        }
        if self.peek() == Some(&Tok::ColonDash) {
            self.next();
            if self.peek() != Some(&Tok::Dot) {
                loop {
                    self.parse_elem(&mut parts)?;
                    if self.peek() == Some(&Tok::Comma) {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
        }
        self.expect(Tok::Dot)?;
        Ok(Rule::new(parts.head, parts.body_pos, parts.body_neg, parts.body_epi))
    }

    fn parse_program(&mut self) -> Result<Program, ParseError> {
        let mut rules = Vec::new();
        while self.peek().is_some() {
            rules.push(self.parse_rule()?);
        }
        Ok(Program::new(rules))
    }

    fn parse_query(&mut self) -> Result<Query, ParseError> {
        let mut items = Vec::new();
        while self.peek().is_some() {
            let span = self.peek_span();
            let op = match self.next() {
                Some((Tok::UpperIdent(u), _)) if u == "K" => QueryOp::Known,
                Some((Tok::UpperIdent(u), _)) if u == "M" => QueryOp::Possible,
                Some((t, s)) => {
                    return Err(ParseError::Syntax {
                        span: s,
                        message: format!("expected `K` or `M`, found {t}"),
                    });
                }
                None => unreachable!("peeked Some"),
            };
            let lit = self.parse_lit()?;
            if !lit.atom.is_ground() {
                return Err(ParseError::Syntax {
                    span,
                    message: "query literals must be ground".into(),
                });
            }
            items.push(QueryItem { op, literal: lit });
            match self.peek() {
                Some(Tok::Comma) => {
                    self.next();
                }
                None => break,
                Some(t) => {
                    return Err(self.err(format!("expected `,` or end of query, found {t}")));
                }
            }
        }
        Ok(Query::new(items))
    }
}

#[derive(Default)]
struct RuleParts {
    head: Vec<Atom>,
    body_pos: Vec<Atom>,
    body_neg: Vec<Atom>,
    body_epi: Vec<EpiElement>,
}

/// Parse a program. Arity consistency is enforced while parsing.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::new(text)?.parse_program()
}

/// Canonical text form; `parse_program(serialize_program(p))` is
/// structurally identical to `p` (declared constants have no surface
/// syntax and are not serialized).
pub fn serialize_program(program: &Program) -> String {
    program.to_string()
}

/// Parse a comma-separated query of `K lit` / `M lit` items. The empty
/// string denotes the empty query.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    Parser::new(text)?.parse_query()
}
