//! The `.trs` text format (the `VAR`/`RULES` subset of the TPDB/COPS family)
//! and the plain term syntax `f(t1,...,tn)`.
//!
//! ```text
//! (VAR x y)
//! (RULES
//!   f(x) -> g(x)
//!   a -> b
//! )
//! ```
//!
//! Identifiers declared in `VAR` are variables; any other identifier is a
//! function symbol whose arity is fixed by its first use. Constants are
//! written bare. `COMMENT` sections are skipped; any other section is
//! rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::rewrite::{RewriteError, Trs};
use crate::term::{Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: parse error: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error(
        "{line}:{col}: symbol `{symbol}` used with {found} arguments but has arity {expected}"
    )]
    ArityConflict {
        line: usize,
        col: usize,
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}:{col}: rule {rule}: left-hand side is a variable")]
    VarAsLhs {
        line: usize,
        col: usize,
        rule: usize,
    },
    #[error("{line}:{col}: rule {rule}: variable `{var}` of the right-hand side does not occur in the left-hand side")]
    UnboundRhsVar {
        line: usize,
        col: usize,
        rule: usize,
        var: String,
    },
    #[error("{line}:{col}: unsupported section `{name}`")]
    UnsupportedSection {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: unknown symbol `{symbol}`")]
    UnknownSymbol {
        line: usize,
        col: usize,
        symbol: String,
    },
}

impl SyntaxError {
    pub fn location(&self) -> (usize, usize) {
        match *self {
            SyntaxError::Parse { line, col, .. }
            | SyntaxError::ArityConflict { line, col, .. }
            | SyntaxError::VarAsLhs { line, col, .. }
            | SyntaxError::UnboundRhsVar { line, col, .. }
            | SyntaxError::UnsupportedSection { line, col, .. }
            | SyntaxError::UnknownSymbol { line, col, .. } => (line, col),
        }
    }
}

/// 1-based line/column range, end exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: (usize, usize),
    pub end: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSource {
    pub lhs_text: String,
    pub rhs_text: String,
    pub span: Span,
}

/// A parsed `.trs` file with its source layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrsDocument {
    pub var_decls: Vec<String>,
    pub rules_src: Vec<RuleSource>,
    pub trs: Trs,
}

pub fn parse_trs(text: &str) -> Result<Trs, SyntaxError> {
    parse_document(text).map(|d| d.trs)
}

pub fn parse_document(text: &str) -> Result<TrsDocument, SyntaxError> {
    Parser::new(text).document()
}

/// Parses a term over `sig`, treating identifiers in `vars` as variables.
pub fn parse_term(
    text: &str,
    sig: &Signature,
    vars: &BTreeSet<String>,
) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text);
    p.vars = vars.clone();
    let (raw, _) = p.raw_term()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error(format!("unexpected `{c}` after term")));
    }
    resolve_against(&raw, sig)
}

/// Parses a term without a signature. Bare identifiers satisfying `is_var`
/// are variables; everything else is a function symbol with the arity it is
/// used with.
pub fn parse_term_by(text: &str, is_var: impl Fn(&str) -> bool) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text);
    let (raw, _) = p.raw_term()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error(format!("unexpected `{c}` after term")));
    }
    fn convert(raw: RawTerm, is_var: &dyn Fn(&str) -> bool) -> Term {
        match raw {
            RawTerm::Var(x, _) => Term::Var(x),
            RawTerm::App(f, args, _) if args.is_empty() && is_var(&f) => Term::Var(f),
            RawTerm::App(f, args, _) => {
                Term::App(f, args.into_iter().map(|a| convert(a, is_var)).collect())
            }
        }
    }
    Ok(convert(raw, &is_var))
}

fn resolve_against(raw: &RawTerm, sig: &Signature) -> Result<Term, SyntaxError> {
    match raw {
        RawTerm::Var(x, _) => Ok(Term::Var(x.clone())),
        RawTerm::App(f, args, (line, col)) => {
            let expected = sig.arity(f).ok_or_else(|| SyntaxError::UnknownSymbol {
                line: *line,
                col: *col,
                symbol: f.clone(),
            })?;
            if expected != args.len() {
                return Err(SyntaxError::ArityConflict {
                    line: *line,
                    col: *col,
                    symbol: f.clone(),
                    expected,
                    found: args.len(),
                });
            }
            let args = args
                .iter()
                .map(|a| resolve_against(a, sig))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(f.clone(), args))
        }
    }
}

/// Renders `trs` in the `.trs` format accepted by [`parse_trs`].
pub fn print_trs(trs: &Trs) -> String {
    let vars: BTreeSet<String> = trs
        .rules()
        .iter()
        .flat_map(|r| r.lhs.vars().into_iter().chain(r.rhs.vars()))
        .collect();
    let mut out = String::new();
    if !vars.is_empty() {
        out.push_str("(VAR");
        for v in &vars {
            let _ = write!(out, " {v}");
        }
        out.push_str(")\n");
    }
    out.push_str("(RULES\n");
    for r in trs.rules() {
        let _ = writeln!(out, "  {} -> {}", r.lhs, r.rhs);
    }
    out.push_str(")\n");
    out
}

#[derive(Debug, Clone)]
enum RawTerm {
    Var(String, (usize, usize)),
    App(String, Vec<RawTerm>, (usize, usize)),
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    vars: BTreeSet<String>,
    _text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            vars: BTreeSet::new(),
            _text: text,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_arrow(&self) -> bool {
        self.peek() == Some('-') && self.chars.get(self.pos + 1) == Some(&'>')
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (usize, usize) {
        (self.line, self.col)
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(d) if d == c => {
                self.bump();
                Ok(())
            }
            Some(d) => Err(self.error(format!("expected `{c}`, found `{d}`"))),
            None => Err(self.error(format!("expected `{c}`, found end of input"))),
        }
    }

    fn is_ident_char(&self) -> bool {
        match self.peek() {
            Some(c) => {
                !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '"') && !self.at_arrow()
            }
            None => false,
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        self.skip_ws();
        let mut out = String::new();
        while self.is_ident_char() {
            out.push(self.bump().expect("peeked"));
        }
        if out.is_empty() {
            return Err(match self.peek() {
                Some(c) if self.at_arrow() => {
                    self.error(format!("expected identifier, found `{c}>`"))
                }
                Some(c) => self.error(format!("expected identifier, found `{c}`")),
                None => self.error("expected identifier, found end of input"),
            });
        }
        Ok(out)
    }

    fn raw_term(&mut self) -> Result<(RawTerm, Span), SyntaxError> {
        self.skip_ws();
        let start = self.here();
        let name = self.ident()?;
        let is_var = self.vars.contains(&name);
        let mut args = Vec::new();
        // no whitespace skipping: `f (x)` would be ambiguous inside a rule list
        if self.peek() == Some('(') {
            if is_var {
                return Err(SyntaxError::Parse {
                    line: start.0,
                    col: start.1,
                    msg: format!("variable `{name}` applied to arguments"),
                });
            }
            self.bump();
            self.skip_ws();
            if self.peek() == Some(')') {
                self.bump();
            } else {
                loop {
                    args.push(self.raw_term()?.0);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => {
                            self.bump();
                        }
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        Some(c) => {
                            return Err(self.error(format!("expected `,` or `)`, found `{c}`")))
                        }
                        None => return Err(self.error("unterminated argument list")),
                    }
                }
            }
        }
        let span = Span {
            start,
            end: self.here(),
        };
        let raw = if is_var {
            RawTerm::Var(name, start)
        } else {
            RawTerm::App(name, args, start)
        };
        Ok((raw, span))
    }

    fn skip_comment_body(&mut self) -> Result<(), SyntaxError> {
        let mut depth = 1usize;
        while let Some(c) = self.bump() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        Err(self.error("unterminated COMMENT section"))
    }

    fn source(&self, span: Span, from: usize, to: usize) -> String {
        let _ = span;
        self.chars[from..to].iter().collect()
    }

    fn document(mut self) -> Result<TrsDocument, SyntaxError> {
        let mut var_decls = Vec::new();
        let mut rules_raw: Vec<(RawTerm, RawTerm, RuleSource)> = Vec::new();
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                break;
            }
            self.expect('(')?;
            self.skip_ws();
            let (line, col) = self.here();
            let name = self.ident()?;
            match name.as_str() {
                "VAR" => loop {
                    self.skip_ws();
                    if self.peek() == Some(')') {
                        self.bump();
                        break;
                    }
                    let v = self.ident()?;
                    if !self.vars.contains(&v) {
                        self.vars.insert(v.clone());
                        var_decls.push(v);
                    }
                },
                "RULES" => loop {
                    self.skip_ws();
                    if self.peek() == Some(')') {
                        self.bump();
                        break;
                    }
                    if self.peek().is_none() {
                        return Err(self.error("unterminated RULES section"));
                    }
                    let from = self.pos;
                    let (lhs, lspan) = self.raw_term()?;
                    let lhs_end = self.pos;
                    self.skip_ws();
                    if !self.at_arrow() {
                        return Err(self.error("expected `->`"));
                    }
                    self.bump();
                    self.bump();
                    self.skip_ws();
                    let rhs_from = self.pos;
                    let (rhs, rspan) = self.raw_term()?;
                    let span = Span {
                        start: lspan.start,
                        end: rspan.end,
                    };
                    let src = RuleSource {
                        lhs_text: self.source(lspan, from, lhs_end).trim().to_string(),
                        rhs_text: self.source(rspan, rhs_from, self.pos),
                        span,
                    };
                    rules_raw.push((lhs, rhs, src));
                },
                "COMMENT" => self.skip_comment_body()?,
                other => {
                    return Err(SyntaxError::UnsupportedSection {
                        line,
                        col,
                        name: other.to_string(),
                    })
                }
            }
        }
        let mut sig = Signature::new();
        let mut first_use: BTreeMap<String, ()> = BTreeMap::new();
        for (l, r, _) in &rules_raw {
            declare(&mut sig, &mut first_use, l)?;
            declare(&mut sig, &mut first_use, r)?;
        }
        let mut rules = Vec::with_capacity(rules_raw.len());
        for (id, (l, r, src)) in rules_raw.iter().enumerate() {
            let lhs = resolve_against(l, &sig)?;
            let rhs = resolve_against(r, &sig)?;
            let (line, col) = src.span.start;
            if lhs.is_var() {
                return Err(SyntaxError::VarAsLhs {
                    line,
                    col,
                    rule: id,
                });
            }
            let lv = lhs.vars();
            if let Some(var) = rhs.vars().into_iter().find(|v| !lv.contains(v)) {
                let (line, col) = find_var(r, &var).unwrap_or((line, col));
                return Err(SyntaxError::UnboundRhsVar {
                    line,
                    col,
                    rule: id,
                    var,
                });
            }
            rules.push((lhs, rhs));
        }
        let trs = Trs::new(sig, rules).map_err(|e| match e {
            RewriteError::VarLhs { rule } => SyntaxError::VarAsLhs {
                line: 0,
                col: 0,
                rule,
            },
            other => SyntaxError::Parse {
                line: 0,
                col: 0,
                msg: other.to_string(),
            },
        })?;
        Ok(TrsDocument {
            var_decls,
            rules_src: rules_raw.into_iter().map(|(_, _, s)| s).collect(),
            trs,
        })
    }
}

fn declare(
    sig: &mut Signature,
    seen: &mut BTreeMap<String, ()>,
    t: &RawTerm,
) -> Result<(), SyntaxError> {
    if let RawTerm::App(f, args, (line, col)) = t {
        if let Some(expected) = sig.arity(f) {
            if expected != args.len() {
                return Err(SyntaxError::ArityConflict {
                    line: *line,
                    col: *col,
                    symbol: f.clone(),
                    expected,
                    found: args.len(),
                });
            }
        } else {
            sig.declare(f, args.len()).expect("fresh symbol");
            seen.insert(f.clone(), ());
        }
        for a in args {
            declare(sig, seen, a)?;
        }
    }
    Ok(())
}

fn find_var(t: &RawTerm, var: &str) -> Option<(usize, usize)> {
    match t {
        RawTerm::Var(x, at) => (x == var).then_some(*at),
        RawTerm::App(_, args, _) => args.iter().find_map(|a| find_var(a, var)),
    }
}
