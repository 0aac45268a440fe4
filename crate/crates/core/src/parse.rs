//! Text front end for system descriptions.
//!
//! ```text
//! system NAME;
//! vars x, y;
//! init x = 0, y >= 0;
//! trans step: x >= 1, x' = x - 1, y' = y;
//! elem low: y < 0;
//! prop not(ef(low));
//! ```
//!
//! `#` and `//` start line comments. Constraints are comma-separated chains
//! of linear relations (`0 <= x < 2y + 1/2`); primed names denote the next
//! state and are only allowed in `trans`. Several `elem` lines may share a
//! name, in which case the property holds where any of them does.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::constraint::{AtomicConstraint, Constraint, LinearTerm, VarId};
use crate::model::{has_errors, validate, Ctl, Diagnostic, ElemProp, StateSchema, SystemSpec, Transition};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid system: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident { name: String, primed: bool, block: Option<u32> },
    Num(BigRational),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 16] = [
    ":-", "<=", ">=", "<", ">", "=", ";", ",", ":", "(", ")", "*", "/", "+", "-", "|",
];

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| ParseError { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[s..i].iter().collect();
            let mut primed = false;
            let mut block = None;
            if chars.get(i) == Some(&'\'') {
                primed = true;
                i += 1;
            } else if chars.get(i) == Some(&'@') {
                let d = i + 1;
                let mut e = d;
                while e < chars.len() && chars[e].is_ascii_digit() {
                    e += 1;
                }
                if e == d {
                    return Err(err(line, col + (i - s), "expected block number after `@`".into()));
                }
                let digits: String = chars[d..e].iter().collect();
                block = Some(digits.parse().map_err(|_| err(line, col, "block number too large".into()))?);
                i = e;
            }
            col += i - s;
            out.push(Token { tok: Tok::Ident { name, primed, block }, line: start_line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int: String = chars[s..i].iter().collect();
            let mut value = BigRational::from_integer(int.parse::<BigInt>().unwrap());
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) {
                i += 1;
                let f = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[f..i].iter().collect();
                let scale = BigInt::from(10).pow((i - f) as u32);
                value += BigRational::new(frac.parse::<BigInt>().unwrap(), scale);
            }
            col += i - s;
            out.push(Token { tok: Tok::Num(value), line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token { tok: Tok::Sym(sym), line: start_line, col: start_col });
            }
            None => return Err(err(line, col, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Affine expression with rational coefficients.
#[derive(Clone, Debug, Default)]
struct Lin {
    coeffs: BTreeMap<VarId, BigRational>,
    constant: BigRational,
}

impl Lin {
    fn constant(q: BigRational) -> Self {
        Lin { coeffs: BTreeMap::new(), constant: q }
    }

    fn var(v: VarId) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, BigRational::one());
        Lin { coeffs, constant: BigRational::zero() }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.values().all(|q| q.is_zero())
    }

    fn scale(mut self, k: &BigRational) -> Self {
        for q in self.coeffs.values_mut() {
            *q = &*q * k;
        }
        self.constant = &self.constant * k;
        self
    }

    fn add(mut self, other: Lin, sign: i32) -> Self {
        let s = BigRational::from_integer(BigInt::from(sign));
        for (v, q) in other.coeffs {
            let e = self.coeffs.entry(v).or_insert_with(BigRational::zero);
            *e = &*e + q * &s;
        }
        self.constant = &self.constant + other.constant * s;
        self
    }

    /// Integer term proportional to `self` with positive scaling.
    fn to_term(&self) -> LinearTerm {
        let mut l = BigInt::one();
        for q in self.coeffs.values().chain(std::iter::once(&self.constant)) {
            l = l.lcm(q.denom());
        }
        let k = BigRational::from_integer(l);
        let int = |q: &BigRational| (q * &k).to_integer();
        LinearTerm::new(int(&self.constant), self.coeffs.iter().map(|(v, q)| (*v, int(q))))
    }
}

pub(crate) type Resolver<'a> = dyn Fn(&str, bool, Option<u32>) -> Result<VarId, String> + 'a;

pub(crate) struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    resolve: Box<Resolver<'a>>,
}

impl<'a> Parser<'a> {
    pub fn new(toks: Vec<Token>, resolve: Box<Resolver<'a>>) -> Self {
        Parser { toks, pos: 0, resolve }
    }

    pub fn set_resolver(&mut self, resolve: Box<Resolver<'a>>) {
        self.resolve = resolve;
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    pub fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, col: t.col, message: message.into() }
    }

    pub fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn at_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident { name, primed: false, block: None } if name == k)
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{s}`, found {}", describe(self.peek()))))
        }
    }

    pub fn expect_keyword(&mut self, k: &str) -> Result<(), ParseError> {
        if self.at_keyword(k) {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{k}`, found {}", describe(self.peek()))))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident { name, primed: false, block: None } => {
                self.advance();
                Ok(name)
            }
            other => Err(self.error_here(format!("expected an identifier, found {}", describe(&other)))),
        }
    }

    /// `true`, `false`, or a comma-separated list of relation chains.
    pub fn constraint(&mut self) -> Result<Constraint, ParseError> {
        let mut atoms = Vec::new();
        loop {
            if self.at_keyword("true") && !self.next_is_relation_continuation() {
                self.advance();
            } else if self.at_keyword("false") && !self.next_is_relation_continuation() {
                self.advance();
                return self.finish_false();
            } else {
                self.chain(&mut atoms)?;
            }
            if !self.at_sym(",") {
                break;
            }
            self.advance();
        }
        Ok(Constraint::from_atoms(atoms))
    }

    fn next_is_relation_continuation(&self) -> bool {
        matches!(self.peek_at(1), Tok::Sym(s) if ["<=", "<", ">=", ">", "=", "+", "-", "*", "/"].contains(s))
    }

    fn finish_false(&mut self) -> Result<Constraint, ParseError> {
        // consume any remaining conjuncts so the caller sees the terminator
        while self.eat_sym(",") {
            let mut ignored = Vec::new();
            if self.at_keyword("true") || self.at_keyword("false") {
                self.advance();
            } else {
                self.chain(&mut ignored)?;
            }
        }
        Ok(Constraint::bottom())
    }

    fn chain(&mut self, atoms: &mut Vec<AtomicConstraint>) -> Result<(), ParseError> {
        let mut lhs = self.expr()?;
        let mut count = 0;
        while let Tok::Sym(s) = self.peek().clone() {
            if !["<=", "<", ">=", ">", "="].contains(&s) {
                break;
            }
            self.advance();
            let rhs = self.expr()?;
            let diff = lhs.clone().add(rhs.clone(), -1);
            let t = diff.to_term();
            match s {
                "<=" => atoms.push(AtomicConstraint::le(t)),
                "<" => atoms.push(AtomicConstraint::lt(t)),
                ">=" => atoms.push(AtomicConstraint::le(t.negated())),
                ">" => atoms.push(AtomicConstraint::lt(t.negated())),
                _ => {
                    atoms.push(AtomicConstraint::le(t.negated()));
                    atoms.push(AtomicConstraint::le(t));
                }
            }
            lhs = rhs;
            count += 1;
        }
        if count == 0 {
            return Err(self.error_here(format!("expected a relation, found {}", describe(self.peek()))));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Lin, ParseError> {
        let mut acc = if self.eat_sym("-") {
            Lin::default().add(self.term()?, -1)
        } else {
            self.eat_sym("+");
            self.term()?
        };
        loop {
            if self.eat_sym("+") {
                acc = acc.add(self.term()?, 1);
            } else if self.eat_sym("-") {
                acc = acc.add(self.term()?, -1);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Lin, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.at_sym("*") {
                self.advance();
                let rhs = self.factor()?;
                acc = self.multiply(acc, rhs)?;
            } else if self.at_sym("/") {
                self.advance();
                let rhs = self.factor()?;
                if !rhs.is_constant() || rhs.constant.is_zero() {
                    return Err(self.error_here("division by a non-constant or zero"));
                }
                acc = acc.scale(&rhs.constant.recip());
            } else if acc.is_constant()
                && ((matches!(self.peek(), Tok::Ident { .. }) && !self.at_reserved()) || self.at_sym("("))
            {
                let rhs = self.factor()?;
                acc = self.multiply(acc, rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn at_reserved(&self) -> bool {
        self.at_keyword("true") || self.at_keyword("false")
    }

    fn multiply(&self, a: Lin, b: Lin) -> Result<Lin, ParseError> {
        if a.is_constant() {
            Ok(b.scale(&a.constant))
        } else if b.is_constant() {
            Ok(a.scale(&b.constant))
        } else {
            Err(self.error_here("nonlinear product"))
        }
    }

    fn factor(&mut self) -> Result<Lin, ParseError> {
        let t = self.advance();
        match t.tok {
            Tok::Num(q) => Ok(Lin::constant(q)),
            Tok::Ident { name, primed, block } => (self.resolve)(&name, primed, block)
                .map(Lin::var)
                .map_err(|message| ParseError { line: t.line, col: t.col, message }),
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("-") => Ok(Lin::default().add(self.factor()?, -1)),
            other => Err(ParseError {
                line: t.line,
                col: t.col,
                message: format!("expected an expression, found {}", describe(&other)),
            }),
        }
    }

    pub fn ctl(&mut self) -> Result<Ctl, ParseError> {
        let t = self.advance();
        let name = match t.tok {
            Tok::Ident { name, primed: false, block: None } => name,
            other => {
                return Err(ParseError {
                    line: t.line,
                    col: t.col,
                    message: format!("expected a formula, found {}", describe(&other)),
                })
            }
        };
        let arity = match name.as_str() {
            "true" => return Ok(Ctl::True),
            "not" | "ex" | "af" | "ef" | "eg" => 1,
            "eu" => 2,
            "and" => 0,
            _ => return Ok(Ctl::Elem(name)),
        };
        self.expect_sym("(")?;
        let mut args = vec![self.ctl()?];
        while self.eat_sym(",") {
            args.push(self.ctl()?);
        }
        let bad = (arity > 0 && args.len() != arity) || (arity == 0 && args.len() < 2);
        if bad {
            return Err(ParseError {
                line: t.line,
                col: t.col,
                message: format!("wrong number of arguments to `{name}`"),
            });
        }
        self.expect_sym(")")?;
        let mut it = args.into_iter();
        let first = it.next().unwrap();
        Ok(match name.as_str() {
            "not" => Ctl::not(first),
            "ex" => Ctl::ex(first),
            "af" => Ctl::af(first),
            "ef" => Ctl::ef(first),
            "eg" => Ctl::eg(first),
            "eu" => Ctl::eu(first, it.next().unwrap()),
            _ => it.fold(first, Ctl::and),
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident { name, .. } => format!("`{name}`"),
        Tok::Num(q) => format!("`{q}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

fn state_resolver(vars: Vec<String>, allow_primed: bool) -> Box<Resolver<'static>> {
    let k = vars.len() as u32;
    Box::new(move |name, primed, block| {
        if block.is_some() {
            return Err(format!("`{name}@..` is not allowed here"));
        }
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| format!("undeclared variable `{name}`"))? as u32;
        if primed && !allow_primed {
            return Err(format!("primed variable `{name}'` outside a transition"));
        }
        Ok(VarId(if primed { k + i } else { i }))
    })
}

fn no_vars() -> Box<Resolver<'static>> {
    Box::new(|name, _, _| Err(format!("variable `{name}` before `vars`")))
}

/// Parses a constraint over a schema; primed names map to block 1.
pub fn parse_constraint(text: &str, schema: &StateSchema, allow_primed: bool) -> Result<Constraint, ParseError> {
    let mut p = Parser::new(lex(text)?, state_resolver(schema.vars.clone(), allow_primed));
    let c = p.constraint()?;
    if !p.at_eof() {
        return Err(p.error_here("trailing input after constraint"));
    }
    Ok(c)
}

pub fn parse_ctl(text: &str) -> Result<Ctl, ParseError> {
    let mut p = Parser::new(lex(text)?, no_vars());
    let f = p.ctl()?;
    if !p.at_eof() {
        return Err(p.error_here("trailing input after formula"));
    }
    Ok(f)
}

/// Parses without running validation.
pub fn parse_spec_unchecked(text: &str) -> Result<SystemSpec, ParseError> {
    let mut p = Parser::new(lex(text)?, no_vars());
    p.expect_keyword("system")?;
    let name = p.expect_ident()?;
    p.expect_sym(";")?;
    p.expect_keyword("vars")?;
    let mut vars = vec![p.expect_ident()?];
    while p.eat_sym(",") {
        vars.push(p.expect_ident()?);
    }
    p.expect_sym(";")?;
    let schema = StateSchema::new(vars);

    let mut inits = Vec::new();
    let mut transitions = Vec::new();
    let mut elems = Vec::new();
    let mut property = None;
    while !p.at_eof() {
        if p.at_keyword("init") {
            p.advance();
            p.set_resolver(state_resolver(schema.vars.clone(), false));
            inits.push(p.constraint()?);
        } else if p.at_keyword("trans") {
            p.advance();
            let name = p.expect_ident()?;
            p.expect_sym(":")?;
            p.set_resolver(state_resolver(schema.vars.clone(), true));
            transitions.push(Transition { name, relation: p.constraint()? });
        } else if p.at_keyword("elem") {
            p.advance();
            let name = p.expect_ident()?;
            p.expect_sym(":")?;
            p.set_resolver(state_resolver(schema.vars.clone(), false));
            elems.push(ElemProp { name, cond: p.constraint()? });
        } else if p.at_keyword("prop") {
            if property.is_some() {
                return Err(p.error_here("more than one `prop`"));
            }
            p.advance();
            property = Some(p.ctl()?);
        } else {
            return Err(p.error_here(format!(
                "expected `init`, `trans`, `elem` or `prop`, found {}",
                describe(p.peek())
            )));
        }
        p.expect_sym(";")?;
    }
    let property = property.ok_or_else(|| p.error_here("missing `prop`"))?;
    Ok(SystemSpec { name, schema, inits, transitions, elems, property })
}

/// Parses and validates; warnings are dropped, errors fail the parse.
pub fn parse_spec(text: &str) -> Result<SystemSpec, SpecError> {
    let spec = parse_spec_unchecked(text)?;
    let diags = validate(&spec);
    if has_errors(&diags) {
        return Err(SpecError::Invalid(diags));
    }
    Ok(spec)
}
