use std::fmt;

use crate::constraint::{render_constraint, Constraint, VarId};
use crate::model::StateSchema;
use crate::parse::{lex, ParseError, Parser, Tok};

use super::{DefId, Definition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    Prop,
    NegProp,
    Def(DefId),
}

impl Pred {
    pub fn has_args(self) -> bool {
        matches!(self, Pred::Def(_))
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Prop => write!(f, "prop"),
            Pred::NegProp => write!(f, "negprop"),
            Pred::Def(id) => write!(f, "new{id}"),
        }
    }
}

/// A (possibly negated) call on the state tuple of `block`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub pred: Pred,
    pub negated: bool,
    pub block: u32,
}

/// `head(X) :- constraint | body`; the head tuple is block 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PClause {
    pub head: Pred,
    pub constraint: Constraint,
    pub body: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecProgram {
    pub schema: StateSchema,
    pub definitions: Vec<Definition>,
    pub clauses: Vec<PClause>,
}

fn render_call(schema: &StateSchema, pred: Pred, block: u32) -> String {
    if !pred.has_args() {
        return pred.to_string();
    }
    let args: Vec<String> = schema.block_vars(block).into_iter().map(|v| schema.var_name(v)).collect();
    format!("{pred}({})", args.join(", "))
}

pub(crate) fn render_clause(schema: &StateSchema, c: &PClause) -> String {
    let name = |v: VarId| schema.var_name(v);
    let mut s = format!("{} :- {}", render_call(schema, c.head, 0), render_constraint(&c.constraint, &name));
    if !c.body.is_empty() {
        let lits: Vec<String> = c
            .body
            .iter()
            .map(|l| {
                let call = render_call(schema, l.pred, l.block);
                if l.negated {
                    format!("not {call}")
                } else {
                    call
                }
            })
            .collect();
        s.push_str(" | ");
        s.push_str(&lits.join(", "));
    }
    s
}

/// One clause per line, preceded by the definitions as comments.
pub fn render_program(p: &SpecProgram) -> String {
    let name = |v: VarId| p.schema.var_name(v);
    let mut out = String::new();
    for d in &p.definitions {
        out.push_str(&format!(
            "# {} <- {}, sat({})\n",
            render_call(&p.schema, Pred::Def(d.id), 0),
            render_constraint(&d.constraint, &name),
            d.formula
        ));
    }
    for c in &p.clauses {
        out.push_str(&render_clause(&p.schema, c));
        out.push('\n');
    }
    out
}

impl fmt::Display for SpecProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_program(self))
    }
}

/// Parses the clause lines of [`render_program`] output. Comment lines are
/// skipped, so definitions are not recovered.
pub fn parse_program(text: &str, schema: &StateSchema) -> Result<Vec<PClause>, ParseError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let toks = lex(line).map_err(|e| ParseError { line: n + 1, ..e })?;
        if matches!(toks[0].tok, Tok::Eof) {
            continue;
        }
        out.push(parse_clause(toks, schema).map_err(|e| ParseError { line: n + 1, ..e })?);
    }
    Ok(out)
}

fn block_resolver(vars: Vec<String>) -> Box<crate::parse::Resolver<'static>> {
    let k = vars.len() as u32;
    Box::new(move |name, primed, block| {
        if primed {
            return Err(format!("unexpected primed name `{name}'`"));
        }
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| format!("undeclared variable `{name}`"))? as u32;
        Ok(VarId(block.unwrap_or(0) * k + i))
    })
}

fn parse_call(p: &mut Parser, schema: &StateSchema) -> Result<(Pred, u32), ParseError> {
    let name = p.expect_ident()?;
    let pred = match name.as_str() {
        "prop" => Pred::Prop,
        "negprop" => Pred::NegProp,
        _ => match name.strip_prefix("new").and_then(|n| n.parse::<DefId>().ok()) {
            Some(id) => Pred::Def(id),
            None => return Err(p.error_here(format!("unknown predicate `{name}`"))),
        },
    };
    if !pred.has_args() {
        return Ok((pred, 0));
    }
    p.expect_sym("(")?;
    let mut block = None;
    for (i, expected) in schema.vars.iter().enumerate() {
        if i > 0 {
            p.expect_sym(",")?;
        }
        let t = p.advance();
        match t.tok {
            Tok::Ident { name, primed: false, block: b } if &name == expected => {
                let b = b.unwrap_or(0);
                if block.is_some_and(|x| x != b) {
                    return Err(ParseError { line: t.line, col: t.col, message: "mixed blocks in arguments".into() });
                }
                block = Some(b);
            }
            _ => {
                return Err(ParseError {
                    line: t.line,
                    col: t.col,
                    message: format!("expected argument `{expected}`"),
                })
            }
        }
    }
    p.expect_sym(")")?;
    Ok((pred, block.unwrap_or(0)))
}

fn parse_clause(toks: Vec<crate::parse::Token>, schema: &StateSchema) -> Result<PClause, ParseError> {
    let mut p = Parser::new(toks, block_resolver(schema.vars.clone()));
    let (head, hb) = parse_call(&mut p, schema)?;
    if hb != 0 {
        return Err(p.error_here("clause head must use block 0"));
    }
    p.expect_sym(":-")?;
    let constraint = p.constraint()?;
    let mut body = Vec::new();
    if p.eat_sym("|") {
        loop {
            let negated = if p.at_keyword("not") {
                p.advance();
                true
            } else {
                false
            };
            let (pred, block) = parse_call(&mut p, schema)?;
            body.push(Literal { pred, negated, block });
            if !p.eat_sym(",") {
                break;
            }
        }
    }
    if !p.at_eof() {
        return Err(p.error_here("trailing input after clause"));
    }
    Ok(PClause { head, constraint, body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::testing::*;

    #[test]
    fn clause_round_trip() {
        let schema = StateSchema::new(vec!["x1".into(), "x2".into()]);
        let mut atoms = vec![le(0, &[(0, 1)])];
        atoms.extend(eq(0, &[(1, 1)]));
        atoms.extend(eq(0, &[(2, 1), (0, -1)]));
        atoms.extend(eq(-1, &[(3, 1)]));
        let clauses = vec![
            PClause {
                head: Pred::Prop,
                constraint: Constraint::top(),
                body: vec![Literal { pred: Pred::NegProp, negated: true, block: 0 }],
            },
            PClause {
                head: Pred::Def(1),
                constraint: conj(atoms),
                body: vec![Literal { pred: Pred::Def(2), negated: false, block: 1 }],
            },
            PClause { head: Pred::Def(3), constraint: conj([lt(0, &[(1, 1)])]), body: vec![] },
        ];
        let p = SpecProgram { schema: schema.clone(), definitions: vec![], clauses: clauses.clone() };
        let text = render_program(&p);
        assert!(text.contains("prop :- true | not negprop"), "{text}");
        assert!(text.contains("new2(x1@1, x2@1)"), "{text}");
        let back = parse_program(&text, &schema).unwrap();
        assert_eq!(back, clauses);
    }

    #[test]
    fn rejects_unknown_predicates() {
        let schema = StateSchema::new(vec!["x".into()]);
        assert!(parse_program("foo(x) :- true", &schema).is_err());
        let e = parse_program("\nnew1(x) :- x <= 0 | new2(y)", &schema).unwrap_err();
        assert_eq!(e.line, 2);
    }
}
