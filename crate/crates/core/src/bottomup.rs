//! Perfect-model construction for specialized programs.
//!
//! Facts are non-ground: `p(X) <- c` stands for every tuple satisfying `c`.
//! Strata are evaluated bottom-up to a fixpoint of the non-ground immediate
//! consequence operator; negated calls are answered by subtracting the
//! completed facts of a lower stratum from the current context.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::{render_constraint, Constraint, VarId};
use crate::model::StateSchema;
use crate::specialize::{Deadline, PClause, Pred, SpecProgram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Verified,
    Violated,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Verified => "VERIFIED",
            Verdict::Violated => "VIOLATED",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BottomUpError {
    #[error("program is not stratified: `{0}` depends negatively on itself")]
    NotStratified(Pred),
    #[error("no fixpoint within {0} iterations")]
    Diverged(usize),
    #[error("time limit exceeded during bottom-up evaluation")]
    TimeLimit,
    #[error("more than {0} disjuncts while evaluating negation")]
    SizeLimit(usize),
}

impl BottomUpError {
    /// Short machine-readable reason used in reports.
    pub fn reason(&self) -> &'static str {
        match self {
            BottomUpError::NotStratified(_) => "not-stratified",
            BottomUpError::Diverged(_) => "bottomup-divergence",
            BottomUpError::TimeLimit => "timeout",
            BottomUpError::SizeLimit(_) => "size-limit",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_iterations: usize,
    pub max_disjuncts: usize,
    pub deadline: Deadline,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_iterations: 1000, max_disjuncts: 100_000, deadline: Deadline::none() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    pub level: BTreeMap<Pred, u32>,
}

impl Stratification {
    pub fn max_level(&self) -> u32 {
        self.level.values().copied().max().unwrap_or(0)
    }
}

/// Least levels such that heads sit at or above positive calls and
/// strictly above negated ones.
pub fn stratify(clauses: &[PClause]) -> Result<Stratification, BottomUpError> {
    let mut level: BTreeMap<Pred, u32> = BTreeMap::new();
    for c in clauses {
        level.entry(c.head).or_insert(0);
        for l in &c.body {
            level.entry(l.pred).or_insert(0);
        }
    }
    let bound = level.len() as u32;
    loop {
        let mut changed = false;
        for c in clauses {
            let need = c
                .body
                .iter()
                .map(|l| level[&l.pred] + u32::from(l.negated))
                .max()
                .unwrap_or(0);
            if need > level[&c.head] {
                if need > bound {
                    return Err(BottomUpError::NotStratified(c.head));
                }
                level.insert(c.head, need);
                changed = true;
            }
        }
        if !changed {
            return Ok(Stratification { level });
        }
    }
}

/// Pieces of `context ∧ ¬(f1 ∨ ... ∨ fn)`, pairwise disjoint and satisfiable.
///
/// Facts are subtracted one at a time. A piece disjoint from a fact is kept
/// whole and a piece contained in it is dropped; only the remaining pieces
/// are split.
pub fn negate_facts(facts: &[Constraint], context: &Constraint, limit: usize) -> Result<Vec<Constraint>, BottomUpError> {
    if !context.satisfiable() {
        return Ok(Vec::new());
    }
    let mut parts = vec![context.clone()];
    for f in facts {
        let mut next = Vec::new();
        for d in parts {
            if !d.and(f).satisfiable() {
                next.push(d);
            } else if !d.entails(f) {
                next.extend(crate::model::subtract_pieces(&d, f));
            }
            if next.len() > limit {
                return Err(BottomUpError::SizeLimit(limit));
            }
        }
        parts = next;
        if parts.is_empty() {
            break;
        }
    }
    Ok(parts)
}

/// Facts per predicate, each over the head tuple (block 0).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelTable {
    pub facts: BTreeMap<Pred, Vec<Constraint>>,
    pub complete: BTreeSet<Pred>,
}

impl ModelTable {
    pub fn facts_of(&self, p: Pred) -> &[Constraint] {
        self.facts.get(&p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn fact_count(&self) -> usize {
        self.facts.values().map(Vec::len).sum()
    }

    pub fn holds(&self, p: Pred) -> bool {
        !self.facts_of(p).is_empty()
    }

    /// Inserts unless a single existing fact covers `c`; facts covered by `c`
    /// are dropped. Returns whether the table changed.
    pub fn insert(&mut self, p: Pred, c: Constraint) -> bool {
        let list = self.facts.entry(p).or_default();
        if list.iter().any(|old| c.entails(old)) {
            return false;
        }
        list.retain(|old| !old.entails(&c));
        list.push(c);
        true
    }

    /// `pred(x1, ..., xk) :- constraint` lines.
    pub fn render(&self, schema: &StateSchema) -> String {
        let mut out = String::new();
        let name = |v: VarId| schema.var_name(v);
        let args = schema.vars.join(", ");
        for (p, facts) in &self.facts {
            for f in facts {
                let head = if p.has_args() { format!("{p}({args})") } else { p.to_string() };
                out.push_str(&format!("{head} :- {}\n", render_constraint(f, &name)));
            }
        }
        out
    }
}

fn at_block(schema: &StateSchema, c: &Constraint, b: u32) -> Constraint {
    if b == 0 {
        c.clone()
    } else {
        schema.rebase(c, |_| b)
    }
}

/// One application of the non-ground immediate consequence operator to
/// `clauses`. Negated predicates must be complete.
pub fn immediate_consequences(
    schema: &StateSchema,
    clauses: &[&PClause],
    model: &ModelTable,
    limits: &Limits,
) -> Result<Vec<(Pred, Constraint)>, BottomUpError> {
    let mut out = Vec::new();
    for clause in clauses {
        let mut partial = vec![clause.constraint.clone()];
        let positives = clause.body.iter().filter(|l| !l.negated);
        let negatives = clause.body.iter().filter(|l| l.negated);
        for l in positives {
            let mut next = Vec::new();
            for p in &partial {
                check_time(limits)?;
                for f in model.facts_of(l.pred) {
                    let c = p.and(&at_block(schema, f, l.block));
                    if c.satisfiable() {
                        next.push(c);
                    }
                }
            }
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        for l in negatives {
            assert!(model.complete.contains(&l.pred), "negation of incomplete predicate {}", l.pred);
            let facts: Vec<Constraint> = model.facts_of(l.pred).iter().map(|f| at_block(schema, f, l.block)).collect();
            let mut next = Vec::new();
            for p in &partial {
                check_time(limits)?;
                next.extend(negate_facts(&facts, p, limits.max_disjuncts)?);
                if next.len() > limits.max_disjuncts {
                    return Err(BottomUpError::SizeLimit(limits.max_disjuncts));
                }
            }
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        let head_vars = if clause.head.has_args() { schema.block_vars(0) } else { Vec::new() };
        for p in partial {
            check_time(limits)?;
            out.push((clause.head, p.project(&head_vars).remove_redundant()));
        }
    }
    Ok(out)
}

fn check_time(limits: &Limits) -> Result<(), BottomUpError> {
    if limits.deadline.expired() {
        Err(BottomUpError::TimeLimit)
    } else {
        Ok(())
    }
}

/// Least fixpoint of one stratum. Returns the number of iterations.
pub fn fixpoint(
    schema: &StateSchema,
    clauses: &[&PClause],
    model: &mut ModelTable,
    limits: &Limits,
) -> Result<usize, BottomUpError> {
    let mut iterations = 0;
    loop {
        if iterations >= limits.max_iterations {
            return Err(BottomUpError::Diverged(limits.max_iterations));
        }
        check_time(limits)?;
        iterations += 1;
        let derived = immediate_consequences(schema, clauses, model, limits)?;
        let mut changed = false;
        for (p, c) in derived {
            check_time(limits)?;
            changed |= model.insert(p, c);
        }
        if !changed {
            return Ok(iterations);
        }
    }
}

#[derive(Clone, Debug)]
pub struct BottomUpOutcome {
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub model: ModelTable,
    pub iterations: usize,
}

/// Evaluates every stratum in ascending order and reads the verdict off `prop`.
pub fn bottom_up(program: &SpecProgram, limits: &Limits) -> BottomUpOutcome {
    let mut model = ModelTable::default();
    let mut iterations = 0;
    let unknown = |e: BottomUpError, model: ModelTable, iterations| BottomUpOutcome {
        verdict: Verdict::Unknown,
        reason: Some(e.reason().to_string()),
        model,
        iterations,
    };
    let strat = match stratify(&program.clauses) {
        Ok(s) => s,
        Err(e) => return unknown(e, model, 0),
    };
    for lvl in 0..=strat.max_level() {
        let clauses: Vec<&PClause> = program.clauses.iter().filter(|c| strat.level[&c.head] == lvl).collect();
        match fixpoint(&program.schema, &clauses, &mut model, limits) {
            Ok(n) => iterations += n,
            Err(e) => return unknown(e, model, iterations),
        }
        for (p, l) in &strat.level {
            if *l == lvl {
                model.complete.insert(*p);
            }
        }
    }
    let verdict = if model.holds(Pred::Prop) { Verdict::Verified } else { Verdict::Violated };
    BottomUpOutcome { verdict, reason: None, model, iterations }
}
