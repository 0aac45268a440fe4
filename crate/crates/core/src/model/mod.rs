//! Kripke structures over rational state variables and their CTL properties.
//!
//! Constraints over several copies of the state tuple use a block layout:
//! variable `i` of block `b` is `VarId(b * k + i)` for a `k`-variable schema.
//! Initial and elementary constraints live in block 0; a transition relates
//! block 0 (current state) to block 1 (next state).

mod ctl;
mod ts;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;

use crate::constraint::{AtomicConstraint, Constraint, LinearTerm, VarId};

pub use ctl::Ctl;
pub use ts::{derive_ts, TsClause, TsError, DEFAULT_REGION_LIMIT};
pub(crate) use ts::subtract as subtract_pieces;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSchema {
    pub vars: Vec<String>,
}

impl StateSchema {
    pub fn new(vars: Vec<String>) -> Self {
        StateSchema { vars }
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, block: u32, i: usize) -> VarId {
        VarId(block * self.arity() as u32 + i as u32)
    }

    pub fn block_vars(&self, block: u32) -> Vec<VarId> {
        (0..self.arity()).map(|i| self.var(block, i)).collect()
    }

    pub fn block_of(&self, v: VarId) -> u32 {
        v.0 / self.arity().max(1) as u32
    }

    /// Renames every variable block by block according to `f`.
    pub fn rebase(&self, c: &Constraint, f: impl Fn(u32) -> u32) -> Constraint {
        let k = self.arity().max(1) as u32;
        c.rename(|v| VarId(f(v.0 / k) * k + v.0 % k))
    }

    /// `name` for block 0 and `name@b` otherwise.
    pub fn var_name(&self, v: VarId) -> String {
        let k = self.arity().max(1) as u32;
        let (b, i) = (v.0 / k, (v.0 % k) as usize);
        let base = self.vars.get(i).cloned().unwrap_or_else(|| format!("v{i}"));
        if b == 0 {
            base
        } else {
            format!("{base}@{b}")
        }
    }

    /// Primed names for block 1, used when printing transition relations.
    pub fn transition_var_name(&self, v: VarId) -> String {
        let k = self.arity().max(1) as u32;
        let (b, i) = (v.0 / k, (v.0 % k) as usize);
        match b {
            0 => self.vars[i].clone(),
            1 => format!("{}'", self.vars[i]),
            _ => self.var_name(v),
        }
    }

    /// The constraint `X_i(block a) = X_i(block b)` for every `i`.
    pub fn equal_blocks(&self, a: u32, b: u32) -> Constraint {
        let mut atoms = Vec::new();
        for i in 0..self.arity() {
            let t = LinearTerm::new(
                BigInt::from(0),
                [(self.var(a, i), BigInt::from(1)), (self.var(b, i), BigInt::from(-1))],
            );
            atoms.push(AtomicConstraint::le(t.negated()));
            atoms.push(AtomicConstraint::le(t));
        }
        Constraint::from_atoms(atoms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    /// Over block 0 (current) and block 1 (next).
    pub relation: Constraint,
}

impl Transition {
    pub fn guard(&self, schema: &StateSchema) -> Constraint {
        self.relation.project(&schema.block_vars(0)).remove_redundant()
    }
}

/// One clause of an elementary property. Several clauses with the same name
/// denote their disjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElemProp {
    pub name: String,
    pub cond: Constraint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    pub name: String,
    pub schema: StateSchema,
    pub inits: Vec<Constraint>,
    pub transitions: Vec<Transition>,
    pub elems: Vec<ElemProp>,
    pub property: Ctl,
}

impl SystemSpec {
    /// The clauses of an elementary property; `true` is built in.
    pub fn elem_conditions(&self, name: &str) -> Vec<Constraint> {
        if name == "true" {
            return vec![Constraint::top()];
        }
        self.elems
            .iter()
            .filter(|e| e.name == name)
            .map(|e| e.cond.clone())
            .collect()
    }

    pub fn declared_elems(&self) -> BTreeSet<String> {
        self.elems.iter().map(|e| e.name.clone()).collect()
    }

    /// A transition is deterministic when every state has at most one
    /// successor through it.
    pub fn is_deterministic(&self, t: &Transition) -> bool {
        let s = &self.schema;
        let second = s.rebase(&t.relation, |b| if b == 1 { 2 } else { b });
        s.equal_blocks(1, 2).atoms().iter().all(|a| t.relation.and(&second).entails_atom(a))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

fn error(message: String) -> Diagnostic {
    Diagnostic { severity: Severity::Error, message }
}

fn warning(message: String) -> Diagnostic {
    Diagnostic { severity: Severity::Warning, message }
}

/// Static checks on a system description.
///
/// Non-totality and non-deterministic transitions only matter for `af`,
/// whose encoding enumerates every successor of a state.
pub fn validate(spec: &SystemSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if spec.schema.arity() == 0 {
        out.push(error("no state variables declared".into()));
    }
    let mut seen = BTreeSet::new();
    for v in &spec.schema.vars {
        if !seen.insert(v) {
            out.push(error(format!("state variable `{v}` declared twice")));
        }
    }
    if spec.inits.is_empty() {
        out.push(error("no initial constraint".into()));
    }
    for (i, c) in spec.inits.iter().enumerate() {
        if !c.satisfiable() {
            out.push(error(format!("unsatisfiable initial constraint #{}", i + 1)));
        }
    }
    if spec.transitions.is_empty() {
        out.push(error("no transitions".into()));
    }
    for t in &spec.transitions {
        if !t.relation.satisfiable() {
            out.push(error(format!("transition `{}` has an unsatisfiable relation", t.name)));
        }
    }
    for e in &spec.elems {
        if e.name == "true" {
            out.push(error("`true` is a built-in elementary property".into()));
        } else if !e.cond.satisfiable() {
            out.push(warning(format!("elementary property `{}` has an unsatisfiable clause", e.name)));
        }
    }
    let declared = spec.declared_elems();
    for name in spec.property.elem_names() {
        if !declared.contains(&name) {
            out.push(error(format!("property refers to undeclared elementary property `{name}`")));
        }
    }
    if out.iter().any(|d| d.severity == Severity::Error) {
        return out;
    }

    let needs_ts = spec.property.desugar().uses_af();
    if needs_ts {
        for t in &spec.transitions {
            if !spec.is_deterministic(t) {
                out.push(error(format!(
                    "transition `{}` is not deterministic, which `af` does not support",
                    t.name
                )));
            }
        }
    }
    match derive_ts(spec, DEFAULT_REGION_LIMIT) {
        Ok(_) => {}
        Err(TsError::NotTotal { witness }) => {
            let msg = format!(
                "transition relation is not total: no successor where {}",
                crate::constraint::render_constraint(&witness, &|v| spec.schema.var_name(v))
            );
            out.push(if needs_ts { error(msg) } else { warning(msg) });
        }
        Err(TsError::SizeLimit { limit }) => {
            let msg = format!("successor regions exceed the limit of {limit}");
            out.push(if needs_ts { error(msg) } else { warning(msg) });
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}


#[cfg(test)]
mod tests {
    use super::fixtures::example1;
    use super::*;
    use crate::constraint::testing::*;

    #[test]
    fn example_one_is_clean() {
        assert!(validate(&example1()).is_empty());
    }

    #[test]
    fn unsatisfiable_init_is_reported() {
        let mut s = example1();
        s.inits = vec![conj([lt(0, &[(0, 1)]), lt(0, &[(0, -1)])])];
        let d = validate(&s);
        assert!(d.iter().any(|d| d.message.contains("unsatisfiable initial")), "{d:?}");
    }

    #[test]
    fn undeclared_elem_is_reported() {
        let mut s = example1();
        s.property = Ctl::ef(Ctl::elem("crit"));
        let d = validate(&s);
        assert!(has_errors(&d));
        assert!(d.iter().any(|d| d.message.contains("`crit`")));
    }

    #[test]
    fn guards_come_from_projection() {
        let s = example1();
        assert_eq!(s.transitions[0].guard(&s.schema), conj([le(1, &[(0, -1)])]));
    }

    #[test]
    fn determinism_check() {
        let s = example1();
        assert!(s.transitions.iter().all(|t| s.is_deterministic(t)));
        let loose = Transition { name: "any".into(), relation: conj([le(0, &[(2, 1), (0, -1)])]) };
        assert!(!s.is_deterministic(&loose));
    }

    #[test]
    fn non_totality_is_an_error_only_for_af() {
        let mut s = example1();
        s.transitions[0].relation = s.transitions[0].relation.and(&conj([le(0, &[(0, 1)])]));
        // X1 >= 1 together with X1 <= 0
        let d = validate(&s);
        assert!(has_errors(&d));
        let mut s = example1();
        s.transitions.truncate(1);
        let d = validate(&s);
        assert!(!has_errors(&d), "{d:?}");
        assert!(d.iter().any(|d| d.message.contains("not total")));
        s.property = Ctl::af(Ctl::elem("negative"));
        assert!(has_errors(&validate(&s)));
    }
}
