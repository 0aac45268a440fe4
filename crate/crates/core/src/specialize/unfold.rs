use crate::constraint::Constraint;
use crate::model::Ctl;

use super::{DefId, Pred, SpecializeError, Specializer};

/// A successor list: unbound, or bound to a tuple of state blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ListRef {
    Var(u32),
    Concrete(Vec<u32>),
}

/// Body literal shapes that occur during specialization. State tuples are
/// denoted by their variable block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BodyLiteral {
    Init(u32),
    Trans(u32, u32),
    Ts(u32, ListRef),
    Elem(u32, String),
    Sat(u32, Ctl),
    SatAll(ListRef, Ctl),
    NegSat(u32, Ctl),
    Def(DefId, u32),
    NegDef(DefId, u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecClause {
    pub head: Pred,
    pub constraint: Constraint,
    pub body: Vec<BodyLiteral>,
    pub next_block: u32,
    pub next_list: u32,
}

impl SpecClause {
    fn fresh_block(&mut self) -> u32 {
        self.next_block += 1;
        self.next_block - 1
    }

    fn fresh_list(&mut self) -> u32 {
        self.next_list += 1;
        self.next_list - 1
    }

    fn replace(&self, pos: usize, with: Vec<BodyLiteral>) -> SpecClause {
        let mut c = self.clone();
        c.body.splice(pos..pos + 1, with);
        c
    }
}

/// Literals the Unfold loop may select. `eu`/`af` are unfolded only as the
/// first step of a run; negative literals and definitions never are.
pub fn selectable(lit: &BodyLiteral) -> bool {
    match lit {
        BodyLiteral::Init(_) | BodyLiteral::Trans(..) | BodyLiteral::Ts(..) | BodyLiteral::Elem(..) => true,
        BodyLiteral::Sat(_, f) => matches!(f, Ctl::True | Ctl::Elem(_) | Ctl::Not(_) | Ctl::And(..) | Ctl::Ex(_)),
        BodyLiteral::SatAll(l, _) => matches!(l, ListRef::Concrete(_)),
        BodyLiteral::NegSat(..) | BodyLiteral::Def(..) | BodyLiteral::NegDef(..) => false,
    }
}

impl Specializer<'_> {
    /// Instantiates `c` (over blocks 0 and 1) so block 0 is `x` and block 1 is `y`.
    fn at(&self, c: &Constraint, x: u32, y: u32) -> Constraint {
        self.spec.schema.rebase(c, |b| if b == 0 { x } else { y })
    }

    /// Resolves the literal at `pos` against the (implicit) program clauses.
    /// Only satisfiable resolvents are returned.
    pub fn unfold_once(&mut self, clause: &SpecClause, pos: usize) -> Vec<SpecClause> {
        let lit = clause.body[pos].clone();
        let mut out = Vec::new();
        let mut keep_if_sat = |c: SpecClause, extra: Option<Constraint>| match extra {
            None => out.push(c),
            Some(e) => {
                let mut c = c;
                c.constraint = c.constraint.and(&e);
                if c.constraint.satisfiable() {
                    out.push(c);
                }
            }
        };
        match lit {
            BodyLiteral::Init(x) => {
                for init in &self.spec.inits {
                    keep_if_sat(clause.replace(pos, vec![]), Some(self.at(init, x, x)));
                }
            }
            BodyLiteral::Trans(x, y) => {
                for t in &self.spec.transitions {
                    keep_if_sat(clause.replace(pos, vec![]), Some(self.at(&t.relation, x, y)));
                }
            }
            BodyLiteral::Elem(x, name) => {
                for cond in self.spec.elem_conditions(&name) {
                    keep_if_sat(clause.replace(pos, vec![]), Some(self.at(&cond, x, x)));
                }
            }
            BodyLiteral::Ts(x, list) => {
                let ListRef::Var(l) = list else {
                    panic!("ts literal with a bound successor list");
                };
                for region in &self.ts {
                    let mut c = clause.replace(pos, vec![]);
                    let mut extra = self.at(&region.region, x, x);
                    let mut blocks = Vec::new();
                    for succ in &region.successors {
                        let y = c.fresh_block();
                        extra = extra.and(&self.at(succ, x, y));
                        blocks.push(y);
                    }
                    for b in c.body.iter_mut() {
                        if let BodyLiteral::SatAll(r @ ListRef::Var(_), _) = b {
                            if *r == ListRef::Var(l) {
                                *r = ListRef::Concrete(blocks.clone());
                            }
                        }
                    }
                    keep_if_sat(c, Some(extra));
                }
            }
            BodyLiteral::SatAll(ListRef::Concrete(blocks), f) => {
                let lits = blocks.into_iter().map(|y| BodyLiteral::Sat(y, f.clone())).collect();
                keep_if_sat(clause.replace(pos, lits), None);
            }
            BodyLiteral::SatAll(ListRef::Var(_), _) => panic!("sat_all over an unbound list"),
            BodyLiteral::Sat(x, f) => match f {
                Ctl::True => keep_if_sat(clause.replace(pos, vec![BodyLiteral::Elem(x, "true".into())]), None),
                Ctl::Elem(e) => keep_if_sat(clause.replace(pos, vec![BodyLiteral::Elem(x, e)]), None),
                Ctl::Not(g) => keep_if_sat(clause.replace(pos, vec![BodyLiteral::NegSat(x, *g)]), None),
                Ctl::And(g, h) => keep_if_sat(
                    clause.replace(pos, vec![BodyLiteral::Sat(x, *g), BodyLiteral::Sat(x, *h)]),
                    None,
                ),
                Ctl::Ex(g) => {
                    let mut c = clause.clone();
                    let y = c.fresh_block();
                    let c = c.replace(pos, vec![BodyLiteral::Trans(x, y), BodyLiteral::Sat(y, *g)]);
                    keep_if_sat(c, None);
                }
                Ctl::Eu(ref g, ref h) => {
                    keep_if_sat(clause.replace(pos, vec![BodyLiteral::Sat(x, (**h).clone())]), None);
                    let mut c = clause.clone();
                    let y = c.fresh_block();
                    let c = c.replace(
                        pos,
                        vec![
                            BodyLiteral::Sat(x, (**g).clone()),
                            BodyLiteral::Trans(x, y),
                            BodyLiteral::Sat(y, f.clone()),
                        ],
                    );
                    keep_if_sat(c, None);
                }
                Ctl::Af(ref g) => {
                    keep_if_sat(clause.replace(pos, vec![BodyLiteral::Sat(x, (**g).clone())]), None);
                    let mut c = clause.clone();
                    let l = c.fresh_list();
                    let c = c.replace(
                        pos,
                        vec![BodyLiteral::Ts(x, ListRef::Var(l)), BodyLiteral::SatAll(ListRef::Var(l), f.clone())],
                    );
                    keep_if_sat(c, None);
                }
                Ctl::Ef(_) | Ctl::Eg(_) => panic!("formula not desugared: {f}"),
            },
            BodyLiteral::NegSat(..) | BodyLiteral::Def(..) | BodyLiteral::NegDef(..) => {
                panic!("literal is not defined by the encoding program")
            }
        }
        out
    }

    /// Unfold: one step at the leftmost program literal, then the leftmost
    /// selectable literal until none remains, then removal of subsumed
    /// clauses. Clauses are expanded depth-first so the output order is fixed.
    pub fn unfold(&mut self, start: SpecClause) -> Result<Vec<SpecClause>, SpecializeError> {
        let first = start
            .body
            .iter()
            .position(|l| !matches!(l, BodyLiteral::Def(..) | BodyLiteral::NegDef(..) | BodyLiteral::NegSat(..)))
            .expect("clause without a program literal");
        let mut temporal = 0u64;
        if matches!(&start.body[first], BodyLiteral::Sat(_, Ctl::Eu(..) | Ctl::Af(_))) {
            temporal += 1;
        }
        self.stats.unfold_steps += 1;
        let mut stack: Vec<SpecClause> = self.unfold_once(&start, first);
        stack.reverse();
        let mut done = Vec::new();
        while let Some(c) = stack.pop() {
            match c.body.iter().position(selectable) {
                None => done.push(c),
                Some(p) => {
                    self.stats.unfold_steps += 1;
                    self.check_budget()?;
                    let mut res = self.unfold_once(&c, p);
                    res.reverse();
                    stack.extend(res);
                }
            }
        }
        self.stats.max_temporal_unfoldings = self.stats.max_temporal_unfoldings.max(temporal);
        Ok(self.remove_subsumed(done))
    }

    /// Drops `H <- d, G` when a distinct fact `H <- c` covers it, i.e. `d`
    /// entails the projection of `c` onto the head.
    pub(crate) fn remove_subsumed(&self, clauses: Vec<SpecClause>) -> Vec<SpecClause> {
        let head_vars = |c: &SpecClause| match c.head {
            Pred::Def(_) => self.spec.schema.block_vars(0),
            _ => Vec::new(),
        };
        let facts: Vec<Option<Constraint>> = clauses
            .iter()
            .map(|c| c.body.is_empty().then(|| c.constraint.project(&head_vars(c))))
            .collect();
        let mut alive = vec![true; clauses.len()];
        for i in 0..clauses.len() {
            let covered = (0..clauses.len()).any(|j| {
                j != i
                    && alive[j]
                    && clauses[j].head == clauses[i].head
                    && facts[j].as_ref().is_some_and(|f| clauses[i].constraint.entails(f))
            });
            if covered {
                alive[i] = false;
            }
        }
        clauses.into_iter().zip(alive).filter(|(_, a)| *a).map(|(c, _)| c).collect()
    }
}
