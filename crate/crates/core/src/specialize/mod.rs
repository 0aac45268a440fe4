//! Unfold/fold specialization of the CLP encoding of a system and property.
//!
//! The interpreter for CTL (`sat`, `sat_all`) and the system predicates
//! (`initial`, `t`, `ts`, `elem`) are not stored as clauses; unfolding
//! dispatches on the shape of the selected literal instead. The output is
//! a stratified program over `prop`, `negprop` and the introduced `newN`
//! predicates.

mod fold;
mod program;
mod unfold;

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::constraint::Constraint;
use crate::generalize::GenOp;
use crate::model::{derive_ts, Ctl, SystemSpec, TsClause, TsError, DEFAULT_REGION_LIMIT};
use crate::wqo::FiringRelation;

pub use program::{parse_program, render_program, Literal, PClause, Pred, SpecProgram};
pub use unfold::{selectable, BodyLiteral, ListRef, SpecClause};

pub type DefId = u32;

/// Where a definition's constraint came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// The projected context `e_p` itself.
    Projection,
    /// `genop(ancestor.constraint, e_p)`.
    Generalized { ancestor: DefId, projection: Constraint },
}

/// `newN(X) <- constraint(X), sat(X, formula)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub id: DefId,
    pub constraint: Constraint,
    pub formula: Ctl,
    /// `None` for children of the root clause.
    pub parent: Option<DefId>,
    pub origin: Origin,
}

#[derive(Clone, Debug)]
pub struct SpecConfig {
    pub firing: FiringRelation,
    pub genop: GenOp,
    /// Whether the definition being processed is its own ancestor candidate.
    pub ancestor_includes_self: bool,
    pub max_unfold_steps: u64,
    pub region_limit: usize,
}

impl Default for SpecConfig {
    fn default() -> Self {
        SpecConfig {
            firing: FiringRelation::Always,
            genop: GenOp::WidenMax,
            ancestor_includes_self: true,
            max_unfold_steps: 1_000_000,
            region_limit: DEFAULT_REGION_LIMIT,
        }
    }
}

/// A cooperative wall-clock budget.
#[derive(Clone, Copy, Debug)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Instant::now().checked_add(d))
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecializeError {
    #[error("time limit exceeded during specialization")]
    TimeLimit,
    #[error("unfolding exceeded {0} steps")]
    StepLimit(u64),
    #[error(transparent)]
    Ts(#[from] TsError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecStats {
    pub unfold_steps: u64,
    pub reuse: u64,
    pub generalize: u64,
    pub fresh: u64,
    /// Largest number of `eu`/`af` unfoldings within one Unfold run.
    pub max_temporal_unfoldings: u64,
}

pub struct Specializer<'a> {
    spec: &'a SystemSpec,
    ts: Vec<TsClause>,
    config: SpecConfig,
    deadline: Deadline,
    pub(crate) defs: Vec<Definition>,
    pub stats: SpecStats,
}

impl<'a> Specializer<'a> {
    pub fn new(spec: &'a SystemSpec, config: SpecConfig, deadline: Deadline) -> Result<Self, SpecializeError> {
        let ts = if spec.property.desugar().uses_af() {
            derive_ts(spec, config.region_limit)?
        } else {
            Vec::new()
        };
        Ok(Specializer { spec, ts, config, deadline, defs: Vec::new(), stats: SpecStats::default() })
    }

    pub fn definitions(&self) -> &[Definition] {
        &self.defs
    }

    pub fn definition(&self, id: DefId) -> &Definition {
        &self.defs[(id - 1) as usize]
    }

    /// `negprop <- initial(X), sat(X, not(φ))`.
    pub fn root_clause(&self) -> SpecClause {
        SpecClause {
            head: Pred::NegProp,
            constraint: Constraint::top(),
            body: vec![
                BodyLiteral::Init(0),
                BodyLiteral::Sat(0, Ctl::not(self.spec.property.clone()).desugar()),
            ],
            next_block: 1,
            next_list: 0,
        }
    }

    /// `newN(X) <- d(X), sat(X, ψ)`.
    pub fn definition_clause(&self, id: DefId) -> SpecClause {
        let d = self.definition(id);
        SpecClause {
            head: Pred::Def(id),
            constraint: d.constraint.clone(),
            body: vec![BodyLiteral::Sat(0, d.formula.clone())],
            next_block: 1,
            next_list: 0,
        }
    }

    /// Runs the worklist to completion.
    pub fn run(&mut self) -> Result<SpecProgram, SpecializeError> {
        let mut clauses = vec![PClause {
            head: Pred::Prop,
            constraint: Constraint::top(),
            body: vec![Literal { pred: Pred::NegProp, negated: true, block: 0 }],
        }];
        let mut pending: VecDeque<Option<DefId>> = VecDeque::from([None]);
        while let Some(gamma) = pending.pop_front() {
            if self.deadline.expired() {
                return Err(SpecializeError::TimeLimit);
            }
            let start = match gamma {
                None => self.root_clause(),
                Some(id) => self.definition_clause(id),
            };
            let unfolded = self.unfold(start)?;
            let (new_defs, folded) = self.generalize_and_fold(gamma, unfolded)?;
            clauses.extend(folded);
            pending.extend(new_defs.into_iter().map(Some));
        }
        Ok(SpecProgram {
            schema: self.spec.schema.clone(),
            definitions: self.defs.clone(),
            clauses,
        })
    }

    fn check_budget(&self) -> Result<(), SpecializeError> {
        if self.stats.unfold_steps > self.config.max_unfold_steps {
            return Err(SpecializeError::StepLimit(self.config.max_unfold_steps));
        }
        if self.stats.unfold_steps.is_multiple_of(16) && self.deadline.expired() {
            return Err(SpecializeError::TimeLimit);
        }
        Ok(())
    }
}

/// Phase 1 in one call.
pub fn specialize(
    spec: &SystemSpec,
    config: &SpecConfig,
    deadline: Deadline,
) -> Result<(SpecProgram, SpecStats), SpecializeError> {
    let mut s = Specializer::new(spec, config.clone(), deadline)?;
    let p = s.run()?;
    Ok((p, s.stats))
}
