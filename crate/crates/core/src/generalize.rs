//! Generalization operators: how the specializer generalizes.
//!
//! Each operator maps an ancestor constraint `c` and a new constraint `d`
//! to a constraint entailed by `d` that stays below `c` in the operator's
//! thin well-quasi ordering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constraint::{convex_hull, AtomicConstraint, Constraint, KernelError};
use crate::wqo::{fires_atoms, FiringRelation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenOp {
    /// Returns `true`.
    Top,
    /// Atoms of `c` entailed by `d`.
    Widen,
    /// Widen plus the atoms of `d` below `c` under maxcoeff.
    WidenMax,
    /// Widen plus the atoms of `d` below `c` under sumcoeff.
    WidenSum,
    /// Atoms of `ch(c, d)` below `c` under maxcoeff.
    ChMax,
    /// Atoms of `ch(c, d)` below `c` under sumcoeff.
    ChSum,
    /// `c WidenMax ch(c, d)`.
    ChWidenMax,
    /// `c WidenSum ch(c, d)`.
    ChWidenSum,
}

impl GenOp {
    pub const ALL: [GenOp; 8] = [
        GenOp::Top,
        GenOp::Widen,
        GenOp::ChMax,
        GenOp::ChSum,
        GenOp::ChWidenMax,
        GenOp::ChWidenSum,
        GenOp::WidenMax,
        GenOp::WidenSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenOp::Top => "top",
            GenOp::Widen => "w",
            GenOp::WidenMax => "wm",
            GenOp::WidenSum => "ws",
            GenOp::ChMax => "chm",
            GenOp::ChSum => "chs",
            GenOp::ChWidenMax => "chwm",
            GenOp::ChWidenSum => "chws",
        }
    }

    /// The thin wqo the operator is certified against; `None` for operators
    /// that are generalization operators for all three.
    pub fn certifying_wqo(self) -> Option<FiringRelation> {
        match self {
            GenOp::Top | GenOp::Widen => None,
            GenOp::WidenMax | GenOp::ChMax | GenOp::ChWidenMax => Some(FiringRelation::MaxCoeff),
            GenOp::WidenSum | GenOp::ChSum | GenOp::ChWidenSum => Some(FiringRelation::SumCoeff),
        }
    }
}

impl fmt::Display for GenOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GenOp::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown generalization operator `{s}`"))
    }
}

fn widen_part(c: &Constraint, d: &Constraint) -> Vec<AtomicConstraint> {
    c.atoms()
        .iter()
        .filter(|a| d.entails_atom(a))
        .cloned()
        .collect()
}

/// Atoms `b` of `from` with `{b} ◁ c` for the given wqo.
fn below(from: &Constraint, c: &Constraint, wqo: FiringRelation) -> Vec<AtomicConstraint> {
    from.atoms()
        .iter()
        .filter(|b| fires_atoms(wqo, std::slice::from_ref(*b), c.atoms()))
        .cloned()
        .collect()
}

fn widen_with(c: &Constraint, d: &Constraint, wqo: FiringRelation) -> Constraint {
    let mut atoms = widen_part(c, d);
    atoms.extend(below(d, c, wqo));
    Constraint::from_atoms(atoms)
}

/// `c ⊖ d` for the given operator. Outputs are redundancy-free and
/// canonical. Both operands must be satisfiable.
pub fn generalize(op: GenOp, c: &Constraint, d: &Constraint) -> Result<Constraint, KernelError> {
    if !c.satisfiable() || !d.satisfiable() {
        return Err(KernelError::InvalidInput("generalization of an unsatisfiable constraint"));
    }
    let raw = match op {
        GenOp::Top => Constraint::top(),
        GenOp::Widen => Constraint::from_atoms(widen_part(c, d)),
        GenOp::WidenMax => widen_with(c, d, FiringRelation::MaxCoeff),
        GenOp::WidenSum => widen_with(c, d, FiringRelation::SumCoeff),
        GenOp::ChMax => {
            let h = convex_hull(c, d)?;
            Constraint::from_atoms(below(&h, c, FiringRelation::MaxCoeff))
        }
        GenOp::ChSum => {
            let h = convex_hull(c, d)?;
            Constraint::from_atoms(below(&h, c, FiringRelation::SumCoeff))
        }
        GenOp::ChWidenMax => widen_with(c, &convex_hull(c, d)?, FiringRelation::MaxCoeff),
        GenOp::ChWidenSum => widen_with(c, &convex_hull(c, d)?, FiringRelation::SumCoeff),
    };
    Ok(raw.remove_redundant().canonicalize())
}

/// WidenMax with maxcoeff replaced by homeocoeff. Not a generalization
/// operator; kept for tests that exhibit the failure.
pub fn widen_homeo(c: &Constraint, d: &Constraint) -> Constraint {
    widen_with(c, d, FiringRelation::HomeoCoeff).remove_redundant()
}
