//! Exact manipulation of conjunctions of linear inequations over the rationals.

mod fm;
mod hull;
mod linear;
mod simplex;
mod text;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

pub use hull::convex_hull;
pub use linear::{AtomicConstraint, LinearTerm, RelOp, VarId};
pub use text::{render_atom, render_constraint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// A canonical conjunction of atomic constraints.
///
/// The empty conjunction is `true`. The distinguished `false` value is the
/// single atom `1 <= 0`. Atoms are sorted, deduplicated, and among atoms
/// with parallel linear parts only the tightest is kept.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    atoms: Vec<AtomicConstraint>,
}

impl Default for Constraint {
    fn default() -> Self {
        Constraint::top()
    }
}

fn falsum_atom() -> AtomicConstraint {
    AtomicConstraint::le(LinearTerm::new(BigInt::from(1), []))
}

fn sat(atoms: &[AtomicConstraint]) -> bool {
    fm::satisfiable(atoms)
}

impl Constraint {
    pub fn top() -> Self {
        Constraint { atoms: Vec::new() }
    }

    pub fn bottom() -> Self {
        Constraint {
            atoms: vec![falsum_atom()],
        }
    }

    /// Canonicalizes an arbitrary list of atoms. A trivially false atom
    /// turns the whole conjunction into `false`; unsatisfiability that needs
    /// elimination to expose is left for [`Constraint::satisfiable`].
    pub fn from_atoms(atoms: impl IntoIterator<Item = AtomicConstraint>) -> Self {
        match fm::normalize(atoms.into_iter().collect()) {
            Ok(atoms) => Constraint { atoms },
            Err(_) => Constraint::bottom(),
        }
    }

    /// Canonical form of `self`. Idempotent.
    pub fn canonicalize(&self) -> Self {
        Constraint::from_atoms(self.atoms.iter().cloned())
    }

    pub fn atoms(&self) -> &[AtomicConstraint] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True for the distinguished `false` value only (not for every
    /// unsatisfiable conjunction).
    pub fn is_false(&self) -> bool {
        self.atoms.len() == 1 && self.atoms[0].constant_truth() == Some(false)
    }

    pub fn and(&self, other: &Constraint) -> Constraint {
        Constraint::from_atoms(self.atoms.iter().chain(other.atoms.iter()).cloned())
    }

    pub fn and_atom(&self, atom: AtomicConstraint) -> Constraint {
        Constraint::from_atoms(self.atoms.iter().cloned().chain(std::iter::once(atom)))
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.atoms.iter().flat_map(|a| a.term().vars()).collect()
    }

    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> Constraint {
        Constraint::from_atoms(self.atoms.iter().map(|a| a.rename(&f)))
    }

    /// Replaces every strict atom by its non-strict version.
    pub fn closure(&self) -> Constraint {
        Constraint::from_atoms(self.atoms.iter().map(|a| a.closure()))
    }

    /// Exact rational satisfiability.
    pub fn satisfiable(&self) -> bool {
        if self.is_false() {
            return false;
        }
        sat(&self.atoms)
    }

    /// `self ⊑ atom`: every solution of `self` satisfies `atom`.
    pub fn entails_atom(&self, atom: &AtomicConstraint) -> bool {
        if atom.constant_truth() == Some(true) || self.atoms.binary_search(atom).is_ok() {
            return true;
        }
        let mut sys = self.atoms.clone();
        sys.push(atom.negated());
        !sat(&sys)
    }

    /// `self ⊑ other`.
    pub fn entails(&self, other: &Constraint) -> bool {
        if other.is_false() {
            return !self.satisfiable();
        }
        other.atoms.iter().all(|a| self.entails_atom(a))
    }

    /// Mutual entailment.
    pub fn equivalent(&self, other: &Constraint) -> bool {
        self.entails(other) && other.entails(self)
    }

    /// Existentially quantifies every variable rejected by `keep`.
    pub fn project_with(&self, keep: impl Fn(VarId) -> bool) -> Constraint {
        if self.is_false() {
            return Constraint::bottom();
        }
        match fm::project(self.atoms.clone(), &keep, false) {
            Ok(atoms) => Constraint { atoms },
            Err(_) => Constraint::bottom(),
        }
    }

    /// Like [`Constraint::project_with`] with a cost-driven elimination
    /// order. The syntactic result may differ; the solution set does not.
    pub(crate) fn project_greedy(&self, keep: impl Fn(VarId) -> bool) -> Constraint {
        if self.is_false() {
            return Constraint::bottom();
        }
        match fm::project(self.atoms.clone(), &keep, true) {
            Ok(atoms) => Constraint { atoms },
            Err(_) => Constraint::bottom(),
        }
    }

    /// Projection onto the given variables.
    pub fn project(&self, onto: &[VarId]) -> Constraint {
        let keep: BTreeSet<VarId> = onto.iter().copied().collect();
        self.project_with(|v| keep.contains(&v))
    }

    /// Drops, in sorted order, every atom entailed by the atoms still kept.
    pub fn remove_redundant(&self) -> Constraint {
        if self.is_false() {
            return self.clone();
        }
        Constraint { atoms: fm::prune(self.atoms.clone()) }
    }

    /// Equalities solved for their lowest variable and substituted into
    /// every other atom, then redundancy removed.
    pub(crate) fn solved_form(&self) -> Constraint {
        match fm::solve_equalities(self.atoms.clone()) {
            Ok(atoms) => Constraint { atoms }.remove_redundant(),
            Err(_) => Constraint::bottom(),
        }
    }

    /// Evaluates the conjunction at a rational point.
    pub fn holds_at(&self, value: impl Fn(VarId) -> num_rational::BigRational) -> bool {
        self.atoms.iter().all(|a| a.holds_at(&value))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_constraint(self, &|v: VarId| v.to_string()))
    }
}

/// `maxcoeff(a)`.
pub fn maxcoeff(a: &AtomicConstraint) -> BigInt {
    a.maxcoeff()
}

/// `sumcoeff(a)`.
pub fn sumcoeff(a: &AtomicConstraint) -> BigInt {
    a.sumcoeff()
}
