//! Firing relations on constraints: when the specializer generalizes.
//!
//! `Maxcoeff`, `Sumcoeff` and `Homeocoeff` compare atoms through measures of
//! their absolute integer coefficients and are thin well-quasi orderings;
//! they are reused by the generalization operators. `Always` relates every
//! pair of constraints.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::constraint::{AtomicConstraint, Constraint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiringRelation {
    Always,
    MaxCoeff,
    SumCoeff,
    HomeoCoeff,
}

impl FiringRelation {
    pub const ALL: [FiringRelation; 4] = [
        FiringRelation::Always,
        FiringRelation::MaxCoeff,
        FiringRelation::SumCoeff,
        FiringRelation::HomeoCoeff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FiringRelation::Always => "always",
            FiringRelation::MaxCoeff => "maxcoeff",
            FiringRelation::SumCoeff => "sumcoeff",
            FiringRelation::HomeoCoeff => "homeocoeff",
        }
    }
}

impl fmt::Display for FiringRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FiringRelation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FiringRelation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown firing relation `{s}`"))
    }
}

/// Sorted absolute values of the coefficients, largest first.
fn sorted_magnitudes(a: &AtomicConstraint) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = a.term().abs_coefficients().collect();
    v.sort_unstable_by(|x, y| y.cmp(x));
    v
}

/// Some permutation of coefficient positions makes every `|q_i|` of `a1`
/// bounded by the matched `|r_j|` of `a2`. Zero coefficients pad both
/// sides, and for scalar dominance comparing the two descending sequences
/// position by position is equivalent to searching for the permutation.
fn homeo_dominated(a1: &AtomicConstraint, a2: &AtomicConstraint) -> bool {
    let q = sorted_magnitudes(a1);
    let r = sorted_magnitudes(a2);
    let zero = BigInt::from(0);
    q.iter()
        .enumerate()
        .all(|(i, qi)| qi <= r.get(i).unwrap_or(&zero))
}

/// The atom-level relation underlying each firing relation.
pub fn atomic_rel(tag: FiringRelation, a1: &AtomicConstraint, a2: &AtomicConstraint) -> bool {
    if tag == FiringRelation::Always {
        return true;
    }
    if a1.op() != a2.op() {
        return false;
    }
    match tag {
        FiringRelation::Always => true,
        FiringRelation::MaxCoeff => a1.maxcoeff() <= a2.maxcoeff(),
        FiringRelation::SumCoeff => a1.sumcoeff() <= a2.sumcoeff(),
        FiringRelation::HomeoCoeff => homeo_dominated(a1, a2),
    }
}

/// `c1 ◁ c2` for the given firing relation.
pub fn fires(tag: FiringRelation, c1: &Constraint, c2: &Constraint) -> bool {
    fires_atoms(tag, c1.atoms(), c2.atoms())
}

pub(crate) fn fires_atoms(tag: FiringRelation, c1: &[AtomicConstraint], c2: &[AtomicConstraint]) -> bool {
    match tag {
        FiringRelation::Always => true,
        FiringRelation::MaxCoeff | FiringRelation::SumCoeff => c1
            .iter()
            .all(|a| c2.iter().any(|b| atomic_rel(tag, a, b))),
        FiringRelation::HomeoCoeff => {
            if c1.len() > c2.len() {
                return false;
            }
            let adj: Vec<Vec<usize>> = c1
                .iter()
                .map(|a| {
                    c2.iter()
                        .enumerate()
                        .filter(|(_, b)| atomic_rel(tag, a, b))
                        .map(|(j, _)| j)
                        .collect()
                })
                .collect();
            perfect_left_matching(&adj, c2.len())
        }
    }
}

/// Whether every left vertex can be matched to a distinct right vertex
/// (augmenting paths).
fn perfect_left_matching(adj: &[Vec<usize>], right: usize) -> bool {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none() || augment(owner[v].unwrap(), adj, seen, owner) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    for u in 0..adj.len() {
        let mut seen = vec![false; right];
        if !augment(u, adj, &mut seen, &mut owner) {
            return false;
        }
    }
    true
}
