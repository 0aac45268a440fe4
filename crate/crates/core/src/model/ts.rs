use thiserror::Error;

use super::SystemSpec;
use crate::constraint::Constraint;

pub const DEFAULT_REGION_LIMIT: usize = 4096;

/// `ts(X, [Y1, ..., Ym]) <- region(X), successors[0](X, Y1), ...`.
///
/// Each successor relation is over block 0 and block 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TsClause {
    pub region: Constraint,
    pub successors: Vec<Constraint>,
    /// Indexes of the transitions enabled throughout the region.
    pub transitions: Vec<usize>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TsError {
    #[error("transition relation is not total")]
    NotTotal { witness: Constraint },
    #[error("more than {limit} successor regions")]
    SizeLimit { limit: usize },
}

/// `r ∧ ¬g` as pairwise disjoint satisfiable pieces:
/// `r∧¬a1`, `r∧a1∧¬a2`, and so on.
pub(crate) fn subtract(r: &Constraint, g: &Constraint) -> Vec<Constraint> {
    let mut out = Vec::new();
    let mut prefix = r.clone();
    for a in g.atoms() {
        let piece = prefix.and_atom(a.negated());
        if piece.satisfiable() {
            out.push(piece);
        }
        prefix = prefix.and_atom(a.clone());
        if !prefix.satisfiable() {
            break;
        }
    }
    out
}

/// Splits the state space into disjoint regions, each labelled with the
/// transitions enabled on all of it.
///
/// Transitions are processed in order; every current region is split into
/// the part inside the guard and the disjoint pieces outside it. A region
/// left with no successor witnesses non-totality.
pub fn derive_ts(spec: &SystemSpec, limit: usize) -> Result<Vec<TsClause>, TsError> {
    let mut regions: Vec<(Constraint, Vec<usize>)> = vec![(Constraint::top(), Vec::new())];
    for (i, t) in spec.transitions.iter().enumerate() {
        let guard = t.guard(&spec.schema);
        let mut next = Vec::new();
        for (r, enabled) in regions {
            let inside = r.and(&guard);
            if inside.satisfiable() {
                let mut e = enabled.clone();
                e.push(i);
                next.push((inside, e));
            }
            for piece in subtract(&r, &guard) {
                next.push((piece, enabled.clone()));
            }
            if next.len() > limit {
                return Err(TsError::SizeLimit { limit });
            }
        }
        regions = next;
    }
    if let Some((r, _)) = regions.iter().find(|(_, e)| e.is_empty()) {
        return Err(TsError::NotTotal { witness: r.remove_redundant() });
    }
    Ok(regions
        .into_iter()
        .map(|(region, enabled)| TsClause {
            region: region.remove_redundant(),
            successors: enabled.iter().map(|&i| spec.transitions[i].relation.clone()).collect(),
            transitions: enabled,
        })
        .collect())
}
