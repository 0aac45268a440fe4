use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{AtomicConstraint, Constraint, KernelError, LinearTerm, VarId};

/// Convex hull of two satisfiable constraints.
///
/// The closed hull is computed on the closures of the operands through the
/// lifted system `x = z1 + z2, A1 z1 <= l1 b1, A2 z2 <= l2 b2, l1 + l2 = 1,
/// l >= 0`, projected back onto `x`. It is then tightened by every strict
/// atom of either operand that both operands entail, so an open bound shared
/// by `c` and `d` survives. The result is returned with equalities solved for
/// their lowest variable and without redundant atoms, so its syntactic form
/// is reproducible.
pub fn convex_hull(c: &Constraint, d: &Constraint) -> Result<Constraint, KernelError> {
    if !c.satisfiable() || !d.satisfiable() {
        return Err(KernelError::InvalidInput("convex hull of an unsatisfiable constraint"));
    }
    let vars: BTreeSet<VarId> = c.vars().union(&d.vars()).copied().collect();
    let Some(max) = vars.iter().next_back() else {
        return Ok(Constraint::top());
    };
    let base = max.0 + 1;
    let z_of = |v: VarId| {
        let idx = vars.iter().position(|w| *w == v).unwrap() as u32;
        VarId(base + idx)
    };
    let lambda = VarId(base + vars.len() as u32);

    let mut lifted: Vec<AtomicConstraint> = Vec::new();
    // c over z1 scaled by lambda
    for a in c.closure().atoms() {
        let t = a.term();
        let coeffs = t
            .coeffs()
            .iter()
            .map(|(v, q)| (z_of(*v), q.clone()))
            .chain(std::iter::once((lambda, t.constant().clone())));
        lifted.push(AtomicConstraint::le(LinearTerm::new(BigInt::zero(), coeffs)));
    }
    // d over z2 = x - z1 scaled by 1 - lambda
    for a in d.closure().atoms() {
        let t = a.term();
        let mut coeffs: Vec<(VarId, BigInt)> = Vec::new();
        for (v, q) in t.coeffs() {
            coeffs.push((*v, q.clone()));
            coeffs.push((z_of(*v), -q));
        }
        coeffs.push((lambda, -t.constant()));
        lifted.push(AtomicConstraint::le(LinearTerm::new(t.constant().clone(), coeffs)));
    }
    lifted.push(AtomicConstraint::le(LinearTerm::new(
        BigInt::zero(),
        [(lambda, BigInt::from(-1))],
    )));
    lifted.push(AtomicConstraint::le(LinearTerm::new(
        BigInt::from(-1),
        [(lambda, BigInt::from(1))],
    )));

    let projected = Constraint::from_atoms(lifted).project_greedy(|v| v.0 < base);
    let open: Vec<AtomicConstraint> = c
        .atoms()
        .iter()
        .chain(d.atoms())
        .filter(|a| a.is_strict() && c.entails_atom(a) && d.entails_atom(a))
        .cloned()
        .collect();
    Ok(projected.and(&Constraint::from_atoms(open)).solved_form())
}
