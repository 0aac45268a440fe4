//! Fourier–Motzkin elimination over conjunctions of atomic constraints.
//!
//! Equalities (pairs `p <= 0`, `-p <= 0`) are eliminated by substitution
//! before falling back to pairwise combination of bounds. Combining a strict
//! and a non-strict bound yields a strict bound.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::linear::{AtomicConstraint, LinearTerm, RelOp, VarId};
use super::simplex;

/// Marker for a system found to be unsatisfiable during normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Infeasible;

/// Drops trivially true atoms, detects trivially false ones, keeps only the
/// tightest atom among those with parallel linear parts, then sorts and
/// deduplicates.
pub(crate) fn normalize(atoms: Vec<AtomicConstraint>) -> Result<Vec<AtomicConstraint>, Infeasible> {
    // key: primitive linear part; value: (bound numerator -k, gcd g, atom)
    let mut best: BTreeMap<Vec<(VarId, BigInt)>, (BigInt, BigInt, AtomicConstraint)> = BTreeMap::new();
    for atom in atoms {
        match atom.constant_truth() {
            Some(true) => continue,
            Some(false) => return Err(Infeasible),
            None => {}
        }
        let g = atom.term().coeff_gcd();
        let key: Vec<(VarId, BigInt)> = atom
            .term()
            .coeffs()
            .iter()
            .map(|(v, q)| (*v, q / &g))
            .collect();
        let bound = -atom.term().constant();
        match best.get_mut(&key) {
            None => {
                best.insert(key, (bound, g, atom));
            }
            Some(slot) => {
                // compare bound/g against slot.0/slot.1 (both denominators positive)
                let lhs = &bound * &slot.1;
                let rhs = &slot.0 * &g;
                let tighter = lhs < rhs || (lhs == rhs && atom.is_strict() && !slot.2.is_strict());
                if tighter {
                    *slot = (bound, g, atom);
                }
            }
        }
    }
    let mut out: Vec<AtomicConstraint> = best.into_values().map(|(_, _, a)| a).collect();
    out.sort();
    // opposite parallel bounds that cross are caught here cheaply
    let nonstrict: HashSet<&LinearTerm> = out
        .iter()
        .filter(|a| !a.is_strict())
        .map(|a| a.term())
        .collect();
    for a in &out {
        if a.is_strict() && nonstrict.contains(&a.term().negated()) {
            // p < 0 together with -p <= 0
            return Err(Infeasible);
        }
    }
    Ok(out)
}

/// Index pairs `(i, j)` of atoms forming an equality `p = 0`, with `i < j`.
fn equality_pairs(atoms: &[AtomicConstraint]) -> Vec<(usize, usize)> {
    let mut index: BTreeMap<&LinearTerm, usize> = BTreeMap::new();
    for (i, a) in atoms.iter().enumerate() {
        if !a.is_strict() {
            index.insert(a.term(), i);
        }
    }
    let mut pairs = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        if a.is_strict() {
            continue;
        }
        if let Some(&j) = index.get(&a.term().negated()) {
            if i < j {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Substitutes away `v` using the equality `eq = 0` (which must mention `v`),
/// dropping the equality's own two atoms.
fn substitute(
    atoms: &[AtomicConstraint],
    pair: (usize, usize),
    v: VarId,
) -> Vec<AtomicConstraint> {
    let eq = atoms[pair.0].term();
    let a = eq.coeff(v).expect("equality mentions the variable").clone();
    let abs_a = a.abs();
    let sign_a = if a.is_positive() { BigInt::one() } else { -BigInt::one() };
    let mut out = Vec::with_capacity(atoms.len());
    for (k, atom) in atoms.iter().enumerate() {
        if k == pair.0 || k == pair.1 {
            continue;
        }
        match atom.term().coeff(v) {
            None => out.push(atom.clone()),
            Some(b) => {
                let k2 = -(&sign_a * b);
                let term = atom.term().combine(&abs_a, eq, &k2);
                out.push(AtomicConstraint::new(term, atom.op()));
            }
        }
    }
    out
}

/// One Fourier–Motzkin step on `v`.
#[cfg(test)]
fn fm_step(atoms: &[AtomicConstraint], v: VarId) -> Vec<AtomicConstraint> {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut out = Vec::new();
    for atom in atoms {
        match atom.term().coeff(v) {
            None => out.push(atom.clone()),
            Some(q) if q.is_positive() => upper.push(atom),
            Some(_) => lower.push(atom),
        }
    }
    for u in &upper {
        let a = u.term().coeff(v).unwrap().clone();
        for l in &lower {
            let b = -l.term().coeff(v).unwrap();
            let term = u.term().combine(&b, l.term(), &a);
            let op = if u.is_strict() || l.is_strict() {
                RelOp::Strict
            } else {
                RelOp::NonStrict
            };
            out.push(AtomicConstraint::new(term, op));
        }
    }
    out
}

fn vars_of(atoms: &[AtomicConstraint]) -> BTreeSet<VarId> {
    atoms.iter().flat_map(|a| a.term().vars()).collect()
}

/// Source atoms an atom was combined from since the last reset.
type Sources = BTreeSet<usize>;

/// One Fourier–Motzkin step on `v` that drops every combination built from
/// more than `max_sources` source atoms (Chernikov's rule).
fn fm_step_tracked(
    sys: &[(AtomicConstraint, Sources)],
    v: VarId,
    max_sources: usize,
) -> Vec<(AtomicConstraint, Sources)> {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut out = Vec::new();
    for entry in sys {
        match entry.0.term().coeff(v) {
            None => out.push(entry.clone()),
            Some(q) if q.is_positive() => upper.push(entry),
            Some(_) => lower.push(entry),
        }
    }
    for (u, su) in &upper {
        let a = u.term().coeff(v).unwrap().clone();
        for (l, sl) in &lower {
            let sources: Sources = su.union(sl).copied().collect();
            if sources.len() > max_sources {
                continue;
            }
            let b = -l.term().coeff(v).unwrap();
            let term = u.term().combine(&b, l.term(), &a);
            let op = if u.is_strict() || l.is_strict() { RelOp::Strict } else { RelOp::NonStrict };
            out.push((AtomicConstraint::new(term, op), sources));
        }
    }
    out
}

/// Normalization for tracked systems. Only the tightest of several parallel
/// atoms is kept, recorded with the sources common to all of them: a source
/// set that is too small only weakens Chernikov's rule, while every dropped
/// combination stays covered by a tighter one with no more sources.
fn normalize_tracked(
    entries: Vec<(AtomicConstraint, Sources)>,
) -> Result<Vec<(AtomicConstraint, Sources)>, Infeasible> {
    let atoms = normalize(entries.iter().map(|(a, _)| a.clone()).collect())?;
    type Key = Vec<(VarId, BigInt)>;
    let key = |a: &AtomicConstraint| -> Key {
        let g = a.term().coeff_gcd();
        a.term().coeffs().iter().map(|(v, q)| (*v, q / &g)).collect()
    };
    let mut common: BTreeMap<Key, Sources> = BTreeMap::new();
    for (a, s) in entries {
        if a.constant_truth() == Some(true) {
            continue;
        }
        match common.get_mut(&key(&a)) {
            Some(c) => c.retain(|i| s.contains(i)),
            None => {
                common.insert(key(&a), s);
            }
        }
    }
    Ok(atoms
        .into_iter()
        .map(|a| {
            let s = common.get(&key(&a)).cloned().unwrap_or_default();
            (a, s)
        })
        .collect())
}

/// Atoms produced minus atoms removed by one elimination step on `v`.
fn fm_cost(sys: &[AtomicConstraint], v: VarId) -> i64 {
    let (mut p, mut n) = (0i64, 0i64);
    for a in sys {
        match a.term().coeff(v) {
            Some(q) if q.is_positive() => p += 1,
            Some(_) => n += 1,
            None => {}
        }
    }
    p * n - p - n
}

fn fresh_sources(atoms: Vec<AtomicConstraint>) -> Vec<(AtomicConstraint, Sources)> {
    atoms.into_iter().enumerate().map(|(i, a)| (a, Sources::from([i]))).collect()
}

/// Eliminates every variable not accepted by `keep`, in descending variable
/// order, or greedily by fewest generated combinations when `greedy` is set.
/// The result is normalized; `Err` means the system is unsatisfiable.
///
/// Equalities are substituted. Inequality-only steps use Chernikov's rule:
/// after `k` such steps, a combination of more than `k + 1` source atoms is
/// redundant. Substitution restarts the count with fresh sources.
pub(crate) fn project(
    atoms: Vec<AtomicConstraint>,
    keep: &impl Fn(VarId) -> bool,
    greedy: bool,
) -> Result<Vec<AtomicConstraint>, Infeasible> {
    let mut sys = fresh_sources(normalize(atoms)?);
    let mut steps = 0;
    let atoms_of = |sys: &[(AtomicConstraint, Sources)]| sys.iter().map(|(a, _)| a.clone()).collect::<Vec<_>>();
    let mut targets: Vec<VarId> = vars_of(&atoms_of(&sys)).into_iter().filter(|v| !keep(*v)).collect();
    while let Some(mut v) = targets.last().copied() {
        let plain = atoms_of(&sys);
        let pairs = equality_pairs(&plain);
        if greedy {
            let present = vars_of(&plain);
            targets.retain(|t| present.contains(t));
            let with_eq = targets
                .iter()
                .rev()
                .find(|t| pairs.iter().any(|(i, _)| plain[*i].term().coeff(**t).is_some()));
            v = match with_eq {
                Some(t) => *t,
                None => match targets.iter().min_by_key(|t| fm_cost(&plain, **t)) {
                    Some(t) => *t,
                    None => break,
                },
            };
        }
        targets.retain(|t| *t != v);
        let with_v = pairs.iter().find(|(i, _)| plain[*i].term().coeff(v).is_some()).copied();
        sys = match with_v {
            Some(pair) => {
                steps = 0;
                fresh_sources(normalize(substitute(&plain, pair, v))?)
            }
            None => {
                steps += 1;
                normalize_tracked(fm_step_tracked(&sys, v, steps + 1))?
            }
        };
        if sys.len() > PRUNE_AT {
            let plain = atoms_of(&sys);
            if !satisfiable(&plain) {
                return Err(Infeasible);
            }
            // pruning breaks the source invariant, so restart the count
            steps = 0;
            sys = fresh_sources(prune(normalize(plain)?));
        }
    }
    normalize(atoms_of(&sys))
}

/// Size above which intermediate projection results are pruned.
const PRUNE_AT: usize = 24;

/// Drops, in order, every atom entailed by the atoms still kept.
pub(crate) fn prune(atoms: Vec<AtomicConstraint>) -> Vec<AtomicConstraint> {
    let mut kept = presieve(atoms);
    let mut i = 0;
    while i < kept.len() {
        let negated = kept[i].negated();
        let saved = std::mem::replace(&mut kept[i], negated);
        if satisfiable(&kept) {
            kept[i] = saved;
            i += 1;
        } else {
            kept.remove(i);
        }
    }
    kept
}

/// Cheap first pass for large systems: atoms with small coefficients are
/// visited first and an atom is skipped when the ones taken so far already
/// entail it. The result is equivalent to the input and keeps its order.
fn presieve(atoms: Vec<AtomicConstraint>) -> Vec<AtomicConstraint> {
    if atoms.len() <= PRUNE_AT {
        return atoms;
    }
    let weight = |a: &AtomicConstraint| -> (usize, BigInt) {
        let t = a.term();
        (t.coeffs().len(), t.coeffs().iter().map(|(_, q)| q.abs()).sum())
    };
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by_key(|&i| weight(&atoms[i]));
    let mut taken: Vec<usize> = Vec::new();
    let mut probe: Vec<AtomicConstraint> = Vec::new();
    for i in order {
        probe.push(atoms[i].negated());
        if satisfiable(&probe) {
            probe.pop();
            probe.push(atoms[i].clone());
            taken.push(i);
        } else {
            probe.pop();
        }
    }
    taken.sort_unstable();
    taken.into_iter().map(|i| atoms[i].clone()).collect()
}

#[cfg(test)]
/// Decides rational satisfiability by eliminating all variables, choosing
/// the elimination order greedily. Gives up with `None` as soon as the
/// system grows beyond `cap` atoms.
pub(crate) fn satisfiable_within(atoms: Vec<AtomicConstraint>, cap: usize) -> Option<bool> {
    let mut sys = match normalize(atoms) {
        Ok(s) => s,
        Err(_) => return Some(false),
    };
    loop {
        if sys.is_empty() {
            return Some(true);
        }
        if sys.len() > cap {
            return None;
        }
        let pairs = equality_pairs(&sys);
        let next = if let Some(&pair) = pairs.first() {
            // pivot on the smallest coefficient of the first equality
            let (v, _) = sys[pair.0]
                .term()
                .coeffs()
                .iter()
                .min_by(|(v1, q1), (v2, q2)| q1.abs().cmp(&q2.abs()).then(v1.cmp(v2)))
                .expect("equality with variables");
            substitute(&sys, pair, *v)
        } else {
            let v = pick_fm_var(&sys);
            fm_step(&sys, v)
        };
        sys = match normalize(next) {
            Ok(s) => s,
            Err(_) => return Some(false),
        };
    }
}

/// Exact satisfiability, decided by the simplex.
pub(crate) fn satisfiable(atoms: &[AtomicConstraint]) -> bool {
    simplex::satisfiable(atoms)
}

#[cfg(test)]
fn pick_fm_var(sys: &[AtomicConstraint]) -> VarId {
    let mut counts: BTreeMap<VarId, (usize, usize)> = BTreeMap::new();
    for a in sys {
        for (v, q) in a.term().coeffs() {
            let e = counts.entry(*v).or_default();
            if q.is_positive() {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    counts
        .into_iter()
        .min_by_key(|(v, (p, n))| ((p * n) as i64 - (p + n) as i64, *v))
        .map(|(v, _)| v)
        .expect("non-constant system")
}

/// Rewrites the system so each equality is solved for its lowest-indexed
/// variable not already used as a pivot, and substitutes that variable out
/// of every other atom. Equalities are kept in the output.
pub(crate) fn solve_equalities(atoms: Vec<AtomicConstraint>) -> Result<Vec<AtomicConstraint>, Infeasible> {
    let mut sys = normalize(atoms)?;
    let mut pivots: BTreeSet<VarId> = BTreeSet::new();
    loop {
        let pairs = equality_pairs(&sys);
        // an equality mentioning a pivot is itself a pivot row
        let choice = pairs.iter().find_map(|&(i, j)| {
            let term = sys[i].term();
            if term.vars().any(|v| pivots.contains(&v)) {
                return None;
            }
            term.vars().next().map(|v| (i, j, v))
        });
        let Some((i, j, v)) = choice else {
            return Ok(sys);
        };
        pivots.insert(v);
        let eq_pos = sys[i].clone();
        let eq_neg = sys[j].clone();
        let mut next = substitute(&sys, (i, j), v);
        next.push(eq_pos);
        next.push(eq_neg);
        sys = normalize(next)?;
    }
}
