use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{AtomicConstraint, Constraint, LinearTerm, RelOp, VarId};

fn render_linear(coeffs: &[(VarId, BigInt)], name: &dyn Fn(VarId) -> String) -> String {
    let mut out = String::new();
    for (i, (v, q)) in coeffs.iter().enumerate() {
        let mag = q.abs();
        if i == 0 {
            if q.is_negative() {
                out.push('-');
            }
        } else if q.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if !mag.is_one() {
            out.push_str(&mag.to_string());
            out.push('*');
        }
        out.push_str(&name(*v));
    }
    out
}

/// Renders `p op 0` as `lhs op rhs`, flipping the relation so the leading
/// coefficient is positive.
pub fn render_atom(a: &AtomicConstraint, name: &dyn Fn(VarId) -> String) -> String {
    render_relation(a.term(), Some(a.op()), name)
}

fn render_relation(t: &LinearTerm, op: Option<RelOp>, name: &dyn Fn(VarId) -> String) -> String {
    if t.is_constant() {
        let truth = match op {
            Some(RelOp::NonStrict) => !t.constant().is_positive(),
            Some(RelOp::Strict) => t.constant().is_negative(),
            None => t.constant().is_zero(),
        };
        return if truth { "true".into() } else { "false".into() };
    }
    let flip = t.coeffs()[0].1.is_negative();
    let (coeffs, rhs): (Vec<(VarId, BigInt)>, BigInt) = if flip {
        (
            t.coeffs().iter().map(|(v, q)| (*v, -q)).collect(),
            t.constant().clone(),
        )
    } else {
        (t.coeffs().to_vec(), -t.constant())
    };
    let rel = match (op, flip) {
        (None, _) => "=",
        (Some(RelOp::NonStrict), false) => "<=",
        (Some(RelOp::NonStrict), true) => ">=",
        (Some(RelOp::Strict), false) => "<",
        (Some(RelOp::Strict), true) => ">",
    };
    format!("{} {} {}", render_linear(&coeffs, name), rel, rhs)
}

/// Comma-separated rendering; equality pairs are printed once with `=`.
pub fn render_constraint(c: &Constraint, name: &dyn Fn(VarId) -> String) -> String {
    if c.is_true() {
        return "true".into();
    }
    if c.is_false() {
        return "false".into();
    }
    let nonstrict: BTreeSet<&LinearTerm> = c
        .atoms()
        .iter()
        .filter(|a| !a.is_strict())
        .map(|a| a.term())
        .collect();
    let mut parts = Vec::new();
    let mut printed_eq: BTreeSet<LinearTerm> = BTreeSet::new();
    for a in c.atoms() {
        let neg = a.term().negated();
        if !a.is_strict() && nonstrict.contains(&neg) {
            let canon = if a.term().coeffs()[0].1.is_negative() {
                neg
            } else {
                a.term().clone()
            };
            if printed_eq.insert(canon.clone()) {
                parts.push(render_relation(&canon, None, name));
            }
        } else {
            parts.push(render_atom(a, name));
        }
    }
    parts.join(", ")
}
