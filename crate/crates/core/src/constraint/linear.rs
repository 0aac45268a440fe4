use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Index of a variable in a per-context variable table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0 + 1)
    }
}

/// A linear polynomial `q0 + q1*X1 + ... + qk*Xk` with integer coefficients.
///
/// Terms are kept primitive: the gcd of the constant and all coefficients
/// is 1 (or the term is identically zero). Coefficients are sorted by
/// variable and zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearTerm {
    constant: BigInt,
    coeffs: Vec<(VarId, BigInt)>,
}

impl LinearTerm {
    /// Builds a primitive term, merging repeated variables and dividing out
    /// the common (positive) gcd.
    pub fn new(constant: BigInt, coeffs: impl IntoIterator<Item = (VarId, BigInt)>) -> Self {
        let mut raw: Vec<(VarId, BigInt)> = coeffs.into_iter().collect();
        raw.sort_by_key(|(v, _)| *v);
        let mut merged: Vec<(VarId, BigInt)> = Vec::with_capacity(raw.len());
        for (v, q) in raw {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc += q,
                _ => merged.push((v, q)),
            }
        }
        merged.retain(|(_, q)| !q.is_zero());
        let mut term = LinearTerm {
            constant,
            coeffs: merged,
        };
        term.make_primitive();
        term
    }

    pub fn zero() -> Self {
        LinearTerm {
            constant: BigInt::zero(),
            coeffs: Vec::new(),
        }
    }

    pub fn var(v: VarId) -> Self {
        LinearTerm {
            constant: BigInt::zero(),
            coeffs: vec![(v, BigInt::one())],
        }
    }

    fn make_primitive(&mut self) {
        let mut g = self.constant.abs();
        for (_, q) in &self.coeffs {
            if g.is_one() {
                return;
            }
            g = g.gcd(q);
        }
        if g.is_zero() || g.is_one() {
            return;
        }
        self.constant /= &g;
        for (_, q) in &mut self.coeffs {
            *q /= &g;
        }
    }

    pub fn constant(&self) -> &BigInt {
        &self.constant
    }

    pub fn coeffs(&self) -> &[(VarId, BigInt)] {
        &self.coeffs
    }

    pub fn coeff(&self, v: VarId) -> Option<&BigInt> {
        self.coeffs
            .binary_search_by_key(&v, |(w, _)| *w)
            .ok()
            .map(|i| &self.coeffs[i].1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.iter().map(|(v, _)| *v)
    }

    pub fn negated(&self) -> Self {
        LinearTerm {
            constant: -&self.constant,
            coeffs: self.coeffs.iter().map(|(v, q)| (*v, -q)).collect(),
        }
    }

    /// `k1 * self + k2 * other`, made primitive. Only meaningful for
    /// inequation manipulation where positive rescaling is harmless.
    pub fn combine(&self, k1: &BigInt, other: &LinearTerm, k2: &BigInt) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + other.coeffs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.coeffs.len() || j < other.coeffs.len() {
            let take_left = match (self.coeffs.get(i), other.coeffs.get(j)) {
                (Some((a, _)), Some((b, _))) => a.cmp(b),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match take_left {
                Ordering::Less => {
                    let (v, q) = &self.coeffs[i];
                    coeffs.push((*v, q * k1));
                    i += 1;
                }
                Ordering::Greater => {
                    let (v, q) = &other.coeffs[j];
                    coeffs.push((*v, q * k2));
                    j += 1;
                }
                Ordering::Equal => {
                    let (v, q) = &self.coeffs[i];
                    let r = &other.coeffs[j].1;
                    let s = q * k1 + r * k2;
                    if !s.is_zero() {
                        coeffs.push((*v, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        let mut term = LinearTerm {
            constant: &self.constant * k1 + &other.constant * k2,
            coeffs,
        };
        term.make_primitive();
        term
    }

    pub fn rename(&self, f: &impl Fn(VarId) -> VarId) -> Self {
        LinearTerm::new(
            self.constant.clone(),
            self.coeffs.iter().map(|(v, q)| (f(*v), q.clone())),
        )
    }

    /// Gcd of the variable coefficients alone (the constant excluded).
    pub(crate) fn coeff_gcd(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, q) in &self.coeffs {
            g = g.gcd(q);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Absolute values of q0, q1, ..., in position order (constant first).
    pub fn abs_coefficients(&self) -> impl Iterator<Item = BigInt> + '_ {
        std::iter::once(self.constant.abs()).chain(self.coeffs.iter().map(|(_, q)| q.abs()))
    }
}

impl PartialOrd for LinearTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LinearTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .cmp(&other.coeffs)
            .then_with(|| self.constant.cmp(&other.constant))
    }
}

/// Relational operator of an atomic constraint `p op 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelOp {
    /// `p <= 0`
    NonStrict,
    /// `p < 0`
    Strict,
}

/// An atomic constraint `p <= 0` or `p < 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomicConstraint {
    term: LinearTerm,
    op: RelOp,
}

impl AtomicConstraint {
    pub fn new(term: LinearTerm, op: RelOp) -> Self {
        AtomicConstraint { term, op }
    }

    pub fn le(term: LinearTerm) -> Self {
        Self::new(term, RelOp::NonStrict)
    }

    pub fn lt(term: LinearTerm) -> Self {
        Self::new(term, RelOp::Strict)
    }

    pub fn term(&self) -> &LinearTerm {
        &self.term
    }

    pub fn op(&self) -> RelOp {
        self.op
    }

    pub fn is_strict(&self) -> bool {
        self.op == RelOp::Strict
    }

    /// The complement: `not(p <= 0)` is `-p < 0` and `not(p < 0)` is `-p <= 0`.
    pub fn negated(&self) -> Self {
        let op = match self.op {
            RelOp::NonStrict => RelOp::Strict,
            RelOp::Strict => RelOp::NonStrict,
        };
        AtomicConstraint::new(self.term.negated(), op)
    }

    pub fn closure(&self) -> Self {
        AtomicConstraint::new(self.term.clone(), RelOp::NonStrict)
    }

    /// Truth value of a variable-free atom, `None` otherwise.
    pub fn constant_truth(&self) -> Option<bool> {
        if !self.term.is_constant() {
            return None;
        }
        let c = self.term.constant();
        Some(match self.op {
            RelOp::NonStrict => !c.is_positive(),
            RelOp::Strict => c.is_negative(),
        })
    }

    pub fn rename(&self, f: &impl Fn(VarId) -> VarId) -> Self {
        AtomicConstraint::new(self.term.rename(f), self.op)
    }

    /// `max{|q0|, ..., |qk|}`.
    pub fn maxcoeff(&self) -> BigInt {
        self.term
            .abs_coefficients()
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// `|q0| + ... + |qk|`.
    pub fn sumcoeff(&self) -> BigInt {
        self.term.abs_coefficients().sum()
    }

    /// Evaluates the atom at a point given as a rational assignment.
    pub fn holds_at(&self, value: &impl Fn(VarId) -> num_rational::BigRational) -> bool {
        let mut acc = num_rational::BigRational::from_integer(self.term.constant.clone());
        for (v, q) in &self.term.coeffs {
            acc += value(*v) * num_rational::BigRational::from_integer(q.clone());
        }
        match self.op {
            RelOp::NonStrict => !acc.is_positive(),
            RelOp::Strict => acc.is_negative(),
        }
    }
}

impl PartialOrd for AtomicConstraint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AtomicConstraint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.op
            .cmp(&other.op)
            .then_with(|| self.term.cmp(&other.term))
    }
}
