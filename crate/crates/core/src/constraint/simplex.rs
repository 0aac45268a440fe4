//! Exact simplex used to decide satisfiability of conjunctions with strict
//! and non-strict atoms.
//!
//! Each variable is split into a non-negative and a non-positive part. Strict
//! atoms `p < 0` become `p + e <= 0` with a shared `0 <= e <= 1`, and the
//! system is satisfiable iff `e` can be made positive. The tableau is kept
//! integral with fraction-free pivoting: entries are the dictionary scaled by
//! a common positive denominator, so every update is one exact division.
//! Machine integers are tried first; on overflow the run restarts on big
//! integers. Pivoting follows Bland's rule, so the procedure terminates.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::linear::{AtomicConstraint, VarId};

/// Exact integer arithmetic; `None` signals overflow.
trait Int: Clone + Ord + Sized {
    fn from_big(x: &BigInt) -> Option<Self>;
    fn small(x: i64) -> Self;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Option<Self>;
    fn signum(&self) -> Ordering;
}

impl Int for i128 {
    fn from_big(x: &BigInt) -> Option<Self> {
        x.to_i128()
    }
    fn small(x: i64) -> Self {
        x as i128
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn signum(&self) -> Ordering {
        self.cmp(&0)
    }
}

impl Int for BigInt {
    fn from_big(x: &BigInt) -> Option<Self> {
        Some(x.clone())
    }
    fn small(x: i64) -> Self {
        BigInt::from(x)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn signum(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

struct Overflow;

/// Rows are `x_basic = b - sum_j a[j] * x_nonbasic[j]` stored as
/// `[a_0 .. a_n, b]`, all scaled by `den`. Objective rows use the same shape
/// with `b` the current value and `a = -c`, for maximizing `c . x`.
struct Tableau<N> {
    rows: Vec<Vec<N>>,
    objectives: Vec<Vec<N>>,
    den: N,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
}

impl<N: Int> Tableau<N> {
    fn width(&self) -> usize {
        self.nonbasic.len()
    }

    fn pivot(&mut self, r: usize, j: usize) -> Result<(), Overflow> {
        let p = self.rows[r][j].clone();
        let pivot_row = self.rows[r].clone();
        let den = self.den.clone();
        let zero = N::small(0);
        let update = |row: &mut Vec<N>| -> Result<(), Overflow> {
            let f = row[j].clone();
            for (k, x) in row.iter_mut().enumerate() {
                if k == j {
                    continue;
                }
                let t = x.mul(&p).ok_or(Overflow)?;
                let t = if f == zero || pivot_row[k] == zero {
                    t
                } else {
                    t.sub(&f.mul(&pivot_row[k]).ok_or(Overflow)?).ok_or(Overflow)?
                };
                *x = t.div(&den);
            }
            row[j] = f.neg().ok_or(Overflow)?;
            Ok(())
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                update(row)?;
            }
        }
        for row in &mut self.objectives {
            update(row)?;
        }
        self.rows[r][j] = den;
        self.den = p;
        if self.den.signum() == Ordering::Less {
            for row in self.rows.iter_mut().chain(self.objectives.iter_mut()) {
                for x in row.iter_mut() {
                    *x = x.neg().ok_or(Overflow)?;
                }
            }
            self.den = self.den.neg().ok_or(Overflow)?;
        }
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[j]);
        Ok(())
    }

    /// Maximizes objective `o` from a feasible tableau until `stop` holds
    /// for the sign of its value or no improving column is left.
    fn optimize(&mut self, o: usize, stop: impl Fn(Ordering) -> bool) -> Result<(), Overflow> {
        let b = self.width();
        loop {
            if stop(self.objectives[o][b].signum()) {
                return Ok(());
            }
            let entering = (0..b)
                .filter(|&j| self.objectives[o][j].signum() == Ordering::Less)
                .min_by_key(|&j| self.nonbasic[j]);
            let Some(j) = entering else {
                return Ok(());
            };
            let mut best: Option<usize> = None;
            for r in 0..self.rows.len() {
                if self.rows[r][j].signum() != Ordering::Greater {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(s) => {
                        // b_r / a_rj against b_s / a_sj, both denominators positive
                        let lhs = self.rows[r][b].mul(&self.rows[s][j]).ok_or(Overflow)?;
                        let rhs = self.rows[s][b].mul(&self.rows[r][j]).ok_or(Overflow)?;
                        lhs < rhs || (lhs == rhs && self.basic[r] < self.basic[s])
                    }
                };
                if better {
                    best = Some(r);
                }
            }
            match best {
                Some(r) => self.pivot(r, j)?,
                // phase one is bounded by zero and phase two by e <= 1
                None => unreachable!("bounded objective"),
            }
        }
    }

    fn remove_column(&mut self, j: usize) {
        for row in self.rows.iter_mut().chain(self.objectives.iter_mut()) {
            row.remove(j);
        }
        self.nonbasic.remove(j);
    }
}

/// Exact satisfiability over the rationals.
pub(crate) fn satisfiable(atoms: &[AtomicConstraint]) -> bool {
    match solve::<i128>(atoms) {
        Ok(r) => r,
        Err(Overflow) => solve::<BigInt>(atoms).unwrap_or_else(|_| unreachable!("big integers do not overflow")),
    }
}

fn solve<N: Int>(atoms: &[AtomicConstraint]) -> Result<bool, Overflow> {
    let mut index: BTreeMap<VarId, usize> = BTreeMap::new();
    for a in atoms {
        for v in a.term().vars() {
            let n = index.len();
            index.entry(v).or_insert(n);
        }
    }
    let nv = index.len();
    let strict = atoms.iter().any(|a| a.is_strict());
    // columns: x+ (nv), x- (nv), e if strict, x0 (artificial), then b
    let eps_col = if strict { Some(2 * nv) } else { None };
    let x0_col = 2 * nv + usize::from(strict);
    let ncols = x0_col + 1;
    let conv = |x: &BigInt| N::from_big(x).ok_or(Overflow);
    let mut rows = Vec::new();
    for atom in atoms {
        let mut row = vec![N::small(0); ncols + 1];
        for (v, k) in atom.term().coeffs() {
            let i = index[v];
            row[i] = conv(k)?;
            row[nv + i] = conv(&-k)?;
        }
        if let (Some(e), true) = (eps_col, atom.is_strict()) {
            row[e] = N::small(1);
        }
        row[x0_col] = N::small(-1);
        row[ncols] = conv(&-atom.term().constant())?;
        rows.push(row);
    }
    if let Some(e) = eps_col {
        let mut row = vec![N::small(0); ncols + 1];
        row[e] = N::small(1);
        row[x0_col] = N::small(-1);
        row[ncols] = N::small(1);
        rows.push(row);
    }
    let m = rows.len();
    // phase one maximizes -x0, phase two maximizes e
    let mut first = vec![N::small(0); ncols + 1];
    first[x0_col] = N::small(1);
    let mut objectives = vec![first];
    if let Some(e) = eps_col {
        let mut second = vec![N::small(0); ncols + 1];
        second[e] = N::small(-1);
        objectives.push(second);
    }
    let mut t = Tableau {
        rows,
        objectives,
        den: N::small(1),
        basic: (ncols..ncols + m).collect(),
        nonbasic: (0..ncols).collect(),
    };

    let worst = (0..m)
        .filter(|&r| t.rows[r][ncols].signum() == Ordering::Less)
        .min_by(|&r, &s| t.rows[r][ncols].cmp(&t.rows[s][ncols]));
    if let Some(r) = worst {
        t.pivot(r, x0_col)?;
        t.optimize(0, |z| z == Ordering::Equal)?;
        if t.objectives[0][t.width()].signum() == Ordering::Less {
            return Ok(false);
        }
    }
    if eps_col.is_none() {
        return Ok(true);
    }
    // drive x0 out of the basis; it is at value 0
    if let Some(r) = t.basic.iter().position(|&l| l == x0_col) {
        let w = t.width();
        match (0..w).find(|&j| t.rows[r][j].signum() != Ordering::Equal) {
            Some(j) => t.pivot(r, j)?,
            None => {
                t.rows.remove(r);
                t.basic.remove(r);
            }
        }
    }
    let j0 = t.nonbasic.iter().position(|&l| l == x0_col).expect("x0 is nonbasic");
    t.remove_column(j0);
    t.optimize(1, |z| z == Ordering::Greater)?;
    Ok(t.objectives[1][t.width()].signum() == Ordering::Greater)
}

#[cfg(test)]
mod tests {
    use super::super::linear::LinearTerm;
    use super::super::testing::*;
    use super::*;

    #[test]
    fn strictness_matters() {
        assert!(!satisfiable(&[lt(0, &[(0, 1)]), le(0, &[(0, -1)])]));
        assert!(satisfiable(&[le(0, &[(0, 1)]), le(0, &[(0, -1)])]));
        assert!(satisfiable(&[lt(0, &[(0, 1)]), le(-5, &[(0, -1)])]));
    }

    #[test]
    fn negative_bounds_need_phase_one() {
        // X1 >= 3, X2 >= X1 + 2, X2 <= 5
        let sys = [le(3, &[(0, -1)]), le(2, &[(0, 1), (1, -1)]), le(-5, &[(1, 1)])];
        assert!(satisfiable(&sys));
        let sys = [le(3, &[(0, -1)]), lt(2, &[(0, 1), (1, -1)]), le(-5, &[(1, 1)])];
        assert!(!satisfiable(&sys));
    }

    #[test]
    fn agrees_with_elimination() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..400 {
            let n = rng.gen_range(1..7);
            let sys: Vec<AtomicConstraint> = (0..n)
                .map(|_| {
                    let cs: Vec<(u32, i64)> = (0..3).map(|v| (v, rng.gen_range(-3..=3))).collect();
                    atom(rng.gen_range(-4..=4), &cs, rng.gen_bool(0.4))
                })
                .collect();
            assert_eq!(satisfiable(&sys), super::super::fm::satisfiable_within(sys.clone(), usize::MAX).unwrap(), "{sys:?}");
        }
    }

    #[test]
    fn machine_and_big_integers_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let n = rng.gen_range(1..12);
            let sys: Vec<AtomicConstraint> = (0..n)
                .map(|_| {
                    let cs: Vec<(u32, i64)> = (0..4).map(|v| (v, rng.gen_range(-9..=9))).collect();
                    atom(rng.gen_range(-20..=20), &cs, rng.gen_bool(0.3))
                })
                .collect();
            let small = solve::<i128>(&sys).ok().expect("small coefficients fit");
            let big = solve::<BigInt>(&sys).ok().unwrap();
            assert_eq!(small, big, "{sys:?}");
        }
    }

    #[test]
    fn huge_coefficients_fall_back_to_big_integers() {
        let huge = BigInt::from(10).pow(40);
        let t = |c: BigInt, q: BigInt| LinearTerm::new(c, [(VarId(0), q)]);
        // 10^40 * X1 <= 10^40 and X1 >= 1 + 10^-40 style bounds
        let sys = [
            AtomicConstraint::le(t(-huge.clone(), huge.clone())),
            AtomicConstraint::lt(t(huge.clone() + 1, -huge.clone())),
        ];
        assert!(solve::<i128>(&sys).is_err());
        assert!(!satisfiable(&sys));
        let sys = [
            AtomicConstraint::le(t(-huge.clone(), huge.clone())),
            AtomicConstraint::lt(t(huge.clone() - 1, -huge.clone())),
        ];
        assert!(satisfiable(&sys));
    }

    #[test]
    fn empty_and_constant_systems() {
        assert!(satisfiable(&[]));
        assert!(!satisfiable(&[le(1, &[])]));
        assert!(!satisfiable(&[lt(0, &[])]));
        assert!(satisfiable(&[lt(-1, &[])]));
    }
}
