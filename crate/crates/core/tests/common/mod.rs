//! Independent oracles and generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use clpmc_core::constraint::{AtomicConstraint, Constraint, LinearTerm, VarId};
use clpmc_core::model::Ctl;
use clpmc_core::specialize::{PClause, Pred};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_file(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).expect("corpus file")
}

// ---------------------------------------------------------------------------
// constraints

pub fn atom(c: i64, cs: &[(u32, i64)], strict: bool) -> AtomicConstraint {
    let t = LinearTerm::new(BigInt::from(c), cs.iter().map(|&(v, q)| (VarId(v), BigInt::from(q))));
    if strict {
        AtomicConstraint::lt(t)
    } else {
        AtomicConstraint::le(t)
    }
}

/// A random atom over `nvars` variables with coefficients in `[-k, k]`.
pub fn random_atom(rng: &mut impl Rng, nvars: u32, k: i64) -> AtomicConstraint {
    loop {
        let cs: Vec<(u32, i64)> = (0..nvars).map(|v| (v, rng.gen_range(-k..=k))).collect();
        if cs.iter().all(|(_, q)| *q == 0) {
            continue;
        }
        return atom(rng.gen_range(-k..=k), &cs, rng.gen_bool(0.3));
    }
}

/// A random satisfiable constraint with up to `max_atoms` atoms.
pub fn random_constraint(rng: &mut impl Rng, nvars: u32, k: i64, max_atoms: usize) -> Constraint {
    loop {
        let n = rng.gen_range(1..=max_atoms);
        let c = Constraint::from_atoms((0..n).map(|_| random_atom(rng, nvars, k)));
        if c.satisfiable() {
            return c;
        }
    }
}

/// Every point of `[lo, hi]^dims` whose coordinates are multiples of `1/den`.
pub fn grid(dims: usize, lo: i64, hi: i64, den: i64) -> Vec<Vec<BigRational>> {
    let axis: Vec<BigRational> = (lo * den..=hi * den)
        .map(|n| BigRational::new(BigInt::from(n), BigInt::from(den)))
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        let mut next = Vec::new();
        for p in &out {
            for x in &axis {
                let mut q = p.clone();
                q.push(x.clone());
                next.push(q);
            }
        }
        out = next;
    }
    out
}

pub fn holds(c: &Constraint, point: &[BigRational]) -> bool {
    c.holds_at(|v| point[v.index()].clone())
}

/// A satisfiable constraint: random atoms oriented so that a random integer
/// point in `[-3, 3]^nvars` satisfies all of them.
pub fn sat_constraint_with(rng: &mut impl Rng, nvars: u32, max_atoms: usize, k: i64) -> Constraint {
    let p: Vec<i64> = (0..nvars).map(|_| rng.gen_range(-3..=3)).collect();
    let n = rng.gen_range(1..=max_atoms);
    Constraint::from_atoms((0..n).map(|_| {
        let cs: Vec<i64> = (0..nvars).map(|_| rng.gen_range(-k..=k)).collect();
        let c0 = rng.gen_range(-k..=k);
        let val: i64 = c0 + cs.iter().zip(&p).map(|(q, x)| q * x).sum::<i64>();
        let sign = if val > 0 { -1 } else { 1 };
        let strict = rng.gen_bool(0.3) && val != 0;
        let cs: Vec<(u32, i64)> = cs.iter().enumerate().map(|(i, q)| (i as u32, sign * q)).collect();
        atom(sign * c0, &cs, strict)
    }))
}

// ---------------------------------------------------------------------------
// programs

/// The specialized program expected for the two-counter example under
/// (always, widen), written independently of the renderer's layout.
pub const REFERENCE_PROGRAM: &str = "
prop :- true | not negprop
negprop :- x1 <= 0, x2 = 0 | new1(x1, x2)
new1(x1, x2) :- x1 <= 0, x2 = 0, x1@1 = x1, x2@1 = 1 | new2(x1@1, x2@1)
new2(x1, x2) :- x1 <= 0, x2 >= 0, x1@1 = x1, x2@1 = x2 + 1 | new2(x1@1, x2@1)
";

/// Checks that two clause sets are equal up to a bijective renaming of the
/// definition predicates, comparing constraints by mutual entailment.
pub fn equivalent_up_to_renaming(a: &[PClause], b: &[PClause]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let defs = |cs: &[PClause]| -> Vec<u32> {
        let mut s = BTreeSet::new();
        for c in cs {
            for p in std::iter::once(c.head).chain(c.body.iter().map(|l| l.pred)) {
                if let Pred::Def(id) = p {
                    s.insert(id);
                }
            }
        }
        s.into_iter().collect()
    };
    let (da, db) = (defs(a), defs(b));
    if da.len() != db.len() {
        return false;
    }
    let mut perm: Vec<usize> = (0..db.len()).collect();
    loop {
        let map: BTreeMap<u32, u32> = da.iter().zip(perm.iter().map(|&i| db[i])).map(|(x, y)| (*x, y)).collect();
        let rename = |p: Pred| match p {
            Pred::Def(id) => Pred::Def(map[&id]),
            other => other,
        };
        let mut used = vec![false; b.len()];
        let all = a.iter().all(|ca| {
            let hit = b.iter().enumerate().position(|(j, cb)| {
                !used[j]
                    && rename(ca.head) == cb.head
                    && ca.body.len() == cb.body.len()
                    && ca.body.iter().zip(&cb.body).all(|(x, y)| {
                        rename(x.pred) == y.pred && x.negated == y.negated && x.block == y.block
                    })
                    && ca.constraint.equivalent(&cb.constraint)
            });
            match hit {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        });
        if all {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

// ---------------------------------------------------------------------------
// finite systems and an explicit-state CTL checker

#[derive(Clone, Debug)]
pub enum Update {
    Keep,
    Inc,
    Dec,
    Zero,
    Copy(usize),
}

/// `guard_var <= bound` when `upper`, else `guard_var > bound`.
#[derive(Clone, Debug)]
pub struct FiniteTrans {
    pub guard_var: usize,
    pub upper: bool,
    pub bound: i64,
    pub updates: Vec<Update>,
}

#[derive(Clone, Debug)]
pub enum ElemShape {
    Le(usize, i64),
    Ge(usize, i64),
    Eq(usize, i64),
    LeVar(usize, usize),
}

#[derive(Clone, Debug)]
pub struct FiniteSystem {
    pub nvars: usize,
    pub bound: i64,
    pub inits: Vec<Vec<i64>>,
    pub trans: Vec<FiniteTrans>,
    pub elems: Vec<(String, ElemShape)>,
    pub property: Ctl,
}

impl FiniteTrans {
    fn enabled(&self, s: &[i64]) -> bool {
        if self.upper {
            s[self.guard_var] <= self.bound
        } else {
            s[self.guard_var] > self.bound
        }
    }

    fn apply(&self, s: &[i64]) -> Vec<i64> {
        self.updates
            .iter()
            .enumerate()
            .map(|(i, u)| match u {
                Update::Keep => s[i],
                Update::Inc => s[i] + 1,
                Update::Dec => s[i] - 1,
                Update::Zero => 0,
                Update::Copy(j) => s[*j],
            })
            .collect()
    }
}

fn elem_holds(e: &ElemShape, s: &[i64]) -> bool {
    match *e {
        ElemShape::Le(v, c) => s[v] <= c,
        ElemShape::Ge(v, c) => s[v] >= c,
        ElemShape::Eq(v, c) => s[v] == c,
        ElemShape::LeVar(v, w) => s[v] <= s[w],
    }
}

impl FiniteSystem {
    /// A random system whose reachable states stay inside `[0, bound]`.
    /// The first two transitions have complementary guards, so the relation
    /// is total over the rationals.
    pub fn random(rng: &mut impl Rng) -> FiniteSystem {
        let nvars = rng.gen_range(1..=3);
        let bound = rng.gen_range(2..=3);
        let keep_all = || vec![Update::Keep; nvars];
        let mut trans = Vec::new();
        let split = rng.gen_range(0..bound);
        let mut up = keep_all();
        up[0] = Update::Inc;
        trans.push(FiniteTrans { guard_var: 0, upper: true, bound: split, updates: up });
        let mut down = keep_all();
        down[0] = if rng.gen_bool(0.5) { Update::Zero } else { Update::Dec };
        if nvars > 1 && rng.gen_bool(0.5) {
            down[1] = if rng.gen_bool(0.5) { Update::Zero } else { Update::Copy(0) };
        }
        trans.push(FiniteTrans { guard_var: 0, upper: false, bound: split, updates: down });
        for _ in 0..rng.gen_range(0..=2) {
            let v = rng.gen_range(0..nvars);
            let mut u = keep_all();
            let t = match rng.gen_range(0..4) {
                0 => {
                    u[v] = Update::Inc;
                    FiniteTrans { guard_var: v, upper: true, bound: rng.gen_range(0..bound), updates: u }
                }
                1 => {
                    u[v] = Update::Dec;
                    FiniteTrans { guard_var: v, upper: false, bound: rng.gen_range(0..bound), updates: u }
                }
                2 => {
                    u[v] = Update::Zero;
                    let g = rng.gen_range(0..nvars);
                    FiniteTrans { guard_var: g, upper: rng.gen_bool(0.5), bound: rng.gen_range(0..bound), updates: u }
                }
                _ => {
                    let w = rng.gen_range(0..nvars);
                    u[v] = Update::Copy(w);
                    let g = rng.gen_range(0..nvars);
                    FiniteTrans { guard_var: g, upper: rng.gen_bool(0.5), bound: rng.gen_range(0..bound), updates: u }
                }
            };
            trans.push(t);
        }
        let inits = (0..rng.gen_range(1..=2))
            .map(|_| (0..nvars).map(|_| rng.gen_range(0..=bound)).collect())
            .collect();
        let elems: Vec<(String, ElemShape)> = ["p", "q", "r"]
            .iter()
            .map(|name| {
                let v = rng.gen_range(0..nvars);
                let c = rng.gen_range(0..=bound);
                let shape = match rng.gen_range(0..4) {
                    0 => ElemShape::Le(v, c),
                    1 => ElemShape::Ge(v, c),
                    2 => ElemShape::Eq(v, c),
                    _ => ElemShape::LeVar(v, rng.gen_range(0..nvars)),
                };
                (name.to_string(), shape)
            })
            .collect();
        let property = random_ctl(rng, 3);
        FiniteSystem { nvars, bound, inits, trans, elems, property }
    }

    fn var(&self, i: usize) -> String {
        format!("x{i}")
    }

    pub fn to_spec_text(&self) -> String {
        let mut s = String::from("system finite;\nvars ");
        s.push_str(&(0..self.nvars).map(|i| self.var(i)).collect::<Vec<_>>().join(", "));
        s.push_str(";\n");
        for init in &self.inits {
            let parts: Vec<String> = init.iter().enumerate().map(|(i, v)| format!("{} = {v}", self.var(i))).collect();
            writeln!(s, "init {};", parts.join(", ")).unwrap();
        }
        for (k, t) in self.trans.iter().enumerate() {
            let guard = format!("{} {} {}", self.var(t.guard_var), if t.upper { "<=" } else { ">" }, t.bound);
            let mut parts = vec![guard];
            for (i, u) in t.updates.iter().enumerate() {
                let x = self.var(i);
                parts.push(match u {
                    Update::Keep => format!("{x}' = {x}"),
                    Update::Inc => format!("{x}' = {x} + 1"),
                    Update::Dec => format!("{x}' = {x} - 1"),
                    Update::Zero => format!("{x}' = 0"),
                    Update::Copy(j) => format!("{x}' = {}", self.var(*j)),
                });
            }
            writeln!(s, "trans t{k}: {};", parts.join(", ")).unwrap();
        }
        for (name, e) in &self.elems {
            let body = match *e {
                ElemShape::Le(v, c) => format!("{} <= {c}", self.var(v)),
                ElemShape::Ge(v, c) => format!("{} >= {c}", self.var(v)),
                ElemShape::Eq(v, c) => format!("{} = {c}", self.var(v)),
                ElemShape::LeVar(v, w) => format!("{} <= {}", self.var(v), self.var(w)),
            };
            writeln!(s, "elem {name}: {body};").unwrap();
        }
        writeln!(s, "prop {};", self.property).unwrap();
        s
    }

    /// Reachable states with their successor lists.
    pub fn reachable(&self) -> BTreeMap<Vec<i64>, Vec<Vec<i64>>> {
        let mut graph = BTreeMap::new();
        let mut queue: VecDeque<Vec<i64>> = self.inits.iter().cloned().collect();
        while let Some(s) = queue.pop_front() {
            if graph.contains_key(&s) {
                continue;
            }
            let succ: Vec<Vec<i64>> = self.trans.iter().filter(|t| t.enabled(&s)).map(|t| t.apply(&s)).collect();
            for n in &succ {
                if !graph.contains_key(n) {
                    queue.push_back(n.clone());
                }
            }
            graph.insert(s, succ);
        }
        graph
    }

    /// Whether the property holds in every initial state.
    pub fn check(&self) -> bool {
        let graph = self.reachable();
        let sat = eval(&self.property, &graph, &self.elems);
        self.inits.iter().all(|s| sat.contains(s))
    }
}

type Graph = BTreeMap<Vec<i64>, Vec<Vec<i64>>>;

fn eval(f: &Ctl, g: &Graph, elems: &[(String, ElemShape)]) -> BTreeSet<Vec<i64>> {
    let all = || g.keys().cloned().collect::<BTreeSet<_>>();
    let pre_some = |z: &BTreeSet<Vec<i64>>| -> BTreeSet<Vec<i64>> {
        g.iter().filter(|(_, succ)| succ.iter().any(|n| z.contains(n))).map(|(s, _)| s.clone()).collect()
    };
    let pre_all = |z: &BTreeSet<Vec<i64>>| -> BTreeSet<Vec<i64>> {
        g.iter()
            .filter(|(_, succ)| !succ.is_empty() && succ.iter().all(|n| z.contains(n)))
            .map(|(s, _)| s.clone())
            .collect()
    };
    match f {
        Ctl::True => all(),
        Ctl::Elem(name) => g
            .keys()
            .filter(|s| elems.iter().any(|(n, e)| n == name && elem_holds(e, s)))
            .cloned()
            .collect(),
        Ctl::Not(x) => {
            let inner = eval(x, g, elems);
            all().difference(&inner).cloned().collect()
        }
        Ctl::And(x, y) => {
            let (a, b) = (eval(x, g, elems), eval(y, g, elems));
            a.intersection(&b).cloned().collect()
        }
        Ctl::Ex(x) => pre_some(&eval(x, g, elems)),
        Ctl::Eu(x, y) => {
            let (a, mut z) = (eval(x, g, elems), eval(y, g, elems));
            loop {
                let add: BTreeSet<_> = pre_some(&z).intersection(&a).cloned().collect();
                let next: BTreeSet<_> = z.union(&add).cloned().collect();
                if next == z {
                    return z;
                }
                z = next;
            }
        }
        Ctl::Af(x) => {
            let mut z = eval(x, g, elems);
            loop {
                let next: BTreeSet<_> = z.union(&pre_all(&z)).cloned().collect();
                if next == z {
                    return z;
                }
                z = next;
            }
        }
        Ctl::Ef(x) => {
            let mut z = eval(x, g, elems);
            loop {
                let next: BTreeSet<_> = z.union(&pre_some(&z)).cloned().collect();
                if next == z {
                    return z;
                }
                z = next;
            }
        }
        Ctl::Eg(x) => {
            let mut z = eval(x, g, elems);
            loop {
                let next: BTreeSet<_> = z.intersection(&pre_some(&z)).cloned().collect();
                if next == z {
                    return z;
                }
                z = next;
            }
        }
    }
}

/// A random formula over the elementary properties `p`, `q`, `r`.
pub fn random_ctl(rng: &mut impl Rng, depth: u32) -> Ctl {
    let leaf = |rng: &mut dyn rand::RngCore| match rng.gen_range(0..4) {
        0 => Ctl::elem("p"),
        1 => Ctl::elem("q"),
        2 => Ctl::elem("r"),
        _ => Ctl::True,
    };
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng);
    }
    let sub = |rng: &mut _| random_ctl(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 => Ctl::not(sub(rng)),
        1 => Ctl::and(sub(rng), sub(rng)),
        2 => Ctl::ex(sub(rng)),
        3 => Ctl::eu(sub(rng), sub(rng)),
        4 => Ctl::af(sub(rng)),
        5 => Ctl::ef(sub(rng)),
        6 => Ctl::eg(sub(rng)),
        _ => Ctl::not(Ctl::ef(sub(rng))),
    }
}

// ---------------------------------------------------------------------------
// campaigns shared by the oracle suites and the acceptance target

pub struct CtlCampaign {
    pub systems: usize,
    pub agree: usize,
    pub unknown: usize,
    /// Systems whose property fails according to the explicit checker.
    pub expected_violations: usize,
    pub mismatches: Vec<String>,
}

/// Generates `n` systems with at most 40 reachable states and compares the
/// pipeline against the explicit-state checker.
pub fn ctl_campaign(n: usize, seed: u64, timeout_ms: u64) -> CtlCampaign {
    use clpmc_core::bottomup::Verdict;
    use clpmc_core::harness::{run, RunConfig};
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = CtlCampaign { systems: 0, agree: 0, unknown: 0, expected_violations: 0, mismatches: Vec::new() };
    while out.systems < n {
        let sys = FiniteSystem::random(&mut rng);
        if sys.reachable().len() > 40 {
            continue;
        }
        out.systems += 1;
        let text = sys.to_spec_text();
        let spec = clpmc_core::parse::parse_spec(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        let config = RunConfig { timeout_ms, ..RunConfig::default() };
        let expected = if sys.check() { Verdict::Verified } else { Verdict::Violated };
        out.expected_violations += usize::from(expected == Verdict::Violated);
        match run(&spec, &config).report.verdict {
            Verdict::Unknown => out.unknown += 1,
            v if v == expected => out.agree += 1,
            v => out.mismatches.push(format!("got {v}, expected {expected}\n{text}")),
        }
    }
    out
}

pub struct GroundCampaign {
    pub cases: usize,
    pub discrepancies: Vec<String>,
}

fn box_atoms(block: u32, nvars: u32, lo: i64, hi: i64) -> Vec<AtomicConstraint> {
    let mut v = Vec::new();
    for i in 0..nvars {
        let x = block * nvars + i;
        v.push(atom(lo, &[(x, -1)], false));
        v.push(atom(-hi, &[(x, 1)], false));
    }
    v
}

/// `negate_facts` against point enumeration on a half-integer grid.
pub fn negation_campaign(n: usize, seed: u64) -> GroundCampaign {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let points = grid(2, -3, 3, 2);
    let mut out = GroundCampaign { cases: 0, discrepancies: Vec::new() };
    for _ in 0..n {
        out.cases += 1;
        let facts: Vec<Constraint> =
            (0..rng.gen_range(0..=3)).map(|_| random_constraint(&mut rng, 2, 2, 3)).collect();
        let context = random_constraint(&mut rng, 2, 2, 2).and(&Constraint::from_atoms(box_atoms(0, 2, -3, 3)));
        let pieces = clpmc_core::bottomup::negate_facts(&facts, &context, 100_000).expect("within limit");
        for p in &points {
            let want = holds(&context, p) && !facts.iter().any(|f| holds(f, p));
            let got = pieces.iter().any(|c| holds(c, p));
            if want != got {
                out.discrepancies.push(format!("facts {facts:?} context {context} point {p:?}"));
                break;
            }
        }
    }
    out
}

/// Random stratified programs over two variables, evaluated bottom-up and
/// by ground iteration on a half-integer grid. Every clause keeps its
/// variables inside the grid box and moves between blocks by integer
/// shifts, so the grid is closed under the clauses.
pub fn fixpoint_campaign(n: usize, seed: u64) -> GroundCampaign {
    use clpmc_core::bottomup::{bottom_up, Limits};
    use clpmc_core::model::StateSchema;
    use clpmc_core::specialize::{Literal, SpecProgram};
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let schema = StateSchema::new(vec!["a".into(), "b".into()]);
    let (lo, hi) = (-2, 2);
    let points = grid(2, lo, hi, 2);
    let mut out = GroundCampaign { cases: 0, discrepancies: Vec::new() };
    let mut attempts = 0;
    while out.cases < n {
        attempts += 1;
        assert!(attempts < 50 * n, "too many non-terminating programs");
        let npreds = rng.gen_range(1..=3u32);
        // (head, constraint over blocks 0 and 1, optional body literal, shift)
        let mut clauses = Vec::new();
        let mut shifts: Vec<Option<(i64, i64)>> = Vec::new();
        for i in 1..=npreds {
            for _ in 0..rng.gen_range(1..=3) {
                let mut atoms = box_atoms(0, 2, lo, hi);
                atoms.extend(random_constraint(&mut rng, 2, 2, 2).atoms().iter().cloned());
                let kind = rng.gen_range(0..3);
                if kind == 0 || i == 1 && rng.gen_bool(0.3) {
                    clauses.push(PClause { head: Pred::Def(i), constraint: Constraint::from_atoms(atoms), body: vec![] });
                    shifts.push(None);
                    continue;
                }
                let j = rng.gen_range(1..=i);
                let negated = j < i && rng.gen_bool(0.5);
                let (k0, k1) = (rng.gen_range(-1..=1), rng.gen_range(-1..=1));
                atoms.extend(box_atoms(1, 2, lo, hi));
                // a@1 = a + k0, b@1 = b + k1
                for (x, y, k) in [(0u32, 2u32, k0), (1, 3, k1)] {
                    atoms.push(atom(-k, &[(y, 1), (x, -1)], false));
                    atoms.push(atom(k, &[(y, -1), (x, 1)], false));
                }
                clauses.push(PClause {
                    head: Pred::Def(i),
                    constraint: Constraint::from_atoms(atoms),
                    body: vec![Literal { pred: Pred::Def(j), negated, block: 1 }],
                });
                shifts.push(Some((k0, k1)));
            }
        }
        let program = SpecProgram { schema: schema.clone(), definitions: vec![], clauses: clauses.clone() };
        let outcome = bottom_up(&program, &Limits { max_iterations: 200, ..Limits::default() });
        if outcome.reason.is_some() {
            continue;
        }
        out.cases += 1;

        // ground evaluation, predicate by predicate
        let index = |p: &[BigRational]| points.iter().position(|q| q.as_slice() == p);
        let mut truth: BTreeMap<u32, Vec<bool>> = BTreeMap::new();
        for i in 1..=npreds {
            let mut cur = vec![false; points.len()];
            loop {
                let mut changed = false;
                for (c, shift) in clauses.iter().zip(&shifts) {
                    if c.head != Pred::Def(i) {
                        continue;
                    }
                    for (pi, p) in points.iter().enumerate() {
                        if cur[pi] {
                            continue;
                        }
                        let holds_here = match shift {
                            None => holds(&c.constraint, p),
                            Some((k0, k1)) => {
                                let y = vec![
                                    &p[0] + BigRational::from_integer(BigInt::from(*k0)),
                                    &p[1] + BigRational::from_integer(BigInt::from(*k1)),
                                ];
                                let full = [p[0].clone(), p[1].clone(), y[0].clone(), y[1].clone()];
                                let lit = c.body[0];
                                let Pred::Def(j) = lit.pred else { unreachable!() };
                                holds(&c.constraint, &full)
                                    && index(&y).is_some_and(|yi| {
                                        let t = if j == i { cur[yi] } else { truth[&j][yi] };
                                        t != lit.negated
                                    })
                            }
                        };
                        if holds_here {
                            cur[pi] = true;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            truth.insert(i, cur);
        }
        'check: for i in 1..=npreds {
            for (pi, p) in points.iter().enumerate() {
                let got = outcome.model.facts_of(Pred::Def(i)).iter().any(|f| holds(f, p));
                if got != truth[&i][pi] {
                    out.discrepancies.push(format!("new{i} at {p:?}: got {got}\n{clauses:?}"));
                    break 'check;
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// proptest strategies

pub mod strategies {
    use super::*;
    use proptest::prelude::*;

    /// A satisfiable constraint over `nvars` variables: random atoms are
    /// oriented so that a random integer point satisfies all of them.
    pub fn sat_constraint(nvars: u32, max_atoms: usize, k: i64) -> impl Strategy<Value = Constraint> {
        let point = proptest::collection::vec(-3i64..=3, nvars as usize);
        let atoms = proptest::collection::vec(
            (proptest::collection::vec(-k..=k, nvars as usize), -k..=k, proptest::bool::weighted(0.3)),
            1..=max_atoms,
        );
        (point, atoms).prop_map(move |(p, raw)| {
            Constraint::from_atoms(raw.into_iter().map(|(cs, c0, strict)| {
                let val: i64 = c0 + cs.iter().zip(&p).map(|(q, x)| q * x).sum::<i64>();
                let sign = if val > 0 { -1 } else { 1 };
                let strict = strict && val != 0;
                let cs: Vec<(u32, i64)> = cs.iter().enumerate().map(|(i, q)| (i as u32, sign * q)).collect();
                atom(sign * c0, &cs, strict)
            }))
        })
    }

    /// A pair over the same number (1 to 4) of variables.
    pub fn sat_pair(k: i64) -> impl Strategy<Value = (Constraint, Constraint)> {
        (1u32..=4).prop_flat_map(move |n| (sat_constraint(n, 4, k), sat_constraint(n, 4, k)))
    }
}

// ---------------------------------------------------------------------------
// vertex enumeration for bounded closed constraints

/// Solves the square system `rows * x = rhs` exactly; `None` when singular.
pub fn solve(mut rows: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    use num_traits::Zero;
    let n = rows.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &rows[col][col];
                let pivot_row = rows[col].clone();
                for (x, p) in rows[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &f * p;
                }
                let sub = &f * &rhs[col];
                rhs[r] -= sub;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &rows[i][i]).collect())
}

/// Vertices of a bounded closed constraint over variables `0..dims`.
pub fn vertices(c: &Constraint, dims: usize) -> BTreeSet<Vec<BigRational>> {
    let atoms = c.atoms();
    let mut out = BTreeSet::new();
    let mut pick = vec![0usize; dims];
    fn rec(
        start: usize,
        depth: usize,
        pick: &mut Vec<usize>,
        atoms: &[AtomicConstraint],
        c: &Constraint,
        out: &mut BTreeSet<Vec<BigRational>>,
    ) {
        let dims = pick.len();
        if depth == dims {
            let rows = pick
                .iter()
                .map(|&i| {
                    (0..dims)
                        .map(|v| {
                            let q = atoms[i].term().coeff(VarId(v as u32)).cloned().unwrap_or_default();
                            BigRational::from_integer(q)
                        })
                        .collect()
                })
                .collect();
            let rhs = pick.iter().map(|&i| BigRational::from_integer(-atoms[i].term().constant())).collect();
            if let Some(x) = solve(rows, rhs) {
                if holds(c, &x) {
                    out.insert(x);
                }
            }
            return;
        }
        for i in start..atoms.len() {
            pick[depth] = i;
            rec(i + 1, depth + 1, pick, atoms, c, out);
        }
    }
    rec(0, 0, &mut pick, atoms, c, &mut out);
    out
}

pub fn bounding_box(dims: u32, r: i64) -> Constraint {
    Constraint::from_atoms(box_atoms(0, dims, -r, r))
}
