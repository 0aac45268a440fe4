use std::collections::BTreeSet;
use std::fmt;

/// CTL formulas. `Ef` and `Eg` are surface sugar removed by [`Ctl::desugar`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctl {
    True,
    Elem(String),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Ex(Box<Ctl>),
    Eu(Box<Ctl>, Box<Ctl>),
    Af(Box<Ctl>),
    Ef(Box<Ctl>),
    Eg(Box<Ctl>),
}

impl Ctl {
    pub fn elem(name: &str) -> Ctl {
        Ctl::Elem(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Ctl) -> Ctl {
        Ctl::Not(Box::new(f))
    }

    pub fn and(f: Ctl, g: Ctl) -> Ctl {
        Ctl::And(Box::new(f), Box::new(g))
    }

    pub fn ex(f: Ctl) -> Ctl {
        Ctl::Ex(Box::new(f))
    }

    pub fn eu(f: Ctl, g: Ctl) -> Ctl {
        Ctl::Eu(Box::new(f), Box::new(g))
    }

    pub fn af(f: Ctl) -> Ctl {
        Ctl::Af(Box::new(f))
    }

    pub fn ef(f: Ctl) -> Ctl {
        Ctl::Ef(Box::new(f))
    }

    pub fn eg(f: Ctl) -> Ctl {
        Ctl::Eg(Box::new(f))
    }

    /// Removes `ef`/`eg` and collapses double negations.
    ///
    /// `ef(f)` is `eu(true, f)` and `eg(f)` is `not(af(not(f)))`.
    pub fn desugar(&self) -> Ctl {
        match self {
            Ctl::True | Ctl::Elem(_) => self.clone(),
            Ctl::Not(f) => negate(f.desugar()),
            Ctl::And(f, g) => Ctl::and(f.desugar(), g.desugar()),
            Ctl::Ex(f) => Ctl::ex(f.desugar()),
            Ctl::Eu(f, g) => Ctl::eu(f.desugar(), g.desugar()),
            Ctl::Af(f) => Ctl::af(f.desugar()),
            Ctl::Ef(f) => Ctl::eu(Ctl::True, f.desugar()),
            Ctl::Eg(f) => negate(Ctl::af(negate(f.desugar()))),
        }
    }

    pub fn is_desugared(&self) -> bool {
        match self {
            Ctl::True | Ctl::Elem(_) => true,
            Ctl::Not(f) => !matches!(**f, Ctl::Not(_)) && f.is_desugared(),
            Ctl::And(f, g) | Ctl::Eu(f, g) => f.is_desugared() && g.is_desugared(),
            Ctl::Ex(f) | Ctl::Af(f) => f.is_desugared(),
            Ctl::Ef(_) | Ctl::Eg(_) => false,
        }
    }

    pub fn uses_af(&self) -> bool {
        match self {
            Ctl::True | Ctl::Elem(_) => false,
            Ctl::Af(_) | Ctl::Eg(_) => true,
            Ctl::Not(f) | Ctl::Ex(f) | Ctl::Ef(f) => f.uses_af(),
            Ctl::And(f, g) | Ctl::Eu(f, g) => f.uses_af() || g.uses_af(),
        }
    }

    pub fn elem_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_elems(&mut out);
        out
    }

    fn collect_elems(&self, out: &mut BTreeSet<String>) {
        match self {
            Ctl::True => {}
            Ctl::Elem(e) => {
                out.insert(e.clone());
            }
            Ctl::Not(f) | Ctl::Ex(f) | Ctl::Af(f) | Ctl::Ef(f) | Ctl::Eg(f) => f.collect_elems(out),
            Ctl::And(f, g) | Ctl::Eu(f, g) => {
                f.collect_elems(out);
                g.collect_elems(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Ctl::True | Ctl::Elem(_) => 0,
            Ctl::Not(f) | Ctl::Ex(f) | Ctl::Af(f) | Ctl::Ef(f) | Ctl::Eg(f) => 1 + f.depth(),
            Ctl::And(f, g) | Ctl::Eu(f, g) => 1 + f.depth().max(g.depth()),
        }
    }
}

fn negate(f: Ctl) -> Ctl {
    match f {
        Ctl::Not(inner) => *inner,
        other => Ctl::not(other),
    }
}

impl fmt::Display for Ctl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ctl::True => write!(f, "true"),
            Ctl::Elem(e) => write!(f, "{e}"),
            Ctl::Not(g) => write!(f, "not({g})"),
            Ctl::And(g, h) => write!(f, "and({g}, {h})"),
            Ctl::Ex(g) => write!(f, "ex({g})"),
            Ctl::Eu(g, h) => write!(f, "eu({g}, {h})"),
            Ctl::Af(g) => write!(f, "af({g})"),
            Ctl::Ef(g) => write!(f, "ef({g})"),
            Ctl::Eg(g) => write!(f, "eg({g})"),
        }
    }
}
