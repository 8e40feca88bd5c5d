use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::atom::{Atom, Canonical, Rel};
use super::term::{LinearTerm, Rational, Sort, Var};
use super::FormulaError;

/// Quantifier-free linear arithmetic formula.
///
/// Built through the smart constructors, which fold constants, flatten nested
/// connectives and push negation into atoms, so `Not` only ever wraps `And`/`Or`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    True,
    False,
    Atom(Atom),
    And(Vec<Constraint>),
    Or(Vec<Constraint>),
    Not(Box<Constraint>),
}

impl From<Canonical> for Constraint {
    fn from(c: Canonical) -> Self {
        match c {
            Canonical::True => Constraint::True,
            Canonical::False => Constraint::False,
            Canonical::Atom(a) => Constraint::Atom(a),
        }
    }
}

impl From<Atom> for Constraint {
    fn from(a: Atom) -> Self {
        Constraint::Atom(a)
    }
}

impl Constraint {
    pub fn atom(term: LinearTerm, rel: Rel) -> Constraint {
        Atom::canonical(term, rel).into()
    }

    pub fn le(a: impl Into<LinearTerm>, b: impl Into<LinearTerm>) -> Constraint {
        Constraint::atom(a.into() - b.into(), Rel::Le)
    }

    pub fn lt(a: impl Into<LinearTerm>, b: impl Into<LinearTerm>) -> Constraint {
        Constraint::atom(a.into() - b.into(), Rel::Lt)
    }

    pub fn ge(a: impl Into<LinearTerm>, b: impl Into<LinearTerm>) -> Constraint {
        Constraint::le(b, a)
    }

    pub fn gt(a: impl Into<LinearTerm>, b: impl Into<LinearTerm>) -> Constraint {
        Constraint::lt(b, a)
    }

    pub fn eq(a: impl Into<LinearTerm>, b: impl Into<LinearTerm>) -> Constraint {
        Constraint::atom(a.into() - b.into(), Rel::Eq)
    }

    pub fn ne(a: impl Into<LinearTerm>, b: impl Into<LinearTerm>) -> Constraint {
        Constraint::atom(a.into() - b.into(), Rel::Ne)
    }

    pub fn and(parts: impl IntoIterator<Item = Constraint>) -> Constraint {
        let mut out: Vec<Constraint> = Vec::new();
        for p in parts {
            match p {
                Constraint::True => {}
                Constraint::False => return Constraint::False,
                Constraint::And(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                other => {
                    if !out.contains(&other) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Constraint::True,
            1 => out.pop().unwrap(),
            _ => Constraint::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Constraint>) -> Constraint {
        let mut out: Vec<Constraint> = Vec::new();
        for p in parts {
            match p {
                Constraint::False => {}
                Constraint::True => return Constraint::True,
                Constraint::Or(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                other => {
                    if !out.contains(&other) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Constraint::False,
            1 => out.pop().unwrap(),
            _ => Constraint::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Constraint) -> Constraint {
        match c {
            Constraint::True => Constraint::False,
            Constraint::False => Constraint::True,
            Constraint::Atom(a) => a.negate().into(),
            Constraint::Not(inner) => *inner,
            other => Constraint::Not(Box::new(other)),
        }
    }

    pub fn implies(a: Constraint, b: Constraint) -> Constraint {
        Constraint::or([Constraint::not(a), b])
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Constraint::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Constraint::False)
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Constraint::True | Constraint::False => {}
            Constraint::Atom(a) => out.push(a),
            Constraint::And(ps) | Constraint::Or(ps) => ps.iter().for_each(|p| p.collect_atoms(out)),
            Constraint::Not(p) => p.collect_atoms(out),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        for a in self.atoms() {
            out.extend(a.vars().cloned());
        }
    }

    /// Structural size (number of nodes).
    pub fn size(&self) -> usize {
        match self {
            Constraint::True | Constraint::False | Constraint::Atom(_) => 1,
            Constraint::And(ps) | Constraint::Or(ps) => 1 + ps.iter().map(Constraint::size).sum::<usize>(),
            Constraint::Not(p) => 1 + p.size(),
        }
    }

    /// Simultaneous substitution of terms for variables.
    pub fn substitute(&self, subst: &BTreeMap<Var, LinearTerm>) -> Result<Constraint, FormulaError> {
        for (v, t) in subst {
            check_sort(v, t)?;
        }
        Ok(self.substitute_unchecked(subst))
    }

    pub(crate) fn substitute_unchecked(&self, subst: &BTreeMap<Var, LinearTerm>) -> Constraint {
        self.map_atoms(&mut |a| a.substitute(subst).into())
    }

    /// Variable renaming; `f` is expected to preserve sorts.
    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> Constraint {
        self.map_atoms(&mut |a| a.rename(f).into())
    }

    pub fn map_atoms(&self, f: &mut impl FnMut(&Atom) -> Constraint) -> Constraint {
        match self {
            Constraint::True => Constraint::True,
            Constraint::False => Constraint::False,
            Constraint::Atom(a) => f(a),
            Constraint::And(ps) => Constraint::and(ps.iter().map(|p| p.map_atoms(f)).collect::<Vec<_>>()),
            Constraint::Or(ps) => Constraint::or(ps.iter().map(|p| p.map_atoms(f)).collect::<Vec<_>>()),
            Constraint::Not(p) => Constraint::not(p.map_atoms(f)),
        }
    }

    /// Truth value under `model`; unassigned variables read as zero.
    pub fn eval(&self, model: &BTreeMap<Var, Rational>) -> bool {
        match self {
            Constraint::True => true,
            Constraint::False => false,
            Constraint::Atom(a) => a.holds(model),
            Constraint::And(ps) => ps.iter().all(|p| p.eval(model)),
            Constraint::Or(ps) => ps.iter().any(|p| p.eval(model)),
            Constraint::Not(p) => !p.eval(model),
        }
    }
}

fn check_sort(v: &Var, t: &LinearTerm) -> Result<(), FormulaError> {
    let ok = match v.sort() {
        Sort::Int => t.is_integral(),
        Sort::Real => t.vars().all(|w| w.sort() == Sort::Real),
    };
    if ok {
        Ok(())
    } else {
        Err(FormulaError::SortMismatch {
            var: v.name().to_string(),
            term: t.to_string(),
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_joined(f: &mut fmt::Formatter<'_>, ps: &[Constraint], sep: &str) -> fmt::Result {
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                match p {
                    Constraint::And(_) | Constraint::Or(_) => write!(f, "({p})")?,
                    _ => write!(f, "{p}")?,
                }
            }
            Ok(())
        }
        match self {
            Constraint::True => f.write_str("true"),
            Constraint::False => f.write_str("false"),
            Constraint::Atom(a) => write!(f, "{a}"),
            Constraint::And(ps) => write_joined(f, ps, " && "),
            Constraint::Or(ps) => write_joined(f, ps, " || "),
            Constraint::Not(p) => write!(f, "!({p})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::term::rat;

    fn v(n: &str) -> Var {
        Var::int(n)
    }

    #[test]
    fn free_vars_scans_atoms() {
        assert!(Constraint::True.free_vars().is_empty());
        let c = Constraint::and([
            Constraint::ge(v("x"), 0),
            Constraint::not(Constraint::eq(v("y"), v("x"))),
        ]);
        let fv: Vec<_> = c.free_vars().into_iter().map(|v| v.name().to_string()).collect();
        assert_eq!(fv, ["x", "y"]);
    }

    #[test]
    fn free_vars_of_clause_two_body() {
        // X' >= 0 together with the frame equality Res = Res and argument links
        let c = Constraint::and([
            Constraint::ge(v("X'"), 0),
            Constraint::eq(v("X"), v("X")),
            Constraint::eq(v("Res"), v("Res")),
        ]);
        // the frame equalities are trivially true and vanish
        assert_eq!(c.free_vars().len(), 1);
        let c = Constraint::and([Constraint::ge(v("X'"), 0), Constraint::le(v("X"), v("Res"))]);
        let names: BTreeSet<_> = c.free_vars().iter().map(|v| v.name().to_string()).collect();
        assert_eq!(names, ["Res", "X", "X'"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn substitute_folds_constants() {
        let c = Constraint::eq(v("res"), LinearTerm::var(v("x")) + LinearTerm::int(1));
        let mut s = BTreeMap::new();
        s.insert(v("x"), LinearTerm::int(0));
        let r = c.substitute(&s).unwrap();
        assert_eq!(r, Constraint::eq(v("res"), 1));
    }

    #[test]
    fn identity_substitution_is_syntactic_identity() {
        let c = Constraint::or([Constraint::le(v("x"), v("y")), Constraint::ne(v("y"), 3)]);
        let s: BTreeMap<_, _> = [(v("x"), LinearTerm::var(v("x")))].into_iter().collect();
        assert_eq!(c.substitute(&s).unwrap(), c);
    }

    #[test]
    fn substitute_renames_call_result() {
        // rec = n + 1 with n := tmp gives rec = tmp + 1
        let c = Constraint::eq(v("rec"), LinearTerm::var(v("n")) + LinearTerm::int(1));
        let s: BTreeMap<_, _> = [(v("n"), LinearTerm::var(v("tmp")))].into_iter().collect();
        assert_eq!(
            c.substitute(&s).unwrap(),
            Constraint::eq(v("rec"), LinearTerm::var(v("tmp")) + LinearTerm::int(1))
        );
    }

    #[test]
    fn substitute_rejects_sort_mismatch() {
        let c = Constraint::ge(v("x"), 0);
        let s: BTreeMap<_, _> = [(v("x"), LinearTerm::var(Var::real("r")))].into_iter().collect();
        assert!(matches!(c.substitute(&s), Err(FormulaError::SortMismatch { .. })));
        let s: BTreeMap<_, _> = [(v("x"), LinearTerm::constant(crate::formula::ratio(1, 2)))]
            .into_iter()
            .collect();
        assert!(c.substitute(&s).is_err());
    }

    #[test]
    fn negation_is_pushed_into_atoms() {
        let c = Constraint::not(Constraint::le(v("x"), 0));
        assert_eq!(c, Constraint::ge(v("x"), 1));
        let d = Constraint::not(Constraint::not(Constraint::and([
            Constraint::le(v("x"), 0),
            Constraint::le(v("y"), 0),
        ])));
        assert!(matches!(d, Constraint::And(_)));
    }

    #[test]
    fn eval_reads_missing_as_zero() {
        let c = Constraint::and([Constraint::le(v("x"), 0), Constraint::ge(v("y"), 2)]);
        let m: BTreeMap<_, _> = [(v("y"), rat(2))].into_iter().collect();
        assert!(c.eval(&m));
    }
}
