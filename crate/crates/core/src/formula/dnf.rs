use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::atom::{Atom, Canonical, Rel};
use super::constraint::Constraint;
use super::term::{Rational, Var};
use super::FormulaError;

/// Conjunction of `<=` / `<` atoms; the leaves of a DNF.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    atoms: Vec<Atom>,
}

impl Cube {
    /// Sorts and deduplicates. Panics on `=` or `!=` atoms.
    pub fn new(mut atoms: Vec<Atom>) -> Cube {
        assert!(
            atoms.iter().all(|a| matches!(a.rel(), Rel::Le | Rel::Lt)),
            "cube atoms must be inequalities"
        );
        atoms.sort();
        atoms.dedup();
        Cube { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.atoms.iter().flat_map(|a| a.vars().cloned()).collect()
    }

    pub fn holds(&self, model: &BTreeMap<Var, Rational>) -> bool {
        self.atoms.iter().all(|a| a.holds(model))
    }

    pub fn conjoin(&self, other: &Cube) -> Cube {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Cube::new(atoms)
    }

    pub fn to_constraint(&self) -> Constraint {
        Constraint::and(self.atoms.iter().cloned().map(Constraint::Atom))
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_constraint())
    }
}

/// Disjunctive normal form; an empty list is `false`.
///
/// Equalities split into two non-strict inequalities and disequalities into
/// two strict ones (which integer canonicalization turns into `t <= -1`).
pub fn to_dnf(c: &Constraint, limit: usize) -> Result<Vec<Cube>, FormulaError> {
    let raw = dnf(c, false, limit)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for atoms in raw {
        let cube = Cube::new(atoms);
        if seen.insert(cube.clone()) {
            out.push(cube);
        }
    }
    Ok(out)
}

type RawDnf = Vec<Vec<Atom>>;

fn literal(c: Canonical) -> RawDnf {
    match c {
        Canonical::True => vec![vec![]],
        Canonical::False => vec![],
        Canonical::Atom(a) => match a.rel() {
            Rel::Le | Rel::Lt => vec![vec![a]],
            Rel::Eq => {
                let lo = Atom::canonical(a.term().clone(), Rel::Le);
                let hi = Atom::canonical(-a.term().clone(), Rel::Le);
                product(literal(lo), literal(hi), usize::MAX).expect("no limit")
            }
            Rel::Ne => {
                let mut out = literal(Atom::canonical(a.term().clone(), Rel::Lt));
                out.extend(literal(Atom::canonical(-a.term().clone(), Rel::Lt)));
                out
            }
        },
    }
}

fn product(a: RawDnf, b: RawDnf, limit: usize) -> Result<RawDnf, FormulaError> {
    if a.len().saturating_mul(b.len()) > limit {
        return Err(FormulaError::CubeLimitExceeded { limit });
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            let mut cube = x.clone();
            cube.extend(y.iter().cloned());
            out.push(cube);
        }
    }
    Ok(out)
}

fn dnf(c: &Constraint, negated: bool, limit: usize) -> Result<RawDnf, FormulaError> {
    let res = match (c, negated) {
        (Constraint::True, false) | (Constraint::False, true) => vec![vec![]],
        (Constraint::True, true) | (Constraint::False, false) => vec![],
        (Constraint::Atom(a), false) => literal(Canonical::Atom(a.clone())),
        (Constraint::Atom(a), true) => literal(a.negate()),
        (Constraint::Not(p), n) => dnf(p, !n, limit)?,
        (Constraint::And(ps), false) | (Constraint::Or(ps), true) => {
            let mut acc: RawDnf = vec![vec![]];
            for p in ps {
                let d = dnf(p, negated, limit)?;
                acc = product(acc, d, limit)?;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        (Constraint::Or(ps), false) | (Constraint::And(ps), true) => {
            let mut acc: RawDnf = Vec::new();
            for p in ps {
                acc.extend(dnf(p, negated, limit)?);
                if acc.len() > limit {
                    return Err(FormulaError::CubeLimitExceeded { limit });
                }
            }
            acc
        }
    };
    if res.len() > limit {
        return Err(FormulaError::CubeLimitExceeded { limit });
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::term::{rat, LinearTerm};

    #[test]
    fn single_atom() {
        let x = Var::int("x");
        let cubes = to_dnf(&Constraint::ge(x.clone(), 0), 100).unwrap();
        assert_eq!(cubes.len(), 1);
        let a = &cubes[0].atoms()[0];
        assert_eq!(a.term().coeff(&x), rat(-1));
        assert_eq!(a.rel(), Rel::Le);
        assert_eq!(a.term().constant_part(), &rat(0));
    }

    #[test]
    fn disequality_splits_into_two_strict_cubes() {
        let res = Var::real("res");
        let x = Var::real("x");
        let c = Constraint::ne(res.clone(), LinearTerm::var(x.clone()) + LinearTerm::int(1));
        let cubes = to_dnf(&c, 100).unwrap();
        assert_eq!(cubes.len(), 2);
        let shown: BTreeSet<String> = cubes.iter().map(|c| c.to_string()).collect();
        // res - x - 1 < 0 and x + 1 - res < 0
        assert!(shown.contains("res - x < 1"), "{shown:?}");
        assert!(shown.contains("res - x > 1"), "{shown:?}");
        assert!(cubes.iter().all(|c| c.atoms()[0].is_strict()));
    }

    #[test]
    fn integer_disequality_is_tightened() {
        let res = Var::int("res");
        let x = Var::int("x");
        let c = Constraint::ne(res, LinearTerm::var(x) + LinearTerm::int(1));
        let cubes = to_dnf(&c, 100).unwrap();
        let shown: BTreeSet<String> = cubes.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["res - x <= 0", "res - x >= 2"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn limit_is_enforced() {
        let xs: Vec<Var> = (0..8).map(|i| Var::int(format!("x{i}"))).collect();
        let c = Constraint::and(xs.iter().map(|x| Constraint::ne(x.clone(), 0)));
        assert!(matches!(to_dnf(&c, 100), Err(FormulaError::CubeLimitExceeded { limit: 100 })));
        assert_eq!(to_dnf(&c, 256).unwrap().len(), 256);
    }
}
