use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::term::{fmt_rational, LinearTerm, Rational, Var};

/// Relation of an atom `term rel 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    Ne,
}

impl Rel {
    fn holds(self, value: &Rational) -> bool {
        match self {
            Rel::Le => !value.is_positive(),
            Rel::Lt => value.is_negative(),
            Rel::Eq => value.is_zero(),
            Rel::Ne => !value.is_zero(),
        }
    }
}

/// A canonical linear atom `term rel 0`.
///
/// Canonical means: at least one variable, coprime integer coefficients,
/// positive leading coefficient for `=` and `!=`, and for atoms over integer
/// variables only, `<` is rewritten to `<=` and constants are rounded
/// (`a*x <= b` becomes `a*x <= floor(b)` after dividing by the coefficient gcd).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    term: LinearTerm,
    rel: Rel,
}

/// Result of canonicalizing `term rel 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Canonical {
    True,
    False,
    Atom(Atom),
}

impl Atom {
    pub fn term(&self) -> &LinearTerm {
        &self.term
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn is_strict(&self) -> bool {
        self.rel == Rel::Lt
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.term.vars()
    }

    pub fn holds(&self, model: &BTreeMap<Var, Rational>) -> bool {
        self.rel.holds(&self.term.eval(model))
    }

    pub fn canonical(term: LinearTerm, rel: Rel) -> Canonical {
        if term.is_constant() {
            return if rel.holds(term.constant_part()) {
                Canonical::True
            } else {
                Canonical::False
            };
        }
        let int_atom = term.all_vars_int();
        let (coeffs, constant) = term.into_parts();

        // clear denominators
        let mut lcm = BigInt::one();
        for c in coeffs.values().chain(std::iter::once(&constant)) {
            lcm = lcm.lcm(c.denom());
        }
        let mut icoeffs: BTreeMap<Var, BigInt> = coeffs
            .into_iter()
            .map(|(v, c)| (v, (c * Rational::from_integer(lcm.clone())).to_integer()))
            .collect();
        let mut iconst = (constant * Rational::from_integer(lcm)).to_integer();

        let mut rel = rel;
        if int_atom && rel == Rel::Lt {
            iconst += 1;
            rel = Rel::Le;
        }

        let mut g = BigInt::zero();
        for c in icoeffs.values() {
            g = g.gcd(c);
        }
        debug_assert!(g.is_positive());

        if int_atom {
            match rel {
                Rel::Le => {
                    // sum a_i x_i <= -c  ~>  sum (a_i/g) x_i <= floor(-c/g)
                    iconst = -((-&iconst).div_floor(&g));
                }
                Rel::Eq | Rel::Ne => {
                    if !iconst.is_multiple_of(&g) {
                        return if rel == Rel::Eq {
                            Canonical::False
                        } else {
                            Canonical::True
                        };
                    }
                    iconst /= &g;
                }
                Rel::Lt => unreachable!(),
            }
            for c in icoeffs.values_mut() {
                *c /= &g;
            }
        } else {
            let g = g.gcd(&iconst);
            for c in icoeffs.values_mut() {
                *c /= &g;
            }
            iconst /= &g;
        }

        if matches!(rel, Rel::Eq | Rel::Ne) {
            let lead_negative = icoeffs.values().next().is_some_and(|c| c.is_negative());
            if lead_negative {
                for c in icoeffs.values_mut() {
                    *c = -&*c;
                }
                iconst = -iconst;
            }
        }

        let coeffs = icoeffs
            .into_iter()
            .map(|(v, c)| (v, Rational::from_integer(c)))
            .collect();
        Canonical::Atom(Atom {
            term: LinearTerm::from_raw(coeffs, Rational::from_integer(iconst)),
            rel,
        })
    }

    /// Complement of the atom, canonicalized.
    pub fn negate(&self) -> Canonical {
        match self.rel {
            Rel::Le => Atom::canonical(-self.term.clone(), Rel::Lt),
            Rel::Lt => Atom::canonical(-self.term.clone(), Rel::Le),
            Rel::Eq => Atom::canonical(self.term.clone(), Rel::Ne),
            Rel::Ne => Atom::canonical(self.term.clone(), Rel::Eq),
        }
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> Canonical {
        Atom::canonical(self.term.rename(f), self.rel)
    }

    pub fn substitute(&self, subst: &BTreeMap<Var, LinearTerm>) -> Canonical {
        Atom::canonical(self.term.substitute(subst), self.rel)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // variables on the left, constant on the right; inequalities whose
        // leading coefficient is negative are flipped to >= / >
        let flip = matches!(self.rel, Rel::Le | Rel::Lt)
            && self.term.leading_coeff().is_some_and(|c| c.is_negative());
        let lhs = if flip { -self.term.clone() } else { self.term.clone() };
        let (coeffs, constant) = lhs.into_parts();
        let vars = LinearTerm::from_raw(coeffs, Rational::zero());
        let op = match (self.rel, flip) {
            (Rel::Le, false) => "<=",
            (Rel::Lt, false) => "<",
            (Rel::Le, true) => ">=",
            (Rel::Lt, true) => ">",
            (Rel::Eq, _) => "=",
            (Rel::Ne, _) => "!=",
        };
        write!(f, "{vars} {op} ")?;
        fmt_rational(&-constant, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::term::{rat, ratio};

    fn x() -> Var {
        Var::int("x")
    }
    fn y() -> Var {
        Var::int("y")
    }

    fn atom(c: Canonical) -> Atom {
        match c {
            Canonical::Atom(a) => a,
            other => panic!("expected an atom, got {other:?}"),
        }
    }

    #[test]
    fn strict_integer_atoms_become_non_strict() {
        // n > 0 over the integers is n >= 1
        let a = atom(Atom::canonical(-LinearTerm::var(x()), Rel::Lt));
        assert_eq!(a.rel(), Rel::Le);
        assert_eq!(a.term().coeff(&x()), rat(-1));
        assert_eq!(a.term().constant_part(), &rat(1));
        assert_eq!(a.to_string(), "x >= 1");
    }

    #[test]
    fn integer_tightening_rounds_constant() {
        // 2x <= 1  ~>  x <= 0
        let t = LinearTerm::var(x()).scale(&rat(2)) - LinearTerm::int(1);
        let a = atom(Atom::canonical(t, Rel::Le));
        assert_eq!(a.term().coeff(&x()), rat(1));
        assert_eq!(a.term().constant_part(), &rat(0));
        // -2x <= -1  ~>  x >= 1
        let t = LinearTerm::var(x()).scale(&rat(-2)) + LinearTerm::int(1);
        let a = atom(Atom::canonical(t, Rel::Le));
        assert_eq!(a.to_string(), "x >= 1");
    }

    #[test]
    fn integer_equality_with_gcd_mismatch_is_false() {
        let t = LinearTerm::var(x()).scale(&rat(2)) + LinearTerm::var(y()).scale(&rat(4)) - LinearTerm::int(1);
        assert_eq!(Atom::canonical(t.clone(), Rel::Eq), Canonical::False);
        assert_eq!(Atom::canonical(t, Rel::Ne), Canonical::True);
    }

    #[test]
    fn real_atoms_keep_strictness_and_clear_denominators() {
        let r = Var::real("r");
        let t = LinearTerm::var(r.clone()).scale(&ratio(1, 2)) - LinearTerm::constant(ratio(1, 3));
        let a = atom(Atom::canonical(t, Rel::Lt));
        assert_eq!(a.rel(), Rel::Lt);
        assert_eq!(a.term().coeff(&r), rat(3));
        assert_eq!(a.term().constant_part(), &rat(-2));
    }

    #[test]
    fn equalities_have_positive_leading_coefficient() {
        let t = LinearTerm::var(y()) - LinearTerm::var(x()).scale(&rat(2));
        let a = atom(Atom::canonical(t, Rel::Eq));
        assert_eq!(a.term().coeff(&x()), rat(2));
        assert_eq!(a.term().coeff(&y()), rat(-1));
    }

    #[test]
    fn constant_atoms_fold() {
        assert_eq!(Atom::canonical(LinearTerm::int(0), Rel::Le), Canonical::True);
        assert_eq!(Atom::canonical(LinearTerm::int(0), Rel::Lt), Canonical::False);
        assert_eq!(Atom::canonical(LinearTerm::int(3), Rel::Ne), Canonical::True);
    }
}
