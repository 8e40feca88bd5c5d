//! Quantifier-free linear arithmetic over integer- and real-sorted variables.
//!
//! Arithmetic is exact throughout ([`Rational`] is an arbitrary-precision
//! rational). Atoms are kept in a canonical `term rel 0` form so equal atoms
//! compare equal structurally.

mod atom;
mod constraint;
mod dnf;
mod term;

pub use atom::{Atom, Canonical, Rel};
pub use constraint::Constraint;
pub use dnf::{to_dnf, Cube};
pub use term::{rat, ratio, LinearTerm, Rational, Sort, Var};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("cannot substitute `{term}` for variable `{var}`: sort mismatch")]
    SortMismatch { var: String, term: String },
    #[error("DNF conversion would produce more than {limit} cubes")]
    CubeLimitExceeded { limit: usize },
}

/// Default bound on the number of cubes a DNF conversion may produce.
pub const DEFAULT_CUBE_LIMIT: usize = 10_000;

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;

    fn vars() -> Vec<Var> {
        vec![Var::real("x"), Var::real("y"), Var::real("z")]
    }

    fn arb_term() -> impl Strategy<Value = LinearTerm> {
        (prop::collection::vec(-3i64..=3, 3), -3i64..=3).prop_map(|(cs, k)| {
            LinearTerm::from_parts(vars().into_iter().zip(cs.into_iter().map(rat)), rat(k))
        })
    }

    fn arb_rel() -> impl Strategy<Value = Rel> {
        prop_oneof![Just(Rel::Le), Just(Rel::Lt), Just(Rel::Eq), Just(Rel::Ne)]
    }

    fn arb_constraint() -> impl Strategy<Value = Constraint> {
        let leaf = (arb_term(), arb_rel()).prop_map(|(t, r)| Constraint::atom(t, r));
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..3).prop_map(Constraint::and),
                prop::collection::vec(inner.clone(), 1..3).prop_map(Constraint::or),
                inner.prop_map(Constraint::not),
            ]
        })
    }

    /// Sample points on a grid of halves, so strictness and equalities are hit.
    fn grid() -> Vec<BTreeMap<Var, Rational>> {
        let vals: Vec<Rational> = (-4..=4).map(|i| ratio(i, 2)).collect();
        let mut out = Vec::new();
        for a in &vals {
            for b in &vals {
                for c in &vals {
                    let m: BTreeMap<_, _> = vars().into_iter().zip([a.clone(), b.clone(), c.clone()]).collect();
                    out.push(m);
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn dnf_agrees_with_direct_evaluation(c in arb_constraint()) {
            let cubes = to_dnf(&c, DEFAULT_CUBE_LIMIT).unwrap();
            for m in grid() {
                let direct = c.eval(&m);
                let via_dnf = cubes.iter().any(|cube| cube.holds(&m));
                prop_assert_eq!(direct, via_dnf, "at {:?} for {}", m, c);
            }
        }

        #[test]
        fn dnf_has_no_disequalities_or_negations(c in arb_constraint()) {
            for cube in to_dnf(&c, DEFAULT_CUBE_LIMIT).unwrap() {
                prop_assert!(cube.atoms().iter().all(|a| matches!(a.rel(), Rel::Le | Rel::Lt)));
            }
        }

        #[test]
        fn substitution_composes(c in arb_constraint(), t1 in arb_term(), t2 in arb_term()) {
            let x = Var::real("x");
            let y = Var::real("y");
            let s1: BTreeMap<_, _> = [(x.clone(), t1.clone())].into_iter().collect();
            let s2: BTreeMap<_, _> = [(y.clone(), t2.clone())].into_iter().collect();
            let step = c.substitute(&s1).unwrap().substitute(&s2).unwrap();
            // s2 after s1: x -> t1[s2], y -> t2
            let composed: BTreeMap<_, _> = [(x, t1.substitute(&s2)), (y, t2)].into_iter().collect();
            let direct = c.substitute(&composed).unwrap();
            for m in grid().into_iter().step_by(7) {
                prop_assert_eq!(step.eval(&m), direct.eval(&m));
            }
        }
    }

    #[test]
    fn two_by_two_disjunction_gives_four_cubes() {
        let [x, y, z] = <[Var; 3]>::try_from(vars()).unwrap();
        let a = Constraint::le(x.clone(), 0);
        let b = Constraint::ge(y.clone(), 1);
        let c = Constraint::lt(z.clone(), 2);
        let d = Constraint::le(LinearTerm::var(x) + LinearTerm::var(y), 3);
        let f = Constraint::and([Constraint::or([a.clone(), b.clone()]), Constraint::or([c.clone(), d.clone()])]);
        let cubes = to_dnf(&f, 100).unwrap();
        assert_eq!(cubes.len(), 4);
        // brute force: the satisfying truth assignments of (a|b)&(c|d) are
        // covered exactly by the four cubes
        for m in grid() {
            let (ta, tb, tc, td) = (a.eval(&m), b.eval(&m), c.eval(&m), d.eval(&m));
            let expected = (ta || tb) && (tc || td);
            assert_eq!(cubes.iter().any(|cube| cube.holds(&m)), expected);
        }
    }
}
