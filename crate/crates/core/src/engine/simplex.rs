//! Exact general simplex (bounded slack form) over delta-rationals.
//!
//! Every atom `t + c ⋈ 0` gets a slack `s = t` with the upper bound
//! `s <= -c` (`s <= -c - δ` when strict). Problem variables are unbounded.
//! Bland's rule guarantees termination. On conflict the violated row yields
//! the Farkas multipliers directly.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::farkas::FarkasCertificate;
use super::{Model, RationalOutcome};
use crate::formula::{Atom, Rational, Var};

/// `real + delta * δ` for an infinitesimal `δ > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Delta {
    real: Rational,
    delta: Rational,
}

impl Delta {
    fn zero() -> Delta {
        Delta {
            real: Rational::zero(),
            delta: Rational::zero(),
        }
    }

    fn add_scaled(&mut self, other: &Delta, k: &Rational) {
        self.real += &other.real * k;
        self.delta += &other.delta * k;
    }
}

impl PartialOrd for Delta {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Delta {
    fn cmp(&self, other: &Self) -> Ordering {
        self.real.cmp(&other.real).then_with(|| self.delta.cmp(&other.delta))
    }
}

struct Tableau {
    /// rows[r][c]: basic(r) = sum_c rows[r][c] * col(c), zero on basic columns
    rows: Vec<Vec<Rational>>,
    basic: Vec<usize>,
    /// row index of a basic column
    row_of: Vec<Option<usize>>,
    value: Vec<Delta>,
    upper: Vec<Option<Delta>>,
    /// number of problem variables; columns beyond are slacks
    n_vars: usize,
}

pub(crate) fn check(atoms: &[Atom]) -> RationalOutcome {
    let vars: Vec<Var> = {
        let mut vs: Vec<Var> = atoms.iter().flat_map(|a| a.vars().cloned()).collect();
        vs.sort();
        vs.dedup();
        vs
    };
    let index: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let n = vars.len();
    let m = atoms.len();
    let cols = n + m;

    let mut rows = Vec::with_capacity(m);
    let mut upper = vec![None; cols];
    for (i, a) in atoms.iter().enumerate() {
        let mut row = vec![Rational::zero(); cols];
        for (v, c) in a.term().coeffs() {
            row[index[v]] = c.clone();
        }
        rows.push(row);
        upper[n + i] = Some(Delta {
            real: -a.term().constant_part().clone(),
            delta: if a.is_strict() { -Rational::one() } else { Rational::zero() },
        });
    }
    let mut t = Tableau {
        rows,
        basic: (n..cols).collect(),
        row_of: (0..cols).map(|c| c.checked_sub(n)).collect(),
        value: vec![Delta::zero(); cols],
        upper,
        n_vars: n,
    };

    loop {
        // smallest violating basic column (Bland)
        let violated = (0..m)
            .map(|r| (t.basic[r], r))
            .filter(|&(c, _)| t.upper[c].as_ref().is_some_and(|u| t.value[c] > *u))
            .min();
        let Some((col, row)) = violated else {
            return RationalOutcome::Sat(t.model(&vars));
        };
        // need to decrease `col`: a nonbasic with positive coefficient can
        // decrease freely, one with negative coefficient must be able to grow
        let entering = (0..cols)
            .filter(|&c| t.row_of[c].is_none() && !t.rows[row][c].is_zero())
            .find(|&c| {
                t.rows[row][c].is_positive() || t.upper[c].as_ref().is_none_or(|u| t.value[c] < *u)
            });
        match entering {
            Some(e) => {
                let target = t.upper[col].clone().expect("violated column is bounded");
                t.pivot_and_update(row, e, target);
            }
            None => {
                // basic = sum a_c s_c with every a_c <= 0 and each s_c at its bound:
                // 1 * atom(basic) + sum |a_c| * atom(c) is a contradiction
                let mut proof = BTreeMap::new();
                proof.insert(col - n, Rational::one());
                for c in 0..cols {
                    let a = &t.rows[row][c];
                    if t.row_of[c].is_none() && !a.is_zero() {
                        debug_assert!(c >= n && a.is_negative());
                        proof.insert(c - n, -a.clone());
                    }
                }
                let cert = FarkasCertificate::from_proof(&proof, atoms);
                debug_assert!(cert.verify(atoms), "simplex produced an invalid certificate");
                return RationalOutcome::Unsat(cert);
            }
        }
    }
}

impl Tableau {
    /// Pivot `entering` into the basis at `row` and move the leaving basic
    /// column to `target`.
    fn pivot_and_update(&mut self, row: usize, entering: usize, target: Delta) {
        let leaving = self.basic[row];
        let a = self.rows[row][entering].clone();
        // theta: change of the entering column that brings `leaving` to target
        let mut theta = target.clone();
        theta.add_scaled(&self.value[leaving], &-Rational::one());
        let theta = Delta {
            real: theta.real / &a,
            delta: theta.delta / &a,
        };
        self.value[leaving] = target;
        self.value[entering].add_scaled(&theta, &Rational::one());
        for r in 0..self.rows.len() {
            if r != row {
                let c = self.rows[r][entering].clone();
                if !c.is_zero() {
                    let b = self.basic[r];
                    self.value[b].add_scaled(&theta, &c);
                }
            }
        }

        // rewrite row: leaving = a*entering + rest  ~>  entering = (leaving - rest)/a
        let inv = a.recip();
        let mut new_row: Vec<Rational> = self.rows[row].iter().map(|c| -(c * &inv)).collect();
        new_row[entering] = Rational::zero();
        new_row[leaving] = inv;
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let c = self.rows[r][entering].clone();
            if c.is_zero() {
                continue;
            }
            self.rows[r][entering] = Rational::zero();
            for (k, v) in new_row.iter().enumerate() {
                if !v.is_zero() {
                    self.rows[r][k] += &c * v;
                }
            }
        }
        self.rows[row] = new_row;
        self.basic[row] = entering;
        self.row_of[entering] = Some(row);
        self.row_of[leaving] = None;
    }

    /// Concrete model: pick δ small enough that every bound still holds.
    fn model(&self, vars: &[Var]) -> Model {
        let mut delta = Rational::one();
        for (c, u) in self.upper.iter().enumerate() {
            let Some(u) = u else { continue };
            let v = &self.value[c];
            // v.real + v.delta*δ <= u.real + u.delta*δ
            if v.delta > u.delta {
                let room = &u.real - &v.real;
                let bound = room / (&v.delta - &u.delta);
                if bound < delta {
                    delta = bound;
                }
            }
        }
        vars.iter()
            .enumerate()
            .take(self.n_vars)
            .map(|(i, v)| {
                let d = &self.value[i];
                (v.clone(), &d.real + &d.delta * &delta)
            })
            .collect()
    }
}
