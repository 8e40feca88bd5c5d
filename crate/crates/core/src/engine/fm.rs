//! Fourier–Motzkin elimination with proof tracking.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::farkas::FarkasCertificate;
use super::{choose_value, Bound, Model, RationalOutcome};
use crate::formula::{Atom, LinearTerm, Rational, Var};

#[derive(Debug, Clone)]
struct Row {
    term: LinearTerm,
    strict: bool,
    /// multipliers over the input atoms
    proof: BTreeMap<usize, Rational>,
}

impl Row {
    fn scaled(&self, k: &Rational) -> Row {
        Row {
            term: self.term.scale(k),
            strict: self.strict,
            proof: self.proof.iter().map(|(i, m)| (*i, m * k)).collect(),
        }
    }

    fn add(&mut self, other: &Row) {
        self.term.add_scaled(&other.term, &Rational::one());
        self.strict |= other.strict;
        for (i, m) in &other.proof {
            *self.proof.entry(*i).or_insert_with(Rational::zero) += m;
        }
    }

    /// Scale so the leading coefficient has absolute value one.
    fn normalized(self) -> Row {
        match self.term.leading_coeff().map(|c| c.abs()) {
            Some(lead) if !lead.is_one() => self.scaled(&lead.recip()),
            _ => self,
        }
    }

    fn contradiction(&self) -> bool {
        let c = self.term.constant_part();
        self.term.is_constant() && (c.is_positive() || (self.strict && c.is_zero()))
    }

    /// Key identifying the variable part.
    fn shape(&self) -> Vec<(Var, Rational)> {
        self.term.coeffs().iter().map(|(v, c)| (v.clone(), c.clone())).collect()
    }

    /// `self` implies `other` when both have the same shape.
    fn at_least_as_tight(&self, other: &Row) -> bool {
        let (a, b) = (self.term.constant_part(), other.term.constant_part());
        a > b || (a == b && (self.strict || !other.strict))
    }
}

struct Stage {
    var: Var,
    rows: Vec<Row>,
}

pub(crate) fn check(atoms: &[Atom]) -> RationalOutcome {
    let mut rows: Vec<Row> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| Row {
            term: a.term().clone(),
            strict: a.is_strict(),
            proof: [(i, Rational::one())].into_iter().collect(),
        })
        .map(Row::normalized)
        .collect();
    let mut stages: Vec<Stage> = Vec::new();

    loop {
        rows = simplify(rows);
        if let Some(bad) = rows.iter().find(|r| r.contradiction()) {
            return RationalOutcome::Unsat(FarkasCertificate::from_proof(&bad.proof, atoms));
        }
        rows.retain(|r| !r.term.is_constant());
        let vars: BTreeSet<Var> = rows.iter().flat_map(|r| r.term.vars().cloned()).collect();
        let Some(var) = pick_var(&rows, &vars) else {
            break;
        };

        let (mut touching, rest): (Vec<Row>, Vec<Row>) =
            rows.into_iter().partition(|r| !r.term.coeff(&var).is_zero());
        touching.sort_by(|a, b| a.term.cmp(&b.term));
        let mut next = rest;
        let pos: Vec<&Row> = touching.iter().filter(|r| r.term.coeff(&var).is_positive()).collect();
        let neg: Vec<&Row> = touching.iter().filter(|r| r.term.coeff(&var).is_negative()).collect();

        match equality_pair(&pos, &neg) {
            Some((p, n)) => {
                for r in &pos {
                    if !std::ptr::eq(*r, p) {
                        next.push(combine(r, n, &var));
                    }
                }
                for r in &neg {
                    if !std::ptr::eq(*r, n) {
                        next.push(combine(p, r, &var));
                    }
                }
            }
            None => {
                for p in &pos {
                    for n in &neg {
                        next.push(combine(p, n, &var));
                    }
                }
            }
        }
        stages.push(Stage {
            var,
            rows: touching,
        });
        rows = next;
    }

    RationalOutcome::Sat(back_substitute(&stages))
}

fn combine(p: &Row, n: &Row, var: &Var) -> Row {
    let cp = p.term.coeff(var);
    let cn = -n.term.coeff(var);
    let mut out = p.scaled(&cp.recip());
    out.add(&n.scaled(&cn.recip()));
    debug_assert!(out.term.coeff(var).is_zero());
    out.normalized()
}

fn equality_pair<'a>(pos: &[&'a Row], neg: &[&'a Row]) -> Option<(&'a Row, &'a Row)> {
    for p in pos {
        if p.strict {
            continue;
        }
        let negated = -p.term.clone();
        if let Some(n) = neg.iter().find(|n| !n.strict && n.term == negated) {
            return Some((p, n));
        }
    }
    None
}

/// Prefer variables with an equality pair, then the smallest product of
/// lower and upper bounds.
fn pick_var(rows: &[Row], vars: &BTreeSet<Var>) -> Option<Var> {
    let mut best: Option<(usize, Var)> = None;
    for v in vars {
        let pos: Vec<&Row> = rows.iter().filter(|r| r.term.coeff(v).is_positive()).collect();
        let neg: Vec<&Row> = rows.iter().filter(|r| r.term.coeff(v).is_negative()).collect();
        let cost = if equality_pair(&pos, &neg).is_some() {
            pos.len() + neg.len()
        } else {
            (pos.len() * neg.len()).saturating_add(1_000_000)
        };
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, v.clone()));
        }
    }
    best.map(|(_, v)| v)
}

/// Keeps the tightest row per shape.
fn simplify(rows: Vec<Row>) -> Vec<Row> {
    let mut by_shape: BTreeMap<Vec<(Var, Rational)>, Row> = BTreeMap::new();
    let mut constant_rows = Vec::new();
    for r in rows {
        if r.term.is_constant() {
            constant_rows.push(r);
            continue;
        }
        let key = r.shape();
        match by_shape.get(&key) {
            Some(existing) if existing.at_least_as_tight(&r) => {}
            _ => {
                by_shape.insert(key, r);
            }
        }
    }
    constant_rows.extend(by_shape.into_values());
    constant_rows
}

fn back_substitute(stages: &[Stage]) -> Model {
    let mut model = Model::new();
    for stage in stages.iter().rev() {
        let mut lower: Option<Bound> = None;
        let mut upper: Option<Bound> = None;
        for r in &stage.rows {
            let a = r.term.coeff(&stage.var);
            // a*x + rest <= 0  ~>  x <= -rest/a  (a > 0)  or  x >= -rest/a  (a < 0)
            let mut rest = r.term.clone();
            rest.add_coeff(stage.var.clone(), -a.clone());
            let bound = Bound {
                value: -rest.eval(&model) / &a,
                strict: r.strict,
            };
            if a.is_positive() {
                if upper.as_ref().is_none_or(|u| bound.tighter_upper(u)) {
                    upper = Some(bound);
                }
            } else if lower.as_ref().is_none_or(|l| bound.tighter_lower(l)) {
                lower = Some(bound);
            }
        }
        let value = choose_value(lower.as_ref(), upper.as_ref());
        model.insert(stage.var.clone(), value);
    }
    model
}
