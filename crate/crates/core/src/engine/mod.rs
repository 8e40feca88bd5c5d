//! Satisfiability and Craig interpolation for linear arithmetic.
//!
//! Conjunctions ([`Cube`]s) are decided over the rationals by Fourier–Motzkin
//! elimination (few variables) or an exact simplex (more variables). Both
//! produce a [`FarkasCertificate`] on unsatisfiability. Integer variables are
//! handled by branching on fractional values up to a configurable depth; the
//! integer refutation is a tree of certificates ([`Refutation`]).
//!
//! Interpolants of two cubes are read off the certificate as the weighted sum
//! of the A-side atoms. Branching carries over: a split on an A variable
//! produces a disjunction of interpolants, a split on a B-local variable a
//! conjunction.

pub mod backend;
mod farkas;
mod fm;
mod simplex;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub use farkas::FarkasCertificate;

use crate::formula::{
    rat, to_dnf, Atom, Canonical, Constraint, Cube, FormulaError, LinearTerm, Rational, Rel, Sort, Var,
    DEFAULT_CUBE_LIMIT,
};

pub type Model = BTreeMap<Var, Rational>;

/// Cubes with at most this many variables go to Fourier–Motzkin.
pub const FM_VAR_LIMIT: usize = 6;
pub const DEFAULT_BRANCH_DEPTH: usize = 50;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("conjunction is satisfiable")]
    NotUnsat { model: Model },
    #[error("integer branching exceeded depth {depth}")]
    Unknown { depth: usize },
    #[error("interpolation backend failed: {0}")]
    Backend(String),
    #[error("backend answer rejected: {0}")]
    VerificationFailed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub cube_limit: usize,
    pub branch_depth: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            cube_limit: DEFAULT_CUBE_LIMIT,
            branch_depth: DEFAULT_BRANCH_DEPTH,
        }
    }
}

/// Outcome of the rational check of a cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RationalOutcome {
    Sat(Model),
    Unsat(FarkasCertificate),
}

/// Integer-aware refutation of a cube.
///
/// Certificates index the cube's atoms followed by the branch atoms added on
/// the path from the root (`var <= split` on the low side, `var >= split + 1`
/// on the high side).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refutation {
    Farkas(FarkasCertificate),
    Branch {
        var: Var,
        split: BigInt,
        low: Box<Refutation>,
        high: Box<Refutation>,
    },
}

impl Refutation {
    /// Replays the refutation against `atoms`.
    pub fn verify(&self, atoms: &[Atom]) -> bool {
        match self {
            Refutation::Farkas(cert) => cert.verify(atoms),
            Refutation::Branch { var, split, low, high } => {
                if var.sort() != Sort::Int {
                    return false;
                }
                let (lo, hi) = branch_atoms(var, split);
                let mut left = atoms.to_vec();
                left.push(lo);
                let mut right = atoms.to_vec();
                right.push(hi);
                low.verify(&left) && high.verify(&right)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Sat(Model),
    Unsat(Refutation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

/// A Craig interpolant, for the pair it was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpolant {
    pub formula: Constraint,
}

/// Which interpolant condition a candidate violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InterpolantViolation {
    NotImpliedByA,
    ConsistentWithB,
    ForeignVariables(Vec<Var>),
}

impl std::fmt::Display for InterpolantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InterpolantViolation::NotImpliedByA => f.write_str("A does not entail the candidate"),
            InterpolantViolation::ConsistentWithB => f.write_str("candidate is consistent with B"),
            InterpolantViolation::ForeignVariables(vs) => {
                let names: Vec<&str> = vs.iter().map(|v| v.name()).collect();
                write!(f, "candidate mentions non-shared variables {}", names.join(", "))
            }
        }
    }
}

/// Anything that computes binary interpolants.
pub trait Interpolator: Sync {
    fn interpolate(&self, a: &Constraint, b: &Constraint) -> Result<Interpolant, EngineError>;
}

impl Interpolator for Engine {
    fn interpolate(&self, a: &Constraint, b: &Constraint) -> Result<Interpolant, EngineError> {
        self.binary_interpolant(a, b)
    }
}

/// The built-in engine. Pure and reentrant.
#[derive(Debug, Clone, Copy, Default)]
pub struct Engine {
    pub config: EngineConfig,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Engine { config }
    }

    pub fn dnf(&self, c: &Constraint) -> Result<Vec<Cube>, EngineError> {
        Ok(to_dnf(c, self.config.cube_limit)?)
    }

    /// Rational satisfiability of a cube with a certificate on failure.
    pub fn sat_cube(&self, cube: &Cube) -> RationalOutcome {
        check_atoms(cube.atoms())
    }

    /// Satisfiability of a cube over the intended structure: integer
    /// variables receive integral values.
    pub fn decide_cube(&self, cube: &Cube) -> Result<Decision, EngineError> {
        self.decide_atoms(cube.atoms().to_vec(), self.config.branch_depth)
    }

    fn decide_atoms(&self, atoms: Vec<Atom>, depth: usize) -> Result<Decision, EngineError> {
        let model = match check_atoms(&atoms) {
            RationalOutcome::Unsat(cert) => return Ok(Decision::Unsat(Refutation::Farkas(cert))),
            RationalOutcome::Sat(model) => model,
        };
        let Some((var, value)) = fractional_int(&model) else {
            return Ok(Decision::Sat(model));
        };
        if depth == 0 {
            return Err(EngineError::Unknown {
                depth: self.config.branch_depth,
            });
        }
        let split = value.floor().to_integer();
        let (lo, hi) = branch_atoms(&var, &split);
        let mut left = atoms.clone();
        left.push(lo);
        let low = match self.decide_atoms(left, depth - 1)? {
            Decision::Sat(m) => return Ok(Decision::Sat(m)),
            Decision::Unsat(r) => r,
        };
        let mut right = atoms;
        right.push(hi);
        let high = match self.decide_atoms(right, depth - 1)? {
            Decision::Sat(m) => return Ok(Decision::Sat(m)),
            Decision::Unsat(r) => r,
        };
        Ok(Decision::Unsat(Refutation::Branch {
            var,
            split,
            low: Box::new(low),
            high: Box::new(high),
        }))
    }

    pub fn sat(&self, c: &Constraint) -> Result<SatResult, EngineError> {
        for cube in self.dnf(c)? {
            if let Decision::Sat(model) = self.decide_cube(&cube)? {
                return Ok(SatResult::Sat(model));
            }
        }
        Ok(SatResult::Unsat)
    }

    /// `premises ⊨ goal`
    pub fn entails(&self, premises: &[Constraint], goal: &Constraint) -> Result<bool, EngineError> {
        let query = Constraint::and(
            premises
                .iter()
                .cloned()
                .chain(std::iter::once(Constraint::not(goal.clone()))),
        );
        Ok(!self.sat(&query)?.is_sat())
    }

    /// Craig interpolant of `a ∧ b`, combined as `⋁_i ⋀_j I_ij` over the DNF
    /// cubes of both sides.
    pub fn binary_interpolant(&self, a: &Constraint, b: &Constraint) -> Result<Interpolant, EngineError> {
        let a_cubes = self.dnf(a)?;
        let b_cubes = self.dnf(b)?;
        let mut disjuncts = Vec::with_capacity(a_cubes.len());
        for ac in &a_cubes {
            let mut conjuncts = Vec::with_capacity(b_cubes.len());
            for bc in &b_cubes {
                let i = self.cube_interpolant(ac.atoms().to_vec(), bc.atoms().to_vec(), self.config.branch_depth)?;
                let stop = i.is_false();
                conjuncts.push(i);
                if stop {
                    break;
                }
            }
            disjuncts.push(Constraint::and(conjuncts));
        }
        Ok(Interpolant {
            formula: Constraint::or(disjuncts),
        })
    }

    fn cube_interpolant(&self, a: Vec<Atom>, b: Vec<Atom>, depth: usize) -> Result<Constraint, EngineError> {
        let mut atoms = a.clone();
        atoms.extend(b.iter().cloned());
        let model = match check_atoms(&atoms) {
            RationalOutcome::Unsat(cert) => {
                let n_a = a.len();
                let sum = cert.combination(&atoms, |i| i < n_a);
                let strict = cert.multipliers.iter().any(|(i, m)| *i < n_a && atoms[*i].is_strict() && m.is_positive());
                return Ok(Constraint::atom(sum, if strict { Rel::Lt } else { Rel::Le }));
            }
            RationalOutcome::Sat(model) => model,
        };
        let Some((var, value)) = fractional_int(&model) else {
            return Err(EngineError::NotUnsat { model });
        };
        if depth == 0 {
            return Err(EngineError::Unknown {
                depth: self.config.branch_depth,
            });
        }
        let split = value.floor().to_integer();
        let (lo, hi) = branch_atoms(&var, &split);
        let a_side = a.iter().any(|at| at.vars().any(|v| *v == var));
        if a_side {
            let mut left = a.clone();
            left.push(lo);
            let il = self.cube_interpolant(left, b.clone(), depth - 1)?;
            let mut right = a;
            right.push(hi);
            let ir = self.cube_interpolant(right, b, depth - 1)?;
            Ok(Constraint::or([il, ir]))
        } else {
            let mut left = b.clone();
            left.push(lo);
            let il = self.cube_interpolant(a.clone(), left, depth - 1)?;
            let mut right = b;
            right.push(hi);
            let ir = self.cube_interpolant(a, right, depth - 1)?;
            Ok(Constraint::and([il, ir]))
        }
    }

    /// Checks `a ⊨ i`, `i ∧ b` unsatisfiable and `fv(i) ⊆ fv(a) ∩ fv(b)`.
    pub fn check_interpolant(
        &self,
        a: &Constraint,
        b: &Constraint,
        i: &Constraint,
    ) -> Result<Result<(), InterpolantViolation>, EngineError> {
        let shared: BTreeSet<Var> = a.free_vars().intersection(&b.free_vars()).cloned().collect();
        let foreign: Vec<Var> = i.free_vars().difference(&shared).cloned().collect();
        if !foreign.is_empty() {
            return Ok(Err(InterpolantViolation::ForeignVariables(foreign)));
        }
        if !self.entails(std::slice::from_ref(a), i)? {
            return Ok(Err(InterpolantViolation::NotImpliedByA));
        }
        if self.sat(&Constraint::and([i.clone(), b.clone()]))?.is_sat() {
            return Ok(Err(InterpolantViolation::ConsistentWithB));
        }
        Ok(Ok(()))
    }
}

fn check_atoms(atoms: &[Atom]) -> RationalOutcome {
    let n_vars = atoms.iter().flat_map(|a| a.vars()).collect::<BTreeSet<_>>().len();
    if n_vars <= FM_VAR_LIMIT {
        fm::check(atoms)
    } else {
        simplex::check(atoms)
    }
}

/// Runs both decision procedures; exposed for cross-checking.
pub fn check_with_fourier_motzkin(atoms: &[Atom]) -> RationalOutcome {
    fm::check(atoms)
}

pub fn check_with_simplex(atoms: &[Atom]) -> RationalOutcome {
    simplex::check(atoms)
}

fn fractional_int(model: &Model) -> Option<(Var, Rational)> {
    model
        .iter()
        .find(|(v, q)| v.sort() == Sort::Int && !q.is_integer())
        .map(|(v, q)| (v.clone(), q.clone()))
}

/// `var <= split` and `var >= split + 1`.
fn branch_atoms(var: &Var, split: &BigInt) -> (Atom, Atom) {
    let k = Rational::from_integer(split.clone());
    let lo = LinearTerm::var(var.clone()) - LinearTerm::constant(k.clone());
    let hi = LinearTerm::constant(k + rat(1)) - LinearTerm::var(var.clone());
    let as_atom = |c: Canonical| match c {
        Canonical::Atom(a) => a,
        _ => unreachable!("bound atoms mention their variable"),
    };
    (as_atom(Atom::canonical(lo, Rel::Le)), as_atom(Atom::canonical(hi, Rel::Le)))
}

/// A bound `x <= value` / `x >= value`, strict or not.
#[derive(Debug, Clone)]
pub(crate) struct Bound {
    pub value: Rational,
    pub strict: bool,
}

impl Bound {
    pub fn tighter_upper(&self, other: &Bound) -> bool {
        self.value < other.value || (self.value == other.value && self.strict && !other.strict)
    }

    pub fn tighter_lower(&self, other: &Bound) -> bool {
        self.value > other.value || (self.value == other.value && self.strict && !other.strict)
    }
}

/// A value inside the interval, integral and close to zero when possible.
pub(crate) fn choose_value(lower: Option<&Bound>, upper: Option<&Bound>) -> Rational {
    let lo_int = lower.map(|b| {
        if b.strict {
            b.value.floor() + rat(1)
        } else {
            b.value.ceil()
        }
    });
    let hi_int = upper.map(|b| {
        if b.strict {
            b.value.ceil() - rat(1)
        } else {
            b.value.floor()
        }
    });
    let zero = Rational::zero();
    match (lower, upper) {
        (None, None) => zero,
        (Some(_), None) => lo_int.unwrap().max(zero),
        (None, Some(_)) => hi_int.unwrap().min(zero),
        (Some(l), Some(u)) => {
            let (li, hi) = (lo_int.unwrap(), hi_int.unwrap());
            if li <= hi {
                zero.max(li).min(hi)
            } else if l.value == u.value {
                l.value.clone()
            } else {
                (&l.value + &u.value) / rat(2)
            }
        }
    }
}

#[cfg(test)]
mod tests;
