use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// Shorthand for an integral rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` as an exact rational. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Real,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("Int"),
            Sort::Real => f.write_str("Real"),
        }
    }
}

/// A first-order variable. Two variables are the same iff name and sort agree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    name: Arc<str>,
    sort: Sort,
}

impl Var {
    pub fn new(name: impl AsRef<str>, sort: Sort) -> Self {
        Var {
            name: Arc::from(name.as_ref()),
            sort,
        }
    }

    pub fn int(name: impl AsRef<str>) -> Self {
        Var::new(name, Sort::Int)
    }

    pub fn real(name: impl AsRef<str>) -> Self {
        Var::new(name, Sort::Real)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    /// Same sort, different name.
    pub fn with_name(&self, name: impl AsRef<str>) -> Var {
        Var::new(name, self.sort)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `sum coeffs[v] * v + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearTerm {
    coeffs: BTreeMap<Var, Rational>,
    constant: Rational,
}

impl Default for LinearTerm {
    fn default() -> Self {
        LinearTerm::zero()
    }
}

impl LinearTerm {
    pub fn zero() -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: Rational::zero(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn int(c: i64) -> Self {
        LinearTerm::constant(rat(c))
    }

    pub fn var(v: Var) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rational::one());
        LinearTerm {
            coeffs,
            constant: Rational::zero(),
        }
    }

    pub fn from_parts(coeffs: impl IntoIterator<Item = (Var, Rational)>, constant: Rational) -> Self {
        let mut t = LinearTerm::constant(constant);
        for (v, c) in coeffs {
            t.add_coeff(v, c);
        }
        t
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, Rational> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn coeff(&self, v: &Var) -> Rational {
        self.coeffs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn add_coeff(&mut self, v: Var, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(v) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn scale(&self, k: &Rational) -> LinearTerm {
        if k.is_zero() {
            return LinearTerm::zero();
        }
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// `self + k * other`
    pub fn add_scaled(&mut self, other: &LinearTerm, k: &Rational) {
        if k.is_zero() {
            return;
        }
        for (v, c) in &other.coeffs {
            self.add_coeff(v.clone(), c * k);
        }
        self.constant += &other.constant * k;
    }

    /// Term sort: `Real` as soon as a real variable or a fractional number appears.
    pub fn is_integral(&self) -> bool {
        self.constant.is_integer()
            && self
                .coeffs
                .iter()
                .all(|(v, c)| v.sort() == Sort::Int && c.is_integer())
    }

    pub fn all_vars_int(&self) -> bool {
        self.coeffs.keys().all(|v| v.sort() == Sort::Int)
    }

    /// Evaluates with unassigned variables read as zero.
    pub fn eval(&self, model: &BTreeMap<Var, Rational>) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            if let Some(val) = model.get(v) {
                acc += c * val;
            }
        }
        acc
    }

    pub fn substitute(&self, subst: &BTreeMap<Var, LinearTerm>) -> LinearTerm {
        let mut out = LinearTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match subst.get(v) {
                Some(t) => out.add_scaled(t, c),
                None => out.add_coeff(v.clone(), c.clone()),
            }
        }
        out
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> LinearTerm {
        let mut out = LinearTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            out.add_coeff(f(v), c.clone());
        }
        out
    }

    pub(crate) fn into_parts(self) -> (BTreeMap<Var, Rational>, Rational) {
        (self.coeffs, self.constant)
    }

    pub(crate) fn from_raw(coeffs: BTreeMap<Var, Rational>, constant: Rational) -> LinearTerm {
        debug_assert!(coeffs.values().all(|c| !c.is_zero()));
        LinearTerm { coeffs, constant }
    }

    /// Leading (smallest variable) coefficient, if any.
    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.values().next()
    }
}

impl Add for LinearTerm {
    type Output = LinearTerm;
    fn add(mut self, rhs: LinearTerm) -> LinearTerm {
        self.add_scaled(&rhs, &Rational::one());
        self
    }
}

impl Sub for LinearTerm {
    type Output = LinearTerm;
    fn sub(mut self, rhs: LinearTerm) -> LinearTerm {
        self.add_scaled(&rhs, &-Rational::one());
        self
    }
}

impl Neg for LinearTerm {
    type Output = LinearTerm;
    fn neg(self) -> LinearTerm {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for LinearTerm {
    type Output = LinearTerm;
    fn mul(self, rhs: &Rational) -> LinearTerm {
        self.scale(rhs)
    }
}

impl From<Var> for LinearTerm {
    fn from(v: Var) -> Self {
        LinearTerm::var(v)
    }
}

impl From<&Var> for LinearTerm {
    fn from(v: &Var) -> Self {
        LinearTerm::var(v.clone())
    }
}

impl From<i64> for LinearTerm {
    fn from(c: i64) -> Self {
        LinearTerm::int(c)
    }
}

pub(crate) fn fmt_rational(q: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if !abs.is_one() {
                fmt_rational(&abs, f)?;
                f.write_str("*")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        if first {
            fmt_rational(&self.constant, f)
        } else if !self.constant.is_zero() {
            f.write_str(if self.constant.is_negative() { " - " } else { " + " })?;
            fmt_rational(&self.constant.abs(), f)
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficients_are_dropped() {
        let x = Var::int("x");
        let t = LinearTerm::var(x.clone()) - LinearTerm::var(x.clone());
        assert!(t.coeffs().is_empty());
        let mut u = LinearTerm::var(x.clone());
        u.add_coeff(x, rat(-1));
        assert!(u.is_constant());
    }

    #[test]
    fn substitution_is_simultaneous() {
        let x = Var::int("x");
        let y = Var::int("y");
        let t = LinearTerm::var(x.clone()) + LinearTerm::var(y.clone()).scale(&rat(2));
        let mut s = BTreeMap::new();
        s.insert(x.clone(), LinearTerm::var(y.clone()));
        s.insert(y.clone(), LinearTerm::var(x.clone()));
        let r = t.substitute(&s);
        assert_eq!(r.coeff(&x), rat(2));
        assert_eq!(r.coeff(&y), rat(1));
    }

    #[test]
    fn display_is_readable() {
        let x = Var::int("x");
        let y = Var::int("y");
        let t = LinearTerm::var(x) - LinearTerm::var(y).scale(&rat(3)) + LinearTerm::int(-2);
        assert_eq!(t.to_string(), "x - 3*y - 2");
    }
}
