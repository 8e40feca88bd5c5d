//! Linear terms and constraints as SMT-LIB style s-expressions.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::engine::Model;
use crate::formula::{Atom, Constraint, LinearTerm, Rational, Rel, Sort, Var};

use super::sexpr::{quote_symbol, SExpr};
use super::SyntaxError;

/// Variables in scope, by name.
pub type Scope = BTreeMap<String, Var>;

pub fn parse_sort(e: &SExpr) -> Result<Sort, SyntaxError> {
    match e.symbol() {
        Some("Int") => Ok(Sort::Int),
        Some("Real") => Ok(Sort::Real),
        _ => Err(e.error(format!("unsupported sort `{e}`"))),
    }
}

/// `((x Int) (y Real) ...)`
pub fn parse_bindings(items: &[SExpr]) -> Result<Vec<Var>, SyntaxError> {
    items
        .iter()
        .map(|b| {
            let pair = b.expect_list("a binding `(name sort)`")?;
            match pair {
                [name, sort] => Ok(Var::new(name.expect_symbol("a variable name")?, parse_sort(sort)?)),
                _ => Err(b.error("expected a binding `(name sort)`")),
            }
        })
        .collect()
}

pub fn scope_of(vars: &[Var]) -> Scope {
    vars.iter().map(|v| (v.name().to_string(), v.clone())).collect()
}

/// Numerals: `12`, `1.5`, `3/4`.
pub fn parse_numeral(s: &str) -> Option<Rational> {
    if s.is_empty() || !s.starts_with(|c: char| c.is_ascii_digit()) {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n).ok()?;
        let d = BigInt::from_str(d).ok()?;
        return (!d.is_zero()).then(|| Rational::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        if !f.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = BigInt::from_str(&format!("{i}{f}")).ok()?;
        let scale = num_traits::pow(BigInt::from(10), f.len());
        return Some(Rational::new(digits, scale));
    }
    BigInt::from_str(s).ok().map(Rational::from_integer)
}

fn constant_of(t: &LinearTerm) -> Option<Rational> {
    t.is_constant().then(|| t.constant_part().clone())
}

pub fn parse_term(e: &SExpr, scope: &Scope) -> Result<LinearTerm, SyntaxError> {
    if let Some(s) = e.symbol() {
        if let Some(q) = parse_numeral(s) {
            return Ok(LinearTerm::constant(q));
        }
        return scope
            .get(s)
            .map(|v| LinearTerm::var(v.clone()))
            .ok_or_else(|| e.error(format!("unknown variable `{s}`")));
    }
    let (head, args) = e.call().ok_or_else(|| e.error("expected a term"))?;
    let terms = || args.iter().map(|a| parse_term(a, scope)).collect::<Result<Vec<_>, _>>();
    match head {
        "+" => Ok(terms()?.into_iter().fold(LinearTerm::zero(), |a, b| a + b)),
        "-" => {
            let ts = terms()?;
            match ts.len() {
                0 => Err(e.error("`-` needs an argument")),
                1 => Ok(-ts.into_iter().next().expect("one")),
                _ => {
                    let mut it = ts.into_iter();
                    let first = it.next().expect("several");
                    Ok(it.fold(first, |a, b| a - b))
                }
            }
        }
        "*" => {
            let mut product: Option<LinearTerm> = None;
            let mut factor = Rational::one();
            for (a, t) in args.iter().zip(terms()?) {
                match constant_of(&t) {
                    Some(c) => factor *= c,
                    None if product.is_none() => product = Some(t),
                    None => return Err(a.error("nonlinear multiplication")),
                }
            }
            Ok(product.unwrap_or_else(|| LinearTerm::int(1)) * &factor)
        }
        "/" => {
            let ts = terms()?;
            let [num, den] = <[LinearTerm; 2]>::try_from(ts).map_err(|_| e.error("`/` takes two arguments"))?;
            match constant_of(&den) {
                Some(d) if !d.is_zero() => Ok(num * &(Rational::one() / d)),
                Some(_) => Err(args[1].error("division by zero")),
                None => Err(args[1].error("division by a non-constant")),
            }
        }
        "to_real" | "to_int" if args.len() == 1 => parse_term(&args[0], scope),
        _ => Err(e.error(format!("unsupported term `{head}`"))),
    }
}

fn comparison(op: &str) -> Option<fn(LinearTerm, LinearTerm) -> Constraint> {
    Some(match op {
        "<=" => |a, b| Constraint::le(a, b),
        "<" => |a, b| Constraint::lt(a, b),
        ">=" => |a, b| Constraint::ge(a, b),
        ">" => |a, b| Constraint::gt(a, b),
        "=" => |a, b| Constraint::eq(a, b),
        _ => return None,
    })
}

pub fn parse_constraint(e: &SExpr, scope: &Scope) -> Result<Constraint, SyntaxError> {
    if let Some(s) = e.symbol() {
        return match s {
            "true" => Ok(Constraint::True),
            "false" => Ok(Constraint::False),
            _ => Err(e.error(format!("unknown constraint `{s}`"))),
        };
    }
    let (head, args) = e.call().ok_or_else(|| e.error("expected a constraint"))?;
    let sub = || args.iter().map(|a| parse_constraint(a, scope)).collect::<Result<Vec<_>, _>>();
    match head {
        "and" => Ok(Constraint::and(sub()?)),
        "or" => Ok(Constraint::or(sub()?)),
        "not" => match sub()?.as_slice() {
            [c] => Ok(Constraint::not(c.clone())),
            _ => Err(e.error("`not` takes one argument")),
        },
        "=>" => match sub()?.as_slice() {
            [a, b] => Ok(Constraint::implies(a.clone(), b.clone())),
            _ => Err(e.error("`=>` takes two arguments")),
        },
        "distinct" => {
            let ts: Vec<LinearTerm> = args.iter().map(|a| parse_term(a, scope)).collect::<Result<_, _>>()?;
            let mut parts = Vec::new();
            for i in 0..ts.len() {
                for j in i + 1..ts.len() {
                    parts.push(Constraint::ne(ts[i].clone(), ts[j].clone()));
                }
            }
            Ok(Constraint::and(parts))
        }
        op => {
            let Some(rel) = comparison(op) else {
                return Err(e.error(format!("unsupported constraint `{op}`")));
            };
            if args.len() < 2 {
                return Err(e.error(format!("`{op}` takes at least two arguments")));
            }
            let ts: Vec<LinearTerm> = args.iter().map(|a| parse_term(a, scope)).collect::<Result<_, _>>()?;
            Ok(Constraint::and(ts.windows(2).map(|w| rel(w[0].clone(), w[1].clone()))))
        }
    }
}

pub fn rational_sexpr(q: &Rational) -> String {
    let abs = q.abs();
    let body = if abs.is_integer() {
        abs.numer().to_string()
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn sum_sexpr(parts: Vec<(Var, Rational)>, constant: Rational) -> String {
    let mut items: Vec<String> = parts
        .into_iter()
        .map(|(v, c)| {
            let name = quote_symbol(v.name());
            if c.is_one() {
                name
            } else if (-c.clone()).is_one() {
                format!("(- {name})")
            } else {
                format!("(* {} {name})", rational_sexpr(&c))
            }
        })
        .collect();
    if !constant.is_zero() || items.is_empty() {
        items.push(rational_sexpr(&constant));
    }
    match items.len() {
        1 => items.pop().expect("one item"),
        _ => format!("(+ {})", items.join(" ")),
    }
}

pub fn term_sexpr(t: &LinearTerm) -> String {
    sum_sexpr(
        t.coeffs().iter().map(|(v, c)| (v.clone(), c.clone())).collect(),
        t.constant_part().clone(),
    )
}

/// `term rel 0` with positive coefficients on the left and everything else
/// moved to the right.
fn atom_sexpr(a: &Atom) -> String {
    let t = a.term();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (v, c) in t.coeffs() {
        if c.is_positive() {
            left.push((v.clone(), c.clone()));
        } else {
            right.push((v.clone(), -c.clone()));
        }
    }
    let l = sum_sexpr(left, Rational::zero());
    let r = sum_sexpr(right, -t.constant_part().clone());
    match a.rel() {
        Rel::Le => format!("(<= {l} {r})"),
        Rel::Lt => format!("(< {l} {r})"),
        Rel::Eq => format!("(= {l} {r})"),
        Rel::Ne => format!("(not (= {l} {r}))"),
    }
}

pub fn constraint_sexpr(c: &Constraint) -> String {
    let join = |op: &str, ps: &[Constraint]| {
        let inner: Vec<String> = ps.iter().map(constraint_sexpr).collect();
        format!("({op} {})", inner.join(" "))
    };
    match c {
        Constraint::True => "true".into(),
        Constraint::False => "false".into(),
        Constraint::Atom(a) => atom_sexpr(a),
        Constraint::And(ps) => join("and", ps),
        Constraint::Or(ps) => join("or", ps),
        Constraint::Not(p) => format!("(not {})", constraint_sexpr(p)),
    }
}

pub fn bindings_sexpr<'a>(vars: impl IntoIterator<Item = &'a Var>) -> String {
    let items: Vec<String> = vars
        .into_iter()
        .map(|v| format!("({} {})", quote_symbol(v.name()), v.sort()))
        .collect();
    format!("({})", items.join(" "))
}

pub fn model_sexpr(m: &Model) -> String {
    let mut out = String::from("(model");
    for (v, q) in m {
        out.push_str(&format!(" ({} {})", quote_symbol(v.name()), rational_sexpr(q)));
    }
    out.push(')');
    out
}

/// `(model (x 1) ...)` over the variables of `scope`.
pub fn parse_model(e: &SExpr, scope: &Scope) -> Result<Model, SyntaxError> {
    let (head, args) = e.call().ok_or_else(|| e.error("expected `(model ...)`"))?;
    if head != "model" {
        return Err(e.error("expected `(model ...)`"));
    }
    let mut m = Model::new();
    for a in args {
        match a.expect_list("an assignment `(var value)`")? {
            [name, value] => {
                let name = name.expect_symbol("a variable name")?;
                let v = scope
                    .get(name)
                    .ok_or_else(|| a.error(format!("unknown variable `{name}`")))?;
                let t = parse_term(value, &Scope::new())?;
                let q = constant_of(&t).ok_or_else(|| value.error("expected a number"))?;
                m.insert(v.clone(), q);
            }
            _ => return Err(a.error("expected an assignment `(var value)`")),
        }
    }
    Ok(m)
}
