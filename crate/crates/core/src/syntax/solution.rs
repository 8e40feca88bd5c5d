//! Solution files: one `(define-rel p ((x Int) ...) body)` or
//! `(define-fun p ((x Int) ...) Bool body)` per relation symbol.

use crate::formula::{LinearTerm, Var};
use crate::horn::{ClauseSet, Definition, HornError, Solution};

use super::formula::{bindings_sexpr, constraint_sexpr, parse_bindings, parse_constraint, scope_of};
use super::sexpr::{quote_symbol, read_all, SExpr};
use super::SyntaxError;

/// Reads definitions for the relations of `hc`. A leading `sat` and
/// enclosing `(model ...)` lists are accepted, so solver output can be read
/// back directly.
pub fn parse_solution(text: &str, hc: &ClauseSet) -> Result<Solution, SyntaxError> {
    let mut sol = Solution::new();
    let mut pending: Vec<SExpr> = read_all(text)?;
    pending.reverse();
    while let Some(e) = pending.pop() {
        if e.symbol() == Some("sat") {
            continue;
        }
        let items = e.expect_list("a definition")?;
        let head = items.first().and_then(SExpr::symbol);
        let (name, bindings, body) = match (head, items) {
            (Some("define-rel"), [_, n, b, body]) => (n, b, body),
            (Some("define-fun"), [_, n, b, ret, body]) => {
                if ret.symbol() != Some("Bool") {
                    return Err(ret.error("relation definitions must be Bool-valued"));
                }
                (n, b, body)
            }
            (Some("define-rel" | "define-fun"), _) => return Err(e.error("malformed definition")),
            _ => {
                // a wrapper list such as `(model ...)` or `( ... )`
                let rest = if head == Some("model") { &items[1..] } else { items };
                pending.extend(rest.iter().rev().cloned());
                continue;
            }
        };
        let name_str = name.expect_symbol("a relation name")?;
        let sym = hc.relation(name_str).ok_or_else(|| SyntaxError::UndeclaredSymbol {
            name: name_str.to_string(),
            line: name.line,
            col: name.col,
        })?;
        if sol.get(sym).is_some() {
            return Err(e.error(format!("`{name_str}` is defined twice")));
        }
        let params = parse_bindings(bindings.expect_list("parameter bindings")?)?;
        let body = parse_constraint(body, &scope_of(&params))?;
        sol.insert(sym.clone(), Definition::new(params, body)).map_err(|err| match err {
            HornError::ArityMismatch { .. } | HornError::ArgumentSort { .. } => SyntaxError::Sort {
                line: e.line,
                col: e.col,
                message: err.to_string(),
            },
            other => other.into(),
        })?;
    }
    Ok(sol)
}

/// One `define-rel` per symbol, in symbol order, with parameters renamed to
/// `x0`, `x1`, ...
pub fn print_solution(sol: &Solution) -> String {
    let mut out = String::new();
    for (sym, def) in sol.iter() {
        let params: Vec<Var> = sym
            .sorts()
            .iter()
            .enumerate()
            .map(|(i, s)| Var::new(format!("x{i}"), *s))
            .collect();
        let args: Vec<LinearTerm> = params.iter().cloned().map(LinearTerm::var).collect();
        let body = def.apply(&args).expect("parameter sorts match");
        out.push_str(&format!(
            "(define-rel {} {} {})\n",
            quote_symbol(sym.name()),
            bindings_sexpr(&params),
            constraint_sexpr(&body)
        ));
    }
    out
}
