//! The CHC exchange subset: `declare-fun` relations and `assert`ed
//! universally quantified implications.

use std::collections::BTreeMap;

use crate::formula::{Constraint, LinearTerm};
use crate::horn::{ClauseSet, Head, HornClause, HornError, RelationAtom, RelationSymbol};

use super::formula::{
    bindings_sexpr, constraint_sexpr, parse_bindings, parse_constraint, parse_sort, parse_term, scope_of, term_sexpr,
    Scope,
};
use super::sexpr::{quote_symbol, read_all, SExpr};
use super::SyntaxError;

const IGNORED: &[&str] = &["set-logic", "set-info", "set-option", "check-sat", "exit", "get-model", "get-info"];

const OPERATORS: &[&str] = &[
    "and", "or", "not", "=>", "distinct", "<=", "<", ">=", ">", "=", "+", "-", "*", "/", "to_real", "to_int",
];

type Relations = BTreeMap<String, RelationSymbol>;

pub fn parse_chc(text: &str) -> Result<ClauseSet, SyntaxError> {
    let mut relations: Relations = BTreeMap::new();
    let mut order = Vec::new();
    let mut clauses = Vec::new();
    for cmd in read_all(text)? {
        let (head, args) = cmd.call().ok_or_else(|| cmd.error("expected a command"))?;
        match head {
            h if IGNORED.contains(&h) => {}
            "declare-fun" | "declare-rel" => {
                let (name, sorts, ret) = match (head, args) {
                    ("declare-fun", [n, s, r]) => (n, s, Some(r)),
                    ("declare-rel", [n, s]) => (n, s, None),
                    _ => return Err(cmd.error(format!("malformed `{head}`"))),
                };
                if let Some(r) = ret {
                    if r.symbol() != Some("Bool") {
                        return Err(r.error("only Bool-valued relations can be declared"));
                    }
                }
                let name = name.expect_symbol("a relation name")?;
                let sorts = sorts
                    .expect_list("a sort list")?
                    .iter()
                    .map(parse_sort)
                    .collect::<Result<Vec<_>, _>>()?;
                if relations.contains_key(name) {
                    return Err(cmd.error(format!("relation `{name}` declared twice")));
                }
                let sym = RelationSymbol::new(name, sorts);
                relations.insert(name.to_string(), sym.clone());
                order.push(sym);
            }
            "assert" => match args {
                [body] => clauses.push(parse_assertion(body, &relations)?),
                _ => return Err(cmd.error("`assert` takes one argument")),
            },
            other => return Err(cmd.error(format!("unsupported command `{other}`"))),
        }
    }
    Ok(ClauseSet::new(order, clauses)?)
}

fn parse_assertion(e: &SExpr, relations: &Relations) -> Result<HornClause, SyntaxError> {
    let (scope, body) = match e.call() {
        Some(("forall", [bindings, body])) => {
            let vars = parse_bindings(bindings.expect_list("variable bindings")?)?;
            (scope_of(&vars), body)
        }
        Some(("forall", _)) => return Err(e.error("malformed `forall`")),
        _ => (Scope::new(), e),
    };
    match body.call() {
        Some(("=>", [premise, conclusion])) => {
            let (constraint, atoms) = parse_body(premise, &scope, relations)?;
            let head = parse_head(conclusion, &scope, relations)?;
            Ok(HornClause::new(constraint, atoms, head))
        }
        Some(("=>", _)) => Err(body.error("`=>` takes two arguments")),
        Some(("not", [premise])) => {
            let (constraint, atoms) = parse_body(premise, &scope, relations)?;
            Ok(HornClause::new(constraint, atoms, Head::False))
        }
        _ => {
            let head = parse_head(body, &scope, relations)?;
            Ok(HornClause::new(Constraint::True, vec![], head))
        }
    }
}

/// The relation symbol `e` applies, if any.
fn relation_of<'a, 'e>(e: &'e SExpr, relations: &'a Relations) -> Option<(&'a RelationSymbol, &'e [SExpr])> {
    match e.symbol() {
        Some(s) => relations.get(s).map(|r| (r, &[][..])),
        None => {
            let (head, args) = e.call()?;
            relations.get(head).map(|r| (r, args))
        }
    }
}

fn check_declared(e: &SExpr, relations: &Relations) -> Result<(), SyntaxError> {
    if let Some((head, args)) = e.call() {
        if !OPERATORS.contains(&head) && !relations.contains_key(head) {
            return Err(SyntaxError::UndeclaredSymbol {
                name: head.to_string(),
                line: e.line,
                col: e.col,
            });
        }
        for a in args {
            check_declared(a, relations)?;
        }
    }
    Ok(())
}

fn mentions_relation(e: &SExpr, relations: &Relations) -> bool {
    relation_of(e, relations).is_some() || e.list().is_some_and(|xs| xs.iter().any(|x| mentions_relation(x, relations)))
}

fn parse_relation_atom(
    e: &SExpr,
    sym: &RelationSymbol,
    args: &[SExpr],
    scope: &Scope,
) -> Result<RelationAtom, SyntaxError> {
    let terms = args.iter().map(|a| parse_term(a, scope)).collect::<Result<Vec<LinearTerm>, _>>()?;
    RelationAtom::new(sym.clone(), terms).map_err(|err| match err {
        HornError::ArityMismatch { .. } | HornError::ArgumentSort { .. } => SyntaxError::Sort {
            line: e.line,
            col: e.col,
            message: err.to_string(),
        },
        other => other.into(),
    })
}

fn parse_body(
    e: &SExpr,
    scope: &Scope,
    relations: &Relations,
) -> Result<(Constraint, Vec<RelationAtom>), SyntaxError> {
    let mut conjuncts = Vec::new();
    flatten_and(e, &mut conjuncts);
    let mut constraints = Vec::new();
    let mut atoms = Vec::new();
    for c in conjuncts {
        check_declared(c, relations)?;
        if let Some((sym, args)) = relation_of(c, relations) {
            atoms.push(parse_relation_atom(c, sym, args, scope)?);
        } else if mentions_relation(c, relations) {
            return Err(c.error("relation atoms may only occur as conjuncts of the body"));
        } else {
            constraints.push(parse_constraint(c, scope)?);
        }
    }
    Ok((Constraint::and(constraints), atoms))
}

fn flatten_and<'a>(e: &'a SExpr, out: &mut Vec<&'a SExpr>) {
    match e.call() {
        Some(("and", args)) => args.iter().for_each(|a| flatten_and(a, out)),
        _ => out.push(e),
    }
}

fn parse_head(e: &SExpr, scope: &Scope, relations: &Relations) -> Result<Head, SyntaxError> {
    if e.symbol() == Some("false") {
        return Ok(Head::False);
    }
    check_declared(e, relations)?;
    match relation_of(e, relations) {
        Some((sym, args)) => Ok(Head::Atom(parse_relation_atom(e, sym, args, scope)?)),
        None if mentions_relation(e, relations) => Err(e.error("clause head is not a single relation atom")),
        None => Err(e.error("clause head must be a relation atom or `false`")),
    }
}

fn atom_sexpr(a: &RelationAtom) -> String {
    let name = quote_symbol(a.symbol.name());
    if a.args.is_empty() {
        name
    } else {
        let args: Vec<String> = a.args.iter().map(term_sexpr).collect();
        format!("({name} {})", args.join(" "))
    }
}

/// Prints a clause set in the format [`parse_chc`] reads.
pub fn print_chc(hc: &ClauseSet) -> String {
    let mut out = String::from("(set-logic HORN)\n");
    for r in hc.relations() {
        let sorts: Vec<String> = r.sorts().iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("(declare-fun {} ({}) Bool)\n", quote_symbol(r.name()), sorts.join(" ")));
    }
    for c in hc.clauses() {
        let mut parts: Vec<String> = c.body.iter().map(atom_sexpr).collect();
        if !c.constraint.is_true() || parts.is_empty() {
            parts.push(constraint_sexpr(&c.constraint));
        }
        let body = match parts.len() {
            1 => parts.pop().expect("one part"),
            _ => format!("(and {})", parts.join(" ")),
        };
        let head = match &c.head {
            Head::False => "false".to_string(),
            Head::Atom(a) => atom_sexpr(a),
        };
        let vars = c.vars();
        let implication = format!("(=> {body} {head})");
        if vars.is_empty() {
            out.push_str(&format!("(assert {implication})\n"));
        } else {
            out.push_str(&format!("(assert (forall {} {implication}))\n", bindings_sexpr(&vars)));
        }
    }
    out.push_str("(check-sat)\n");
    out
}
