//! Interpolation problem files.
//!
//! ```text
//! (binary (vars (x Int)) (A (>= x 0)) (B (<= x (- 1))))
//! (sequence (vars (x Int) (y Int)) (>= x 0) (= y (+ x 1)) (<= y 0))
//! (tree (vars ...) (node root phi (node child phi ...) ...))
//! (dag (vars ...) (node en true) (node a phi) (node ex true)
//!      (edge en a label) (edge a ex label) (entry en) (exit ex))
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::encodings::{DagEdge, DagProblem, SequenceProblem, TreeProblem};
use crate::formula::Constraint;

use super::formula::{parse_bindings, parse_constraint, scope_of, Scope};
use super::sexpr::{read_one, SExpr};
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    Binary { a: Constraint, b: Constraint },
    Sequence(SequenceProblem),
    Tree(TreeProblem),
    Dag(DagProblem),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Binary { .. } => "binary",
            Problem::Sequence(_) => "sequence",
            Problem::Tree(_) => "tree",
            Problem::Dag(_) => "dag",
        }
    }
}

fn scope_and_rest(e: &SExpr, args: &[SExpr]) -> Result<(Scope, Vec<SExpr>), SyntaxError> {
    match args.split_first() {
        Some((first, rest)) if matches!(first.call(), Some(("vars", _))) => {
            let (_, bindings) = first.call().expect("checked");
            Ok((scope_of(&parse_bindings(bindings)?), rest.to_vec()))
        }
        _ => Err(e.error("expected `(vars ...)` after the problem kind")),
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, SyntaxError> {
    let e = read_one(text)?;
    let (kind, args) = e.call().ok_or_else(|| e.error("expected a problem"))?;
    let (scope, rest) = scope_and_rest(&e, args)?;
    match kind {
        "binary" => {
            let mut a = None;
            let mut b = None;
            for item in &rest {
                match item.call() {
                    Some(("A", [c])) => a = Some(parse_constraint(c, &scope)?),
                    Some(("B", [c])) => b = Some(parse_constraint(c, &scope)?),
                    _ => return Err(item.error("expected `(A ...)` or `(B ...)`")),
                }
            }
            match (a, b) {
                (Some(a), Some(b)) => Ok(Problem::Binary { a, b }),
                _ => Err(e.error("a binary problem needs both `A` and `B`")),
            }
        }
        "sequence" => {
            let parts = rest
                .iter()
                .map(|c| parse_constraint(c, &scope))
                .collect::<Result<Vec<_>, _>>()?;
            SequenceProblem::new(parts)
                .map(Problem::Sequence)
                .map_err(|err| e.error(err.to_string()))
        }
        "tree" => {
            let [root] = rest.as_slice() else {
                return Err(e.error("a tree problem has exactly one root node"));
            };
            let mut tp = TreeProblem {
                names: vec![],
                labels: vec![],
                children: vec![],
                root: 0,
            };
            tree_node(root, &scope, &mut tp)?;
            tp.validate().map_err(|err| e.error(err.to_string()))?;
            Ok(Problem::Tree(tp))
        }
        "dag" => parse_dag(&e, &scope, &rest).map(Problem::Dag),
        other => Err(e.error(format!("unknown problem kind `{other}`"))),
    }
}

fn tree_node(e: &SExpr, scope: &Scope, tp: &mut TreeProblem) -> Result<usize, SyntaxError> {
    let Some(("node", [name, label, children @ ..])) = e.call() else {
        return Err(e.error("expected `(node name label children...)`"));
    };
    let name = name.expect_symbol("a node name")?;
    if tp.names.iter().any(|n| n == name) {
        return Err(e.error(format!("node `{name}` appears twice")));
    }
    let v = tp.names.len();
    tp.names.push(name.to_string());
    tp.labels.push(parse_constraint(label, scope)?);
    tp.children.push(vec![]);
    for c in children {
        let w = tree_node(c, scope, tp)?;
        tp.children[v].push(w);
    }
    Ok(v)
}

fn parse_dag(e: &SExpr, scope: &Scope, items: &[SExpr]) -> Result<DagProblem, SyntaxError> {
    let mut names = Vec::new();
    let mut labels = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    let (mut entry, mut exit) = (None, None);
    let lookup = |index: &BTreeMap<String, usize>, n: &SExpr| -> Result<usize, SyntaxError> {
        let s = n.expect_symbol("a node name")?;
        index.get(s).copied().ok_or_else(|| n.error(format!("unknown node `{s}`")))
    };
    for item in items {
        match item.call() {
            Some(("node", [name, rest @ ..])) if rest.len() <= 1 => {
                let s = name.expect_symbol("a node name")?;
                if index.insert(s.to_string(), names.len()).is_some() {
                    return Err(item.error(format!("node `{s}` appears twice")));
                }
                names.push(s.to_string());
                labels.push(match rest {
                    [l] => parse_constraint(l, scope)?,
                    _ => Constraint::True,
                });
            }
            Some(("edge", [from, to, label])) => edges.push(DagEdge {
                from: lookup(&index, from)?,
                to: lookup(&index, to)?,
                label: parse_constraint(label, scope)?,
                anchors: BTreeSet::new(),
            }),
            Some(("entry", [n])) => entry = Some(lookup(&index, n)?),
            Some(("exit", [n])) => exit = Some(lookup(&index, n)?),
            _ => return Err(item.error("expected `node`, `edge`, `entry` or `exit`")),
        }
    }
    let (Some(entry), Some(exit)) = (entry, exit) else {
        return Err(e.error("a DAG problem needs `entry` and `exit`"));
    };
    let dp = DagProblem {
        names,
        node_labels: labels,
        edges,
        entry,
        exit,
    };
    dp.validate().map_err(|err| e.error(err.to_string()))?;
    Ok(dp)
}
