//! Interpolation problems and their correspondence with Horn clause
//! fragments, in both directions.
//!
//! | problem            | clauses                  |
//! |--------------------|--------------------------|
//! | binary             | linear tree-like pair    |
//! | inductive sequence | linear tree-like         |
//! | tree               | tree-like                |
//! | restricted DAG     | linear                   |

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::analysis::{component_indices, NormalizedClauseSet};
use crate::engine::{Engine, EngineError};
use crate::formula::{Constraint, LinearTerm, Var};
use crate::horn::{ClauseSet, Head, HornClause, RelationAtom, RelationSymbol};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("clause set is not {expected}: {reason}")]
    WrongFragment { expected: &'static str, reason: String },
    #[error("malformed problem: {0}")]
    Malformed(String),
}

fn wrong(expected: &'static str, reason: impl Into<String>) -> EncodingError {
    EncodingError::WrongFragment {
        expected,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceProblem {
    pub parts: Vec<Constraint>,
}

impl SequenceProblem {
    pub fn new(parts: Vec<Constraint>) -> Result<Self, EncodingError> {
        if parts.is_empty() {
            return Err(EncodingError::Malformed("a sequence needs at least one part".into()));
        }
        Ok(SequenceProblem { parts })
    }

    /// `fv(T1..Ti) ∩ fv(Ti+1..Tn)` for `i` in `0..=n`.
    pub fn shared_vars(&self) -> Vec<BTreeSet<Var>> {
        let n = self.parts.len();
        let fvs: Vec<BTreeSet<Var>> = self.parts.iter().map(Constraint::free_vars).collect();
        (0..=n)
            .map(|i| {
                let left: BTreeSet<&Var> = fvs[..i].iter().flatten().collect();
                let right: BTreeSet<&Var> = fvs[i..].iter().flatten().collect();
                left.intersection(&right).map(|v| (*v).clone()).collect()
            })
            .collect()
    }

    /// The degenerate path tree: node `i` is labelled `T(i+1)` and has node
    /// `i-1` as its only child; the root is the last part.
    pub fn to_tree(&self) -> TreeProblem {
        let n = self.parts.len();
        TreeProblem {
            names: (1..=n).map(|i| format!("t{i}")).collect(),
            labels: self.parts.clone(),
            children: (0..n).map(|i| if i == 0 { vec![] } else { vec![i - 1] }).collect(),
            root: n - 1,
        }
    }
}

/// `I0 … In`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpolantSequence {
    pub formulas: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeProblem {
    pub names: Vec<String>,
    pub labels: Vec<Constraint>,
    pub children: Vec<Vec<usize>>,
    pub root: usize,
}

impl TreeProblem {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks that `children` forms a tree rooted at `root` covering all
    /// nodes.
    pub fn validate(&self) -> Result<(), EncodingError> {
        let n = self.labels.len();
        if self.names.len() != n || self.children.len() != n || self.root >= n {
            return Err(EncodingError::Malformed("inconsistent node tables".into()));
        }
        let mut parent = vec![None; n];
        for (v, cs) in self.children.iter().enumerate() {
            for &c in cs {
                if c >= n {
                    return Err(EncodingError::Malformed(format!("unknown child of {}", self.names[v])));
                }
                if parent[c].replace(v).is_some() || c == self.root {
                    return Err(EncodingError::Malformed(format!("node {} has several parents", self.names[c])));
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                return Err(EncodingError::Malformed("cycle in tree".into()));
            }
            stack.extend(&self.children[v]);
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(EncodingError::Malformed(format!("node {} is not below the root", self.names[v])));
        }
        Ok(())
    }

    /// Children before parents, ending with the root.
    pub fn inverse_topological_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                out.push(v);
            } else {
                stack.push((v, true));
                for &c in self.children[v].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// `in_subtree[w]` iff `E*(v, w)`.
    pub fn subtree(&self, v: usize) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            mark[u] = true;
            stack.extend(&self.children[u]);
        }
        mark
    }

    /// `⋃_{E*(v,w)} fv(φ(w)) ∩ ⋃_{¬E*(v,w)} fv(φ(w))`
    pub fn allowed_vars(&self, v: usize) -> BTreeSet<Var> {
        let inside = self.subtree(v);
        let mut a = BTreeSet::new();
        let mut b = BTreeSet::new();
        for (w, phi) in self.labels.iter().enumerate() {
            if inside[w] {
                a.extend(phi.free_vars());
            } else {
                b.extend(phi.free_vars());
            }
        }
        a.intersection(&b).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeInterpolant {
    pub labels: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
    pub label: Constraint,
    /// Variables the label mentions syntactically (equations `x = x` fold
    /// away under canonicalisation but still count for the variable
    /// condition).
    pub anchors: BTreeSet<Var>,
}

impl DagEdge {
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.label.free_vars();
        out.extend(self.anchors.iter().cloned());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagProblem {
    pub names: Vec<String>,
    pub node_labels: Vec<Constraint>,
    pub edges: Vec<DagEdge>,
    pub entry: usize,
    pub exit: usize,
}

impl DagProblem {
    pub fn len(&self) -> usize {
        self.node_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_labels.is_empty()
    }

    pub fn validate(&self) -> Result<(), EncodingError> {
        let n = self.len();
        if self.names.len() != n || self.entry >= n || self.exit >= n || self.entry == self.exit {
            return Err(EncodingError::Malformed("inconsistent node tables".into()));
        }
        for e in &self.edges {
            if e.from >= n || e.to >= n {
                return Err(EncodingError::Malformed("edge to unknown node".into()));
            }
            if e.to == self.entry {
                return Err(EncodingError::Malformed("entry node has an incoming edge".into()));
            }
            if e.from == self.exit {
                return Err(EncodingError::Malformed("exit node has an outgoing edge".into()));
            }
        }
        if self.topological_order().is_none() {
            return Err(EncodingError::Malformed("graph has a cycle".into()));
        }
        Ok(())
    }

    pub fn incoming(&self, v: usize) -> impl Iterator<Item = &DagEdge> {
        self.edges.iter().filter(move |e| e.to == v)
    }

    pub fn outgoing(&self, v: usize) -> impl Iterator<Item = &DagEdge> {
        self.edges.iter().filter(move |e| e.from == v)
    }

    /// Kahn order with smallest index first; `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.to] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            out.push(v);
            for e in self.outgoing(v) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    ready.insert(e.to);
                }
            }
        }
        (out.len() == n).then_some(out)
    }

    /// `⋃_{(a,v)} fv(L_E(a,v)) ∩ ⋃_{(v,a)} fv(L_E(v,a))`
    pub fn allowed_vars(&self, v: usize) -> BTreeSet<Var> {
        let inc: BTreeSet<Var> = self.incoming(v).flat_map(|e| e.vars()).collect();
        let out: BTreeSet<Var> = self.outgoing(v).flat_map(|e| e.vars()).collect();
        inc.intersection(&out).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagInterpolant {
    pub labels: Vec<Constraint>,
}

/// A failed interpolant property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Wrong value at a node or position fixed by the definition.
    Boundary { at: usize },
    Entailment { at: usize },
    EdgeEntailment { from: usize, to: usize },
    Variables { at: usize, extra: Vec<Var> },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Boundary { at } => write!(f, "boundary condition fails at {at}"),
            Violation::Entailment { at } => write!(f, "entailment fails at {at}"),
            Violation::EdgeEntailment { from, to } => write!(f, "entailment fails on edge {from} -> {to}"),
            Violation::Variables { at, extra } => {
                let names: Vec<&str> = extra.iter().map(|v| v.name()).collect();
                write!(f, "disallowed variables at {at}: {}", names.join(", "))
            }
        }
    }
}

type Checked = Result<Result<(), Violation>, EngineError>;

fn extra_vars(formula: &Constraint, allowed: &BTreeSet<Var>) -> Vec<Var> {
    formula.free_vars().difference(allowed).cloned().collect()
}

pub fn check_sequence_interpolants(engine: &Engine, sp: &SequenceProblem, seq: &InterpolantSequence) -> Checked {
    let n = sp.parts.len();
    let is = &seq.formulas;
    if is.len() != n + 1 {
        return Ok(Err(Violation::Boundary { at: is.len() }));
    }
    if !engine.entails(&[], &is[0])? {
        return Ok(Err(Violation::Boundary { at: 0 }));
    }
    if engine.sat(&is[n])?.is_sat() {
        return Ok(Err(Violation::Boundary { at: n }));
    }
    for i in 1..=n {
        if !engine.entails(&[is[i - 1].clone(), sp.parts[i - 1].clone()], &is[i])? {
            return Ok(Err(Violation::Entailment { at: i }));
        }
    }
    for (i, allowed) in sp.shared_vars().iter().enumerate() {
        let extra = extra_vars(&is[i], allowed);
        if !extra.is_empty() {
            return Ok(Err(Violation::Variables { at: i, extra }));
        }
    }
    Ok(Ok(()))
}

pub fn check_tree_interpolant(engine: &Engine, tp: &TreeProblem, ti: &TreeInterpolant) -> Checked {
    if ti.labels.len() != tp.len() {
        return Ok(Err(Violation::Boundary { at: ti.labels.len() }));
    }
    if engine.sat(&ti.labels[tp.root])?.is_sat() {
        return Ok(Err(Violation::Boundary { at: tp.root }));
    }
    for v in 0..tp.len() {
        let mut premises = vec![tp.labels[v].clone()];
        premises.extend(tp.children[v].iter().map(|&w| ti.labels[w].clone()));
        if !engine.entails(&premises, &ti.labels[v])? {
            return Ok(Err(Violation::Entailment { at: v }));
        }
        let extra = extra_vars(&ti.labels[v], &tp.allowed_vars(v));
        if !extra.is_empty() {
            return Ok(Err(Violation::Variables { at: v, extra }));
        }
    }
    Ok(Ok(()))
}

pub fn check_dag_interpolant(engine: &Engine, dp: &DagProblem, di: &DagInterpolant) -> Checked {
    let labels = &di.labels;
    if labels.len() != dp.len() {
        return Ok(Err(Violation::Boundary { at: labels.len() }));
    }
    if !engine.entails(&[], &labels[dp.entry])? {
        return Ok(Err(Violation::Boundary { at: dp.entry }));
    }
    if engine.sat(&labels[dp.exit])?.is_sat() {
        return Ok(Err(Violation::Boundary { at: dp.exit }));
    }
    for e in &dp.edges {
        let premises = [labels[e.from].clone(), dp.node_labels[e.from].clone(), e.label.clone()];
        let goal = Constraint::and([labels[e.to].clone(), dp.node_labels[e.to].clone()]);
        if !engine.entails(&premises, &goal)? {
            return Ok(Err(Violation::EdgeEntailment { from: e.from, to: e.to }));
        }
    }
    for v in 0..dp.len() {
        let extra = extra_vars(&labels[v], &dp.allowed_vars(v));
        if !extra.is_empty() {
            return Ok(Err(Violation::Variables { at: v, extra }));
        }
    }
    Ok(Ok(()))
}

fn symbol_over(name: impl AsRef<str>, vars: &[Var]) -> RelationSymbol {
    RelationSymbol::new(name, vars.iter().map(Var::sort))
}

fn apply(symbol: &RelationSymbol, vars: &[Var]) -> RelationAtom {
    RelationAtom::new(symbol.clone(), vars.iter().cloned().map(LinearTerm::var).collect())
        .expect("arguments are the symbol's own variables")
}

fn finish(relations: Vec<RelationSymbol>, clauses: Vec<HornClause>) -> ClauseSet {
    ClauseSet::new(relations, clauses).expect("fresh symbols are declared")
}

/// `A → p(x̄)`, `B ∧ p(x̄) → false` with `x̄ = fv(A) ∩ fv(B)`.
pub fn binary_to_horn(a: &Constraint, b: &Constraint) -> ClauseSet {
    let shared: Vec<Var> = a.free_vars().intersection(&b.free_vars()).cloned().collect();
    let p = symbol_over("p", &shared);
    let clauses = vec![
        HornClause::new(a.clone(), vec![], Head::Atom(apply(&p, &shared))),
        HornClause::new(b.clone(), vec![apply(&p, &shared)], Head::False),
    ];
    finish(vec![p], clauses)
}

/// `p0(x̄0)`, `p(i-1) ∧ Ti → pi` for each part, `pn(x̄n) → false`.
pub fn sequence_to_horn(sp: &SequenceProblem) -> ClauseSet {
    let xs: Vec<Vec<Var>> = sp.shared_vars().into_iter().map(|s| s.into_iter().collect()).collect();
    let ps: Vec<RelationSymbol> = xs.iter().enumerate().map(|(i, x)| symbol_over(format!("p{i}"), x)).collect();
    let n = sp.parts.len();
    let mut clauses = vec![HornClause::new(Constraint::True, vec![], Head::Atom(apply(&ps[0], &xs[0])))];
    for i in 1..=n {
        clauses.push(HornClause::new(
            sp.parts[i - 1].clone(),
            vec![apply(&ps[i - 1], &xs[i - 1])],
            Head::Atom(apply(&ps[i], &xs[i])),
        ));
    }
    clauses.push(HornClause::new(Constraint::True, vec![apply(&ps[n], &xs[n])], Head::False));
    finish(ps, clauses)
}

/// One clause `φ(v) ∧ ⋀ p_w(x̄_w) → p_v(x̄_v)` per node plus
/// `p_root(x̄_root) → false`.
pub fn tree_problem_to_horn(tp: &TreeProblem) -> ClauseSet {
    let xs: Vec<Vec<Var>> = (0..tp.len()).map(|v| tp.allowed_vars(v).into_iter().collect()).collect();
    let ps: Vec<RelationSymbol> = (0..tp.len())
        .map(|v| symbol_over(format!("p_{}", tp.names[v]), &xs[v]))
        .collect();
    let mut clauses: Vec<HornClause> = (0..tp.len())
        .map(|v| {
            let body = tp.children[v].iter().map(|&w| apply(&ps[w], &xs[w])).collect();
            HornClause::new(tp.labels[v].clone(), body, Head::Atom(apply(&ps[v], &xs[v])))
        })
        .collect();
    clauses.push(HornClause::new(
        Constraint::True,
        vec![apply(&ps[tp.root], &xs[tp.root])],
        Head::False,
    ));
    finish(ps, clauses)
}

/// Edge clauses, guard clauses (dropped when their constraint folds to
/// false), `true → p_en` and `p_ex → false`.
pub fn dag_problem_to_horn(dp: &DagProblem) -> ClauseSet {
    let xs: Vec<Vec<Var>> = (0..dp.len()).map(|v| dp.allowed_vars(v).into_iter().collect()).collect();
    let ps: Vec<RelationSymbol> = (0..dp.len())
        .map(|v| symbol_over(format!("p_{}", dp.names[v]), &xs[v]))
        .collect();
    let mut clauses = Vec::new();
    for e in &dp.edges {
        let (v, w) = (e.from, e.to);
        let body = vec![apply(&ps[v], &xs[v])];
        clauses.push(HornClause::new(
            Constraint::and([dp.node_labels[v].clone(), e.label.clone()]),
            body.clone(),
            Head::Atom(apply(&ps[w], &xs[w])),
        ));
        let guard = Constraint::and([
            dp.node_labels[v].clone(),
            Constraint::not(dp.node_labels[w].clone()),
            e.label.clone(),
        ]);
        if !guard.is_false() {
            clauses.push(HornClause::new(guard, body, Head::False));
        }
    }
    clauses.push(HornClause::new(
        Constraint::True,
        vec![],
        Head::Atom(apply(&ps[dp.entry], &xs[dp.entry])),
    ));
    clauses.push(HornClause::new(
        Constraint::True,
        vec![apply(&ps[dp.exit], &xs[dp.exit])],
        Head::False,
    ));
    finish(ps, clauses)
}

/// A sequence problem for one component; `symbols[i]` is solved by the
/// interpolant `I(i+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceEncoding {
    pub problem: SequenceProblem,
    pub symbols: Vec<RelationSymbol>,
}

/// A tree problem for one component; `symbols[v]` is `None` for the
/// `false` node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEncoding {
    pub problem: TreeProblem,
    pub symbols: Vec<Option<RelationSymbol>>,
}

/// A DAG problem for one component; `symbols[v]` is `None` for entry and
/// exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagEncoding {
    pub problem: DagProblem,
    pub symbols: Vec<Option<RelationSymbol>>,
}

struct Shape<'a> {
    clauses: Vec<&'a HornClause>,
    symbols: Vec<RelationSymbol>,
    defs: BTreeMap<&'a RelationSymbol, Vec<&'a HornClause>>,
    uses: BTreeMap<&'a RelationSymbol, Vec<&'a HornClause>>,
    queries: Vec<&'a HornClause>,
}

fn shapes(nhc: &NormalizedClauseSet) -> Vec<Shape<'_>> {
    let hc = &nhc.clauses;
    component_indices(hc)
        .into_iter()
        .map(|ix| {
            let clauses: Vec<&HornClause> = ix.iter().map(|&i| &hc.clauses()[i]).collect();
            let mut defs: BTreeMap<&RelationSymbol, Vec<&HornClause>> = BTreeMap::new();
            let mut uses: BTreeMap<&RelationSymbol, Vec<&HornClause>> = BTreeMap::new();
            let mut queries = Vec::new();
            let mut seen = BTreeSet::new();
            let mut symbols = Vec::new();
            for c in &clauses {
                for s in c.body_symbols().chain(c.head_symbol()) {
                    if seen.insert(s) {
                        symbols.push(s.clone());
                    }
                }
                match c.head_symbol() {
                    Some(h) => defs.entry(h).or_default().push(c),
                    None => queries.push(*c),
                }
                for b in c.body_symbols() {
                    uses.entry(b).or_default().push(c);
                }
            }
            Shape {
                clauses,
                symbols,
                defs,
                uses,
                queries,
            }
        })
        .collect()
}

fn require_tree_like(shape: &Shape<'_>, expected: &'static str) -> Result<(), EncodingError> {
    if let Some((s, _)) = shape.defs.iter().find(|(_, cs)| cs.len() > 1) {
        return Err(wrong(expected, format!("`{s}` heads several clauses")));
    }
    if let Some((s, _)) = shape.uses.iter().find(|(_, cs)| cs.len() > 1) {
        return Err(wrong(expected, format!("`{s}` occurs in several bodies")));
    }
    if shape.queries.len() > 1 {
        return Err(wrong(expected, "component has several false-headed clauses"));
    }
    Ok(())
}

/// One sequence problem per component of a normalised linear tree-like
/// set. A missing first or last clause contributes the constraint `false`.
pub fn sequence_from_linear_treelike(nhc: &NormalizedClauseSet) -> Result<Vec<SequenceEncoding>, EncodingError> {
    const FRAGMENT: &str = "linear tree-like";
    let mut out = Vec::new();
    for shape in shapes(nhc) {
        require_tree_like(&shape, FRAGMENT)?;
        if let Some(c) = shape.clauses.iter().find(|c| c.body.len() > 1) {
            return Err(wrong(FRAGMENT, format!("clause `{c}` is not linear")));
        }
        if shape.symbols.is_empty() {
            out.push(SequenceEncoding {
                problem: SequenceProblem {
                    parts: shape.clauses.iter().map(|c| c.constraint.clone()).collect(),
                },
                symbols: vec![],
            });
            continue;
        }
        // the bottom of the chain is a symbol whose definition has no body
        let bottom = shape
            .symbols
            .iter()
            .find(|s| shape.defs.get(s).is_none_or(|d| d[0].body.is_empty()))
            .ok_or_else(|| wrong(FRAGMENT, "component has no start"))?;
        let mut parts = vec![shape.defs.get(bottom).map_or(Constraint::False, |d| d[0].constraint.clone())];
        let mut symbols = vec![bottom.clone()];
        let mut current = bottom;
        loop {
            match shape.uses.get(current) {
                None => {
                    parts.push(Constraint::False);
                    break;
                }
                Some(us) => {
                    let c = us[0];
                    parts.push(c.constraint.clone());
                    match c.head_symbol() {
                        None => break,
                        Some(h) => {
                            symbols.push(h.clone());
                            current = shape.defs.get_key_value(h).map(|(k, _)| *k).expect("head is defined");
                        }
                    }
                }
            }
        }
        if symbols.len() != shape.symbols.len() {
            return Err(wrong(FRAGMENT, "component is not a single chain"));
        }
        out.push(SequenceEncoding {
            problem: SequenceProblem { parts },
            symbols,
        });
    }
    Ok(out)
}

/// One tree problem per component of a normalised tree-like set. Nodes are
/// the component's symbols plus a root `false` node.
pub fn tree_problem_from_treelike(nhc: &NormalizedClauseSet) -> Result<Vec<TreeEncoding>, EncodingError> {
    const FRAGMENT: &str = "tree-like";
    let mut out = Vec::new();
    for shape in shapes(nhc) {
        require_tree_like(&shape, FRAGMENT)?;
        let index: BTreeMap<&RelationSymbol, usize> =
            shape.symbols.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let root = shape.symbols.len();
        let mut names: Vec<String> = shape.symbols.iter().map(|s| s.name().to_string()).collect();
        names.push("false".into());
        let mut labels = Vec::with_capacity(root + 1);
        let mut children = Vec::with_capacity(root + 1);
        for s in &shape.symbols {
            match shape.defs.get(s) {
                Some(d) => {
                    labels.push(d[0].constraint.clone());
                    children.push(d[0].body_symbols().map(|b| index[b]).collect());
                }
                None => {
                    labels.push(Constraint::False);
                    children.push(vec![]);
                }
            }
        }
        match shape.queries.first() {
            Some(q) => {
                labels.push(q.constraint.clone());
                children.push(q.body_symbols().map(|b| index[b]).collect());
            }
            None => {
                labels.push(Constraint::False);
                children.push(
                    shape
                        .symbols
                        .iter()
                        .filter(|s| !shape.uses.contains_key(s))
                        .map(|s| index[s])
                        .collect(),
                );
            }
        }
        let problem = TreeProblem {
            names,
            labels,
            children,
            root,
        };
        problem
            .validate()
            .map_err(|e| wrong(FRAGMENT, format!("dependence structure is not a tree ({e})")))?;
        let mut symbols: Vec<Option<RelationSymbol>> = shape.symbols.iter().cloned().map(Some).collect();
        symbols.push(None);
        out.push(TreeEncoding { problem, symbols });
    }
    Ok(out)
}

/// One DAG problem per component of a normalised linear set, with fresh
/// entry and exit nodes and trivial node labels.
pub fn dag_problem_from_linear(nhc: &NormalizedClauseSet) -> Result<Vec<DagEncoding>, EncodingError> {
    const FRAGMENT: &str = "linear";
    let mut out = Vec::new();
    for shape in shapes(nhc) {
        if let Some(c) = shape.clauses.iter().find(|c| c.body.len() > 1) {
            return Err(wrong(FRAGMENT, format!("clause `{c}` is not linear")));
        }
        let index: BTreeMap<&RelationSymbol, usize> =
            shape.symbols.iter().enumerate().map(|(i, s)| (s, i + 1)).collect();
        let (entry, exit) = (0, shape.symbols.len() + 1);
        let mut names = vec!["en".to_string()];
        names.extend(shape.symbols.iter().map(|s| s.name().to_string()));
        names.push("ex".into());
        let anchors = |s: Option<&RelationSymbol>| -> BTreeSet<Var> {
            s.map(|s| nhc.arg_vectors[s].iter().cloned().collect()).unwrap_or_default()
        };
        let edges = shape
            .clauses
            .iter()
            .map(|c| {
                let body = c.body.first().map(|a| &a.symbol);
                let head = c.head_symbol();
                let mut anchor = anchors(body);
                anchor.extend(anchors(head));
                DagEdge {
                    from: body.map_or(entry, |s| index[s]),
                    to: head.map_or(exit, |s| index[s]),
                    label: c.constraint.clone(),
                    anchors: anchor,
                }
            })
            .collect();
        let problem = DagProblem {
            node_labels: vec![Constraint::True; names.len()],
            names,
            edges,
            entry,
            exit,
        };
        problem
            .validate()
            .map_err(|e| wrong(FRAGMENT, format!("dependence structure is not a DAG ({e})")))?;
        let mut symbols = vec![None];
        symbols.extend(shape.symbols.iter().cloned().map(Some));
        symbols.push(None);
        out.push(DagEncoding { problem, symbols });
    }
    Ok(out)
}
