//! Dependence graph, fragment classification, components and normalisation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::formula::{Constraint, LinearTerm, Var};
use crate::horn::{default_params, ClauseSet, Head, HornClause, RelationAtom, RelationSymbol};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("clause {clause} has more than one relation atom in its body")]
    NotLinear { clause: usize },
    #[error("relation `{symbol}` occurs more than once in clause {clause}")]
    RepeatedOccurrence { symbol: String, clause: usize },
}

/// `p → q` iff some clause has `p` in its head and `q` in its body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceGraph {
    nodes: Vec<RelationSymbol>,
    edges: BTreeSet<(usize, usize)>,
}

impl DependenceGraph {
    pub fn nodes(&self) -> &[RelationSymbol] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&RelationSymbol, &RelationSymbol)> {
        self.edges.iter().map(|&(a, b)| (&self.nodes[a], &self.nodes[b]))
    }

    pub fn has_edge(&self, from: &RelationSymbol, to: &RelationSymbol) -> bool {
        match (self.index(from), self.index(to)) {
            (Some(a), Some(b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }

    fn index(&self, s: &RelationSymbol) -> Option<usize> {
        self.nodes.iter().position(|n| n == s)
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((i, 0)..(i + 1, 0)).map(|&(_, b)| b)
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// A cycle `p0 → p1 → … → p0` (first node not repeated), if any.
    pub fn find_cycle(&self) -> Option<Vec<RelationSymbol>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let n = self.nodes.len();
        let mut mark = vec![Mark::New; n];
        for start in 0..n {
            if mark[start] != Mark::New {
                continue;
            }
            // iterative DFS keeping the active path
            let mut path: Vec<usize> = vec![start];
            let mut iters: Vec<Vec<usize>> = vec![self.successors(start).collect()];
            mark[start] = Mark::Active;
            while let Some(top) = iters.last_mut() {
                match top.pop() {
                    Some(next) => match mark[next] {
                        Mark::Active => {
                            let pos = path.iter().position(|&p| p == next).expect("active node on path");
                            return Some(path[pos..].iter().map(|&i| self.nodes[i].clone()).collect());
                        }
                        Mark::New => {
                            mark[next] = Mark::Active;
                            path.push(next);
                            iters.push(self.successors(next).collect());
                        }
                        Mark::Done => {}
                    },
                    None => {
                        let done = path.pop().expect("path tracks iterators");
                        mark[done] = Mark::Done;
                        iters.pop();
                    }
                }
            }
        }
        None
    }
}

pub fn dependence_graph(hc: &ClauseSet) -> DependenceGraph {
    let nodes = hc.relations().to_vec();
    let index: BTreeMap<&RelationSymbol, usize> = nodes.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut edges = BTreeSet::new();
    for c in hc.clauses() {
        if let Some(h) = c.head_symbol() {
            for b in c.body_symbols() {
                edges.insert((index[h], index[b]));
            }
        }
    }
    DependenceGraph { nodes, edges }
}

/// Syntactic fragment membership of a clause set.
///
/// Only `linear` is meaningful for recursive sets; the other flags are still
/// computed but marked in the printed report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FragmentReport {
    pub recursion_free: bool,
    pub linear: bool,
    pub body_disjoint: bool,
    pub head_disjoint: bool,
    pub tree_like: bool,
    pub linear_tree_like: bool,
}

impl fmt::Display for FragmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.recursion_free { "" } else { " (recursive)" };
        writeln!(f, "recursion-free: {}", self.recursion_free)?;
        writeln!(f, "linear: {}", self.linear)?;
        writeln!(f, "body-disjoint: {}{mark}", self.body_disjoint)?;
        writeln!(f, "head-disjoint: {}{mark}", self.head_disjoint)?;
        writeln!(f, "tree-like: {}{mark}", self.tree_like)?;
        write!(f, "linear-tree-like: {}{mark}", self.linear_tree_like)
    }
}

pub fn classify(hc: &ClauseSet) -> FragmentReport {
    let recursion_free = dependence_graph(hc).is_acyclic();
    let linear = hc.clauses().iter().all(|c| c.body.len() <= 1);
    let mut body_count: BTreeMap<&RelationSymbol, usize> = BTreeMap::new();
    let mut head_count: BTreeMap<&RelationSymbol, usize> = BTreeMap::new();
    for c in hc.clauses() {
        for s in c.body_symbols() {
            *body_count.entry(s).or_default() += 1;
        }
        if let Some(h) = c.head_symbol() {
            *head_count.entry(h).or_default() += 1;
        }
    }
    let body_disjoint = body_count.values().all(|&n| n <= 1);
    let head_disjoint = head_count.values().all(|&n| n <= 1);
    let tree_like = body_disjoint && head_disjoint;
    FragmentReport {
        recursion_free,
        linear,
        body_disjoint,
        head_disjoint,
        tree_like,
        linear_tree_like: linear && tree_like,
    }
}

/// Weakly connected components of the dependence graph, as clause sets.
/// Clauses without relation atoms form singleton components. Order follows
/// the first clause of each component.
pub fn connected_components(hc: &ClauseSet) -> Vec<ClauseSet> {
    component_indices(hc).into_iter().map(|ix| hc.subset(ix)).collect()
}

pub(crate) fn component_indices(hc: &ClauseSet) -> Vec<Vec<usize>> {
    let index: BTreeMap<&RelationSymbol, usize> =
        hc.relations().iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut parent: Vec<usize> = (0..index.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in hc.clauses() {
        let mut syms = c.body_symbols().chain(c.head_symbol()).map(|s| index[s]);
        if let Some(first) = syms.next() {
            for other in syms {
                let (a, b) = (find(&mut parent, first), find(&mut parent, other));
                parent[a] = b;
            }
        }
    }
    let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (ci, c) in hc.clauses().iter().enumerate() {
        match c.body_symbols().chain(c.head_symbol()).next() {
            None => groups.push(vec![ci]),
            Some(s) => {
                let root = find(&mut parent, index[s]);
                match by_root.get(&root) {
                    Some(&g) => groups[g].push(ci),
                    None => {
                        by_root.insert(root, groups.len());
                        groups.push(vec![ci]);
                    }
                }
            }
        }
    }
    groups
}

/// A clause set where every occurrence of `p` is `p(x̄_p)` and every other
/// variable is local to one clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedClauseSet {
    pub clauses: ClauseSet,
    pub arg_vectors: BTreeMap<RelationSymbol, Vec<Var>>,
    /// Per clause: renamed local variable ↦ original variable.
    pub origin: Vec<BTreeMap<Var, Var>>,
}

/// Normalises a set in which no clause mentions a relation symbol twice.
///
/// Arguments become `<sym>#<i>`, bound to the original argument terms by
/// equalities; clause-local variables become `<name>@<clause>`. Solutions
/// carry over unchanged, since symbols and arities are kept.
pub fn normalize(hc: &ClauseSet) -> Result<NormalizedClauseSet, AnalysisError> {
    let arg_vectors: BTreeMap<RelationSymbol, Vec<Var>> =
        hc.relations().iter().map(|s| (s.clone(), default_params(s))).collect();
    let mut clauses = Vec::with_capacity(hc.len());
    let mut origin = Vec::with_capacity(hc.len());
    for (ci, c) in hc.clauses().iter().enumerate() {
        let mut seen = BTreeSet::new();
        for s in c.body_symbols().chain(c.head_symbol()) {
            if !seen.insert(s) {
                return Err(AnalysisError::RepeatedOccurrence {
                    symbol: s.name().to_string(),
                    clause: ci,
                });
            }
        }
        let mut renaming: BTreeMap<Var, Var> = BTreeMap::new();
        let mut rename = |v: &Var| {
            renaming
                .entry(v.clone())
                .or_insert_with(|| v.with_name(format!("{}@{ci}", v.name())))
                .clone()
        };
        let mut parts = vec![c.constraint.rename(&mut rename)];
        let mut bind = |a: &RelationAtom, parts: &mut Vec<Constraint>| -> RelationAtom {
            let xs = &arg_vectors[&a.symbol];
            for (x, t) in xs.iter().zip(&a.args) {
                parts.push(Constraint::eq(LinearTerm::var(x.clone()), t.rename(&mut rename)));
            }
            RelationAtom {
                symbol: a.symbol.clone(),
                args: xs.iter().cloned().map(LinearTerm::var).collect(),
            }
        };
        let body: Vec<RelationAtom> = c.body.iter().map(|a| bind(a, &mut parts)).collect();
        let head = match &c.head {
            Head::False => Head::False,
            Head::Atom(a) => Head::Atom(bind(a, &mut parts)),
        };
        clauses.push(HornClause::new(Constraint::and(parts), body, head));
        origin.push(renaming.into_iter().map(|(orig, new)| (new, orig)).collect());
    }
    let clauses = ClauseSet::new(hc.relations().to_vec(), clauses).expect("symbols unchanged");
    Ok(NormalizedClauseSet {
        clauses,
        arg_vectors,
        origin,
    })
}

/// Merges clauses of a linear set that have identical body atom and head by
/// disjoining their constraints. The merged clause sits at the position of
/// the first member.
pub fn merge_linear_duplicates(hc: &ClauseSet) -> Result<ClauseSet, AnalysisError> {
    let mut groups: Vec<(Option<RelationAtom>, Head, Vec<Constraint>)> = Vec::new();
    for (ci, c) in hc.clauses().iter().enumerate() {
        if c.body.len() > 1 {
            return Err(AnalysisError::NotLinear { clause: ci });
        }
        let body = c.body.first().cloned();
        match groups.iter_mut().find(|(b, h, _)| *b == body && *h == c.head) {
            Some((_, _, cs)) => cs.push(c.constraint.clone()),
            None => groups.push((body, c.head.clone(), vec![c.constraint.clone()])),
        }
    }
    let clauses = groups
        .into_iter()
        .map(|(body, head, cs)| HornClause::new(Constraint::or(cs), body.into_iter().collect(), head))
        .collect();
    Ok(ClauseSet::new(hc.relations().to_vec(), clauses).expect("symbols unchanged"))
}
