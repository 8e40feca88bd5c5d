//! Propositional clause sets: the termination property, the literal graph
//! and renaming to Horn form.
//!
//! A set has the termination property iff its literal graph is acyclic.
//! A cycle yields an infinite linear resolution sequence directly. An
//! acyclic graph yields a renaming `A` under which the set is recursion-free
//! Horn, and renaming commutes with resolution, so the renamed derivations
//! and hence the original ones are finite.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;

use thiserror::Error;

use crate::formula::Constraint;
use crate::horn::{ClauseSet, Head, HornClause, RelationAtom, RelationSymbol};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RenamingError {
    #[error("clause set does not have the termination property (cycle {})", fmt_literals(.cycle))]
    NonTerminating { cycle: Vec<Literal> },
}

/// A Boolean variable (numbered from 1) with a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: u32,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: u32) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: u32) -> Self {
        Literal { var, positive: false }
    }

    pub fn complement(self) -> Self {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }

    pub fn from_dimacs(n: i64) -> Option<Self> {
        let var = u32::try_from(n.unsigned_abs()).ok().filter(|&v| v > 0)?;
        Some(Literal { var, positive: n > 0 })
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            i64::from(self.var)
        } else {
            -i64::from(self.var)
        }
    }

    /// Position in the literal graph: `2(v-1)` for `v`, `2(v-1)+1` for `¬v`.
    fn node(self) -> usize {
        2 * (self.var as usize - 1) + usize::from(!self.positive)
    }

    fn of_node(i: usize) -> Self {
        Literal {
            var: (i / 2 + 1) as u32,
            positive: i % 2 == 0,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

fn fmt_literals(ls: &[Literal]) -> String {
    ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

/// A disjunction of literals, kept as a sorted multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropClause {
    literals: Vec<Literal>,
}

impl PropClause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Self {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort();
        PropClause { literals }
    }

    pub fn from_dimacs(ns: &[i64]) -> Self {
        PropClause::new(ns.iter().map(|&n| Literal::from_dimacs(n).expect("nonzero literal")))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn positives(&self) -> usize {
        self.literals.iter().filter(|l| l.positive).count()
    }

    pub fn is_horn(&self) -> bool {
        self.positives() <= 1
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.literals
            .iter()
            .any(|l| assignment[l.var as usize - 1] == l.positive)
    }
}

impl fmt::Display for PropClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("⊥");
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∨ ")?;
            }
            if !l.positive {
                f.write_str("¬")?;
            }
            write!(f, "x{}", l.var)?;
        }
        Ok(())
    }
}

/// Clauses over the variables `1..=num_vars`, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropClauseSet {
    num_vars: u32,
    clauses: Vec<PropClause>,
}

impl PropClauseSet {
    /// `num_vars` is raised to cover every variable that occurs.
    pub fn new(num_vars: u32, clauses: Vec<PropClause>) -> Self {
        let used = clauses
            .iter()
            .flat_map(|c| c.literals.iter().map(|l| l.var))
            .max()
            .unwrap_or(0);
        PropClauseSet {
            num_vars: num_vars.max(used),
            clauses,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[PropClause] {
        &self.clauses
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.eval(assignment))
    }

    /// Clause order ignored, multiplicities kept.
    pub fn same_clauses(&self, other: &PropClauseSet) -> bool {
        let mut a = self.clauses.clone();
        let mut b = other.clauses.clone();
        a.sort();
        b.sort();
        a == b
    }
}

pub fn is_horn(cs: &PropClauseSet) -> bool {
    cs.clauses.iter().all(PropClause::is_horn)
}

pub fn parse_dimacs(text: &str) -> Result<PropClauseSet, DimacsError> {
    let err = |line: usize, message: String| DimacsError::Parse { line, message };
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut last_line = 0;
    'lines: for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        last_line = n;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(n, "second problem line".into()));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            match fields.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v.parse().map_err(|_| err(n, format!("bad variable count `{v}`")))?;
                    let c = c.parse().map_err(|_| err(n, format!("bad clause count `{c}`")))?;
                    header = Some((v, c));
                }
                _ => return Err(err(n, "expected `p cnf <vars> <clauses>`".into())),
            }
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(err(n, "clause before the problem line".into()));
        };
        for tok in trimmed.split_whitespace() {
            if tok == "%" {
                break 'lines;
            }
            let x: i64 = tok.parse().map_err(|_| err(n, format!("bad literal `{tok}`")))?;
            if x == 0 {
                clauses.push(PropClause::from_dimacs(&current));
                current.clear();
            } else if x.unsigned_abs() > u64::from(num_vars) {
                return Err(err(n, format!("literal {x} exceeds the declared {num_vars} variables")));
            } else {
                current.push(x);
            }
        }
    }
    let Some((num_vars, num_clauses)) = header else {
        return Err(err(last_line.max(1), "missing problem line".into()));
    };
    if !current.is_empty() {
        return Err(err(last_line, "last clause is not terminated by 0".into()));
    }
    if clauses.len() != num_clauses {
        return Err(err(
            last_line.max(1),
            format!("header declares {num_clauses} clauses, found {}", clauses.len()),
        ));
    }
    Ok(PropClauseSet::new(num_vars, clauses))
}

pub fn print_dimacs(cs: &PropClauseSet) -> String {
    let mut out = format!("p cnf {} {}\n", cs.num_vars, cs.clauses.len());
    for c in &cs.clauses {
        for l in &c.literals {
            out.push_str(&format!("{} ", l.to_dimacs()));
        }
        out.push_str("0\n");
    }
    out
}

/// `(l, l')` is an edge iff some clause contains `l'` and, at another
/// position, the complement of `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralGraph {
    num_vars: u32,
    edges: BTreeSet<(usize, usize)>,
}

impl LiteralGraph {
    pub fn new(cs: &PropClauseSet) -> Self {
        let mut edges = BTreeSet::new();
        for c in &cs.clauses {
            for (i, a) in c.literals.iter().enumerate() {
                for (j, b) in c.literals.iter().enumerate() {
                    if i != j {
                        edges.insert((a.complement().node(), b.node()));
                    }
                }
            }
        }
        LiteralGraph {
            num_vars: cs.num_vars,
            edges,
        }
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> {
        (0..2 * self.num_vars as usize).map(Literal::of_node)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Literal, Literal)> + '_ {
        self.edges.iter().map(|&(a, b)| (Literal::of_node(a), Literal::of_node(b)))
    }

    pub fn has_edge(&self, from: Literal, to: Literal) -> bool {
        self.edges.contains(&(from.node(), to.node()))
    }

    /// Kahn's algorithm; among ready literals the lowest variable goes
    /// first, and `v` before `¬v`.
    pub fn order(&self) -> Termination {
        let n = 2 * self.num_vars as usize;
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![vec![]; n];
        for &(a, b) in &self.edges {
            indeg[b] += 1;
            succ[a].push(b);
        }
        let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(i)) = ready.pop() {
            order.push(Literal::of_node(i));
            for &j in &succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.push(Reverse(j));
                }
            }
        }
        if order.len() == n {
            return Termination::Terminating(order);
        }
        // every remaining node has a remaining predecessor
        let mut pred: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, b) in &self.edges {
            if indeg[a] > 0 && indeg[b] > 0 {
                pred.entry(b).or_insert(a);
            }
        }
        let start = (0..n).find(|&i| indeg[i] > 0).expect("a node on a cycle");
        let mut seen = BTreeMap::new();
        let mut walk = vec![start];
        let mut v = start;
        seen.insert(v, 0);
        loop {
            v = pred[&v];
            if let Some(&k) = seen.get(&v) {
                let mut cycle: Vec<Literal> = walk[k..].iter().map(|&i| Literal::of_node(i)).collect();
                cycle.reverse();
                return Termination::NonTerminating(cycle);
            }
            seen.insert(v, walk.len());
            walk.push(v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    /// A strict total order on all literals compatible with the graph.
    Terminating(Vec<Literal>),
    /// Literals `l1 ... lm` with edges `li → li+1` and `lm → l1`.
    NonTerminating(Vec<Literal>),
}

impl Termination {
    pub fn is_terminating(&self) -> bool {
        matches!(self, Termination::Terminating(_))
    }
}

pub fn has_termination_property(cs: &PropClauseSet) -> Termination {
    LiteralGraph::new(cs).order()
}

/// For each edge `li → li+1` of `cycle`, the index of a clause containing
/// `¬li` and `li+1`. Resolving these clauses round-robin never stops.
pub fn cycle_clauses(cs: &PropClauseSet, cycle: &[Literal]) -> Option<Vec<usize>> {
    (0..cycle.len())
        .map(|i| {
            let (l, next) = (cycle[i], cycle[(i + 1) % cycle.len()]);
            cs.clauses.iter().position(|c| {
                let ls = &c.literals;
                ls.iter().enumerate().any(|(a, x)| {
                    *x == l.complement() && ls.iter().enumerate().any(|(b, y)| a != b && *y == next)
                })
            })
        })
        .collect()
}

/// The set `A` of variables whose literals get complemented.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Renaming {
    pub vars: BTreeSet<u32>,
}

impl Renaming {
    pub fn new(vars: impl IntoIterator<Item = u32>) -> Self {
        Renaming {
            vars: vars.into_iter().collect(),
        }
    }

    pub fn apply(&self, l: Literal) -> Literal {
        if self.vars.contains(&l.var) {
            l.complement()
        } else {
            l
        }
    }
}

/// `A = {v | ¬v precedes v}` in the order of [`has_termination_property`].
pub fn compute_renaming(cs: &PropClauseSet) -> Result<Renaming, RenamingError> {
    match has_termination_property(cs) {
        Termination::Terminating(order) => Ok(renaming_from_order(&order)),
        Termination::NonTerminating(cycle) => Err(RenamingError::NonTerminating { cycle }),
    }
}

pub fn renaming_from_order(order: &[Literal]) -> Renaming {
    let position: BTreeMap<Literal, usize> = order.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    Renaming::new(
        order
            .iter()
            .filter(|l| l.positive && position.get(&l.complement()).is_some_and(|&j| j < position[l]))
            .map(|l| l.var),
    )
}

pub fn rename(cs: &PropClauseSet, r: &Renaming) -> PropClauseSet {
    PropClauseSet {
        num_vars: cs.num_vars,
        clauses: cs
            .clauses
            .iter()
            .map(|c| PropClause::new(c.literals.iter().map(|&l| r.apply(l))))
            .collect(),
    }
}

/// Reads a Horn set as constrained Horn clauses over nullary relations
/// `p1, p2, ...`. `None` if some clause has two positive literals.
pub fn horn_image(cs: &PropClauseSet) -> Option<ClauseSet> {
    let symbols: Vec<RelationSymbol> = (1..=cs.num_vars)
        .map(|v| RelationSymbol::new(format!("p{v}"), []))
        .collect();
    let atom = |v: u32| RelationAtom::new(symbols[v as usize - 1].clone(), vec![]).expect("nullary");
    let mut clauses = Vec::new();
    for c in &cs.clauses {
        if !c.is_horn() {
            return None;
        }
        let head = match c.literals.iter().find(|l| l.positive) {
            Some(l) => Head::Atom(atom(l.var)),
            None => Head::False,
        };
        let body = c.literals.iter().filter(|l| !l.positive).map(|l| atom(l.var)).collect();
        clauses.push(HornClause::new(Constraint::True, body, head));
    }
    Some(ClauseSet::new(symbols, clauses).expect("well-sorted"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_nodes_round_trip() {
        for v in 1..5 {
            for l in [Literal::pos(v), Literal::neg(v)] {
                assert_eq!(Literal::of_node(l.node()), l);
            }
        }
    }

    #[test]
    fn dimacs_literal_bounds() {
        assert_eq!(Literal::from_dimacs(0), None);
        assert_eq!(Literal::from_dimacs(-3), Some(Literal::neg(3)));
    }
}
