//! Derivation trees of `false` and the expansion of a clause set.

use std::collections::BTreeMap;
use std::fmt;

use crate::formula::{Constraint, LinearTerm, Var};
use crate::horn::{ClauseSet, Head, HornClause, RelationSymbol};

use super::SolveError;

/// A derivation of `false`: a clause per node, one child per body atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTree {
    /// Index into the clause set the tree was built from.
    pub clause: usize,
    pub children: Vec<DerivationTree>,
}

impl DerivationTree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(DerivationTree::size).sum::<usize>()
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:width$}clause {}", "", self.clause, width = 2 * depth)?;
        for c in &self.children {
            c.write(f, depth + 1)?;
        }
        Ok(())
    }

    /// Replaces clause indices through `map`.
    pub fn reindex(&self, map: &impl Fn(usize) -> usize) -> DerivationTree {
        DerivationTree {
            clause: map(self.clause),
            children: self.children.iter().map(|c| c.reindex(map)).collect(),
        }
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

/// A derivation together with its constraint: the clause constraints with
/// variables renamed apart per node, conjoined with the argument bindings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub tree: DerivationTree,
    pub constraint: Constraint,
}

struct Enumerator<'a> {
    hc: &'a ClauseSet,
    defs: BTreeMap<&'a RelationSymbol, Vec<usize>>,
    nodes: usize,
    limit: usize,
}

impl<'a> Enumerator<'a> {
    /// Clause `ci` with variables renamed for a fresh node.
    fn fresh(&mut self, ci: usize) -> Result<HornClause, SolveError> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(SolveError::ExpansionLimitExceeded { limit: self.limit });
        }
        let node = self.nodes;
        let mut map: BTreeMap<Var, Var> = BTreeMap::new();
        Ok(self.hc.clauses()[ci].rename(&mut |v: &Var| {
            map.entry(v.clone())
                .or_insert_with(|| v.with_name(format!("{}~{node}", v.name())))
                .clone()
        }))
    }

    /// All derivations of `symbol(args)`.
    fn derive(&mut self, symbol: &RelationSymbol, args: &[LinearTerm]) -> Result<Vec<Derivation>, SolveError> {
        let defs = self.defs.get(symbol).cloned().unwrap_or_default();
        let mut out = Vec::new();
        for ci in defs {
            let clause = self.fresh(ci)?;
            let Head::Atom(head) = &clause.head else {
                unreachable!("defining clauses have atom heads")
            };
            let mut base = vec![clause.constraint.clone()];
            for (h, t) in head.args.iter().zip(args) {
                base.push(Constraint::eq(h.clone(), t.clone()));
            }
            out.extend(self.below(ci, &clause, Constraint::and(base))?);
        }
        Ok(out)
    }

    /// Combines the alternatives for each body atom of a renamed clause.
    fn below(&mut self, ci: usize, clause: &HornClause, base: Constraint) -> Result<Vec<Derivation>, SolveError> {
        let mut partial: Vec<(Vec<DerivationTree>, Constraint)> = vec![(vec![], base)];
        for atom in &clause.body {
            let alternatives = self.derive(&atom.symbol, &atom.args)?;
            let mut next = Vec::with_capacity(partial.len() * alternatives.len());
            for (trees, c) in &partial {
                for alt in &alternatives {
                    let mut t = trees.clone();
                    t.push(alt.tree.clone());
                    next.push((t, Constraint::and([c.clone(), alt.constraint.clone()])));
                }
            }
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        Ok(partial
            .into_iter()
            .map(|(children, constraint)| Derivation {
                tree: DerivationTree { clause: ci, children },
                constraint,
            })
            .collect())
    }
}

/// Every derivation tree of `false`, in clause order. The set must be
/// recursion-free; `limit` bounds the number of tree nodes built.
pub fn derivations(hc: &ClauseSet, limit: usize) -> Result<Vec<Derivation>, SolveError> {
    super::ensure_recursion_free(hc)?;
    let mut defs: BTreeMap<&RelationSymbol, Vec<usize>> = BTreeMap::new();
    for (i, c) in hc.clauses().iter().enumerate() {
        if let Some(h) = c.head_symbol() {
            defs.entry(h).or_default().push(i);
        }
    }
    let mut e = Enumerator {
        hc,
        defs,
        nodes: 0,
        limit,
    };
    let mut out = Vec::new();
    for (i, c) in hc.clauses().iter().enumerate() {
        if c.head == Head::False {
            let clause = e.fresh(i)?;
            let base = clause.constraint.clone();
            out.extend(e.below(i, &clause, base)?);
        }
    }
    Ok(out)
}

/// `exp(HC)`: the disjunction of all derivation constraints. Unsatisfiable
/// exactly when the set is solvable.
pub fn expand(hc: &ClauseSet, limit: usize) -> Result<Constraint, SolveError> {
    Ok(Constraint::or(derivations(hc, limit)?.into_iter().map(|d| d.constraint)))
}
