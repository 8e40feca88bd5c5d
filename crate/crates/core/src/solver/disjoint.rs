//! Body-disjoint sets: maximal tree-like subsets and their combination, and
//! the transformation of arbitrary recursion-free sets into body-disjoint
//! ones.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{Constraint, LinearTerm};
use crate::horn::{default_params, ClauseSet, Definition, HornClause, RelationSymbol, Solution};

use super::SolveError;

/// A maximal tree-like subset below one `false`-headed clause: the query,
/// and below each reached symbol exactly one of its defining clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSubset {
    pub clauses: BTreeSet<usize>,
    /// The defining clause chosen for each reached symbol.
    pub choice: BTreeMap<RelationSymbol, usize>,
    /// Every symbol in a body of the subset, defined or not.
    pub reached: BTreeSet<RelationSymbol>,
}

impl TreeSubset {
    pub fn reaches(&self, s: &RelationSymbol) -> bool {
        self.reached.contains(s)
    }
}

/// Enumerates the maximal tree-like subsets of a body-disjoint set.
pub fn tree_subsets(hc: &ClauseSet, limit: usize) -> Result<Vec<TreeSubset>, SolveError> {
    let mut defs: BTreeMap<&RelationSymbol, Vec<usize>> = BTreeMap::new();
    for (i, c) in hc.clauses().iter().enumerate() {
        if let Some(h) = c.head_symbol() {
            defs.entry(h).or_default().push(i);
        }
    }
    // In a body-disjoint set the cones of distinct queries share no symbol,
    // so each query is enumerated on its own.
    let mut work = Vec::new();
    for (i, c) in hc.clauses().iter().enumerate().rev() {
        if c.head_symbol().is_none() {
            let start = TreeSubset {
                clauses: BTreeSet::from([i]),
                choice: BTreeMap::new(),
                reached: BTreeSet::new(),
            };
            work.push((start, c.body_symbols().collect::<Vec<_>>()));
        }
    }
    let mut done = Vec::new();
    while let Some((subset, mut open)) = work.pop() {
        let Some(s) = open.pop() else {
            done.push(subset);
            if done.len() > limit {
                return Err(SolveError::SubsetLimitExceeded { limit });
            }
            continue;
        };
        let mut subset = subset;
        subset.reached.insert(s.clone());
        let Some(ds) = defs.get(s) else {
            work.push((subset, open));
            continue;
        };
        // reversed so the first defining clause is explored first
        for &d in ds.iter().rev() {
            let mut next = subset.clone();
            next.clauses.insert(d);
            next.choice.insert(s.clone(), d);
            let mut next_open = open.clone();
            next_open.extend(hc.clauses()[d].body_symbols());
            work.push((next, next_open));
        }
        if work.len() > limit.saturating_mul(4) {
            return Err(SolveError::SubsetLimitExceeded { limit });
        }
    }
    Ok(done)
}

/// The symbols below `s` (inclusive) in a subset.
fn cone(hc: &ClauseSet, subset: &TreeSubset, s: &RelationSymbol) -> BTreeSet<RelationSymbol> {
    let mut out = BTreeSet::new();
    let mut stack = vec![s.clone()];
    while let Some(p) = stack.pop() {
        if let Some(&d) = subset.choice.get(&p) {
            stack.extend(hc.clauses()[d].body_symbols().cloned());
        }
        out.insert(p);
    }
    out
}

/// Combines per-subset solutions: for each symbol, subsets that agree on the
/// choices inside the symbol's cone are conjoined, different cone choices
/// are disjoined. Symbols no subset reaches get `true`.
pub fn combine(hc: &ClauseSet, subsets: &[TreeSubset], solutions: &[Solution]) -> Solution {
    let mut out = Solution::new();
    for s in hc.relations() {
        let mut groups: BTreeMap<Vec<(RelationSymbol, usize)>, Vec<Constraint>> = BTreeMap::new();
        for (k, subset) in subsets.iter().enumerate() {
            if !subset.reaches(s) {
                continue;
            }
            let key: Vec<(RelationSymbol, usize)> = cone(hc, subset, s)
                .into_iter()
                .filter_map(|p| subset.choice.get(&p).map(|&d| (p, d)))
                .collect();
            let params = default_params(s);
            let def = solutions[k].get(s).expect("subset solutions cover reached symbols");
            let args: Vec<LinearTerm> = params.iter().cloned().map(LinearTerm::var).collect();
            let body = def.apply(&args).expect("same sorts");
            groups.entry(key).or_default().push(body);
        }
        let body = if groups.is_empty() {
            Constraint::True
        } else {
            Constraint::or(groups.into_values().map(Constraint::and))
        };
        out.insert(s.clone(), Definition::new(default_params(s), body))
            .expect("parameters match the symbol");
    }
    out
}

/// Original symbol ↦ the copies introduced for it.
pub type CopyMap = BTreeMap<RelationSymbol, Vec<RelationSymbol>>;

/// Makes a recursion-free set body-disjoint. While some symbol has several
/// body occurrences, its last occurrence is redirected to a fresh copy, and
/// every clause defining the symbol is duplicated for the copy.
pub fn body_disjoint_transform(hc: &ClauseSet, limit: usize) -> Result<(ClauseSet, CopyMap), SolveError> {
    super::ensure_recursion_free(hc)?;
    let mut clauses: Vec<HornClause> = hc.clauses().to_vec();
    let mut relations: Vec<RelationSymbol> = hc.relations().to_vec();
    let mut names: BTreeSet<String> = relations.iter().map(|r| r.name().to_string()).collect();
    let mut origin: BTreeMap<RelationSymbol, RelationSymbol> = BTreeMap::new();
    let mut copies = CopyMap::new();
    let mut counter: BTreeMap<RelationSymbol, usize> = BTreeMap::new();
    loop {
        let mut occurrences: BTreeMap<&RelationSymbol, Vec<(usize, usize)>> = BTreeMap::new();
        let mut first_seen: Vec<&RelationSymbol> = Vec::new();
        for (ci, c) in clauses.iter().enumerate() {
            for (ai, a) in c.body.iter().enumerate() {
                let occ = occurrences.entry(&a.symbol).or_default();
                if occ.is_empty() {
                    first_seen.push(&a.symbol);
                }
                occ.push((ci, ai));
            }
        }
        let Some(sym) = first_seen.into_iter().find(|s| occurrences[s].len() > 1) else {
            break;
        };
        let sym = sym.clone();
        let &(ci, ai) = occurrences[&sym].last().expect("several occurrences");
        let base = origin.get(&sym).cloned().unwrap_or_else(|| sym.clone());
        let fresh = loop {
            let k = counter.entry(base.clone()).or_insert(0);
            *k += 1;
            let name = format!("{}'{}", base.name(), k);
            if names.insert(name.clone()) {
                break base.renamed(name);
            }
        };
        origin.insert(fresh.clone(), base.clone());
        copies.entry(base).or_default().push(fresh.clone());
        relations.push(fresh.clone());
        let defining: Vec<HornClause> = clauses
            .iter()
            .filter(|c| c.head_symbol() == Some(&sym))
            .cloned()
            .collect();
        for mut c in defining {
            if let crate::horn::Head::Atom(a) = &mut c.head {
                a.symbol = fresh.clone();
            }
            clauses.push(c);
        }
        clauses[ci].body[ai].symbol = fresh;
        if clauses.len() > limit {
            return Err(SolveError::ExpansionLimitExceeded { limit });
        }
    }
    let out = ClauseSet::new(relations, clauses).expect("copies are declared");
    Ok((out, copies))
}

/// Maps a solution of the transformed set back: each original symbol gets
/// the conjunction of its own and all its copies' definitions.
pub fn map_back(original: &ClauseSet, copies: &CopyMap, sol: &Solution) -> Solution {
    let mut out = Solution::new();
    for s in original.relations() {
        let params = default_params(s);
        let args: Vec<LinearTerm> = params.iter().cloned().map(LinearTerm::var).collect();
        let members = std::iter::once(s).chain(copies.get(s).into_iter().flatten());
        let body = Constraint::and(members.map(|m| match sol.get(m) {
            Some(def) => def.apply(&args).expect("copies share sorts"),
            None => Constraint::True,
        }));
        out.insert(s.clone(), Definition::new(params, body)).expect("parameters match");
    }
    out
}
