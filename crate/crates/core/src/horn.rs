//! Constrained Horn clauses, relation assignments and solution checking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{Engine, EngineError, Model, SatResult};
use crate::formula::{Constraint, FormulaError, LinearTerm, Sort, Var};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum HornError {
    #[error("no definition for relation `{0}`")]
    MissingSymbol(String),
    #[error("relation `{symbol}` expects {expected} arguments, got {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("argument {index} of `{symbol}` has the wrong sort")]
    ArgumentSort { symbol: String, index: usize },
    #[error("undeclared relation `{0}`")]
    UndeclaredSymbol(String),
    #[error("relation `{0}` is declared twice with different sorts")]
    ConflictingDeclaration(String),
    #[error("definition of `{symbol}` mentions `{var}`, which is not a parameter")]
    FreeVariable { symbol: String, var: String },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// An uninterpreted relation symbol with its argument sorts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSymbol {
    name: Arc<str>,
    sorts: Arc<[Sort]>,
}

impl RelationSymbol {
    pub fn new(name: impl AsRef<str>, sorts: impl IntoIterator<Item = Sort>) -> Self {
        RelationSymbol {
            name: Arc::from(name.as_ref()),
            sorts: sorts.into_iter().collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn arity(&self) -> usize {
        self.sorts.len()
    }

    /// The same argument sorts under another name.
    pub fn renamed(&self, name: impl AsRef<str>) -> Self {
        RelationSymbol {
            name: Arc::from(name.as_ref()),
            sorts: self.sorts.clone(),
        }
    }
}

impl fmt::Display for RelationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationAtom {
    pub symbol: RelationSymbol,
    pub args: Vec<LinearTerm>,
}

impl RelationAtom {
    /// Checks arity and argument sorts: Int positions take integral terms
    /// over Int variables, Real positions take Real terms.
    pub fn new(symbol: RelationSymbol, args: Vec<LinearTerm>) -> Result<Self, HornError> {
        if symbol.arity() != args.len() {
            return Err(HornError::ArityMismatch {
                symbol: symbol.name().to_string(),
                expected: symbol.arity(),
                found: args.len(),
            });
        }
        for (index, (sort, t)) in symbol.sorts().iter().zip(&args).enumerate() {
            let ok = match sort {
                Sort::Int => t.is_integral() && t.all_vars_int(),
                Sort::Real => t.vars().all(|v| v.sort() == Sort::Real),
            };
            if !ok {
                return Err(HornError::ArgumentSort {
                    symbol: symbol.name().to_string(),
                    index,
                });
            }
        }
        Ok(RelationAtom { symbol, args })
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.args.iter().flat_map(|t| t.vars().cloned()).collect()
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> RelationAtom {
        RelationAtom {
            symbol: self.symbol.clone(),
            args: self.args.iter().map(|t| t.rename(f)).collect(),
        }
    }
}

impl fmt::Display for RelationAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.symbol)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    False,
    Atom(RelationAtom),
}

impl Head {
    pub fn symbol(&self) -> Option<&RelationSymbol> {
        match self {
            Head::False => None,
            Head::Atom(a) => Some(&a.symbol),
        }
    }
}

/// `constraint ∧ body[0] ∧ … → head`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HornClause {
    pub constraint: Constraint,
    pub body: Vec<RelationAtom>,
    pub head: Head,
}

impl HornClause {
    pub fn new(constraint: Constraint, body: Vec<RelationAtom>, head: Head) -> Self {
        HornClause { constraint, body, head }
    }

    pub fn head_symbol(&self) -> Option<&RelationSymbol> {
        self.head.symbol()
    }

    pub fn body_symbols(&self) -> impl Iterator<Item = &RelationSymbol> {
        self.body.iter().map(|a| &a.symbol)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.constraint.free_vars();
        for a in &self.body {
            out.extend(a.vars());
        }
        if let Head::Atom(a) = &self.head {
            out.extend(a.vars());
        }
        out
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> HornClause {
        HornClause {
            constraint: self.constraint.rename(f),
            body: self.body.iter().map(|a| a.rename(f)).collect(),
            head: match &self.head {
                Head::False => Head::False,
                Head::Atom(a) => Head::Atom(a.rename(f)),
            },
        }
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Head::False => f.write_str("false")?,
            Head::Atom(a) => write!(f, "{a}")?,
        }
        f.write_str(" <- ")?;
        let mut first = true;
        for a in &self.body {
            if !first {
                f.write_str(" && ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        if !self.constraint.is_true() || first {
            if !first {
                f.write_str(" && ")?;
            }
            write!(f, "{}", self.constraint)?;
        }
        Ok(())
    }
}

/// Relation symbols in declaration order plus clauses in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseSet {
    relations: Vec<RelationSymbol>,
    clauses: Vec<HornClause>,
}

impl ClauseSet {
    /// Builds a set and checks that every used symbol is declared. Duplicate
    /// identical declarations are merged.
    pub fn new(relations: Vec<RelationSymbol>, clauses: Vec<HornClause>) -> Result<Self, HornError> {
        let mut declared: BTreeMap<&str, &RelationSymbol> = BTreeMap::new();
        let mut unique = Vec::with_capacity(relations.len());
        for r in &relations {
            match declared.get(r.name()) {
                Some(prev) if *prev != r => return Err(HornError::ConflictingDeclaration(r.name().to_string())),
                Some(_) => {}
                None => {
                    declared.insert(r.name(), r);
                    unique.push(r.clone());
                }
            }
        }
        for c in &clauses {
            for s in c.body_symbols().chain(c.head_symbol()) {
                if declared.get(s.name()) != Some(&s) {
                    return Err(HornError::UndeclaredSymbol(s.name().to_string()));
                }
            }
        }
        Ok(ClauseSet {
            relations: unique,
            clauses,
        })
    }

    /// Declares exactly the symbols used by `clauses`, in order of first use.
    pub fn from_clauses(clauses: Vec<HornClause>) -> Result<Self, HornError> {
        let mut seen = BTreeSet::new();
        let mut relations = Vec::new();
        for c in &clauses {
            for s in c.body_symbols().chain(c.head_symbol()) {
                if seen.insert(s.clone()) {
                    relations.push(s.clone());
                }
            }
        }
        ClauseSet::new(relations, clauses)
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn clauses(&self) -> &[HornClause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSymbol> {
        self.relations.iter().find(|r| r.name() == name)
    }

    /// The clauses selected by index, keeping the declarations of the
    /// symbols they use.
    pub fn subset(&self, indices: impl IntoIterator<Item = usize>) -> ClauseSet {
        let clauses: Vec<HornClause> = indices.into_iter().map(|i| self.clauses[i].clone()).collect();
        let used: BTreeSet<&RelationSymbol> = clauses
            .iter()
            .flat_map(|c| c.body_symbols().chain(c.head_symbol()))
            .collect();
        let relations = self.relations.iter().filter(|r| used.contains(r)).cloned().collect();
        ClauseSet { relations, clauses }
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `sol(p) = body[params]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub params: Vec<Var>,
    pub body: Constraint,
}

impl Definition {
    pub fn new(params: Vec<Var>, body: Constraint) -> Self {
        Definition { params, body }
    }

    /// The body with the parameters replaced by `args`.
    pub fn apply(&self, args: &[LinearTerm]) -> Result<Constraint, HornError> {
        let subst: BTreeMap<Var, LinearTerm> = self.params.iter().cloned().zip(args.iter().cloned()).collect();
        Ok(self.body.substitute(&subst)?)
    }
}

/// A relation-symbol assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Solution {
    defs: BTreeMap<RelationSymbol, Definition>,
}

impl Solution {
    pub fn new() -> Self {
        Solution::default()
    }

    /// Adds a definition after checking parameter count, sorts and the free
    /// variables of the body.
    pub fn insert(&mut self, symbol: RelationSymbol, def: Definition) -> Result<(), HornError> {
        if def.params.len() != symbol.arity() {
            return Err(HornError::ArityMismatch {
                symbol: symbol.name().to_string(),
                expected: symbol.arity(),
                found: def.params.len(),
            });
        }
        for (index, (p, s)) in def.params.iter().zip(symbol.sorts()).enumerate() {
            if p.sort() != *s {
                return Err(HornError::ArgumentSort {
                    symbol: symbol.name().to_string(),
                    index,
                });
            }
        }
        let params: BTreeSet<&Var> = def.params.iter().collect();
        if let Some(v) = def.body.free_vars().iter().find(|v| !params.contains(v)) {
            return Err(HornError::FreeVariable {
                symbol: symbol.name().to_string(),
                var: v.name().to_string(),
            });
        }
        self.defs.insert(symbol, def);
        Ok(())
    }

    /// Every symbol mapped to `true` over parameters `<name>#<i>`.
    pub fn constant_true<'a>(symbols: impl IntoIterator<Item = &'a RelationSymbol>) -> Solution {
        let mut sol = Solution::new();
        for s in symbols {
            sol.defs.insert(s.clone(), Definition::new(default_params(s), Constraint::True));
        }
        sol
    }

    pub fn get(&self, symbol: &RelationSymbol) -> Option<&Definition> {
        self.defs.get(symbol)
    }

    pub fn get_by_name(&self, name: &str) -> Option<(&RelationSymbol, &Definition)> {
        self.defs.iter().find(|(s, _)| s.name() == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RelationSymbol, &Definition)> {
        self.defs.iter()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Merges `other` into `self`; definitions in `other` win.
    pub fn extend(&mut self, other: Solution) {
        self.defs.extend(other.defs);
    }

    fn lookup(&self, symbol: &RelationSymbol) -> Result<&Definition, HornError> {
        self.defs
            .get(symbol)
            .ok_or_else(|| HornError::MissingSymbol(symbol.name().to_string()))
    }
}

/// Parameters `<name>#0`, `<name>#1`, … with the symbol's sorts.
pub fn default_params(symbol: &RelationSymbol) -> Vec<Var> {
    symbol
        .sorts()
        .iter()
        .enumerate()
        .map(|(i, s)| Var::new(format!("{}#{i}", symbol.name()), *s))
        .collect()
}

/// The instantiated clause `C ∧ sol(p1)[t1] ∧ … → sol(p)[t]`.
pub fn instantiate(sol: &Solution, clause: &HornClause) -> Result<Constraint, HornError> {
    let (premise, conclusion) = instantiate_parts(sol, clause)?;
    Ok(Constraint::implies(premise, conclusion))
}

fn instantiate_parts(sol: &Solution, clause: &HornClause) -> Result<(Constraint, Constraint), HornError> {
    let mut parts = vec![clause.constraint.clone()];
    for a in &clause.body {
        parts.push(sol.lookup(&a.symbol)?.apply(&a.args)?);
    }
    let conclusion = match &clause.head {
        Head::False => Constraint::False,
        Head::Atom(a) => sol.lookup(&a.symbol)?.apply(&a.args)?,
    };
    Ok((Constraint::and(parts), conclusion))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// The first failing clause (input order) and a model of its negation.
    Invalid { clause: usize, model: Model },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Checks every instantiated clause for validity. Clauses are checked in
/// parallel; the reported failure is the first in input order.
pub fn verify_solution(engine: &Engine, sol: &Solution, hc: &ClauseSet) -> Result<Verdict, HornError> {
    let results: Vec<Result<Option<Model>, HornError>> = hc
        .clauses()
        .par_iter()
        .map(|clause| {
            let (premise, conclusion) = instantiate_parts(sol, clause)?;
            let query = Constraint::and([premise, Constraint::not(conclusion)]);
            Ok(match engine.sat(&query)? {
                SatResult::Sat(m) => Some(m),
                SatResult::Unsat => None,
            })
        })
        .collect();
    for (clause, r) in results.into_iter().enumerate() {
        if let Some(model) = r? {
            return Ok(Verdict::Invalid { clause, model });
        }
    }
    Ok(Verdict::Valid)
}
