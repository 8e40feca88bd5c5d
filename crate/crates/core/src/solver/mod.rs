//! Solving recursion-free Horn clause sets through interpolation.
//!
//! Each connected component is routed by fragment: linear tree-like sets
//! become inductive sequences, tree-like sets tree problems, linear sets
//! DAG problems. Body-disjoint sets are split into maximal tree-like subsets
//! whose solutions are recombined; anything else is first made
//! body-disjoint by copying derivation cones. Unsolvable sets yield a
//! derivation of `false` whose constraint is satisfiable.
//!
//! Every solution passes [`verify_solution`] before it is returned.

mod dag;
mod disjoint;
mod expand;
mod tree;

use std::sync::Mutex;

use rayon::prelude::*;
use thiserror::Error;

pub use dag::{dag_interpolate, DagRun};
pub use disjoint::{body_disjoint_transform, combine, map_back, tree_subsets, CopyMap, TreeSubset};
pub use expand::{derivations, expand, Derivation, DerivationTree};
pub use tree::{sequence_interpolants, tree_interpolate, Step, TreeRun};

use crate::analysis::{
    classify, component_indices, dependence_graph, merge_linear_duplicates, normalize, AnalysisError,
};
use crate::encodings::{dag_problem_from_linear, sequence_from_linear_treelike, tree_problem_from_treelike, EncodingError};
use crate::engine::{Engine, EngineConfig, EngineError, Interpolator, Model, SatResult};
use crate::formula::Constraint;
use crate::horn::{verify_solution, ClauseSet, Definition, HornError, RelationSymbol, Solution, Verdict};

pub const DEFAULT_EXPANSION_LIMIT: usize = 100_000;
pub const DEFAULT_SUBSET_LIMIT: usize = 10_000;
pub const DEFAULT_PATH_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("recursive system: cycle {}", cycle.join(" -> "))]
    RecursiveSystem { cycle: Vec<String> },
    #[error("expansion exceeded {limit} nodes")]
    ExpansionLimitExceeded { limit: usize },
    #[error("more than {limit} tree-like subsets")]
    SubsetLimitExceeded { limit: usize },
    #[error("more than {limit} paths to the exit")]
    PathLimitExceeded { limit: usize },
    #[error("clause set is not body-disjoint")]
    NotBodyDisjoint,
    #[error("interpolant for `{node}` mentions disallowed variables {}", vars.join(", "))]
    VariableCondition { node: String, vars: Vec<String> },
    #[error("computed solution failed verification at clause {clause}")]
    VerificationFailed { clause: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Horn(#[from] HornError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

impl SolveError {
    /// Integer branching gave up somewhere below this error.
    pub fn is_unknown(&self) -> bool {
        matches!(
            self,
            SolveError::Engine(EngineError::Unknown { .. }) | SolveError::Horn(HornError::Engine(EngineError::Unknown { .. }))
        )
    }
}

pub(crate) fn ensure_recursion_free(hc: &ClauseSet) -> Result<(), SolveError> {
    match dependence_graph(hc).find_cycle() {
        Some(cycle) => Err(SolveError::RecursiveSystem {
            cycle: cycle.iter().map(|s| s.name().to_string()).collect(),
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub engine: EngineConfig,
    pub expansion_limit: usize,
    pub subset_limit: usize,
    pub path_limit: usize,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
    /// Keep every tree and DAG run for later inspection.
    pub record: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            engine: EngineConfig::default(),
            expansion_limit: DEFAULT_EXPANSION_LIMIT,
            subset_limit: DEFAULT_SUBSET_LIMIT,
            path_limit: DEFAULT_PATH_LIMIT,
            jobs: 0,
            record: false,
        }
    }
}

/// A derivation of `false` with a model of its constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub tree: DerivationTree,
    pub constraint: Constraint,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Solution(Solution),
    Counterexample(Counterexample),
}

/// Which route solved a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Sequence,
    Tree,
    Dag,
    BodyDisjoint,
    Transformed,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub trees: Vec<TreeRun>,
    pub dags: Vec<DagRun>,
    pub routes: Vec<Route>,
}

pub struct Solver<'a> {
    pub config: SolverConfig,
    engine: Engine,
    interp: &'a dyn Interpolator,
    trace: Mutex<Trace>,
}

/// Internal outcome of a component: `Err(None)` means unsolvable.
type Attempt<T> = Result<T, Option<SolveError>>;

fn attempt<T>(r: Result<T, SolveError>) -> Attempt<T> {
    r.map_err(|e| if tree::as_not_unsat(&e) { None } else { Some(e) })
}

impl<'a> Solver<'a> {
    pub fn new(config: SolverConfig, interp: &'a dyn Interpolator) -> Self {
        Solver {
            config,
            engine: Engine::new(config.engine),
            interp,
            trace: Mutex::new(Trace::default()),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Runs recorded so far (only with `record`).
    pub fn take_trace(&self) -> Trace {
        std::mem::take(&mut *self.trace.lock().expect("trace lock"))
    }

    fn record(&self, f: impl FnOnce(&mut Trace)) {
        if self.config.record {
            f(&mut self.trace.lock().expect("trace lock"));
        }
    }

    pub fn solve(&self, hc: &ClauseSet) -> Result<SolveResult, SolveError> {
        ensure_recursion_free(hc)?;
        let components = component_indices(hc);
        let run = || -> Vec<Result<SolveResult, SolveError>> {
            components
                .par_iter()
                .map(|ix| {
                    let comp = hc.subset(ix.iter().copied());
                    self.solve_component(&comp).map(|r| match r {
                        SolveResult::Counterexample(cx) => SolveResult::Counterexample(Counterexample {
                            tree: cx.tree.reindex(&|i| ix[i]),
                            ..cx
                        }),
                        sol => sol,
                    })
                })
                .collect()
        };
        let results = if self.config.jobs > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.config.jobs)
                .build()
                .map_err(|e| EngineError::Backend(e.to_string()))?
                .install(run)
        } else {
            run()
        };

        let mut solution = Solution::constant_true(hc.relations());
        for r in results {
            match r? {
                SolveResult::Solution(s) => solution.extend(s),
                cx @ SolveResult::Counterexample(_) => return Ok(cx),
            }
        }
        match verify_solution(&self.engine, &solution, hc)? {
            Verdict::Valid => Ok(SolveResult::Solution(solution)),
            Verdict::Invalid { clause, .. } => Err(SolveError::VerificationFailed { clause }),
        }
    }

    fn solve_component(&self, comp: &ClauseSet) -> Result<SolveResult, SolveError> {
        let report = classify(comp);
        let outcome = if report.linear_tree_like {
            self.record(|t| t.routes.push(Route::Sequence));
            self.solve_sequence(comp)
        } else if report.tree_like {
            self.record(|t| t.routes.push(Route::Tree));
            self.solve_tree_like(comp)
        } else if report.linear {
            self.record(|t| t.routes.push(Route::Dag));
            self.solve_linear(comp)
        } else if report.body_disjoint {
            self.record(|t| t.routes.push(Route::BodyDisjoint));
            self.solve_body_disjoint_inner(comp)
        } else {
            self.record(|t| t.routes.push(Route::Transformed));
            self.solve_transformed(comp)
        };
        match outcome {
            Ok(sol) => Ok(SolveResult::Solution(sol)),
            Err(Some(e)) => Err(e),
            Err(None) => Ok(SolveResult::Counterexample(self.counterexample(comp)?)),
        }
    }

    /// The first derivation of `false` whose constraint is satisfiable.
    pub fn counterexample(&self, hc: &ClauseSet) -> Result<Counterexample, SolveError> {
        for d in derivations(hc, self.config.expansion_limit)? {
            if let SatResult::Sat(model) = self.engine.sat(&d.constraint)? {
                return Ok(Counterexample {
                    tree: d.tree,
                    constraint: d.constraint,
                    model,
                });
            }
        }
        Err(EngineError::Backend("interpolation failed on a solvable set".into()).into())
    }

    fn solve_sequence(&self, hc: &ClauseSet) -> Attempt<Solution> {
        let nhc = normalize(hc).map_err(|e| Some(e.into()))?;
        let encodings = sequence_from_linear_treelike(&nhc).map_err(|e| Some(e.into()))?;
        let mut sol = Solution::new();
        for enc in encodings {
            let (seq, run) = attempt(sequence_interpolants(self.interp, &enc.problem))?;
            self.record(|t| t.trees.push(run));
            for (i, s) in enc.symbols.iter().enumerate() {
                insert(&mut sol, s, &nhc.arg_vectors[s], seq.formulas[i + 1].clone())?;
            }
        }
        Ok(sol)
    }

    fn solve_tree_like(&self, hc: &ClauseSet) -> Attempt<Solution> {
        let nhc = normalize(hc).map_err(|e| Some(e.into()))?;
        let encodings = tree_problem_from_treelike(&nhc).map_err(|e| Some(e.into()))?;
        let mut sol = Solution::new();
        for enc in encodings {
            let run = attempt(tree_interpolate(self.interp, &enc.problem))?;
            for (v, s) in enc.symbols.iter().enumerate() {
                if let Some(s) = s {
                    insert(&mut sol, s, &nhc.arg_vectors[s], run.interpolant.labels[v].clone())?;
                }
            }
            self.record(|t| t.trees.push(run));
        }
        Ok(sol)
    }

    fn solve_linear(&self, hc: &ClauseSet) -> Attempt<Solution> {
        let nhc = normalize(hc).map_err(|e| Some(e.into()))?;
        let merged = merge_linear_duplicates(&nhc.clauses).map_err(|e| Some(e.into()))?;
        let nhc = crate::analysis::NormalizedClauseSet { clauses: merged, ..nhc };
        let encodings = dag_problem_from_linear(&nhc).map_err(|e| Some(e.into()))?;
        let mut sol = Solution::new();
        for enc in encodings {
            let run = attempt(dag_interpolate(&self.engine, self.interp, &enc.problem, self.config.path_limit))?;
            for (v, s) in enc.symbols.iter().enumerate() {
                if let Some(s) = s {
                    insert(&mut sol, s, &nhc.arg_vectors[s], run.interpolant.labels[v].clone())?;
                }
            }
            self.record(|t| t.dags.push(run));
        }
        Ok(sol)
    }

    fn solve_body_disjoint_inner(&self, hc: &ClauseSet) -> Attempt<Solution> {
        if !classify(hc).body_disjoint {
            return Err(Some(SolveError::NotBodyDisjoint));
        }
        let subsets = tree_subsets(hc, self.config.subset_limit).map_err(Some)?;
        let mut solutions = Vec::with_capacity(subsets.len());
        for s in &subsets {
            solutions.push(self.solve_tree_like(&hc.subset(s.clauses.iter().copied()))?);
        }
        let sol = combine(hc, &subsets, &solutions);
        match verify_solution(&self.engine, &sol, hc).map_err(|e| Some(e.into()))? {
            Verdict::Valid => Ok(sol),
            Verdict::Invalid { clause, .. } => Err(Some(SolveError::VerificationFailed { clause })),
        }
    }

    fn solve_transformed(&self, hc: &ClauseSet) -> Attempt<Solution> {
        let (transformed, copies) = body_disjoint_transform(hc, self.config.expansion_limit).map_err(Some)?;
        let sol = self.solve_body_disjoint_inner(&transformed)?;
        Ok(map_back(hc, &copies, &sol))
    }

    /// Solves a recursion-free body-disjoint set through its maximal
    /// tree-like subsets.
    pub fn solve_body_disjoint(&self, hc: &ClauseSet) -> Result<SolveResult, SolveError> {
        ensure_recursion_free(hc)?;
        match self.solve_body_disjoint_inner(hc) {
            Ok(sol) => {
                let mut full = Solution::constant_true(hc.relations());
                full.extend(sol);
                Ok(SolveResult::Solution(full))
            }
            Err(Some(e)) => Err(e),
            Err(None) => Ok(SolveResult::Counterexample(self.counterexample(hc)?)),
        }
    }
}

fn insert(sol: &mut Solution, s: &RelationSymbol, params: &[crate::formula::Var], body: Constraint) -> Attempt<()> {
    sol.insert(s.clone(), Definition::new(params.to_vec(), body))
        .map_err(|e| Some(e.into()))
}

/// `true` for every symbol, as the solution of a set without queries.
pub fn trivial_solution(hc: &ClauseSet) -> Solution {
    Solution::constant_true(hc.relations())
}

