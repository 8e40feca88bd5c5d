//! Tree interpolation by repeated binary interpolation.

use crate::encodings::{InterpolantSequence, SequenceProblem, TreeInterpolant, TreeProblem};
use crate::engine::{Engine, EngineError, Interpolator};
use crate::formula::Constraint;

use super::SolveError;

/// State after one step of the sweep: the interpolants of `frontier`
/// together with the labels of `remaining` must be unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub node: usize,
    pub frontier: Vec<usize>,
    pub remaining: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeRun {
    pub problem: TreeProblem,
    pub interpolant: TreeInterpolant,
    pub steps: Vec<Step>,
}

impl TreeRun {
    /// Re-checks the unsatisfiability recorded for every step.
    pub fn check_steps(&self, engine: &Engine) -> Result<bool, EngineError> {
        for s in &self.steps {
            let parts = s
                .frontier
                .iter()
                .map(|&k| self.interpolant.labels[k].clone())
                .chain(s.remaining.iter().map(|&k| self.problem.labels[k].clone()));
            if engine.sat(&Constraint::and(parts))?.is_sat() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Processes nodes children-first. Node `v` is interpolated between its
/// label plus its children's interpolants and the rest of the tree: the
/// interpolants of processed nodes whose parent is still pending and the
/// labels of all pending nodes.
pub fn tree_interpolate(interp: &dyn Interpolator, tp: &TreeProblem) -> Result<TreeRun, SolveError> {
    tp.validate()?;
    let order = tp.inverse_topological_order();
    let n = order.len();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut parent_pos = vec![usize::MAX; n];
    for (v, cs) in tp.children.iter().enumerate() {
        for &c in cs {
            parent_pos[c] = pos[v];
        }
    }
    let mut labels = vec![Constraint::True; n];
    let mut steps = Vec::with_capacity(n);
    for (i, &v) in order.iter().enumerate() {
        let a = Constraint::and(
            std::iter::once(tp.labels[v].clone()).chain(tp.children[v].iter().map(|&w| labels[w].clone())),
        );
        let frontier_before: Vec<usize> = order[..i]
            .iter()
            .copied()
            .filter(|&k| parent_pos[k] > i)
            .collect();
        let b = Constraint::and(
            frontier_before
                .iter()
                .map(|&k| labels[k].clone())
                .chain(order[i + 1..].iter().map(|&k| tp.labels[k].clone())),
        );
        let result = interp.interpolate(&a, &b)?;
        labels[v] = if v == tp.root { Constraint::False } else { result.formula };
        steps.push(Step {
            node: v,
            frontier: order[..=i].iter().copied().filter(|&k| parent_pos[k] > i).collect(),
            remaining: order[i + 1..].to_vec(),
        });
    }
    Ok(TreeRun {
        problem: tp.clone(),
        interpolant: TreeInterpolant { labels },
        steps,
    })
}

/// An inductive sequence, computed on the path tree of the problem.
pub fn sequence_interpolants(
    interp: &dyn Interpolator,
    sp: &SequenceProblem,
) -> Result<(InterpolantSequence, TreeRun), SolveError> {
    let run = tree_interpolate(interp, &sp.to_tree())?;
    let mut formulas = vec![Constraint::True];
    formulas.extend(run.interpolant.labels.iter().cloned());
    Ok((InterpolantSequence { formulas }, run))
}

/// The problem is satisfiable: a model of all labels.
pub(crate) fn as_not_unsat(e: &SolveError) -> bool {
    matches!(e, SolveError::Engine(EngineError::NotUnsat { .. }))
}
