//! Restricted DAG interpolation by a topological sweep.
//!
//! `I(v)` interpolates between everything that can reach `v` (the incoming
//! edges conjoined with the predecessors' interpolants) and `Bad(v)`, the
//! disjunction of all ways to continue from `v` into a violated node label
//! or the exit.

use crate::encodings::{DagInterpolant, DagProblem};
use crate::engine::{Engine, EngineError, Interpolator, SatResult};
use crate::formula::Constraint;

use super::SolveError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagRun {
    pub problem: DagProblem,
    pub interpolant: DagInterpolant,
}

/// Number of disjuncts `Bad(en)` would have.
fn suffix_count(dp: &DagProblem, order: &[usize]) -> u128 {
    let mut count = vec![0u128; dp.len()];
    for &v in order.iter().rev() {
        count[v] = dp
            .outgoing(v)
            .map(|e| if e.to == dp.exit { 1 } else { 1 + count[e.to] })
            .fold(0u128, |a, b| a.saturating_add(b));
    }
    count[dp.entry]
}

pub fn dag_interpolate(
    engine: &Engine,
    interp: &dyn Interpolator,
    dp: &DagProblem,
    path_limit: usize,
) -> Result<DagRun, SolveError> {
    dp.validate()?;
    let order = dp.topological_order().expect("validated");
    if suffix_count(dp, &order) > path_limit as u128 {
        return Err(SolveError::PathLimitExceeded { limit: path_limit });
    }

    let mut bad = vec![Constraint::False; dp.len()];
    for &v in order.iter().rev() {
        if v == dp.exit {
            continue;
        }
        let continuations = dp.outgoing(v).map(|e| {
            let rest = if e.to == dp.exit {
                Constraint::True
            } else {
                Constraint::or([Constraint::not(dp.node_labels[e.to].clone()), bad[e.to].clone()])
            };
            Constraint::and([e.label.clone(), rest])
        });
        bad[v] = Constraint::and([dp.node_labels[v].clone(), Constraint::or(continuations)]);
    }
    if let SatResult::Sat(model) = engine.sat(&bad[dp.entry])? {
        return Err(EngineError::NotUnsat { model }.into());
    }

    let mut labels = vec![Constraint::True; dp.len()];
    for &v in &order {
        if v == dp.entry {
            continue;
        }
        if v == dp.exit {
            labels[v] = Constraint::False;
            continue;
        }
        let reach = Constraint::or(dp.incoming(v).map(|e| {
            Constraint::and([labels[e.from].clone(), dp.node_labels[e.from].clone(), e.label.clone()])
        }));
        labels[v] = interp.interpolate(&reach, &bad[v])?.formula;
        let allowed = dp.allowed_vars(v);
        let extra: Vec<String> = labels[v]
            .free_vars()
            .iter()
            .filter(|x| !allowed.contains(x))
            .map(|x| x.name().to_string())
            .collect();
        if !extra.is_empty() {
            return Err(SolveError::VariableCondition {
                node: dp.names[v].clone(),
                vars: extra,
            });
        }
    }
    Ok(DagRun {
        problem: dp.clone(),
        interpolant: DagInterpolant { labels },
    })
}
