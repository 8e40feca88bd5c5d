use hornitp_core::analysis::classify;
use hornitp_core::encodings::{check_dag_interpolant, check_tree_interpolant};
use hornitp_core::engine::{Engine, EngineConfig, SatResult};
use hornitp_core::formula::{Constraint, LinearTerm, Sort, Var};
use hornitp_core::horn::{verify_solution, ClauseSet, Head, HornClause, RelationAtom, RelationSymbol, Verdict};
use hornitp_core::solver::{
    body_disjoint_transform, derivations, expand, tree_subsets, Route, SolveError, SolveResult, Solver, SolverConfig,
};
use hornitp_core::syntax::{parse_chc, parse_solution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

macro_rules! fixture {
    ($name:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/", $name))
    };
}

fn engine() -> Engine {
    Engine::new(EngineConfig::default())
}

fn recording() -> SolverConfig {
    SolverConfig {
        record: true,
        ..SolverConfig::default()
    }
}

fn solution_of(r: SolveResult) -> hornitp_core::horn::Solution {
    match r {
        SolveResult::Solution(s) => s,
        SolveResult::Counterexample(cx) => panic!("unexpected counterexample:\n{}", cx.tree),
    }
}

#[test]
fn tree_subset_is_solved_by_tree_interpolation() {
    let hc = parse_chc(fixture!("tree-subset.chc")).unwrap();
    let e = engine();
    let solver = Solver::new(recording(), &e);
    let sol = solution_of(solver.solve(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);

    let trace = solver.take_trace();
    assert_eq!(trace.routes, vec![Route::Tree]);
    assert_eq!(trace.trees.len(), 1);
    let run = &trace.trees[0];
    assert_eq!(run.problem.len(), 8);
    assert_eq!(check_tree_interpolant(&e, &run.problem, &run.interpolant).unwrap(), Ok(()));
    assert!(run.check_steps(&e).unwrap());

    // r8 must at least exclude positive n
    let (r8, def) = sol.get_by_name("r8").unwrap();
    let n = def.params[0].clone();
    assert_eq!(r8.arity(), 3);
    assert!(e.entails(&[def.body.clone()], &Constraint::le(n, 0)).unwrap());
}

#[test]
fn tree_labels_verify() {
    let hc = parse_chc(fixture!("tree-subset.chc")).unwrap();
    let sol = parse_solution(fixture!("tree-subset-labels.sol"), &hc).unwrap();
    assert_eq!(verify_solution(&engine(), &sol, &hc).unwrap(), Verdict::Valid);
}

#[test]
fn recursive_set_is_rejected_with_its_cycle() {
    let hc = parse_chc(fixture!("recursive.chc")).unwrap();
    let e = engine();
    match Solver::new(SolverConfig::default(), &e).solve(&hc) {
        Err(SolveError::RecursiveSystem { cycle }) => {
            assert!(cycle.contains(&"rf".to_string()), "{cycle:?}");
            assert!(cycle.contains(&"r9".to_string()));
            assert!(cycle.contains(&"r7".to_string()));
        }
        other => panic!("expected a recursion error, got {other:?}"),
    }
}

#[test]
fn recursive_solution_still_verifies() {
    let hc = parse_chc(fixture!("recursive.chc")).unwrap();
    let sol = parse_solution(fixture!("recursive.sol"), &hc).unwrap();
    assert_eq!(verify_solution(&engine(), &sol, &hc).unwrap(), Verdict::Valid);
}

fn unsafe_pair() -> ClauseSet {
    parse_chc(
        "(declare-fun p (Int) Bool)
         (assert (forall ((x Int)) (=> true (p x))))
         (assert (forall ((x Int)) (=> (and (p x) (>= x 0)) false)))",
    )
    .unwrap()
}

#[test]
fn unsolvable_pair_gives_counterexample() {
    let hc = unsafe_pair();
    let e = engine();
    match Solver::new(SolverConfig::default(), &e).solve(&hc).unwrap() {
        SolveResult::Counterexample(cx) => {
            assert_eq!(cx.tree.clause, 1);
            assert_eq!(cx.tree.children.len(), 1);
            assert_eq!(cx.tree.children[0].clause, 0);
            assert!(cx.constraint.eval(&cx.model));
        }
        SolveResult::Solution(_) => panic!("the pair has no solution"),
    }
}

#[test]
fn expansion_of_pair_is_a_single_satisfiable_derivation() {
    let hc = unsafe_pair();
    let ds = derivations(&hc, 100).unwrap();
    assert_eq!(ds.len(), 1);
    let e = engine();
    let exp = expand(&hc, 100).unwrap();
    let SatResult::Sat(m) = e.sat(&exp).unwrap() else {
        panic!("expansion should be satisfiable")
    };
    // the query argument is non-negative in every model
    let x = exp
        .free_vars()
        .into_iter()
        .find(|v| v.name().starts_with("x~") && v.name().ends_with("~1"))
        .unwrap();
    assert!(m[&x] >= num_rational::BigRational::from_integer(0.into()));
    assert!(e
        .entails(&[exp.clone()], &Constraint::ge(LinearTerm::var(x), 0))
        .unwrap());
}

#[test]
fn expansion_of_tree_subset_is_unsat_and_empty_without_queries() {
    let hc = parse_chc(fixture!("tree-subset.chc")).unwrap();
    let e = engine();
    assert_eq!(e.sat(&expand(&hc, 10_000).unwrap()).unwrap(), SatResult::Unsat);

    let facts = hc.subset([0, 1]);
    assert_eq!(expand(&facts, 100).unwrap(), Constraint::False);
}

#[test]
fn body_disjoint_unwinding_combines_two_subsets() {
    let hc = parse_chc(fixture!("unwinding.chc")).unwrap();
    assert_eq!(hc.len(), 16);
    let report = classify(&hc);
    assert!(report.body_disjoint && !report.head_disjoint && report.recursion_free);

    let subsets = tree_subsets(&hc, 100).unwrap();
    assert_eq!(subsets.len(), 2);
    let sizes: Vec<usize> = subsets.iter().map(|s| s.clauses.len()).collect();
    assert!(sizes.contains(&8) && sizes.contains(&13), "{sizes:?}");

    let e = engine();
    let solver = Solver::new(recording(), &e);
    let sol = solution_of(solver.solve_body_disjoint(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
    let trace = solver.take_trace();
    assert_eq!(trace.trees.len(), 2);
    for run in &trace.trees {
        assert_eq!(check_tree_interpolant(&e, &run.problem, &run.interpolant).unwrap(), Ok(()));
        assert!(run.check_steps(&e).unwrap());
    }

    let solver = Solver::new(recording(), &e);
    solution_of(solver.solve(&hc).unwrap());
    assert_eq!(solver.take_trace().routes, vec![Route::BodyDisjoint]);
}

#[test]
fn combined_table_verifies_on_unwinding() {
    let hc = parse_chc(fixture!("unwinding.chc")).unwrap();
    let sol = parse_solution(fixture!("unwinding.sol"), &hc).unwrap();
    assert_eq!(verify_solution(&engine(), &sol, &hc).unwrap(), Verdict::Valid);
}

#[test]
fn non_body_disjoint_unwinding_is_transformed() {
    let hc = parse_chc(fixture!("unwinding-15.chc")).unwrap();
    assert!(!classify(&hc).body_disjoint);
    let (t, copies) = body_disjoint_transform(&hc, 1000).unwrap();
    assert!(classify(&t).body_disjoint);
    assert_eq!(copies.len(), 1);
    assert_eq!(t.len(), 16);

    let e = engine();
    let solver = Solver::new(recording(), &e);
    let sol = solution_of(solver.solve(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
    assert_eq!(solver.take_trace().routes, vec![Route::Transformed]);
}

#[test]
fn second_summary_use_copies_its_whole_cone() {
    let mut text = fixture!("tree-subset.chc").replace("(check-sat)", "");
    text.push_str("(assert (forall ((n Int) (c Int)) (=> (and (rf (- n 1) c) (>= n 1) (not (= c n))) false)))\n");
    let hc = parse_chc(&text).unwrap();
    let (t, copies) = body_disjoint_transform(&hc, 1000).unwrap();
    assert_eq!(t.len(), hc.len() + 4);
    let mut copied: Vec<&str> = copies.keys().map(RelationSymbol::name).collect();
    copied.sort();
    assert_eq!(copied, ["r5", "r8", "r9", "rf"]);
    assert!(classify(&t).body_disjoint);

    let e = engine();
    let sol = solution_of(Solver::new(SolverConfig::default(), &e).solve(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
}

#[test]
fn transform_is_identity_on_body_disjoint_input() {
    let hc = parse_chc(fixture!("tree-subset.chc")).unwrap();
    let (t, copies) = body_disjoint_transform(&hc, 1000).unwrap();
    assert_eq!(t, hc);
    assert!(copies.is_empty());
}

#[test]
fn three_uses_give_two_copies() {
    let hc = parse_chc(
        "(declare-fun p (Int) Bool)
         (declare-fun q (Int) Bool)
         (assert (forall ((x Int)) (=> (>= x 0) (q x))))
         (assert (forall ((x Int)) (=> (q x) (p x))))
         (assert (forall ((x Int)) (=> (and (p x) (< x 0)) false)))
         (assert (forall ((x Int)) (=> (and (p x) (< x (- 1))) false)))
         (assert (forall ((x Int)) (=> (and (p x) (< x (- 2))) false)))",
    )
    .unwrap();
    let (t, copies) = body_disjoint_transform(&hc, 1000).unwrap();
    let p = hc.relation("p").unwrap();
    assert_eq!(copies[p].len(), 2);
    // p's clause and q's clause, both copied twice
    assert_eq!(t.len(), hc.len() + 4);
    let e = engine();
    let sol = solution_of(Solver::new(SolverConfig::default(), &e).solve(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
}

#[test]
fn linear_fan_in_goes_through_the_dag_route() {
    let hc = parse_chc(
        "(declare-fun p (Int) Bool)
         (declare-fun q (Int) Bool)
         (assert (forall ((x Int)) (=> (= x 0) (p x))))
         (assert (forall ((x Int) (y Int)) (=> (and (p x) (= y (+ x 1))) (q y))))
         (assert (forall ((x Int) (y Int)) (=> (and (p x) (= y (+ x 2))) (q y))))
         (assert (forall ((y Int)) (=> (and (q y) (< y 1)) false)))",
    )
    .unwrap();
    let e = engine();
    let solver = Solver::new(recording(), &e);
    let sol = solution_of(solver.solve(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
    let trace = solver.take_trace();
    assert_eq!(trace.routes, vec![Route::Dag]);
    let run = &trace.dags[0];
    assert_eq!(check_dag_interpolant(&e, &run.problem, &run.interpolant).unwrap(), Ok(()));
}

#[test]
fn chain_goes_through_the_sequence_route() {
    let hc = parse_chc(
        "(declare-fun p (Int) Bool)
         (declare-fun q (Int) Bool)
         (assert (forall ((x Int)) (=> (>= x 0) (p x))))
         (assert (forall ((x Int) (y Int)) (=> (and (p x) (= y (+ x 1))) (q y))))
         (assert (forall ((y Int)) (=> (and (q y) (<= y 0)) false)))",
    )
    .unwrap();
    let e = engine();
    let solver = Solver::new(recording(), &e);
    let sol = solution_of(solver.solve(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
    assert_eq!(solver.take_trace().routes, vec![Route::Sequence]);
}

#[test]
fn unused_symbols_and_empty_sets_get_true() {
    let hc = parse_chc("(declare-fun p (Int) Bool)").unwrap();
    let e = engine();
    let sol = solution_of(Solver::new(SolverConfig::default(), &e).solve(&hc).unwrap());
    assert_eq!(sol.len(), 1);
    assert!(sol.get_by_name("p").unwrap().1.body.is_true());
}

#[test]
fn expansion_budget_is_reported() {
    let hc = parse_chc(fixture!("tree-subset.chc")).unwrap();
    assert_eq!(
        derivations(&hc, 3).unwrap_err(),
        SolveError::ExpansionLimitExceeded { limit: 3 }
    );
}

#[test]
fn several_components_solve_in_parallel() {
    let mut text = fixture!("tree-subset.chc").replace("(check-sat)", "");
    text.push_str(
        "(declare-fun s (Int) Bool)
         (assert (forall ((z Int)) (=> (>= z 5) (s z))))
         (assert (forall ((z Int)) (=> (and (s z) (<= z 4)) false)))",
    );
    let hc = parse_chc(&text).unwrap();
    let e = engine();
    let config = SolverConfig {
        jobs: 2,
        ..SolverConfig::default()
    };
    let sol = solution_of(Solver::new(config, &e).solve(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
}

/// A random recursion-free set: symbol `i` is only defined from symbols
/// below `i`.
fn random_set(rng: &mut ChaCha8Rng, sort: Sort) -> ClauseSet {
    let nsym = rng.gen_range(1..=5);
    let symbols: Vec<RelationSymbol> = (0..nsym)
        .map(|i| RelationSymbol::new(format!("s{i}"), vec![sort; rng.gen_range(0..=3)]))
        .collect();
    let vars: Vec<Var> = (0..3).map(|i| Var::new(format!("v{i}"), sort)).collect();
    let term = |rng: &mut ChaCha8Rng| {
        let coeffs: Vec<i64> = (0..3).map(|_| rng.gen_range(-3..=3)).collect();
        let mut t = LinearTerm::int(rng.gen_range(-3..=3));
        for (v, c) in vars.iter().zip(coeffs) {
            t = t + LinearTerm::var(v.clone()) * &num_rational::BigRational::from_integer(c.into());
        }
        t
    };
    let atom = |rng: &mut ChaCha8Rng, s: &RelationSymbol| {
        let args = (0..s.arity())
            .map(|_| LinearTerm::var(vars[rng.gen_range(0..3)].clone()))
            .collect();
        RelationAtom::new(s.clone(), args).unwrap()
    };
    let nclauses = rng.gen_range(1..=8);
    let clauses = (0..nclauses)
        .map(|_| {
            let head = rng.gen_range(0..=nsym);
            let below = if head == nsym { nsym } else { head };
            let nbody = if below == 0 { 0 } else { rng.gen_range(0..=2) };
            let body = (0..nbody)
                .map(|_| {
                    let s = rng.gen_range(0..below);
                    atom(rng, &symbols[s])
                })
                .collect();
            let parts: Vec<Constraint> = (0..rng.gen_range(0..=2))
                .map(|_| match rng.gen_range(0..3) {
                    0 => Constraint::le(term(rng), 0),
                    1 => Constraint::lt(term(rng), 0),
                    _ => Constraint::eq(term(rng), 0),
                })
                .collect();
            let head = if head == nsym {
                Head::False
            } else {
                Head::Atom(atom(rng, &symbols[head]))
            };
            HornClause::new(Constraint::and(parts), body, head)
        })
        .collect();
    ClauseSet::new(symbols, clauses).unwrap()
}

#[test]
fn random_real_sets_agree_with_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let e = engine();
    for round in 0..60 {
        let hc = random_set(&mut rng, Sort::Real);
        let expected_solvable = e.sat(&expand(&hc, 100_000).unwrap()).unwrap() == SatResult::Unsat;
        match Solver::new(SolverConfig::default(), &e).solve(&hc).unwrap() {
            SolveResult::Solution(sol) => {
                assert!(expected_solvable, "round {round}: solution for unsolvable set\n{hc}");
                assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
            }
            SolveResult::Counterexample(cx) => {
                assert!(!expected_solvable, "round {round}: counterexample for solvable set\n{hc}");
                assert!(cx.constraint.eval(&cx.model));
            }
        }
    }
}

#[test]
fn random_int_sets_are_never_answered_wrongly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let e = engine();
    let mut answered = 0;
    for _ in 0..60 {
        let hc = random_set(&mut rng, Sort::Int);
        let Ok(SatResult::Unsat | SatResult::Sat(_)) = expand(&hc, 100_000).map(|x| e.sat(&x)).unwrap() else {
            continue;
        };
        let expected_solvable = e.sat(&expand(&hc, 100_000).unwrap()).unwrap() == SatResult::Unsat;
        match Solver::new(SolverConfig::default(), &e).solve(&hc) {
            Ok(SolveResult::Solution(sol)) => {
                assert!(expected_solvable);
                assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
                answered += 1;
            }
            Ok(SolveResult::Counterexample(cx)) => {
                assert!(!expected_solvable);
                assert!(cx.constraint.eval(&cx.model));
                answered += 1;
            }
            // integer interpolation may need divisibility, which the
            // constraint language cannot express
            Err(e) if e.is_unknown() => {}
            Err(other) => panic!("unexpected error {other}"),
        }
    }
    assert!(answered > 40, "only {answered} answered");
}

#[test]
fn subsets_are_enumerated_per_query() {
    let hc = parse_chc(
        "(declare-fun p (Int) Bool)
         (declare-fun q (Int) Bool)
         (assert (forall ((x Int)) (=> (= x 0) (p x))))
         (assert (forall ((x Int)) (=> (= x 1) (p x))))
         (assert (forall ((x Int)) (=> (= x 2) (p x))))
         (assert (forall ((x Int)) (=> (= x 0) (q x))))
         (assert (forall ((x Int)) (=> (= x 1) (q x))))
         (assert (forall ((x Int)) (=> (= x 2) (q x))))
         (assert (forall ((x Int)) (=> (and (p x) (< x 0)) false)))
         (assert (forall ((x Int)) (=> (and (q x) (> x 2)) false)))",
    )
    .unwrap();
    let subsets = tree_subsets(&hc, 100).unwrap();
    assert_eq!(subsets.len(), 6);
    assert!(subsets.iter().all(|s| s.clauses.len() == 2));
    let e = engine();
    let sol = solution_of(Solver::new(SolverConfig::default(), &e).solve_body_disjoint(&hc).unwrap());
    assert_eq!(verify_solution(&e, &sol, &hc).unwrap(), Verdict::Valid);
}
