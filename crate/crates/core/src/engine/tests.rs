use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::formula::{ratio, LinearTerm};

fn x() -> Var {
    Var::real("x")
}

fn atom(c: Constraint) -> Atom {
    match c {
        Constraint::Atom(a) => a,
        other => panic!("not an atom: {other}"),
    }
}

fn cube(parts: Vec<Constraint>) -> Cube {
    Cube::new(parts.into_iter().map(atom).collect())
}

#[test]
fn contradictory_bounds_are_refuted_with_unit_multipliers() {
    let c = cube(vec![Constraint::le(x(), 0), Constraint::ge(x(), 1)]);
    match Engine::default().sat_cube(&c) {
        RationalOutcome::Unsat(cert) => {
            assert!(cert.verify(c.atoms()));
            let ms: Vec<Rational> = cert.multipliers.iter().map(|(_, m)| m.clone()).collect();
            assert_eq!(ms, vec![rat(1), rat(1)]);
            assert!(!cert.strict);
            let sum = cert.combination(c.atoms(), |_| true);
            assert_eq!(sum, LinearTerm::int(1));
        }
        other => panic!("expected unsat, got {other:?}"),
    }
}

#[test]
fn empty_cube_is_sat_with_empty_model() {
    assert_eq!(Engine::default().sat_cube(&Cube::new(vec![])), RationalOutcome::Sat(Model::new()));
}

#[test]
fn base_case_cube_has_integral_model() {
    let n = Var::int("n");
    let rec = Var::int("rec");
    let f = Constraint::and([
        Constraint::le(n.clone(), 0),
        Constraint::ge(n.clone(), 0),
        Constraint::eq(rec.clone(), 1),
    ]);
    let cubes = Engine::default().dnf(&f).unwrap();
    assert_eq!(cubes.len(), 1);
    match Engine::default().decide_cube(&cubes[0]).unwrap() {
        Decision::Sat(m) => {
            assert_eq!(m[&n], rat(0));
            assert_eq!(m[&rec], rat(1));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sat_trivial_cases() {
    let e = Engine::default();
    assert_eq!(e.sat(&Constraint::False).unwrap(), SatResult::Unsat);
    let f = Constraint::and([Constraint::ge(x(), 0), Constraint::ne(x(), x())]);
    assert_eq!(e.sat(&f).unwrap(), SatResult::Unsat);
    assert!(e.sat(&Constraint::True).unwrap().is_sat());
}

#[test]
fn entailment_examples() {
    let e = Engine::default();
    assert!(e.entails(&[Constraint::ge(x(), 1)], &Constraint::ge(x(), 0)).unwrap());
    assert!(!e.entails(&[], &Constraint::ge(x(), 0)).unwrap());

    let (n9, rec9, nf, recf) = (Var::int("n9"), Var::int("rec9"), Var::int("nf"), Var::int("recf"));
    let label = |n: &Var, r: &Var| {
        Constraint::or([
            Constraint::le(n.clone(), -1),
            Constraint::and([Constraint::eq(r.clone(), 1), Constraint::eq(n.clone(), 0)]),
        ])
    };
    let edge = Constraint::and([Constraint::eq(nf.clone(), n9.clone()), Constraint::eq(recf.clone(), rec9.clone())]);
    assert!(e.entails(&[label(&n9, &rec9), edge], &label(&nf, &recf)).unwrap());
}

#[test]
fn integer_tightening_is_used_in_entailment() {
    // n > 0 entails n >= 1 only over the integers
    let e = Engine::default();
    let n = Var::int("n");
    assert!(e.entails(&[Constraint::gt(n.clone(), 0)], &Constraint::ge(n, 1)).unwrap());
    let r = Var::real("r");
    assert!(!e.entails(&[Constraint::gt(r.clone(), 0)], &Constraint::ge(r, 1)).unwrap());
}

#[test]
fn branching_decides_parity_gap() {
    // 2x = 2y + 1 has no integer solution; the rational relaxation does
    let e = Engine::default();
    let (a, b) = (Var::int("a"), Var::int("b"));
    let f = Constraint::eq(
        LinearTerm::var(a.clone()) * &rat(2),
        LinearTerm::var(b.clone()) * &rat(2) + LinearTerm::int(1),
    );
    assert_eq!(e.sat(&f).unwrap(), SatResult::Unsat);

    // 3a + 3b = 2 with 0 <= a,b: atom folding already catches the gcd
    // mismatch, so use inequalities that need branching
    let g = Constraint::and([
        Constraint::ge(LinearTerm::var(a.clone()) * &rat(3), LinearTerm::int(1)),
        Constraint::le(LinearTerm::var(a.clone()) * &rat(3), LinearTerm::int(2)),
        Constraint::ge(b.clone(), 0),
    ]);
    assert_eq!(e.sat(&g).unwrap(), SatResult::Unsat);
    let cubes = e.dnf(&g).unwrap();
    match e.decide_cube(&cubes[0]).unwrap() {
        Decision::Unsat(r) => assert!(r.verify(cubes[0].atoms())),
        other => panic!("{other:?}"),
    }
}

#[test]
fn branch_depth_exhaustion_is_reported() {
    // b = 2a, b = 1 forces a = 1/2 in the relaxation
    let (a, b) = (Var::int("a"), Var::int("b"));
    let f = Constraint::and([
        Constraint::eq(b.clone(), LinearTerm::var(a) * &rat(2)),
        Constraint::eq(b, 1),
    ]);
    let shallow = Engine::new(EngineConfig {
        branch_depth: 0,
        ..EngineConfig::default()
    });
    assert_eq!(shallow.sat(&f), Err(EngineError::Unknown { depth: 0 }));
    assert_eq!(Engine::default().sat(&f).unwrap(), SatResult::Unsat);
}

#[test]
fn binary_interpolant_examples() {
    let e = Engine::default();
    let a = Constraint::ge(x(), 0);
    let b = Constraint::le(x(), -1);
    let i = e.binary_interpolant(&a, &b).unwrap();
    assert_eq!(e.check_interpolant(&a, &b, &i.formula).unwrap(), Ok(()));

    let i = e.binary_interpolant(&Constraint::False, &Constraint::True).unwrap();
    assert_eq!(i.formula, Constraint::False);

    match e.binary_interpolant(&a, &Constraint::ge(x(), 1)) {
        Err(EngineError::NotUnsat { model }) => assert!(model[&x()] >= rat(1)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn interpolant_mentions_only_shared_variables() {
    let e = Engine::default();
    let (y, z) = (Var::real("y"), Var::real("z"));
    // A: x <= y, y <= 0 ; B: x >= z, z >= 1
    let a = Constraint::and([Constraint::le(x(), y.clone()), Constraint::le(y, 0)]);
    let b = Constraint::and([Constraint::ge(x(), z.clone()), Constraint::ge(z, 1)]);
    let i = e.binary_interpolant(&a, &b).unwrap();
    assert_eq!(i.formula.free_vars().into_iter().collect::<Vec<_>>(), vec![x()]);
    assert_eq!(e.check_interpolant(&a, &b, &i.formula).unwrap(), Ok(()));
}

#[test]
fn integer_interpolation_branches_on_a_side() {
    // A: 2a = x (x even), B: x = 2b + 1 (x odd); no linear interpolant exists
    // without divisibility, but bounded versions are interpolated by branching
    let e = Engine::default();
    let (a, b, xi) = (Var::int("a"), Var::int("b"), Var::int("x"));
    let bounds = |v: &Var| Constraint::and([Constraint::ge(v.clone(), 0), Constraint::le(v.clone(), 1)]);
    let fa = Constraint::and([
        Constraint::eq(LinearTerm::var(a.clone()) * &rat(2), xi.clone()),
        bounds(&a),
    ]);
    let fb = Constraint::and([
        Constraint::eq(xi.clone(), LinearTerm::var(b.clone()) * &rat(2) + LinearTerm::int(1)),
        bounds(&b),
    ]);
    let i = e.binary_interpolant(&fa, &fb).unwrap();
    assert_eq!(e.check_interpolant(&fa, &fb, &i.formula).unwrap(), Ok(()));
}

#[test]
fn check_interpolant_detects_each_violation() {
    let e = Engine::default();
    let y = Var::real("y");
    let a = Constraint::ge(x(), 0);
    let b = Constraint::le(x(), -1);
    assert_eq!(
        e.check_interpolant(&a, &b, &Constraint::ge(x(), 1)).unwrap(),
        Err(InterpolantViolation::NotImpliedByA)
    );
    assert_eq!(
        e.check_interpolant(&a, &b, &Constraint::True).unwrap(),
        Err(InterpolantViolation::ConsistentWithB)
    );
    assert_eq!(
        e.check_interpolant(&a, &b, &Constraint::ge(y.clone(), 0)).unwrap(),
        Err(InterpolantViolation::ForeignVariables(vec![y]))
    );
}

fn random_atom(rng: &mut ChaCha8Rng, vars: &[Var]) -> Constraint {
    let coeffs: Vec<(Var, Rational)> = vars.iter().map(|v| (v.clone(), rat(rng.gen_range(-3..=3)))).collect();
    let t = LinearTerm::from_parts(coeffs, rat(rng.gen_range(-3..=3)));
    let rel = match rng.gen_range(0..4) {
        0 => Rel::Le,
        1 => Rel::Lt,
        2 => Rel::Eq,
        _ => Rel::Ne,
    };
    Constraint::atom(t, rel)
}

fn random_cube_atoms(rng: &mut ChaCha8Rng, vars: &[Var], n: usize) -> Vec<Atom> {
    let mut out = Vec::new();
    while out.len() < n {
        let coeffs: Vec<(Var, Rational)> = vars.iter().map(|v| (v.clone(), rat(rng.gen_range(-3..=3)))).collect();
        let t = LinearTerm::from_parts(coeffs, rat(rng.gen_range(-4..=4)));
        let rel = if rng.gen_bool(0.3) { Rel::Lt } else { Rel::Le };
        if let Canonical::Atom(a) = Atom::canonical(t, rel) {
            out.push(a);
        }
    }
    out
}

#[test]
fn fourier_motzkin_and_simplex_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vars: Vec<Var> = ["a", "b", "c", "d"].iter().map(Var::real).collect();
    let (mut sat, mut unsat) = (0, 0);
    for _ in 0..400 {
        let n = rng.gen_range(2..=9);
        let atoms = random_cube_atoms(&mut rng, &vars, n);
        let fm = check_with_fourier_motzkin(&atoms);
        let sx = check_with_simplex(&atoms);
        match (&fm, &sx) {
            (RationalOutcome::Sat(m1), RationalOutcome::Sat(m2)) => {
                assert!(atoms.iter().all(|a| a.holds(m1)), "fm model");
                assert!(atoms.iter().all(|a| a.holds(m2)), "simplex model");
                sat += 1;
            }
            (RationalOutcome::Unsat(c1), RationalOutcome::Unsat(c2)) => {
                assert!(c1.verify(&atoms));
                assert!(c2.verify(&atoms));
                unsat += 1;
            }
            _ => panic!("disagreement on {atoms:?}: {fm:?} vs {sx:?}"),
        }
    }
    assert!(sat > 20 && unsat > 10, "sat {sat} unsat {unsat}");
}

#[test]
fn simplex_handles_many_variables() {
    // chain v0 < v1 < ... < v9 < v0 is unsat; without the closing edge sat
    let vars: Vec<Var> = (0..10).map(|i| Var::real(format!("v{i}"))).collect();
    let mut chain: Vec<Constraint> = vars.windows(2).map(|w| Constraint::lt(w[0].clone(), w[1].clone())).collect();
    let e = Engine::default();
    assert!(e.sat(&Constraint::and(chain.clone())).unwrap().is_sat());
    chain.push(Constraint::lt(vars[9].clone(), vars[0].clone()));
    let c = cube(chain);
    match e.sat_cube(&c) {
        RationalOutcome::Unsat(cert) => {
            assert!(cert.strict);
            assert!(cert.verify(c.atoms()));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn random_real_pairs_satisfy_interpolant_contract() {
    let e = Engine::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let vars: Vec<Var> = ["x", "y", "z"].iter().map(Var::real).collect();
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 200 {
        attempts += 1;
        assert!(attempts < 20_000);
        let side = |rng: &mut ChaCha8Rng| {
            let k = rng.gen_range(1..=3);
            let vs: Vec<Var> = vars.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
            let parts: Vec<Constraint> = (0..k).map(|_| random_atom(rng, &vs)).collect();
            if rng.gen_bool(0.3) {
                Constraint::or(parts)
            } else {
                Constraint::and(parts)
            }
        };
        let a = side(&mut rng);
        let b = side(&mut rng);
        if e.sat(&Constraint::and([a.clone(), b.clone()])).unwrap().is_sat() {
            continue;
        }
        let i = e.binary_interpolant(&a, &b).unwrap();
        assert_eq!(e.check_interpolant(&a, &b, &i.formula).unwrap(), Ok(()), "A={a} B={b} I={}", i.formula);
        checked += 1;
    }
}

#[test]
fn choose_value_prefers_small_integers() {
    let b = |v: Rational, strict| Some(Bound { value: v, strict });
    assert_eq!(choose_value(None, None), rat(0));
    assert_eq!(choose_value(b(ratio(1, 2), false).as_ref(), None), rat(1));
    assert_eq!(choose_value(b(rat(1), true).as_ref(), None), rat(2));
    assert_eq!(choose_value(None, b(rat(-3), true).as_ref()), rat(-4));
    assert_eq!(
        choose_value(b(ratio(1, 3), false).as_ref(), b(ratio(2, 3), false).as_ref()),
        ratio(1, 2)
    );
    assert_eq!(choose_value(b(rat(0), true).as_ref(), b(rat(1), true).as_ref()), ratio(1, 2));
    assert_eq!(choose_value(b(rat(-5), false).as_ref(), b(rat(5), false).as_ref()), rat(0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sat_models_satisfy_and_certificates_recompute(
        seed in any::<u64>(),
        n in 1usize..8,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars: Vec<Var> = ["x", "y", "z"].iter().map(Var::real).collect();
        let atoms = random_cube_atoms(&mut rng, &vars, n);
        let c = Cube::new(atoms);
        match Engine::default().sat_cube(&c) {
            RationalOutcome::Sat(m) => prop_assert!(c.holds(&m)),
            RationalOutcome::Unsat(cert) => prop_assert!(cert.verify(c.atoms())),
        }
    }

    #[test]
    fn integer_decisions_are_certified(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars: Vec<Var> = ["i", "j"].iter().map(Var::int).collect();
        let atoms = random_cube_atoms(&mut rng, &vars, n);
        let c = Cube::new(atoms);
        match Engine::default().decide_cube(&c) {
            Ok(Decision::Sat(m)) => {
                prop_assert!(c.holds(&m));
                prop_assert!(m.values().all(|q| q.is_integer()));
            }
            Ok(Decision::Unsat(r)) => prop_assert!(r.verify(c.atoms())),
            Err(EngineError::Unknown { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
