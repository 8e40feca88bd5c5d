use std::time::Duration;

use hornitp_core::engine::backend::{parse_request, request_line, respond, serve, ProcessBackend};
use hornitp_core::engine::{Engine, EngineConfig, EngineError, Interpolator};
use hornitp_core::formula::{rat, Constraint, LinearTerm, Sort, Var};
use hornitp_core::syntax::sexpr::read_one;
use hornitp_core::syntax::{parse_constraint, scope_of};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn var(name: &str) -> Var {
    Var::new(name, Sort::Int)
}

fn t(name: &str) -> LinearTerm {
    LinearTerm::var(var(name))
}

fn backend(script: &str) -> ProcessBackend {
    ProcessBackend::new(script, Duration::from_secs(5), Engine::default())
}

/// Replies with `line` to every request.
fn echo(line: &str) -> String {
    format!("while read req; do echo '{line}'; done")
}

fn pair() -> (Constraint, Constraint) {
    let a = Constraint::and([
        Constraint::eq(t("x"), t("y")),
        Constraint::ge(t("y"), 0),
    ]);
    let b = Constraint::le(t("x"), -1);
    (a, b)
}

#[test]
fn request_round_trips() {
    let (a, b) = pair();
    let (vars, a2, b2) = parse_request(&request_line(&a, &b)).unwrap();
    assert_eq!(vars, vec![var("x"), var("y")]);
    assert_eq!(a2, a);
    assert_eq!(b2, b);
}

#[test]
fn accepts_a_correct_answer() {
    let (a, b) = pair();
    let i = backend(&echo("(interpolant (>= x 0))")).interpolate(&a, &b).unwrap();
    assert_eq!(i.formula, Constraint::ge(t("x"), 0));
}

#[test]
fn unparsable_reply_is_a_backend_error() {
    let (a, b) = pair();
    let err = backend(&echo("garbage (")).interpolate(&a, &b).unwrap_err();
    assert!(matches!(err, EngineError::Backend(_)), "{err:?}");
}

#[test]
fn foreign_variable_is_rejected() {
    let (a, b) = pair();
    let err = backend(&echo("(interpolant (>= y 0))")).interpolate(&a, &b).unwrap_err();
    assert!(matches!(err, EngineError::VerificationFailed(_)), "{err:?}");
}

#[test]
fn weak_interpolant_is_rejected() {
    let (a, b) = pair();
    let err = backend(&echo("(interpolant true)")).interpolate(&a, &b).unwrap_err();
    assert!(matches!(err, EngineError::VerificationFailed(_)), "{err:?}");
}

#[test]
fn bogus_model_is_rejected() {
    let (a, b) = pair();
    let err = backend(&echo("(sat (model (x 0) (y 0)))")).interpolate(&a, &b).unwrap_err();
    assert!(matches!(err, EngineError::VerificationFailed(_)), "{err:?}");
}

#[test]
fn genuine_model_is_reported() {
    let a = Constraint::ge(t("x"), 0);
    let b = Constraint::ge(t("x"), 1);
    let err = backend(&echo("(sat (model (x 1)))")).interpolate(&a, &b).unwrap_err();
    assert!(matches!(err, EngineError::NotUnsat { .. }), "{err:?}");
}

#[test]
fn error_reply_is_passed_on() {
    let (a, b) = pair();
    let err = backend(&echo("(error \"out of memory\")")).interpolate(&a, &b).unwrap_err();
    assert_eq!(err, EngineError::Backend("out of memory".into()));
}

#[test]
fn exiting_backend_is_reported() {
    let (a, b) = pair();
    let err = backend("echo broken >&2; exit 3").interpolate(&a, &b).unwrap_err();
    let EngineError::Backend(msg) = err else {
        panic!("expected a backend error");
    };
    assert!(msg.contains('3'), "{msg}");
}

#[test]
fn silent_backend_times_out() {
    let (a, b) = pair();
    let be = ProcessBackend::new("sleep 10", Duration::from_millis(200), Engine::default());
    let err = be.interpolate(&a, &b).unwrap_err();
    assert!(matches!(err, EngineError::Backend(ref m) if m.contains("200")), "{err:?}");
}

#[test]
fn process_is_reused() {
    let (a, b) = pair();
    let be = backend(&echo("(interpolant (>= x 0))"));
    for _ in 0..5 {
        be.interpolate(&a, &b).unwrap();
    }
    // a fresh process would answer the second request too
    let once = backend("read req; echo '(interpolant (>= x 0))'; read req");
    once.interpolate(&a, &b).unwrap();
    assert!(matches!(once.interpolate(&a, &b), Err(EngineError::Backend(_))));
}

#[test]
fn serve_answers_each_line() {
    let (a, b) = pair();
    let input = format!("{}\n\n(nonsense)\n", request_line(&a, &b));
    let mut out = Vec::new();
    serve(&Engine::default(), input.as_bytes(), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("(interpolant "));
    assert!(lines[1].starts_with("(error "));
}

fn random_atom(rng: &mut ChaCha8Rng, names: &[&str]) -> Constraint {
    let mut lhs = LinearTerm::zero();
    for n in names {
        let k: i64 = rng.gen_range(-3..=3);
        lhs = lhs + t(n) * &rat(k);
    }
    let k: i64 = rng.gen_range(-3..=3);
    match rng.gen_range(0..4) {
        0 => Constraint::le(lhs, k),
        1 => Constraint::lt(lhs, k),
        2 => Constraint::ge(lhs, k),
        _ => Constraint::eq(lhs, k),
    }
}

fn random_side(rng: &mut ChaCha8Rng, names: &[&str]) -> Constraint {
    let cubes = rng.gen_range(1..=2);
    Constraint::or((0..cubes).map(|_| {
        let n = rng.gen_range(1..=3);
        Constraint::and((0..n).map(|_| random_atom(rng, names)))
    }))
}

#[test]
fn built_in_replies_agree_with_the_engine() {
    let engine = Engine::new(EngineConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 50 {
        let a = random_side(&mut rng, &["x", "y"]);
        let b = random_side(&mut rng, &["y", "z"]);
        let reply = respond(&engine, &request_line(&a, &b));
        let e = read_one(&reply).unwrap();
        let vars: Vec<Var> = ["x", "y", "z"].iter().map(|n| var(n)).collect();
        match e.call() {
            Some(("interpolant", [i])) => {
                let i = parse_constraint(i, &scope_of(&vars)).unwrap();
                assert_eq!(engine.check_interpolant(&a, &b, &i).unwrap(), Ok(()));
                checked += 1;
            }
            Some(("sat", _)) => assert!(engine.sat(&Constraint::and([a, b])).unwrap().is_sat()),
            _ => assert!(reply.starts_with("(error "), "{reply}"),
        }
    }
}
