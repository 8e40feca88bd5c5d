//! Delegating interpolation to an external process.
//!
//! One request per line on the child's stdin:
//!
//! ```text
//! (interpolate (vars (x Int) ...) (A <constraint>) (B <constraint>))
//! ```
//!
//! answered by one line: `(interpolant <constraint>)`,
//! `(sat (model (x 1) ...))` or `(error "message")`.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use num_traits::Zero;

use crate::formula::{Constraint, Rational, Var};
use crate::syntax::sexpr::{read_one, Kind, SExpr};
use crate::syntax::{bindings_sexpr, constraint_sexpr, model_sexpr, parse_bindings, parse_constraint, parse_model, scope_of};

use super::{Engine, EngineError, Interpolant, Interpolator};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

pub fn request_line(a: &Constraint, b: &Constraint) -> String {
    let vars: BTreeSet<Var> = a.free_vars().union(&b.free_vars()).cloned().collect();
    format!(
        "(interpolate (vars {}) (A {}) (B {}))",
        bindings_inner(&vars),
        constraint_sexpr(a),
        constraint_sexpr(b)
    )
}

fn bindings_inner(vars: &BTreeSet<Var>) -> String {
    let s = bindings_sexpr(vars);
    s[1..s.len() - 1].to_string()
}

/// Splits a request into its scope variables and the two sides.
pub fn parse_request(line: &str) -> Result<(Vec<Var>, Constraint, Constraint), String> {
    let e = read_one(line).map_err(|e| e.to_string())?;
    let Some(("interpolate", [vars, a, b])) = e.call() else {
        return Err("expected `(interpolate (vars ...) (A ...) (B ...))`".into());
    };
    let vars = match vars.call() {
        Some(("vars", bs)) => parse_bindings(bs).map_err(|e| e.to_string())?,
        _ => return Err("expected `(vars ...)`".into()),
    };
    let scope = scope_of(&vars);
    let side = |e: &SExpr, tag: &str| match e.call() {
        Some((t, [c])) if t == tag => parse_constraint(c, &scope).map_err(|e| e.to_string()),
        _ => Err(format!("expected `({tag} ...)`")),
    };
    Ok((vars.clone(), side(a, "A")?, side(b, "B")?))
}

fn quote_string(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
}

/// The reply the built-in engine gives to one request line.
pub fn respond(engine: &Engine, line: &str) -> String {
    let (a, b) = match parse_request(line) {
        Ok((_, a, b)) => (a, b),
        Err(msg) => return format!("(error {})", quote_string(&msg)),
    };
    match engine.binary_interpolant(&a, &b) {
        Ok(i) => format!("(interpolant {})", constraint_sexpr(&i.formula)),
        Err(EngineError::NotUnsat { model }) => format!("(sat {})", model_sexpr(&model)),
        Err(e) => format!("(error {})", quote_string(&e.to_string())),
    }
}

/// Answers requests until end of input.
pub fn serve(engine: &Engine, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", respond(engine, &line))?;
        output.flush()?;
    }
    Ok(())
}

struct BackendProcess {
    child: Child,
    stdin: ChildStdin,
    replies: Receiver<String>,
    stderr: Arc<Mutex<String>>,
}

impl BackendProcess {
    fn spawn(command: &str) -> Result<Self, EngineError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| EngineError::Backend(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut err_pipe = child.stderr.take().expect("piped stderr");
        let (tx, replies) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = Arc::clone(&stderr);
        thread::spawn(move || {
            let mut buf = String::new();
            let _ = err_pipe.read_to_string(&mut buf);
            *sink.lock().expect("stderr buffer") = buf;
        });
        Ok(BackendProcess {
            child,
            stdin,
            replies,
            stderr,
        })
    }

    fn exchange(&mut self, request: &str, timeout: Duration) -> Result<String, EngineError> {
        writeln!(self.stdin, "{request}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| EngineError::Backend(format!("cannot write request: {e}")))?;
        match self.replies.recv_timeout(timeout) {
            Ok(line) => Ok(line),
            Err(RecvTimeoutError::Timeout) => Err(EngineError::Backend(format!(
                "no reply within {} ms",
                timeout.as_millis()
            ))),
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.wait().map(|s| s.to_string()).unwrap_or_default();
                thread::sleep(Duration::from_millis(10));
                let stderr = self.stderr.lock().expect("stderr buffer").trim().to_string();
                let mut msg = format!("backend exited ({status}) without a reply");
                if !stderr.is_empty() {
                    msg.push_str(&format!(": {stderr}"));
                }
                Err(EngineError::Backend(msg))
            }
        }
    }
}

impl Drop for BackendProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// An [`Interpolator`] backed by external processes. Each concurrent caller
/// gets a process of its own; idle processes are reused.
pub struct ProcessBackend {
    command: String,
    timeout: Duration,
    checker: Engine,
    idle: Mutex<Vec<BackendProcess>>,
}

impl ProcessBackend {
    /// `command` is run through `sh -c`. `checker` re-verifies every answer.
    pub fn new(command: impl Into<String>, timeout: Duration, checker: Engine) -> Self {
        ProcessBackend {
            command: command.into(),
            timeout,
            checker,
            idle: Mutex::new(Vec::new()),
        }
    }

    fn checkout(&self) -> Result<BackendProcess, EngineError> {
        match self.idle.lock().expect("process pool").pop() {
            Some(p) => Ok(p),
            None => BackendProcess::spawn(&self.command),
        }
    }

    /// Sends one request and checks the answer.
    pub fn external_interpolant(&self, a: &Constraint, b: &Constraint) -> Result<Interpolant, EngineError> {
        let request = request_line(a, b);
        let mut proc = self.checkout()?;
        let reply = proc.exchange(&request, self.timeout)?;
        self.idle.lock().expect("process pool").push(proc);
        let vars: Vec<Var> = a.free_vars().union(&b.free_vars()).cloned().collect();
        self.accept(a, b, &vars, &reply)
    }

    fn accept(&self, a: &Constraint, b: &Constraint, vars: &[Var], reply: &str) -> Result<Interpolant, EngineError> {
        let malformed = |msg: String| EngineError::Backend(format!("malformed reply `{reply}`: {msg}"));
        let e = read_one(reply).map_err(|e| malformed(e.to_string()))?;
        let scope = scope_of(vars);
        match e.call() {
            Some(("interpolant", [c])) => {
                let formula = parse_constraint(c, &scope).map_err(|e| malformed(e.to_string()))?;
                match self.checker.check_interpolant(a, b, &formula)? {
                    Ok(()) => Ok(Interpolant { formula }),
                    Err(v) => Err(EngineError::VerificationFailed(v.to_string())),
                }
            }
            Some(("sat", [m])) => {
                let mut model = parse_model(m, &scope).map_err(|e| malformed(e.to_string()))?;
                for v in vars {
                    model.entry(v.clone()).or_insert_with(Rational::zero);
                }
                let both = Constraint::and([a.clone(), b.clone()]);
                if both.eval(&model) {
                    Err(EngineError::NotUnsat { model })
                } else {
                    Err(EngineError::VerificationFailed("reported model does not satisfy A ∧ B".into()))
                }
            }
            Some(("error", [msg])) => match &msg.kind {
                Kind::Str(s) | Kind::Symbol(s) => Err(EngineError::Backend(s.clone())),
                Kind::List(_) => Err(EngineError::Backend(msg.to_string())),
            },
            _ => Err(malformed("expected `interpolant`, `sat` or `error`".into())),
        }
    }
}

impl Interpolator for ProcessBackend {
    fn interpolate(&self, a: &Constraint, b: &Constraint) -> Result<Interpolant, EngineError> {
        self.external_interpolant(a, b)
    }
}
