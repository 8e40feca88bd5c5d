//! The `hornitp` command line.

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use hornitp_core::analysis::{classify, FragmentReport};
use hornitp_core::encodings::{binary_to_horn, dag_problem_to_horn, sequence_to_horn, tree_problem_to_horn};
use hornitp_core::engine::backend::{serve, ProcessBackend, DEFAULT_TIMEOUT};
use hornitp_core::engine::{Engine, EngineConfig, Interpolator, DEFAULT_BRANCH_DEPTH};
use hornitp_core::formula::DEFAULT_CUBE_LIMIT;
use hornitp_core::horn::{verify_solution, ClauseSet, Verdict};
use hornitp_core::renaming::{
    compute_renaming, has_termination_property, horn_image, parse_dimacs, print_dimacs, rename, Termination,
};
use hornitp_core::solver::{
    expand, Counterexample, DerivationTree, SolveResult, Solver, SolverConfig, DEFAULT_EXPANSION_LIMIT,
};
use hornitp_core::syntax::{
    constraint_sexpr, model_sexpr, parse_chc, parse_problem, parse_solution, print_chc, print_solution, Problem,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Chc,
    Dimacs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Human,
    Sexpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Binary,
    Sequence,
    Tree,
    Dag,
}

#[derive(Debug, Parser)]
#[command(name = "hornitp", version, about = "Solve recursion-free Horn clauses by interpolation")]
pub struct Cli {
    /// Input format; `.cnf` files and `rename-horn` default to DIMACS
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_enum, default_value = "human")]
    pub output: OutputMode,
    /// Maximum number of DNF cubes per formula
    #[arg(long, global = true, default_value_t = DEFAULT_CUBE_LIMIT, value_parser = positive)]
    pub cube_limit: usize,
    /// Maximum number of derivation tree nodes during expansion
    #[arg(long, global = true, default_value_t = DEFAULT_EXPANSION_LIMIT, value_parser = positive)]
    pub expansion_limit: usize,
    /// Integer branching depth before giving up
    #[arg(long, global = true, default_value_t = DEFAULT_BRANCH_DEPTH, value_parser = positive)]
    pub branch_depth: usize,
    /// Worker threads (default: one per core)
    #[arg(long, global = true, value_parser = positive)]
    pub jobs: Option<usize>,
    /// External interpolation command, run through `sh -c`
    #[arg(long, global = true, env = "HORNITP_BACKEND")]
    pub backend: Option<String>,
    /// Seconds to wait for each backend reply
    #[arg(long, global = true, value_parser = positive)]
    pub backend_timeout: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the fragments a clause set belongs to
    Classify { input: PathBuf },
    /// Compute a solution or a derivation of false
    Solve { input: PathBuf },
    /// Check a solution against a clause set
    Verify {
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Print the expansion of a clause set
    Expand { input: PathBuf },
    /// Turn an interpolation problem into clauses
    Encode {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Decide the termination property and rename to Horn form
    RenameHorn { input: PathBuf },
    /// Answer interpolation requests on stdin with the built-in engine
    #[command(hide = true)]
    ServeBackend,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn escape(s: &str) -> String {
    s.replace('"', "\"\"").replace('\n', " ")
}

/// Parses `args` (program name first) and runs the command. Returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            let first = e.to_string().lines().next().unwrap_or_default().to_string();
            let _ = writeln!(out, "(error \"{}\")", escape(first.trim_start_matches("error: ")));
            return EXIT_ERROR;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let msg = format!("{e:#}");
            let _ = writeln!(out, "(error \"{}\")", escape(&msg));
            if cli.output == OutputMode::Human {
                let _ = writeln!(err, "error: {msg}");
            }
            EXIT_ERROR
        }
    }
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

impl Cli {
    fn format_of(&self, path: &Path) -> Format {
        self.format.unwrap_or_else(|| match &self.command {
            Command::RenameHorn { .. } => Format::Dimacs,
            _ if path.extension().is_some_and(|e| e == "cnf") => Format::Dimacs,
            _ => Format::Chc,
        })
    }

    fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            cube_limit: self.cube_limit,
            branch_depth: self.branch_depth,
        }
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            engine: self.engine_config(),
            expansion_limit: self.expansion_limit,
            jobs: self.jobs.unwrap_or(0),
            ..SolverConfig::default()
        }
    }

    fn backend(&self) -> Option<ProcessBackend> {
        let cmd = self.backend.as_deref().filter(|c| !c.trim().is_empty())?;
        let timeout = self
            .backend_timeout
            .map(|s| Duration::from_secs(s as u64))
            .unwrap_or(DEFAULT_TIMEOUT);
        Some(ProcessBackend::new(cmd, timeout, Engine::new(self.engine_config())))
    }

    /// A CHC file, or a propositional Horn set in DIMACS read as clauses
    /// over nullary relations `p1, p2, ...`.
    fn clauses(&self, path: &Path) -> anyhow::Result<ClauseSet> {
        let text = read_input(path)?;
        match self.format_of(path) {
            Format::Chc => parse_chc(&text).with_context(|| format!("parsing {}", path.display())),
            Format::Dimacs => {
                let cs = parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?;
                match horn_image(&cs) {
                    Some(hc) => Ok(hc),
                    None => bail!("{} is not a Horn clause set", path.display()),
                }
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let human = cli.output == OutputMode::Human;
    match &cli.command {
        Command::Classify { input } => {
            let report = classify(&cli.clauses(input)?);
            if human {
                writeln!(out, "{report}")?;
            } else {
                writeln!(out, "{}", fragments_sexpr(&report))?;
            }
            Ok(EXIT_OK)
        }
        Command::Solve { input } => {
            let hc = cli.clauses(input)?;
            let engine = Engine::new(cli.engine_config());
            let backend = cli.backend();
            let interp: &dyn Interpolator = match &backend {
                Some(b) => b,
                None => &engine,
            };
            match Solver::new(cli.solver_config(), interp).solve(&hc)? {
                SolveResult::Solution(sol) => {
                    writeln!(out, "{}", if human { "sat ; solvable" } else { "sat" })?;
                    write!(out, "{}", print_solution(&sol))?;
                    Ok(EXIT_OK)
                }
                SolveResult::Counterexample(cx) => {
                    write_counterexample(out, &hc, &cx, human)?;
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Verify { input, solution } => {
            let hc = cli.clauses(input)?;
            let text = read_input(solution)?;
            let sol = parse_solution(&text, &hc).with_context(|| format!("parsing {}", solution.display()))?;
            match verify_solution(&Engine::new(cli.engine_config()), &sol, &hc)? {
                Verdict::Valid => {
                    writeln!(out, "valid")?;
                    Ok(EXIT_OK)
                }
                Verdict::Invalid { clause, model } => {
                    if human {
                        writeln!(out, "invalid ; clause {} is violated: {}", clause + 1, hc.clauses()[clause])?;
                    } else {
                        writeln!(out, "invalid")?;
                        writeln!(out, "(clause {})", clause + 1)?;
                    }
                    writeln!(out, "{}", model_sexpr(&model))?;
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Expand { input } => {
            let hc = cli.clauses(input)?;
            writeln!(out, "{}", constraint_sexpr(&expand(&hc, cli.expansion_limit)?))?;
            Ok(EXIT_OK)
        }
        Command::Encode { input, kind } => {
            let problem = parse_problem(&read_input(input)?).with_context(|| format!("parsing {}", input.display()))?;
            let hc = match (kind, &problem) {
                (Kind::Binary, Problem::Binary { a, b }) => binary_to_horn(a, b),
                (Kind::Sequence, Problem::Sequence(sp)) => sequence_to_horn(sp),
                (Kind::Tree, Problem::Tree(tp)) => tree_problem_to_horn(tp),
                (Kind::Tree, Problem::Sequence(sp)) => tree_problem_to_horn(&sp.to_tree()),
                (Kind::Dag, Problem::Dag(dp)) => dag_problem_to_horn(dp),
                (k, p) => bail!("cannot encode a {} problem as {:?}", p.kind(), k),
            };
            write!(out, "{}", print_chc(&hc))?;
            Ok(EXIT_OK)
        }
        Command::RenameHorn { input } => {
            if cli.format_of(input) != Format::Dimacs {
                bail!("rename-horn reads DIMACS input");
            }
            let cs = parse_dimacs(&read_input(input)?).with_context(|| format!("parsing {}", input.display()))?;
            match has_termination_property(&cs) {
                Termination::Terminating(_) => {
                    let r = compute_renaming(&cs)?;
                    let vars: Vec<String> = r.vars.iter().map(|v| v.to_string()).collect();
                    let renamed = rename(&cs, &r);
                    if human {
                        writeln!(out, "TERMINATING")?;
                        writeln!(out, "c renaming {}", vars.join(" "))?;
                        write!(out, "{}", print_dimacs(&renamed))?;
                    } else {
                        let clauses: Vec<String> = renamed
                            .clauses()
                            .iter()
                            .map(|c| {
                                let ls: Vec<String> = c.literals().iter().map(|l| l.to_string()).collect();
                                format!("({})", ls.join(" "))
                            })
                            .collect();
                        writeln!(
                            out,
                            "(terminating (renaming {}) (clauses {}))",
                            vars.join(" "),
                            clauses.join(" ")
                        )?;
                    }
                    Ok(EXIT_OK)
                }
                Termination::NonTerminating(cycle) => {
                    let ls: Vec<String> = cycle.iter().map(|l| l.to_string()).collect();
                    if human {
                        writeln!(out, "NONTERMINATING")?;
                        writeln!(out, "c cycle {}", ls.join(" "))?;
                    } else {
                        writeln!(out, "(nonterminating (cycle {}))", ls.join(" "))?;
                    }
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::ServeBackend => {
            let stdin = io::stdin();
            serve(&Engine::new(cli.engine_config()), stdin.lock(), out)?;
            Ok(EXIT_OK)
        }
    }
}

fn fragments_sexpr(r: &FragmentReport) -> String {
    format!(
        "(fragments (recursion-free {}) (linear {}) (body-disjoint {}) (head-disjoint {}) (tree-like {}) (linear-tree-like {}))",
        r.recursion_free, r.linear, r.body_disjoint, r.head_disjoint, r.tree_like, r.linear_tree_like
    )
}

fn tree_sexpr(t: &DerivationTree) -> String {
    let mut s = format!("(clause {}", t.clause + 1);
    for c in &t.children {
        s.push(' ');
        s.push_str(&tree_sexpr(c));
    }
    s.push(')');
    s
}

fn write_tree(out: &mut dyn Write, hc: &ClauseSet, t: &DerivationTree, depth: usize) -> io::Result<()> {
    writeln!(out, "{:w$}clause {}: {}", "", t.clause + 1, hc.clauses()[t.clause], w = 2 * depth + 2)?;
    for c in &t.children {
        write_tree(out, hc, c, depth + 1)?;
    }
    Ok(())
}

fn write_counterexample(out: &mut dyn Write, hc: &ClauseSet, cx: &Counterexample, human: bool) -> io::Result<()> {
    if human {
        writeln!(out, "unsat ; not solvable, false is derivable")?;
        writeln!(out, "derivation:")?;
        write_tree(out, hc, &cx.tree, 0)?;
    } else {
        writeln!(out, "unsat")?;
        writeln!(out, "(derivation {})", tree_sexpr(&cx.tree))?;
    }
    writeln!(out, "{}", model_sexpr(&cx.model))
}
