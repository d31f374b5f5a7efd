//! `sdl`: check, simulate, linearize and verify synchronous programs.
//!
//! Exit status: 0 on success, 1 when verification or constructiveness fails,
//! 2 on unreadable or ill-formed input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use sdl_core::merge::Comb;
use sdl_core::parser::{self, Goal, SourceSpec};
use sdl_core::prover::{self, ProverConfig};
use sdl_core::rewrite;
use sdl_core::semantics::{format_traces, Bounds, Evaluator, State};
use sdl_core::smt::{self, ObligationResult};
use sdl_core::syntax::{enforce_parallel_restriction, restriction_violations, Formula, Program};

#[derive(Parser, Debug)]
#[command(name = "sdl", version, about = "Synchronous dynamic logic toolkit")]
struct Cli {
    /// Step bound for trace enumeration
    #[arg(long = "bound", global = true, default_value_t = 3)]
    bound: usize,
    /// Value range for quantifiers, start states and the bounded checker
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    range: Option<Vec<i64>>,
    /// Signal value combination function
    #[arg(long, global = true, default_value = "add")]
    comb: String,
    /// External SMT-LIB2 solver; obligations go to the bounded checker otherwise
    #[arg(long, global = true)]
    solver: Option<PathBuf>,
    /// Write one SMT-LIB2 script per obligation into this directory
    #[arg(long = "emit-smt", global = true)]
    emit_smt: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a file and check well-formedness
    Check { file: PathBuf },
    /// Print the bounded traces of a program
    Simulate {
        file: PathBuf,
        /// Program to run; defaults to the last one defined
        #[arg(long)]
        program: Option<String>,
        /// Start state, e.g. x=1,y=0
        #[arg(long, allow_hyphen_values = true)]
        start: Option<String>,
    },
    /// Linearize a parallel program
    Seq {
        file: PathBuf,
        #[arg(long)]
        program: Option<String>,
        /// Also print the equations
        #[arg(long)]
        equations: bool,
    },
    /// Prove goals and check their obligations
    Verify {
        file: PathBuf,
        /// Goal to prove; all goals by default
        #[arg(long)]
        goal: Option<String>,
        /// Print the proof tree
        #[arg(long)]
        tree: bool,
    },
}

struct InputError(String);

struct Out {
    format: Format,
}

impl Out {
    fn record(&self, kind: &str, name: &str, verdict: &str, detail: &str) {
        match self.format {
            Format::Text => {
                if detail.is_empty() {
                    println!("{kind} {name}: {verdict}");
                } else {
                    println!("{kind} {name}: {verdict}  {detail}");
                }
            }
            Format::Structured => {
                println!("{}", json!({"kind": kind, "name": name, "verdict": verdict, "detail": detail}))
            }
        }
    }

    fn text(&self, s: &str) {
        if self.format == Format::Text {
            println!("{s}");
        }
    }
}

fn load(path: &Path, out: &Out) -> Result<SourceSpec, InputError> {
    let src = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let mut spec = parser::parse(&src).map_err(|e| InputError(format!("{}:{e}", path.display())))?;
    for (name, p) in spec.programs.iter_mut() {
        for v in restriction_violations(p) {
            out.record(
                "warning",
                name,
                "renamed",
                &format!("'{}' is written by component {} and used by component {}", v.var, v.writer + 1, v.other + 1),
            );
        }
        *p = enforce_parallel_restriction(p);
    }
    for g in spec.goals.iter_mut() {
        g.formula = map_programs(&g.formula, &enforce_parallel_restriction);
    }
    Ok(spec)
}

fn map_programs(f: &Formula, g: &dyn Fn(&Program) -> Program) -> Formula {
    match f {
        Formula::True | Formula::Rel(..) => f.clone(),
        Formula::Not(a) => Formula::not(map_programs(a, g)),
        Formula::And(a, b) => Formula::and(map_programs(a, g), map_programs(b, g)),
        Formula::Or(a, b) => Formula::or(map_programs(a, g), map_programs(b, g)),
        Formula::Implies(a, b) => Formula::implies(map_programs(a, g), map_programs(b, g)),
        Formula::Forall(x, a) => Formula::forall(x, map_programs(a, g)),
        Formula::Exists(x, a) => Formula::exists(x, map_programs(a, g)),
        Formula::Modal(m, p, a) => Formula::modal(*m, g(p), map_programs(a, g)),
    }
}

fn bounds(cli: &Cli) -> Result<Bounds, InputError> {
    let comb = Comb::from_name(&cli.comb).ok_or_else(|| InputError(format!("unknown combination '{}'", cli.comb)))?;
    let (lo, hi) = match cli.range.as_deref() {
        Some([lo, hi]) if lo <= hi => (*lo, *hi),
        Some(_) => return Err(InputError("--range needs LO <= HI".into())),
        None => (Bounds::default().lo, Bounds::default().hi),
    };
    Ok(Bounds { k: cli.bound, lo, hi, comb })
}

fn pick_program<'a>(spec: &'a SourceSpec, name: Option<&str>) -> Result<(&'a str, &'a Program), InputError> {
    match name {
        Some(n) => spec
            .programs
            .iter()
            .find(|(m, _)| m == n)
            .map(|(m, p)| (m.as_str(), p))
            .ok_or_else(|| InputError(format!("no program named '{n}'"))),
        None => spec
            .programs
            .last()
            .map(|(m, p)| (m.as_str(), p))
            .ok_or_else(|| InputError("the file defines no program".into())),
    }
}

fn parse_state(s: &str, spec: &SourceSpec) -> Result<State, InputError> {
    let mut st = State::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (x, v) = part.split_once('=').ok_or_else(|| InputError(format!("bad assignment '{part}'")))?;
        let x = x.trim();
        if !spec.vars.iter().any(|d| d == x) {
            return Err(InputError(format!("undeclared variable '{x}'")));
        }
        let v: i64 = v.trim().parse().map_err(|_| InputError(format!("bad value in '{part}'")))?;
        st.set(x, v);
    }
    Ok(st)
}

/// Stars that the prover would need an annotation for.
fn missing_annotations(f: &Formula, default: bool, out: &mut Vec<String>) {
    fn in_program(p: &Program, diamond: bool, default: bool, out: &mut Vec<String>) {
        match p {
            Program::Seq(a, b) | Program::Choice(a, b) => {
                in_program(a, diamond, default, out);
                in_program(b, diamond, default, out);
            }
            Program::Star(a, ann) => {
                if diamond && ann.variant.is_none() {
                    out.push(format!("no variant for '{p}'"));
                } else if !diamond && ann.invariant.is_none() && !default {
                    out.push(format!("no invariant for '{p}'"));
                }
                in_program(a, diamond, default, out);
            }
            Program::Par(_) if !default && !diamond => {
                out.push(format!("no default invariant for the linearization of '{p}'"))
            }
            _ => {}
        }
    }
    match f {
        Formula::True | Formula::Rel(..) => {}
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => missing_annotations(a, default, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            missing_annotations(a, default, out);
            missing_annotations(b, default, out);
        }
        Formula::Modal(m, p, a) => {
            in_program(p, !m.is_box(), default, out);
            missing_annotations(a, default, out);
        }
    }
}

fn goal_problems(g: &Goal) -> Vec<String> {
    let mut out = Vec::new();
    check_goal_closed(&g.formula, &mut out);
    missing_annotations(&g.formula, g.default_invariant.is_some(), &mut out);
    out
}

fn check_goal_closed(f: &Formula, out: &mut Vec<String>) {
    match f {
        Formula::True | Formula::Rel(..) => {}
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => check_goal_closed(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check_goal_closed(a, out);
            check_goal_closed(b, out);
        }
        Formula::Modal(_, p, a) => {
            if !p.is_closed() {
                out.push(format!("program '{p}' is not closed"));
            }
            check_goal_closed(a, out);
        }
    }
}

fn cmd_check(file: &Path, out: &Out) -> Result<ExitCode, InputError> {
    let spec = load(file, out)?;
    let mut ok = true;
    for (name, p) in &spec.programs {
        let kind = if p.is_closed() { "closed" } else { "open" };
        out.record("program", name, "ok", kind);
    }
    for g in &spec.goals {
        let problems = goal_problems(g);
        if problems.is_empty() {
            out.record("goal", &g.name, "ok", "");
        } else {
            ok = false;
            out.record("goal", &g.name, "error", &problems.join("; "));
        }
    }
    if ok {
        out.text(&format!(
            "{}: {} signals, {} variables, {} programs, {} goals",
            file.display(),
            spec.signals.len(),
            spec.vars.len(),
            spec.programs.len(),
            spec.goals.len()
        ));
        Ok(ExitCode::SUCCESS)
    } else {
        Err(InputError("ill-formed goals".into()))
    }
}

fn cmd_simulate(file: &Path, program: Option<&str>, start: Option<&str>, b: Bounds, out: &Out) -> Result<ExitCode, InputError> {
    let spec = load(file, out)?;
    let (name, p) = pick_program(&spec, program)?;
    if !p.is_closed() {
        return Err(InputError(format!("program '{name}' is not closed")));
    }
    let s = match start {
        Some(st) => parse_state(st, &spec)?,
        None => State::new(),
    };
    let mut ev = Evaluator::new(b);
    let traces = ev.traces(&s, p).map_err(|e| InputError(e.to_string()))?;
    match out.format {
        Format::Text => print!("{}", format_traces(&traces, &spec.vars)),
        Format::Structured => {
            for t in &traces {
                let states: Vec<String> = t.iter().map(|s| s.show(&spec.vars)).collect();
                out.record("trace", name, "ok", &states.join(" "));
            }
        }
    }
    if ev.diagnostics.is_empty() {
        out.record("simulate", name, "constructive", &format!("{} traces", traces.len()));
        Ok(ExitCode::SUCCESS)
    } else {
        for d in &ev.diagnostics {
            out.record("diagnostic", name, "non-constructive", &format!("{}: {}", d.config, d.message));
        }
        Ok(ExitCode::from(1))
    }
}

fn cmd_seq(file: &Path, program: Option<&str>, equations: bool, b: Bounds, out: &Out) -> Result<ExitCode, InputError> {
    let spec = load(file, out)?;
    let (name, p) = pick_program(&spec, program)?;
    if !p.is_closed() {
        return Err(InputError(format!("program '{name}' is not closed")));
    }
    let Program::Par(_) = p else {
        out.record("seq", name, "ok", &p.to_string());
        return Ok(ExitCode::SUCCESS);
    };
    match rewrite::to_seq(p, b.comb) {
        Ok(lin) => {
            if equations {
                for (i, (c, eq)) in lin.configs.iter().zip(&lin.equations).enumerate() {
                    let mut rhs = vec![eq.base.to_string()];
                    rhs.extend(eq.terms.iter().map(|(c, t)| format!("{c} ; l{}", t + 1)));
                    out.record("config", &format!("l{}", i + 1), &c.to_string(), &rhs.join(" + "));
                }
            }
            out.record("seq", name, "ok", &lin.program.to_string());
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ rewrite::RewriteError::NonConstructive { .. }) => {
            out.record("seq", name, "non-constructive", &e.to_string());
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(InputError(e.to_string())),
    }
}

fn check_obligation(phi: &Formula, idx: usize, cli: &Cli, b: Bounds) -> Result<ObligationResult, InputError> {
    if let Some(dir) = &cli.emit_smt {
        fs::create_dir_all(dir).map_err(|e| InputError(format!("{}: {e}", dir.display())))?;
        fs::write(dir.join(format!("obligation_{idx}.smt2")), smt::emit_smtlib(phi))
            .map_err(|e| InputError(format!("{}: {e}", dir.display())))?;
    }
    match &cli.solver {
        Some(solver) => {
            let script = std::env::temp_dir().join(format!("sdl_{}_{idx}.smt2", std::process::id()));
            let r = smt::check_with_solver(phi, solver, &script, b.lo, b.hi)
                .map_err(|e| InputError(format!("{}: {e}", solver.display())));
            let _ = fs::remove_file(&script);
            r
        }
        None => Ok(smt::check_bounded(phi, b.lo, b.hi)),
    }
}

fn cmd_verify(file: &Path, goal: Option<&str>, tree: bool, cli: &Cli, b: Bounds, out: &Out) -> Result<ExitCode, InputError> {
    let spec = load(file, out)?;
    let goals: Vec<&Goal> = match goal {
        Some(n) => vec![spec.goals.iter().find(|g| g.name == n).ok_or_else(|| InputError(format!("no goal named '{n}'")))?],
        None => spec.goals.iter().collect(),
    };
    if goals.is_empty() {
        return Err(InputError("the file defines no goal".into()));
    }
    let mode = match &cli.solver {
        Some(s) => format!("solver {}", s.display()),
        None => format!("bounded check over [{}, {}]", b.lo, b.hi),
    };
    let mut all_pass = true;
    let mut next_idx = 0;
    for g in goals {
        let cfg = ProverConfig {
            comb: b.comb,
            default_invariant: g.default_invariant.clone(),
            var_order: spec.vars.clone(),
            ..ProverConfig::default()
        };
        let proof = match prover::verify(&g.formula, &cfg) {
            Ok(p) => p,
            Err(e @ prover::ProofError::Rewrite(rewrite::RewriteError::NonConstructive { .. })) => {
                out.record("goal", &g.name, "FAIL", &e.to_string());
                all_pass = false;
                continue;
            }
            Err(e) => return Err(InputError(format!("goal {}: {e}", g.name))),
        };
        if tree {
            out.text(&proof.tree.render());
        }
        out.text(&format!("goal {}: {} obligations ({mode})", g.name, proof.obligations.len()));
        let mut pass = true;
        for o in &proof.obligations {
            let r = check_obligation(&o.formula, next_idx, cli, b)?;
            next_idx += 1;
            let (verdict, detail) = match &r {
                ObligationResult::Valid => ("VALID", o.formula.to_string()),
                ObligationResult::Invalid(s) => {
                    let vars: Vec<String> = o.formula.free_vars().into_iter().collect();
                    ("INVALID", format!("{}  counterexample {}", o.formula, s.show(&vars)))
                }
                ObligationResult::Unknown(why) => ("UNKNOWN", format!("{}  ({why})", o.formula)),
            };
            pass &= r.is_valid();
            out.record("obligation", &format!("{}#{}", g.name, o.id), verdict, &detail);
        }
        all_pass &= pass;
        out.record("goal", &g.name, if pass { "PASS" } else { "FAIL" }, &mode);
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: &Cli) -> Result<ExitCode, InputError> {
    let out = Out { format: cli.format };
    let b = bounds(cli)?;
    match &cli.command {
        Cmd::Check { file } => cmd_check(file, &out),
        Cmd::Simulate { file, program, start } => cmd_simulate(file, program.as_deref(), start.as_deref(), b, &out),
        Cmd::Seq { file, program, equations } => cmd_seq(file, program.as_deref(), *equations, b, &out),
        Cmd::Verify { file, goal, tree } => cmd_verify(file, goal.as_deref(), *tree, cli, b, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            match cli.format {
                Format::Text => eprintln!("error: {msg}"),
                Format::Structured => println!("{}", json!({"kind": "error", "name": "", "verdict": "error", "detail": msg})),
            }
            ExitCode::from(2)
        }
    }
}
