//! Discharging first-order obligations: SMT-LIB2 export, an external solver
//! wrapper, and a bounded checker that enumerates a finite range.
//!
//! Solver protocol: the script is written to a file whose path is the only
//! argument of the solver. The first non-empty line of standard output decides:
//! `unsat` means the obligation is valid, `sat` means it is not, anything
//! else is reported as unknown.

use std::collections::BTreeSet;
use std::io;
use std::path::Path;
use std::process::Command;

use crate::semantics::{eval_afol, SemError, State};
use crate::syntax::{BinOp, Formula, Rel, Term, VarSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObligationResult {
    Valid,
    Invalid(State),
    Unknown(String),
}

impl ObligationResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, ObligationResult::Valid)
    }
}

const TDIV: &str = "(define-fun tdiv ((a Int) (b Int)) Int\n  \
(ite (>= a 0) (ite (> b 0) (div a b) (- (div a (- b))))\n    \
(ite (> b 0) (- (div (- a) b)) (div (- a) (- b)))))";

fn sym(x: &str) -> String {
    format!("|{x}|")
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(x) => sym(x),
        Term::Const(n) if *n < 0 => format!("(- {})", n.unsigned_abs()),
        Term::Const(n) => n.to_string(),
        Term::Apply(op, a, b) => {
            let op = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "tdiv",
            };
            format!("({op} {} {})", term(a), term(b))
        }
    }
}

fn formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::Rel(r, a, b) => {
            let (a, b) = (term(a), term(b));
            match r {
                Rel::Lt => format!("(< {a} {b})"),
                Rel::Le => format!("(<= {a} {b})"),
                Rel::Eq => format!("(= {a} {b})"),
                Rel::Gt => format!("(> {a} {b})"),
                Rel::Ge => format!("(>= {a} {b})"),
            }
        }
        Formula::Not(a) => format!("(not {})", formula(a)),
        Formula::And(a, b) => format!("(and {} {})", formula(a), formula(b)),
        Formula::Or(a, b) => format!("(or {} {})", formula(a), formula(b)),
        Formula::Implies(a, b) => format!("(=> {} {})", formula(a), formula(b)),
        Formula::Forall(x, a) => format!("(forall (({} Int)) {})", sym(x), formula(a)),
        Formula::Exists(x, a) => format!("(exists (({} Int)) {})", sym(x), formula(a)),
        Formula::Modal(..) => panic!("modal formula in an obligation"),
    }
}

/// Divisors of divisions outside every quantifier.
fn divisors(f: &Formula, out: &mut BTreeSet<Term>) {
    fn in_term(t: &Term, out: &mut BTreeSet<Term>) {
        if let Term::Apply(op, a, b) = t {
            if *op == BinOp::Div {
                out.insert((**b).clone());
            }
            in_term(a, out);
            in_term(b, out);
        }
    }
    match f {
        Formula::Rel(_, a, b) => {
            in_term(a, out);
            in_term(b, out);
        }
        Formula::Not(a) => divisors(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            divisors(a, out);
            divisors(b, out);
        }
        _ => {}
    }
}

/// An SMT-LIB2 script that is unsatisfiable iff `phi` is valid over the
/// integers. Division truncates toward zero; divisors outside quantifiers
/// are asserted non-zero.
pub fn emit_smtlib(phi: &Formula) -> String {
    let mut out = String::from("(set-logic ALL)\n");
    out.push_str(TDIV);
    out.push('\n');
    for x in phi.free_vars() {
        out.push_str(&format!("(declare-const {} Int)\n", sym(&x)));
    }
    let mut ds = BTreeSet::new();
    divisors(phi, &mut ds);
    for d in ds {
        out.push_str(&format!("(assert (not (= {} 0)))\n", term(&d)));
    }
    out.push_str(&format!("(assert (not {}))\n(check-sat)\n", formula(phi)));
    out
}

/// Splits `a1 && ... -> (b1 || ... )` into antecedent conjuncts and
/// succedent disjuncts; nested implications are curried into the antecedent.
fn split_sequent(phi: &Formula) -> (Vec<&Formula>, Vec<&Formula>) {
    fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::And(a, b) => {
                conjuncts(a, out);
                conjuncts(b, out);
            }
            _ => out.push(f),
        }
    }
    fn disjuncts<'a>(f: &'a Formula, ante: &mut Vec<&'a Formula>, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::Or(a, b) => {
                disjuncts(a, ante, out);
                disjuncts(b, ante, out);
            }
            Formula::Implies(a, b) => {
                conjuncts(a, ante);
                disjuncts(b, ante, out);
            }
            _ => out.push(f),
        }
    }
    let (mut ante, mut succ) = (Vec::new(), Vec::new());
    disjuncts(phi, &mut ante, &mut succ);
    (ante, succ)
}

struct Search<'a> {
    phi: &'a Formula,
    vars: Vec<String>,
    values: Vec<i64>,
    range: (i64, i64),
    /// Antecedent conjuncts decided once the first `n` variables are set.
    ante_at: Vec<Vec<&'a Formula>>,
    succ_at: Vec<Vec<&'a Formula>>,
}

impl Search<'_> {
    fn prune(&self, s: &State, depth: usize) -> bool {
        let ante_false = self.ante_at[depth].iter().any(|f| eval_afol(s, f, self.range) == Ok(false));
        ante_false || self.succ_at[depth].iter().any(|f| eval_afol(s, f, self.range) == Ok(true))
    }

    fn go(&self, s: &mut State, depth: usize) -> Option<ObligationResult> {
        if depth > 0 && self.prune(s, depth) {
            return None;
        }
        if depth == self.vars.len() {
            return match eval_afol(s, self.phi, self.range) {
                Ok(true) => None,
                Ok(false) => Some(ObligationResult::Invalid(s.clone())),
                Err(SemError::DivisionByZero(t)) => Some(ObligationResult::Unknown(format!(
                    "division by zero in '{t}' at {}",
                    s.show(&self.vars)
                ))),
                Err(e) => Some(ObligationResult::Unknown(format!("{e} at {}", s.show(&self.vars)))),
            };
        }
        for &v in &self.values {
            s.set(&self.vars[depth], v);
            if let Some(r) = self.go(s, depth + 1) {
                return Some(r);
            }
        }
        s.set(&self.vars[depth], 0);
        None
    }
}

/// Checks `phi` at every assignment of its free variables over `[lo, hi]`;
/// quantifiers range over the same interval. Values closest to zero are
/// tried first. Assignments are built one variable at a time, and a partial
/// assignment that already falsifies an antecedent conjunct or satisfies a
/// succedent disjunct is not extended.
pub fn check_bounded(phi: &Formula, lo: i64, hi: i64) -> ObligationResult {
    let (ante, succ) = split_sequent(phi);
    let mut parts: Vec<(&Formula, VarSet)> = ante.iter().map(|f| (*f, f.free_vars())).collect();
    parts.sort_by_key(|(_, vs)| vs.len());
    let mut vars: Vec<String> = Vec::new();
    for (_, vs) in &parts {
        for v in vs {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
    }
    for v in phi.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let depth_of = |fv: &VarSet| fv.iter().map(|v| vars.iter().position(|w| w == v).expect("free variable") + 1).max().unwrap_or(0);
    let mut ante_at = vec![Vec::new(); vars.len() + 1];
    for (f, fv) in &parts {
        ante_at[depth_of(fv)].push(*f);
    }
    let mut succ_at = vec![Vec::new(); vars.len() + 1];
    for f in succ {
        succ_at[depth_of(&f.free_vars())].push(f);
    }
    let mut values: Vec<i64> = (lo..=hi).collect();
    values.sort_by_key(|v| (v.unsigned_abs(), *v));
    let search = Search { phi, vars, values, range: (lo, hi), ante_at, succ_at };
    let mut s = State::new();
    if search.prune(&s, 0) {
        return ObligationResult::Valid;
    }
    search.go(&mut s, 0).unwrap_or(ObligationResult::Valid)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverAnswer {
    Unsat,
    Sat,
    Other(String),
}

/// Runs `solver` on a script file and reads its answer.
pub fn run_solver(solver: &Path, script: &Path) -> io::Result<SolverAnswer> {
    let out = Command::new(solver).arg(script).output()?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let first = stdout.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    Ok(match first {
        "unsat" => SolverAnswer::Unsat,
        "sat" => SolverAnswer::Sat,
        other => SolverAnswer::Other(if other.is_empty() {
            String::from_utf8_lossy(&out.stderr).trim().to_string()
        } else {
            other.to_string()
        }),
    })
}

/// Decides `phi` with an external solver. A satisfiable negation is
/// reported with a counterexample from the bounded checker when one exists
/// in `[lo, hi]`.
pub fn check_with_solver(phi: &Formula, solver: &Path, script: &Path, lo: i64, hi: i64) -> io::Result<ObligationResult> {
    std::fs::write(script, emit_smtlib(phi))?;
    Ok(match run_solver(solver, script)? {
        SolverAnswer::Unsat => ObligationResult::Valid,
        SolverAnswer::Sat => match check_bounded(phi, lo, hi) {
            inv @ ObligationResult::Invalid(_) => inv,
            _ => ObligationResult::Unknown(format!("solver reports a counterexample outside [{lo}, {hi}]")),
        },
        SolverAnswer::Other(s) => ObligationResult::Unknown(format!("solver answered '{s}'")),
    })
}
