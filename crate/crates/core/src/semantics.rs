//! Bounded trace semantics. Traces are finite sequences of states with one
//! step per instant. Every enumeration is cut off after `k` steps, and
//! quantifiers range over `[lo, hi]`.
//!
//! A formula `[p]φ` evaluated with a budget of `n` steps looks at the traces
//! of `p` with at most `n` steps and evaluates `φ` with what is left of the
//! budget; `[p] always φ` evaluates `φ` at position `i` of a trace with `i`
//! steps fewer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::merge::{self, Comb, MergeFailure, MergedEvent};
use crate::syntax::{BinOp, Formula, MacroEvent, MicroEvent, Program, Rel, Term};

/// A state. Variables not in the map read as 0; zero values are never stored,
/// so equal valuations compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(BTreeMap<String, i64>);

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        let mut s = State::new();
        for (x, v) in pairs {
            s.set(x, v);
        }
        s
    }

    pub fn get(&self, x: &str) -> i64 {
        self.0.get(x).copied().unwrap_or(0)
    }

    pub fn set(&mut self, x: &str, v: i64) {
        if v == 0 {
            self.0.remove(x);
        } else {
            self.0.insert(x.to_string(), v);
        }
    }

    pub fn with(&self, x: &str, v: i64) -> State {
        let mut s = self.clone();
        s.set(x, v);
        s
    }

    /// `{x=0,y=1}` over the given variables, in order.
    pub fn show(&self, vars: &[String]) -> String {
        let body: Vec<String> = vars.iter().map(|x| format!("{x}={}", self.get(x))).collect();
        format!("{{{}}}", body.join(","))
    }

    /// Every state over `vars` with values in `[lo, hi]`.
    pub fn enumerate(vars: &[String], lo: i64, hi: i64) -> Vec<State> {
        let mut out = vec![State::new()];
        for x in vars {
            out = out
                .into_iter()
                .flat_map(|s| (lo..=hi).map(move |v| s.with(x, v)))
                .collect();
        }
        out
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = self.0.keys().cloned().collect();
        f.write_str(&self.show(&vars))
    }
}

pub type Trace = Vec<State>;
pub type TraceSet = BTreeSet<Trace>;

pub fn steps(tr: &Trace) -> usize {
    tr.len() - 1
}

/// One trace per line.
pub fn format_traces(traces: &TraceSet, vars: &[String]) -> String {
    let mut out = String::new();
    for tr in traces {
        let parts: Vec<String> = tr.iter().map(|s| s.show(vars)).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum number of steps of an enumerated trace.
    pub k: usize,
    pub lo: i64,
    pub hi: i64,
    pub comb: Comb,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { k: 3, lo: -8, hi: 8, comb: Comb::Add }
    }
}

impl Bounds {
    pub fn with_k(k: usize) -> Self {
        Bounds { k, ..Bounds::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("division by zero in '{0}'")]
    DivisionByZero(String),
    #[error("arithmetic overflow in '{0}'")]
    Overflow(String),
    #[error("signal event outside a parallel composition in '{0}'")]
    OpenProgram(String),
}

/// A parallel configuration whose instant could not be resolved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub config: String,
    pub message: String,
}

pub fn eval_term(s: &State, t: &Term) -> Result<i64, SemError> {
    match t {
        Term::Var(x) => Ok(s.get(x)),
        Term::Const(n) => Ok(*n),
        Term::Apply(op, a, b) => {
            let (a, b) = (eval_term(s, a)?, eval_term(s, b)?);
            let r = match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
                BinOp::Div => {
                    if b == 0 {
                        return Err(SemError::DivisionByZero(t.to_string()));
                    }
                    a.checked_div(b)
                }
            };
            r.ok_or_else(|| SemError::Overflow(t.to_string()))
        }
    }
}

fn eval_rel(r: Rel, a: i64, b: i64) -> bool {
    match r {
        Rel::Lt => a < b,
        Rel::Le => a <= b,
        Rel::Eq => a == b,
        Rel::Gt => a > b,
        Rel::Ge => a >= b,
    }
}

/// Executes the micro events of a closed macro event; `None` when a test fails.
pub fn exec_event(s: &State, a: &MacroEvent, range: (i64, i64)) -> Result<Option<State>, SemError> {
    let mut cur = s.clone();
    for e in &a.events {
        match e {
            MicroEvent::Test(phi) => {
                if !eval_afol(&cur, phi, range)? {
                    return Ok(None);
                }
            }
            MicroEvent::Assign(x, t) => {
                let v = eval_term(&cur, t)?;
                cur.set(x, v);
            }
            _ => return Err(SemError::OpenProgram(a.to_string())),
        }
    }
    Ok(Some(cur))
}

/// The micro-step trace of a closed macro event: each micro event and the
/// final `ε` contribute one step.
pub fn micro_trace(s: &State, a: &MacroEvent, range: (i64, i64)) -> Result<Option<Trace>, SemError> {
    let mut tr = vec![s.clone()];
    let mut cur = s.clone();
    for e in &a.events {
        match e {
            MicroEvent::Test(phi) => {
                if !eval_afol(&cur, phi, range)? {
                    return Ok(None);
                }
            }
            MicroEvent::Assign(x, t) => {
                let v = eval_term(&cur, t)?;
                cur.set(x, v);
            }
            _ => return Err(SemError::OpenProgram(a.to_string())),
        }
        tr.push(cur.clone());
    }
    tr.push(cur);
    Ok(Some(tr))
}

/// First-order formulas; quantifiers range over `range`.
pub fn eval_afol(s: &State, phi: &Formula, range: (i64, i64)) -> Result<bool, SemError> {
    match phi {
        Formula::True => Ok(true),
        Formula::Rel(r, a, b) => Ok(eval_rel(*r, eval_term(s, a)?, eval_term(s, b)?)),
        Formula::Not(a) => Ok(!eval_afol(s, a, range)?),
        Formula::And(a, b) => Ok(eval_afol(s, a, range)? && eval_afol(s, b, range)?),
        Formula::Or(a, b) => Ok(eval_afol(s, a, range)? || eval_afol(s, b, range)?),
        Formula::Implies(a, b) => Ok(!eval_afol(s, a, range)? || eval_afol(s, b, range)?),
        Formula::Forall(x, a) => {
            for v in range.0..=range.1 {
                if !eval_afol(&s.with(x, v), a, range)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(x, a) => {
            for v in range.0..=range.1 {
                if eval_afol(&s.with(x, v), a, range)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Modal(..) => unreachable!("modal formula in first-order evaluation"),
    }
}

/// Number of instants a trec takes, when it takes any.
pub fn trec_len(p: &Program) -> usize {
    match p {
        Program::Nothing | Program::Halt => 0,
        Program::Event(_) => 1,
        Program::Seq(a, b) => trec_len(a) + trec_len(b),
        Program::Par(ps) => ps.iter().map(trec_len).max().unwrap_or(0),
        Program::Choice(a, b) => trec_len(a).min(trec_len(b)),
        Program::Star(..) => 0,
    }
}

/// `p ⋈ q`
pub fn link(p: &Program, q: &Program) -> Program {
    match (p, q) {
        (Program::Halt, _) | (_, Program::Halt) => Program::Halt,
        (Program::Nothing, _) => q.clone(),
        (_, Program::Nothing) => p.clone(),
        (Program::Seq(a, rest), _) if matches!(**a, Program::Event(_)) => {
            Program::seq((**a).clone(), link(rest, q))
        }
        _ => Program::seq(p.clone(), q.clone()),
    }
}

/// `τ(p)` restricted to trecs that take at most `budget` instants.
pub fn trecs(p: &Program, budget: usize) -> BTreeSet<Program> {
    let keep = |r: &Program| trec_len(r) <= budget;
    match p {
        Program::Nothing | Program::Halt => [p.clone()].into(),
        Program::Event(_) => {
            if budget >= 1 {
                [p.clone()].into()
            } else {
                BTreeSet::new()
            }
        }
        Program::Seq(a, b) => {
            let ta = trecs(a, budget);
            let mut out = BTreeSet::new();
            for r1 in &ta {
                let rest = budget - trec_len(r1).min(budget);
                for r2 in trecs(b, rest) {
                    let r = link(r1, &r2);
                    if keep(&r) {
                        out.insert(r);
                    }
                }
            }
            out
        }
        Program::Choice(a, b) => {
            let mut out = trecs(a, budget);
            out.extend(trecs(b, budget));
            out
        }
        Program::Star(a, _) => {
            let body = trecs(a, budget);
            let mut out: BTreeSet<Program> = [Program::Nothing].into();
            let mut layer: BTreeSet<Program> = [Program::Nothing].into();
            for _ in 0..budget {
                let mut next = BTreeSet::new();
                for r in &layer {
                    for t in &body {
                        let l = link(r, t);
                        if keep(&l) {
                            next.insert(l);
                        }
                    }
                }
                out.extend(next.iter().cloned());
                layer = next;
                if layer.is_empty() {
                    break;
                }
            }
            out
        }
        Program::Par(ps) => {
            let mut combos: Vec<Vec<Program>> = vec![Vec::new()];
            for q in ps {
                let tq = trecs(q, budget);
                let mut next = Vec::new();
                for c in &combos {
                    for r in &tq {
                        let mut c2 = c.clone();
                        c2.push(r.clone());
                        next.push(c2);
                    }
                }
                combos = next;
            }
            combos.into_iter().map(Program::Par).filter(keep).collect()
        }
    }
}

enum Head {
    Halt,
    Nothing,
    Event(MacroEvent, Program),
    Par(Vec<Program>, Program),
}

fn head(p: &Program) -> Head {
    match p {
        Program::Halt => Head::Halt,
        Program::Nothing => Head::Nothing,
        Program::Event(a) => Head::Event(a.clone(), Program::Nothing),
        Program::Par(ps) => Head::Par(ps.clone(), Program::Nothing),
        Program::Seq(a, b) => match head(a) {
            Head::Halt => Head::Halt,
            Head::Nothing => head(b),
            Head::Event(e, rest) => Head::Event(e, link(&rest, b)),
            Head::Par(ps, rest) => Head::Par(ps, link(&rest, b)),
        },
        Program::Choice(..) | Program::Star(..) => unreachable!("not a trec: {p}"),
    }
}

/// The outcome of one instant of a parallel trec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParStep {
    Halt,
    Done,
    Step(MacroEvent, Program),
    Fail(MergeFailure),
}

/// Resolves the current instant of `∥(r₁, ..., rₙ)` for trecs `rᵢ`.
pub fn par_step(components: &[Program], comb: Comb) -> ParStep {
    let mut comps: Vec<Program> = components.to_vec();
    loop {
        if comps.iter().any(|c| matches!(head(c), Head::Halt)) {
            return ParStep::Halt;
        }
        comps.retain(|c| !matches!(head(c), Head::Nothing));
        if comps.is_empty() {
            return ParStep::Done;
        }
        let nested = comps.iter().position(|c| matches!(head(c), Head::Par(..)));
        if let Some(i) = nested {
            let Head::Par(inner, rest) = head(&comps[i]) else { unreachable!() };
            comps[i] = match par_step(&inner, comb) {
                ParStep::Halt => Program::Halt,
                ParStep::Done => rest,
                ParStep::Step(a, cont) => Program::seq(Program::Event(a), link(&cont, &rest)),
                fail @ ParStep::Fail(_) => return fail,
            };
            continue;
        }
        let pattern: Vec<(MacroEvent, Program)> = comps
            .iter()
            .map(|c| match head(c) {
                Head::Event(a, rest) => (a, rest),
                _ => unreachable!(),
            })
            .collect();
        let out = merge::merge(&pattern, comb);
        if let Some(f) = out.failure {
            return ParStep::Fail(f);
        }
        return match out.event {
            MergedEvent::Halt => ParStep::Halt,
            MergedEvent::Event(a) => ParStep::Step(a, Program::Par(out.residuals)),
        };
    }
}

/// Enumerates traces and evaluates formulas, collecting diagnostics for
/// parallel configurations that cannot be resolved.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub bounds: Bounds,
    pub diagnostics: BTreeSet<Diagnostic>,
}

impl Evaluator {
    pub fn new(bounds: Bounds) -> Self {
        Evaluator { bounds, diagnostics: BTreeSet::new() }
    }

    fn range(&self) -> (i64, i64) {
        (self.bounds.lo, self.bounds.hi)
    }

    /// Traces of `p` from `s` with at most `k` steps.
    pub fn traces(&mut self, s: &State, p: &Program) -> Result<TraceSet, SemError> {
        self.run(s, p, self.bounds.k)
    }

    pub fn run(&mut self, s: &State, p: &Program, budget: usize) -> Result<TraceSet, SemError> {
        let mut out = TraceSet::new();
        match p {
            Program::Nothing => {
                out.insert(vec![s.clone()]);
            }
            Program::Halt => {}
            Program::Event(a) => {
                if budget >= 1 {
                    if let Some(t) = exec_event(s, a, self.range())? {
                        out.insert(vec![s.clone(), t]);
                    }
                }
            }
            Program::Seq(a, b) => {
                for tr in self.run(s, a, budget)? {
                    let used = steps(&tr);
                    let last = tr.last().expect("non-empty trace").clone();
                    for tail in self.run(&last, b, budget - used)? {
                        let mut t = tr.clone();
                        t.extend(tail.into_iter().skip(1));
                        out.insert(t);
                    }
                }
            }
            Program::Choice(a, b) => {
                out = self.run(s, a, budget)?;
                out.extend(self.run(s, b, budget)?);
            }
            Program::Star(a, _) => {
                out.insert(vec![s.clone()]);
                let mut frontier: Vec<Trace> = vec![vec![s.clone()]];
                while let Some(tr) = frontier.pop() {
                    let used = steps(&tr);
                    let last = tr.last().expect("non-empty trace").clone();
                    for tail in self.run(&last, a, budget - used)? {
                        if tail.len() == 1 {
                            continue;
                        }
                        let mut t = tr.clone();
                        t.extend(tail.into_iter().skip(1));
                        if out.insert(t.clone()) {
                            frontier.push(t);
                        }
                    }
                }
            }
            Program::Par(_) => {
                for r in trecs(p, budget) {
                    out.extend(self.valt(s, &r, budget)?);
                }
            }
        }
        Ok(out)
    }

    /// `valt(∥(r₁, ..., rₙ))` for a parallel trec.
    pub fn valt(&mut self, s: &State, r: &Program, budget: usize) -> Result<TraceSet, SemError> {
        let Program::Par(rs) = r else { return self.run(s, r, budget) };
        let mut out = TraceSet::new();
        match par_step(rs, self.bounds.comb) {
            ParStep::Halt => {}
            ParStep::Done => {
                out.insert(vec![s.clone()]);
            }
            ParStep::Fail(f) => {
                self.diagnostics.insert(Diagnostic { config: r.to_string(), message: f.to_string() });
            }
            ParStep::Step(a, cont) => {
                if budget >= 1 {
                    if let Some(t) = exec_event(s, &a, self.range())? {
                        for tail in self.run(&t, &cont, budget - 1)? {
                            let mut tr = vec![s.clone()];
                            tr.extend(tail);
                            out.insert(tr);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn holds(&mut self, s: &State, phi: &Formula) -> Result<bool, SemError> {
        self.holds_at(s, phi, self.bounds.k)
    }

    pub fn holds_at(&mut self, s: &State, phi: &Formula, budget: usize) -> Result<bool, SemError> {
        let range = self.range();
        match phi {
            Formula::True => Ok(true),
            Formula::Rel(r, a, b) => Ok(eval_rel(*r, eval_term(s, a)?, eval_term(s, b)?)),
            Formula::Not(a) => Ok(!self.holds_at(s, a, budget)?),
            Formula::And(a, b) => Ok(self.holds_at(s, a, budget)? && self.holds_at(s, b, budget)?),
            Formula::Or(a, b) => Ok(self.holds_at(s, a, budget)? || self.holds_at(s, b, budget)?),
            Formula::Implies(a, b) => {
                Ok(!self.holds_at(s, a, budget)? || self.holds_at(s, b, budget)?)
            }
            Formula::Forall(x, a) => {
                for v in range.0..=range.1 {
                    if !self.holds_at(&s.with(x, v), a, budget)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Exists(x, a) => {
                for v in range.0..=range.1 {
                    if self.holds_at(&s.with(x, v), a, budget)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Modal(m, p, f) => {
                let traces = self.run(s, p, budget)?;
                let want = m.is_box();
                for tr in &traces {
                    let ok = if m.is_temporal() {
                        let mut all = true;
                        for (i, st) in tr.iter().enumerate() {
                            if self.holds_at(st, f, budget - i)? != want {
                                all = false;
                                break;
                            }
                        }
                        all
                    } else {
                        let last = tr.last().expect("non-empty trace");
                        self.holds_at(last, f, budget - steps(tr))? == want
                    };
                    if !ok {
                        return Ok(!want);
                    }
                }
                Ok(want)
            }
        }
    }
}

/// Traces of `p` from `s`.
pub fn traces_from(s: &State, p: &Program, bounds: Bounds) -> Result<TraceSet, SemError> {
    Evaluator::new(bounds).traces(s, p)
}

/// `s ⊨ φ` under the bounds.
pub fn holds(s: &State, phi: &Formula, bounds: Bounds) -> Result<bool, SemError> {
    Evaluator::new(bounds).holds(s, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_program};

    fn prog(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    fn st(pairs: &[(&str, i64)]) -> State {
        State::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn micro_steps() {
        let Program::Event(a) = prog("[?true . x := 1]") else { panic!() };
        let s = st(&[]);
        let s1 = st(&[("x", 1)]);
        assert_eq!(micro_trace(&s, &a, (-8, 8)).unwrap(), Some(vec![s.clone(), s.clone(), s1.clone(), s1]));
    }

    #[test]
    fn star_is_cut_at_k_steps() {
        let p = prog("[x := x + 1]*");
        let t = traces_from(&st(&[]), &p, Bounds::with_k(2)).unwrap();
        let expected: TraceSet = [
            vec![st(&[])],
            vec![st(&[]), st(&[("x", 1)])],
            vec![st(&[]), st(&[("x", 1)]), st(&[("x", 2)])],
        ]
        .into();
        assert_eq!(t, expected);
        let r = trecs(&p, 2);
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn failed_test_has_no_trace() {
        let t = traces_from(&st(&[]), &prog("[?x > 0]"), Bounds::default()).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn halt_has_no_trace() {
        assert!(traces_from(&st(&[]), &prog("halt"), Bounds::default()).unwrap().is_empty());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let r = traces_from(&st(&[]), &prog("[x := 1 / y]"), Bounds::default());
        assert!(matches!(r, Err(SemError::DivisionByZero(_))));
    }

    #[test]
    fn open_program_is_rejected() {
        let r = traces_from(&st(&[]), &prog("[s!]"), Bounds::default());
        assert!(matches!(r, Err(SemError::OpenProgram(_))));
    }

    #[test]
    fn signal_passes_value() {
        let p = prog("par([s!5], [s?(x)])");
        let t = traces_from(&st(&[]), &p, Bounds::default()).unwrap();
        assert_eq!(t, [vec![st(&[]), st(&[("x", 5)])]].into());
    }

    #[test]
    fn absence_waits_for_emitter() {
        let p = prog("par([!s] ; [y := 1], [] ; [s!])");
        let t = traces_from(&st(&[]), &p, Bounds::default()).unwrap();
        assert_eq!(t, [vec![st(&[]), st(&[]), st(&[("y", 1)])]].into());
    }

    #[test]
    fn non_constructive_instant_is_reported() {
        let mut ev = Evaluator::new(Bounds::default());
        let t = ev.traces(&st(&[]), &prog("par([!s . s!5], [])")).unwrap();
        assert!(t.is_empty());
        assert_eq!(ev.diagnostics.len(), 1);
    }

    #[test]
    fn nested_parallel() {
        let p = prog("par(par([s!1], [s?(x)]) ; [y := x], [z := 2])");
        let t = traces_from(&st(&[]), &p, Bounds::default()).unwrap();
        assert_eq!(
            t,
            [vec![st(&[]), st(&[("x", 1), ("z", 2)]), st(&[("x", 1), ("y", 1), ("z", 2)])]].into()
        );
    }

    #[test]
    fn box_and_always() {
        let b = Bounds::with_k(3);
        let s = st(&[]);
        assert!(holds(&s, &parse_formula("[[x := x + 1]*] x >= 0").unwrap(), b).unwrap());
        assert!(!holds(&s, &parse_formula("[[x := x + 1]*] x <= 2").unwrap(), b).unwrap());
        assert!(holds(&s, &parse_formula("[[x := 1] ; [x := 2]] always x <= 2").unwrap(), b).unwrap());
        assert!(!holds(&s, &parse_formula("[[x := 1] ; [x := 2]] always x <= 1").unwrap(), b).unwrap());
        assert!(holds(&s, &parse_formula("<[x := 1] ; [x := 2]> eventually x = 1").unwrap(), b).unwrap());
        assert!(holds(&s, &parse_formula("[halt] false").unwrap(), b).unwrap());
    }

    #[test]
    fn quantifiers_use_the_range() {
        let b = Bounds { k: 1, lo: -2, hi: 2, comb: Comb::Add };
        assert!(holds(&State::new(), &parse_formula("forall x. x <= 2").unwrap(), b).unwrap());
        assert!(!holds(&State::new(), &parse_formula("exists x. x > 2").unwrap(), b).unwrap());
    }
}
