//! Seeded generators and oracle helpers shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdl_core::semantics::{Bounds, Evaluator, State, TraceSet};
use sdl_core::syntax::{
    BinOp, Formula, MacroEvent, MicroEvent, Modality, Program, Rel, StarAnnotation, Term, Variant,
};

pub const VARS: [&str; 2] = ["x", "y"];
pub const SIGNALS: [&str; 2] = ["s1", "s2"];

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).expect("non-empty").clone()
    }

    pub fn constant(&mut self) -> Term {
        Term::int(self.rng.gen_range(-2..=2))
    }

    /// A variable, a constant, or a variable plus or minus a constant.
    pub fn small_term(&mut self, vars: &[&str]) -> Term {
        if vars.is_empty() {
            return self.constant();
        }
        let v = Term::var(self.pick(vars));
        match self.below(4) {
            0 => self.constant(),
            1 => v,
            2 => Term::add(v, Term::int(self.rng.gen_range(0..=1))),
            _ => Term::sub(v, Term::int(self.rng.gen_range(0..=1))),
        }
    }

    /// Arbitrary arithmetic without division.
    pub fn term(&mut self, vars: &[&str], depth: usize) -> Term {
        if depth == 0 || self.chance(0.4) {
            return if !vars.is_empty() && self.chance(0.6) { Term::var(self.pick(vars)) } else { self.constant() };
        }
        let op = self.pick(&[BinOp::Add, BinOp::Sub, BinOp::Mul]);
        Term::apply(op, self.term(vars, depth - 1), self.term(vars, depth - 1))
    }

    pub fn rel(&mut self, vars: &[&str]) -> Formula {
        let r = self.pick(&[Rel::Lt, Rel::Le, Rel::Eq, Rel::Gt, Rel::Ge]);
        Formula::rel(r, self.small_term(vars), self.small_term(vars))
    }

    /// Quantifier-free first-order formula.
    pub fn qf(&mut self, vars: &[&str], depth: usize) -> Formula {
        if depth == 0 || self.chance(0.35) {
            return match self.below(8) {
                0 => Formula::True,
                1 => Formula::falsum(),
                _ => self.rel(vars),
            };
        }
        match self.below(4) {
            0 => Formula::not(self.qf(vars, depth - 1)),
            1 => Formula::and(self.qf(vars, depth - 1), self.qf(vars, depth - 1)),
            2 => Formula::or(self.qf(vars, depth - 1), self.qf(vars, depth - 1)),
            _ => Formula::implies(self.qf(vars, depth - 1), self.qf(vars, depth - 1)),
        }
    }

    /// First-order formula with occasional quantifiers over `z`.
    pub fn afol(&mut self, vars: &[&str], depth: usize) -> Formula {
        if depth > 0 && self.chance(0.15) {
            let mut inner: Vec<&str> = vars.to_vec();
            inner.push("z");
            let body = self.afol(&inner, depth - 1);
            return if self.chance(0.5) { Formula::forall("z", body) } else { Formula::exists("z", body) };
        }
        self.qf(vars, depth)
    }

    /// A closed macro event of at most two micro events.
    pub fn closed_event(&mut self, reads: &[&str], writes: &[&str]) -> MacroEvent {
        let n = self.below(3);
        let mut evs = Vec::new();
        for _ in 0..n {
            if !writes.is_empty() && self.chance(0.6) {
                evs.push(MicroEvent::Assign(self.pick(writes).to_string(), self.small_term(reads)));
            } else {
                evs.push(MicroEvent::Test(self.rel(reads)));
            }
        }
        MacroEvent::new(evs)
    }

    /// A closed sequential program over the given variables.
    pub fn seq_program(&mut self, vars: &[&str], depth: usize) -> Program {
        if depth == 0 || self.chance(0.3) {
            return match self.below(10) {
                0 => Program::Nothing,
                1 => Program::Halt,
                _ => Program::Event(self.closed_event(vars, vars)),
            };
        }
        match self.below(3) {
            0 => Program::seq(self.seq_program(vars, depth - 1), self.seq_program(vars, depth - 1)),
            1 => Program::choice(self.seq_program(vars, depth - 1), self.seq_program(vars, depth - 1)),
            _ => Program::star(self.seq_program(vars, depth - 1)),
        }
    }

    /// A macro event of a parallel component that owns `var`.
    pub fn signal_event(&mut self, var: Option<&str>) -> MacroEvent {
        let n = self.below(3);
        let own: Vec<&str> = var.into_iter().collect();
        let mut evs = Vec::new();
        for _ in 0..n {
            let s = self.pick(&SIGNALS).to_string();
            let ev = match self.below(6) {
                0 => MicroEvent::Present { signal: s, bind: None },
                1 if var.is_some() => MicroEvent::Present { signal: s, bind: var.map(str::to_string) },
                1 | 2 => MicroEvent::Absent(s),
                3 => MicroEvent::Emit { signal: s, value: Some(Term::int(self.rng.gen_range(0..=2))) },
                4 if var.is_some() => MicroEvent::Assign(var.unwrap().to_string(), self.small_term(&own)),
                _ => MicroEvent::Test(self.rel(&own)),
            };
            evs.push(ev);
        }
        MacroEvent::new(evs)
    }

    /// An open sequential component using signals and its own variable.
    pub fn component(&mut self, var: Option<&str>, depth: usize) -> Program {
        if depth == 0 || self.chance(0.3) {
            return match self.below(12) {
                0 => Program::Nothing,
                1 => Program::Halt,
                _ => Program::Event(self.signal_event(var)),
            };
        }
        match self.below(3) {
            0 => Program::seq(self.component(var, depth - 1), self.component(var, depth - 1)),
            1 => Program::choice(self.component(var, depth - 1), self.component(var, depth - 1)),
            _ => Program::star(self.component(var, depth - 1)),
        }
    }

    /// A closed parallel composition of two or three components, each
    /// writing only its own variable.
    pub fn par_program(&mut self, depth: usize) -> Program {
        let n = if self.chance(0.75) { 2 } else { 3 };
        let owners = [Some("x"), Some("y"), None];
        Program::Par((0..n).map(|i| self.component(owners[i], depth)).collect())
    }

    /// A closed program: sequential, or with parallel compositions inside.
    pub fn closed_program(&mut self, depth: usize) -> Program {
        if depth == 0 || self.chance(0.3) {
            return match self.below(10) {
                0 => Program::Nothing,
                1 => Program::Halt,
                2 | 3 if depth > 0 => self.par_program(depth - 1),
                _ => Program::Event(self.closed_event(&VARS, &VARS)),
            };
        }
        match self.below(4) {
            0 => Program::seq(self.closed_program(depth - 1), self.closed_program(depth - 1)),
            1 => Program::choice(self.closed_program(depth - 1), self.closed_program(depth - 1)),
            2 => Program::star(self.closed_program(depth - 1)),
            _ => self.par_program(depth - 1),
        }
    }

    /// Any program AST, for printing and parsing.
    pub fn any_program(&mut self, depth: usize) -> Program {
        if depth == 0 || self.chance(0.25) {
            return match self.below(8) {
                0 => Program::Nothing,
                1 => Program::Halt,
                2 | 3 => Program::Event(self.signal_event(Some("x"))),
                _ => Program::Event(self.closed_event(&VARS, &VARS)),
            };
        }
        match self.below(5) {
            0 => Program::seq(self.any_program(depth - 1), self.any_program(depth - 1)),
            1 => Program::choice(self.any_program(depth - 1), self.any_program(depth - 1)),
            2 => {
                let ann = self.annotation();
                Program::star_with(self.any_program(depth - 1), ann)
            }
            3 => {
                let n = 2 + self.below(2);
                Program::Par((0..n).map(|_| self.any_program(depth - 1)).collect())
            }
            _ => Program::Event(MacroEvent::new(vec![MicroEvent::Test(self.afol(&VARS, 2))])),
        }
    }

    pub fn annotation(&mut self) -> StarAnnotation {
        let invariant = if self.chance(0.3) { Some(self.qf(&VARS, 2)) } else { None };
        let variant = if self.chance(0.2) {
            Some(Variant { var: "v".into(), formula: self.qf(&["v", "x"], 1) })
        } else {
            None
        };
        StarAnnotation { invariant, variant }
    }

    /// Any formula AST, for printing and parsing.
    pub fn any_formula(&mut self, depth: usize) -> Formula {
        if depth == 0 || self.chance(0.3) {
            return self.afol(&VARS, 1);
        }
        match self.below(8) {
            0 => Formula::not(self.any_formula(depth - 1)),
            1 => Formula::and(self.any_formula(depth - 1), self.any_formula(depth - 1)),
            2 => Formula::or(self.any_formula(depth - 1), self.any_formula(depth - 1)),
            3 => Formula::implies(self.any_formula(depth - 1), self.any_formula(depth - 1)),
            4 => Formula::forall("x", self.any_formula(depth - 1)),
            5 => Formula::exists("y", self.any_formula(depth - 1)),
            _ => {
                let m = self.pick(&[Modality::Box, Modality::BoxAlways, Modality::Diamond, Modality::DiamondEventually]);
                Formula::modal(m, self.any_program(2), self.any_formula(depth - 1))
            }
        }
    }
}

/// All states over `vars` with values in `[lo, hi]`.
pub fn states(lo: i64, hi: i64) -> Vec<State> {
    let vars: Vec<String> = VARS.iter().map(|s| s.to_string()).collect();
    State::enumerate(&vars, lo, hi)
}

/// Traces and whether any configuration was non-constructive.
pub fn traces(p: &Program, s: &State, b: Bounds) -> (TraceSet, bool) {
    let mut ev = Evaluator::new(b);
    let t = ev.traces(s, p).expect("evaluation error");
    (t, !ev.diagnostics.is_empty())
}

pub enum Verdict {
    Equal,
    Different(State),
    /// Some configuration could not be resolved.
    Skip,
}

/// Compares trace sets from every start state.
pub fn compare(p: &Program, q: &Program, starts: &[State], b: Bounds) -> Verdict {
    for s in starts {
        let (tp, dp) = traces(p, s, b);
        let (tq, dq) = traces(q, s, b);
        if dp || dq {
            return Verdict::Skip;
        }
        if tp != tq {
            return Verdict::Different(s.clone());
        }
    }
    Verdict::Equal
}
