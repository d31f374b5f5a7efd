//! Abstract syntax of synchronous programs and formulas, together with the
//! variable bookkeeping (free, bound and must-bound variables), fresh names,
//! substitution and renaming that every later stage relies on.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub type VarSet = BTreeSet<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(i64),
    Apply(BinOp, Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    /// `[p] phi`
    Box,
    /// `[p] always phi`
    BoxAlways,
    /// `<p> phi`
    Diamond,
    /// `<p> eventually phi`
    DiamondEventually,
}

impl Modality {
    pub fn is_temporal(self) -> bool {
        matches!(self, Modality::BoxAlways | Modality::DiamondEventually)
    }

    pub fn is_box(self) -> bool {
        matches!(self, Modality::Box | Modality::BoxAlways)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Rel(Rel, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    Modal(Modality, Box<Program>, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MicroEvent {
    /// `?phi`
    Test(Formula),
    /// `sig?` or `sig?(x)`
    Present { signal: String, bind: Option<String> },
    /// `!sig`
    Absent(String),
    /// `sig!` (pure, carries 0) or `sig!e`
    Emit { signal: String, value: Option<Term> },
    /// `x := e`
    Assign(String, Term),
}

impl MicroEvent {
    pub fn is_signal_event(&self) -> bool {
        matches!(
            self,
            MicroEvent::Present { .. } | MicroEvent::Absent(_) | MicroEvent::Emit { .. }
        )
    }

    pub fn is_signal_test(&self) -> bool {
        matches!(self, MicroEvent::Present { .. } | MicroEvent::Absent(_))
    }
}

/// A macro event: micro events joined by `·`, ended by an implicit `ε`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MacroEvent {
    pub events: Vec<MicroEvent>,
}

impl MacroEvent {
    pub fn new(events: Vec<MicroEvent>) -> Self {
        MacroEvent { events }
    }

    pub fn epsilon() -> Self {
        MacroEvent::default()
    }

    pub fn is_epsilon(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.events.iter().all(|e| !e.is_signal_event())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub var: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StarAnnotation {
    pub invariant: Option<Formula>,
    pub variant: Option<Variant>,
}

impl StarAnnotation {
    pub fn is_empty(&self) -> bool {
        self.invariant.is_none() && self.variant.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Nothing,
    Halt,
    Event(MacroEvent),
    Seq(Box<Program>, Box<Program>),
    Choice(Box<Program>, Box<Program>),
    Star(Box<Program>, StarAnnotation),
    Par(Vec<Program>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("parallel composition is not allowed here")]
    ParallelNotAllowed,
}

// ---------------------------------------------------------------------------
// Constructors

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(n)
    }

    pub fn apply(op: BinOp, a: Term, b: Term) -> Term {
        Term::Apply(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::apply(BinOp::Add, a, b)
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::apply(BinOp::Sub, a, b)
    }
}

impl Formula {
    pub fn falsum() -> Formula {
        Formula::Not(Box::new(Formula::True))
    }

    pub fn rel(r: Rel, a: Term, b: Term) -> Formula {
        Formula::Rel(r, a, b)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Rel(Rel::Eq, a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(f))
    }

    pub fn modal(m: Modality, p: Program, f: Formula) -> Formula {
        Formula::Modal(m, Box::new(p), Box::new(f))
    }

    pub fn boxed(p: Program, f: Formula) -> Formula {
        Formula::modal(Modality::Box, p, f)
    }

    pub fn always(p: Program, f: Formula) -> Formula {
        Formula::modal(Modality::BoxAlways, p, f)
    }

    /// Conjunction of a list; `true` when empty.
    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list; `false` when empty.
    pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::falsum(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// Universal closure over the given variables, innermost last.
    pub fn forall_all(vars: &[String], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, v| Formula::forall(v, acc))
    }

    /// `∀(φ)`: universal closure over all free variables of `φ`.
    pub fn universal_closure(self) -> Formula {
        let fv: Vec<String> = self.free_vars().into_iter().collect();
        Formula::forall_all(&fv, self)
    }

    pub fn is_afol(&self) -> bool {
        match self {
            Formula::True | Formula::Rel(..) => true,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.is_afol(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_afol() && b.is_afol()
            }
            Formula::Modal(..) => false,
        }
    }
}

impl Program {
    pub fn event(events: Vec<MicroEvent>) -> Program {
        Program::Event(MacroEvent::new(events))
    }

    pub fn epsilon() -> Program {
        Program::Event(MacroEvent::epsilon())
    }

    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Program, b: Program) -> Program {
        Program::Choice(Box::new(a), Box::new(b))
    }

    pub fn star(a: Program) -> Program {
        Program::Star(Box::new(a), StarAnnotation::default())
    }

    pub fn star_with(a: Program, ann: StarAnnotation) -> Program {
        Program::Star(Box::new(a), ann)
    }

    /// Right-nested sequence; `nothing` when empty.
    pub fn seq_all(ps: impl IntoIterator<Item = Program>) -> Program {
        let v: Vec<Program> = ps.into_iter().collect();
        let mut it = v.into_iter().rev();
        match it.next() {
            None => Program::Nothing,
            Some(last) => it.fold(last, |acc, p| Program::seq(p, acc)),
        }
    }

    /// Right-nested choice; `halt` when empty.
    pub fn choice_all(ps: impl IntoIterator<Item = Program>) -> Program {
        let v: Vec<Program> = ps.into_iter().collect();
        let mut it = v.into_iter().rev();
        match it.next() {
            None => Program::Halt,
            Some(last) => it.fold(last, |acc, p| Program::choice(p, acc)),
        }
    }

    pub fn contains_par(&self) -> bool {
        match self {
            Program::Par(_) => true,
            Program::Nothing | Program::Halt | Program::Event(_) => false,
            Program::Seq(a, b) | Program::Choice(a, b) => a.contains_par() || b.contains_par(),
            Program::Star(a, _) => a.contains_par(),
        }
    }

    /// Closed programs use signal events only underneath a parallel composition.
    pub fn is_closed(&self) -> bool {
        match self {
            Program::Par(_) | Program::Nothing | Program::Halt => true,
            Program::Event(a) => a.is_closed(),
            Program::Seq(a, b) | Program::Choice(a, b) => a.is_closed() && b.is_closed(),
            Program::Star(a, _) => a.is_closed(),
        }
    }

    /// Whether the program admits a zero-step trace.
    pub fn nullable(&self) -> Result<bool, SyntaxError> {
        Ok(match self {
            Program::Nothing | Program::Star(..) => true,
            Program::Halt | Program::Event(_) => false,
            Program::Seq(a, b) => a.nullable()? && b.nullable()?,
            Program::Choice(a, b) => a.nullable()? || b.nullable()?,
            Program::Par(_) => return Err(SyntaxError::ParallelNotAllowed),
        })
    }

    pub fn signals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_signals(&mut out);
        out
    }

    fn collect_signals(&self, out: &mut BTreeSet<String>) {
        match self {
            Program::Nothing | Program::Halt => {}
            Program::Event(a) => {
                for e in &a.events {
                    match e {
                        MicroEvent::Present { signal, .. }
                        | MicroEvent::Absent(signal)
                        | MicroEvent::Emit { signal, .. } => {
                            out.insert(signal.clone());
                        }
                        _ => {}
                    }
                }
            }
            Program::Seq(a, b) | Program::Choice(a, b) => {
                a.collect_signals(out);
                b.collect_signals(out);
            }
            Program::Star(a, _) => a.collect_signals(out),
            Program::Par(ps) => ps.iter().for_each(|p| p.collect_signals(out)),
        }
    }
}

impl Formula {
    /// True when every program occurring in the formula is closed.
    pub fn programs_closed(&self) -> bool {
        match self {
            Formula::True | Formula::Rel(..) => true,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.programs_closed(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.programs_closed() && b.programs_closed()
            }
            Formula::Modal(_, p, f) => p.is_closed() && f.programs_closed(),
        }
    }
}

// ---------------------------------------------------------------------------
// Variables

impl Term {
    pub fn collect_vars(&self, out: &mut VarSet) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Const(_) => {}
            Term::Apply(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn substitute(&self, x: &str, e: &Term) -> Term {
        match self {
            Term::Var(y) if y == x => e.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::Apply(op, a, b) => Term::apply(*op, a.substitute(x, e), b.substitute(x, e)),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Term {
        self.substitute(from, &Term::Var(to.to_string()))
    }
}

/// Flow-sensitive variable information of a program: `free` are variables that
/// may be read before being written, `bound` those that may be written and
/// `must` those written on every terminating run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarInfo {
    pub free: VarSet,
    pub bound: VarSet,
    pub must: VarSet,
}

impl MacroEvent {
    pub fn var_info(&self) -> VarInfo {
        let mut info = VarInfo::default();
        for e in &self.events {
            match e {
                MicroEvent::Test(f) => {
                    for v in f.free_vars() {
                        if !info.must.contains(&v) {
                            info.free.insert(v);
                        }
                    }
                }
                MicroEvent::Present { bind, .. } => {
                    if let Some(x) = bind {
                        info.bound.insert(x.clone());
                        info.must.insert(x.clone());
                    }
                }
                MicroEvent::Absent(_) => {}
                MicroEvent::Emit { value, .. } => {
                    if let Some(t) = value {
                        for v in t.vars() {
                            if !info.must.contains(&v) {
                                info.free.insert(v);
                            }
                        }
                    }
                }
                MicroEvent::Assign(x, t) => {
                    for v in t.vars() {
                        if !info.must.contains(&v) {
                            info.free.insert(v);
                        }
                    }
                    info.bound.insert(x.clone());
                    info.must.insert(x.clone());
                }
            }
        }
        info
    }
}

impl Program {
    pub fn var_info(&self) -> VarInfo {
        match self {
            Program::Nothing | Program::Halt => VarInfo::default(),
            Program::Event(a) => a.var_info(),
            Program::Seq(a, b) => {
                let ia = a.var_info();
                let ib = b.var_info();
                let mut free = ia.free.clone();
                free.extend(ib.free.difference(&ia.must).cloned());
                VarInfo {
                    free,
                    bound: ia.bound.union(&ib.bound).cloned().collect(),
                    must: ia.must.union(&ib.must).cloned().collect(),
                }
            }
            Program::Choice(a, b) => {
                let ia = a.var_info();
                let ib = b.var_info();
                VarInfo {
                    free: ia.free.union(&ib.free).cloned().collect(),
                    bound: ia.bound.union(&ib.bound).cloned().collect(),
                    must: ia.must.intersection(&ib.must).cloned().collect(),
                }
            }
            Program::Star(a, _) => {
                let ia = a.var_info();
                VarInfo { free: ia.free, bound: ia.bound, must: VarSet::new() }
            }
            Program::Par(ps) => {
                let mut info = VarInfo::default();
                for p in ps {
                    let i = p.var_info();
                    info.free.extend(i.free);
                    info.bound.extend(i.bound);
                    info.must.extend(i.must);
                }
                info
            }
        }
    }

    pub fn free_vars(&self) -> VarSet {
        self.var_info().free
    }

    pub fn bound_vars(&self) -> VarSet {
        self.var_info().bound
    }

    /// Every variable occurring anywhere, binders included.
    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut VarSet) {
        match self {
            Program::Nothing | Program::Halt => {}
            Program::Event(a) => {
                for e in &a.events {
                    match e {
                        MicroEvent::Test(f) => f.collect_all_vars(out),
                        MicroEvent::Present { bind, .. } => {
                            if let Some(x) = bind {
                                out.insert(x.clone());
                            }
                        }
                        MicroEvent::Absent(_) => {}
                        MicroEvent::Emit { value, .. } => {
                            if let Some(t) = value {
                                t.collect_vars(out);
                            }
                        }
                        MicroEvent::Assign(x, t) => {
                            out.insert(x.clone());
                            t.collect_vars(out);
                        }
                    }
                }
            }
            Program::Seq(a, b) | Program::Choice(a, b) => {
                a.collect_all_vars(out);
                b.collect_all_vars(out);
            }
            Program::Star(a, ann) => {
                a.collect_all_vars(out);
                if let Some(f) = &ann.invariant {
                    f.collect_all_vars(out);
                }
                if let Some(v) = &ann.variant {
                    out.insert(v.var.clone());
                    v.formula.collect_all_vars(out);
                }
            }
            Program::Par(ps) => ps.iter().for_each(|p| p.collect_all_vars(out)),
        }
    }
}

impl Formula {
    pub fn free_vars(&self) -> VarSet {
        match self {
            Formula::True => VarSet::new(),
            Formula::Rel(_, a, b) => {
                let mut s = a.vars();
                b.collect_vars(&mut s);
                s
            }
            Formula::Not(a) => a.free_vars(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let mut s = a.free_vars();
                s.remove(x);
                s
            }
            Formula::Modal(m, p, f) => {
                let info = p.var_info();
                let mut s = info.free;
                let inner = f.free_vars();
                if m.is_temporal() {
                    s.extend(inner);
                } else {
                    s.extend(inner.difference(&info.must).cloned());
                }
                s
            }
        }
    }

    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut VarSet) {
        match self {
            Formula::True => {}
            Formula::Rel(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Not(a) => a.collect_all_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_all_vars(out);
                b.collect_all_vars(out);
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                out.insert(x.clone());
                a.collect_all_vars(out);
            }
            Formula::Modal(_, p, f) => {
                p.collect_all_vars(out);
                f.collect_all_vars(out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Fresh names

/// Produces names `base0`, `base1`, ... that avoid a given set. Counters are
/// kept per base and never move backwards.
#[derive(Debug, Clone, Default)]
pub struct FreshNameSupply {
    counters: BTreeMap<String, u64>,
}

impl FreshNameSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, base: &str, avoid: &VarSet) -> String {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "v" } else { stem };
        let counter = self.counters.entry(stem.to_string()).or_insert(0);
        loop {
            let candidate = format!("{stem}{counter}");
            *counter += 1;
            if !avoid.contains(&candidate) {
                return candidate;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Renaming and substitution

impl Program {
    /// Renames every occurrence of `from`, binders included.
    pub fn rename_all(&self, from: &str, to: &str) -> Program {
        let rv = |x: &String| if x == from { to.to_string() } else { x.clone() };
        match self {
            Program::Nothing | Program::Halt => self.clone(),
            Program::Event(a) => Program::Event(MacroEvent::new(
                a.events
                    .iter()
                    .map(|e| match e {
                        MicroEvent::Test(f) => MicroEvent::Test(f.rename_all(from, to)),
                        MicroEvent::Present { signal, bind } => MicroEvent::Present {
                            signal: signal.clone(),
                            bind: bind.as_ref().map(rv),
                        },
                        MicroEvent::Absent(s) => MicroEvent::Absent(s.clone()),
                        MicroEvent::Emit { signal, value } => MicroEvent::Emit {
                            signal: signal.clone(),
                            value: value.as_ref().map(|t| t.rename(from, to)),
                        },
                        MicroEvent::Assign(x, t) => MicroEvent::Assign(rv(x), t.rename(from, to)),
                    })
                    .collect(),
            )),
            Program::Seq(a, b) => Program::seq(a.rename_all(from, to), b.rename_all(from, to)),
            Program::Choice(a, b) => {
                Program::choice(a.rename_all(from, to), b.rename_all(from, to))
            }
            Program::Star(a, ann) => Program::star_with(
                a.rename_all(from, to),
                StarAnnotation {
                    invariant: ann.invariant.as_ref().map(|f| f.rename_all(from, to)),
                    variant: ann.variant.as_ref().map(|v| Variant {
                        var: rv(&v.var),
                        formula: v.formula.rename_all(from, to),
                    }),
                },
            ),
            Program::Par(ps) => Program::Par(ps.iter().map(|p| p.rename_all(from, to)).collect()),
        }
    }

    /// Replaces reads of `x` by `e`. Only meaningful when `x` is not bound in
    /// the program and no variable of `e` is bound in it.
    fn substitute_reads(&self, x: &str, e: &Term) -> Program {
        match self {
            Program::Nothing | Program::Halt => self.clone(),
            Program::Event(a) => Program::Event(MacroEvent::new(
                a.events
                    .iter()
                    .map(|ev| match ev {
                        MicroEvent::Test(f) => MicroEvent::Test(f.substitute(e, x)),
                        MicroEvent::Emit { signal, value } => MicroEvent::Emit {
                            signal: signal.clone(),
                            value: value.as_ref().map(|t| t.substitute(x, e)),
                        },
                        MicroEvent::Assign(y, t) => MicroEvent::Assign(y.clone(), t.substitute(x, e)),
                        other => other.clone(),
                    })
                    .collect(),
            )),
            Program::Seq(a, b) => {
                Program::seq(a.substitute_reads(x, e), b.substitute_reads(x, e))
            }
            Program::Choice(a, b) => {
                Program::choice(a.substitute_reads(x, e), b.substitute_reads(x, e))
            }
            Program::Star(a, ann) => Program::star_with(
                a.substitute_reads(x, e),
                StarAnnotation {
                    invariant: ann.invariant.as_ref().map(|f| f.substitute(e, x)),
                    variant: ann.variant.clone(),
                },
            ),
            Program::Par(ps) => Program::Par(ps.iter().map(|p| p.substitute_reads(x, e)).collect()),
        }
    }
}

impl Formula {
    /// Renames every occurrence of `from`, binders included. `to` must be fresh.
    pub fn rename_all(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::Rel(r, a, b) => Formula::Rel(*r, a.rename(from, to), b.rename(from, to)),
            Formula::Not(a) => Formula::not(a.rename_all(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_all(from, to), b.rename_all(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_all(from, to), b.rename_all(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_all(from, to), b.rename_all(from, to))
            }
            Formula::Forall(x, a) => {
                let x = if x == from { to } else { x.as_str() };
                Formula::forall(x, a.rename_all(from, to))
            }
            Formula::Exists(x, a) => {
                let x = if x == from { to } else { x.as_str() };
                Formula::exists(x, a.rename_all(from, to))
            }
            Formula::Modal(m, p, f) => {
                Formula::modal(*m, p.rename_all(from, to), f.rename_all(from, to))
            }
        }
    }

    /// Capture-avoiding substitution `φ[e/x]`.
    ///
    /// Under a modality `[p]ψ` the term is pushed into `p` when `p` neither
    /// writes `x` nor any variable of `e`; otherwise the result is
    /// `∀y.(y = e → ([p]ψ){x↦y})` for a fresh `y`.
    pub fn substitute(&self, e: &Term, x: &str) -> Formula {
        if !self.free_vars().contains(x) {
            return self.clone();
        }
        let mut supply = FreshNameSupply::new();
        let mut avoid = self.all_vars();
        avoid.extend(e.vars());
        avoid.insert(x.to_string());
        self.subst_with(e, x, &mut supply, &avoid)
    }

    fn subst_with(&self, e: &Term, x: &str, supply: &mut FreshNameSupply, avoid: &VarSet) -> Formula {
        if !self.free_vars().contains(x) {
            return self.clone();
        }
        match self {
            Formula::True => Formula::True,
            Formula::Rel(r, a, b) => Formula::Rel(*r, a.substitute(x, e), b.substitute(x, e)),
            Formula::Not(a) => Formula::not(a.subst_with(e, x, supply, avoid)),
            Formula::And(a, b) => Formula::and(
                a.subst_with(e, x, supply, avoid),
                b.subst_with(e, x, supply, avoid),
            ),
            Formula::Or(a, b) => Formula::or(
                a.subst_with(e, x, supply, avoid),
                b.subst_with(e, x, supply, avoid),
            ),
            Formula::Implies(a, b) => Formula::implies(
                a.subst_with(e, x, supply, avoid),
                b.subst_with(e, x, supply, avoid),
            ),
            Formula::Forall(y, a) | Formula::Exists(y, a) => {
                let is_forall = matches!(self, Formula::Forall(..));
                let (y, body) = if e.vars().contains(y) {
                    let z = supply.fresh(y, avoid);
                    (z.clone(), a.rename_all(y, &z))
                } else {
                    (y.clone(), (**a).clone())
                };
                let body = body.subst_with(e, x, supply, avoid);
                if is_forall {
                    Formula::forall(&y, body)
                } else {
                    Formula::exists(&y, body)
                }
            }
            Formula::Modal(m, p, f) => {
                let bound = p.bound_vars();
                if !bound.contains(x) && e.vars().is_disjoint(&bound) {
                    Formula::modal(*m, p.substitute_reads(x, e), f.subst_with(e, x, supply, avoid))
                } else {
                    let y = supply.fresh(x, avoid);
                    Formula::forall(
                        &y,
                        Formula::implies(
                            Formula::eq(Term::Var(y.clone()), e.clone()),
                            self.rename_all(x, &y),
                        ),
                    )
                }
            }
        }
    }

    /// Structural equality up to renaming of quantifier-bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn norm(f: &Formula, depth: &mut usize) -> Formula {
            match f {
                Formula::True | Formula::Rel(..) | Formula::Modal(..) => f.clone(),
                Formula::Not(a) => Formula::not(norm(a, depth)),
                Formula::And(a, b) => Formula::and(norm(a, depth), norm(b, depth)),
                Formula::Or(a, b) => Formula::or(norm(a, depth), norm(b, depth)),
                Formula::Implies(a, b) => Formula::implies(norm(a, depth), norm(b, depth)),
                Formula::Forall(x, a) | Formula::Exists(x, a) => {
                    let name = format!("#{depth}");
                    *depth += 1;
                    let body = norm(&a.rename_all(x, &name), depth);
                    if matches!(f, Formula::Forall(..)) {
                        Formula::forall(&name, body)
                    } else {
                        Formula::exists(&name, body)
                    }
                }
            }
        }
        norm(self, &mut 0) == norm(other, &mut 0)
    }
}

// ---------------------------------------------------------------------------
// Parallel restriction

/// A variable written by one parallel component and mentioned by another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionViolation {
    pub var: String,
    pub writer: usize,
    pub other: usize,
}

/// Violations at the outermost parallel compositions of `p` and below.
pub fn restriction_violations(p: &Program) -> Vec<RestrictionViolation> {
    let mut out = Vec::new();
    collect_violations(p, &mut out);
    out
}

fn collect_violations(p: &Program, out: &mut Vec<RestrictionViolation>) {
    match p {
        Program::Nothing | Program::Halt | Program::Event(_) => {}
        Program::Seq(a, b) | Program::Choice(a, b) => {
            collect_violations(a, out);
            collect_violations(b, out);
        }
        Program::Star(a, _) => collect_violations(a, out),
        Program::Par(ps) => {
            ps.iter().for_each(|q| collect_violations(q, out));
            let bound: Vec<VarSet> = ps.iter().map(Program::bound_vars).collect();
            let all: Vec<VarSet> = ps.iter().map(Program::all_vars).collect();
            for (i, bi) in bound.iter().enumerate() {
                for (j, aj) in all.iter().enumerate() {
                    if i != j {
                        for v in bi.intersection(aj) {
                            out.push(RestrictionViolation { var: v.clone(), writer: i, other: j });
                        }
                    }
                }
            }
        }
    }
}

/// Renames variables so that no parallel component writes a variable that
/// another component mentions. Components are processed left to right and
/// innermost compositions first; a conflicting variable is renamed in the
/// writing component, provided that component never reads it before writing.
pub fn enforce_parallel_restriction(p: &Program) -> Program {
    let mut avoid = p.all_vars();
    let mut supply = FreshNameSupply::new();
    enforce(p, &mut supply, &mut avoid)
}

fn enforce(p: &Program, supply: &mut FreshNameSupply, avoid: &mut VarSet) -> Program {
    match p {
        Program::Nothing | Program::Halt | Program::Event(_) => p.clone(),
        Program::Seq(a, b) => Program::seq(enforce(a, supply, avoid), enforce(b, supply, avoid)),
        Program::Choice(a, b) => {
            Program::choice(enforce(a, supply, avoid), enforce(b, supply, avoid))
        }
        Program::Star(a, ann) => Program::star_with(enforce(a, supply, avoid), ann.clone()),
        Program::Par(ps) => {
            let mut comps: Vec<Program> = ps.iter().map(|q| enforce(q, supply, avoid)).collect();
            for i in 0..comps.len() {
                let info = comps[i].var_info();
                for v in info.bound.iter() {
                    if info.free.contains(v) {
                        continue;
                    }
                    let clash = comps
                        .iter()
                        .enumerate()
                        .any(|(j, q)| j != i && q.all_vars().contains(v));
                    if clash {
                        let fresh = supply.fresh(v, avoid);
                        avoid.insert(fresh.clone());
                        comps[i] = comps[i].rename_all(v, &fresh);
                    }
                }
            }
            Program::Par(comps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    fn assign(x: &str, t: Term) -> MicroEvent {
        MicroEvent::Assign(x.into(), t)
    }

    #[test]
    fn fresh_names() {
        let mut s = FreshNameSupply::new();
        let avoid: VarSet = ["x".to_string(), "y".to_string()].into();
        assert_eq!(s.fresh("x", &avoid), "x0");
        let mut s = FreshNameSupply::new();
        let avoid: VarSet = ["x0".to_string()].into();
        assert_eq!(s.fresh("x", &avoid), "x1");
        let mut s = FreshNameSupply::new();
        assert_eq!(s.fresh("z", &VarSet::new()), "z0");
        assert_eq!(s.fresh("z", &VarSet::new()), "z1");
    }

    #[test]
    fn free_vars_of_modal_formula() {
        // [z := x - 1] x > z has only x free
        let p = Program::event(vec![assign("z", Term::sub(v("x"), Term::int(1)))]);
        let f = Formula::boxed(p, Formula::rel(Rel::Gt, v("x"), v("z")));
        assert_eq!(f.free_vars(), ["x".to_string()].into());
        assert!(!f.free_vars().contains("z"));
    }

    #[test]
    fn program_var_info() {
        let p = Program::event(vec![assign("x", Term::add(v("y"), Term::int(1)))]);
        assert_eq!(p.free_vars(), ["y".to_string()].into());
        assert_eq!(p.bound_vars(), ["x".to_string()].into());
    }

    #[test]
    fn substitution_under_quantifier_renames_binder() {
        // (forall x. x > y)[x/y] = forall x0. x0 > x
        let f = Formula::forall("x", Formula::rel(Rel::Gt, v("x"), v("y")));
        let g = f.substitute(&v("x"), "y");
        assert_eq!(g, Formula::forall("x0", Formula::rel(Rel::Gt, v("x0"), v("x"))));
    }

    #[test]
    fn substitution_of_non_free_variable_is_identity() {
        let p = Program::event(vec![assign("z", Term::sub(v("x"), Term::int(1)))]);
        let f = Formula::boxed(p, Formula::rel(Rel::Gt, v("x"), v("z")));
        assert_eq!(f.substitute(&v("x"), "z"), f);
    }

    #[test]
    fn substitution_into_program_reads() {
        // ([z := x - 1] x > z)[y/x] = [z := y - 1] y > z
        let mk = |x: &str| {
            Formula::boxed(
                Program::event(vec![assign("z", Term::sub(v(x), Term::int(1)))]),
                Formula::rel(Rel::Gt, v(x), v("z")),
            )
        };
        assert_eq!(mk("x").substitute(&v("y"), "x"), mk("y"));
    }

    #[test]
    fn substitution_capture_falls_back_to_quantifier() {
        // ([z := x - 1] x > z)[z/x]: z is written by the program
        let f = Formula::boxed(
            Program::event(vec![assign("z", Term::sub(v("x"), Term::int(1)))]),
            Formula::rel(Rel::Gt, v("x"), v("z")),
        );
        let g = f.substitute(&v("z"), "x");
        let expected = Formula::forall(
            "x0",
            Formula::implies(Formula::eq(v("x0"), v("z")), f.rename_all("x", "x0")),
        );
        assert_eq!(g, expected);
        assert_eq!(g.free_vars(), ["z".to_string()].into());
    }

    #[test]
    fn alpha_equivalence() {
        let a = Formula::forall("x", Formula::rel(Rel::Gt, v("x"), v("y")));
        let b = Formula::forall("w", Formula::rel(Rel::Gt, v("w"), v("y")));
        let c = Formula::forall("w", Formula::rel(Rel::Gt, v("w"), v("z")));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
    }

    #[test]
    fn parallel_restriction_renames_writer() {
        // (x := 1 ; v := x + 2) || (eps ; y := x + 1)
        let p = Program::seq(
            Program::event(vec![assign("x", Term::int(1))]),
            Program::event(vec![assign("v", Term::add(v("x"), Term::int(2)))]),
        );
        let q = Program::seq(
            Program::epsilon(),
            Program::event(vec![assign("y", Term::add(v("x"), Term::int(1)))]),
        );
        let par = Program::Par(vec![p.clone(), q.clone()]);
        assert!(!restriction_violations(&par).is_empty());
        let fixed = enforce_parallel_restriction(&par);
        assert_eq!(fixed, Program::Par(vec![p.rename_all("x", "x0"), q]));
        assert!(restriction_violations(&fixed).is_empty());
    }

    #[test]
    fn parallel_restriction_write_write() {
        let par = Program::Par(vec![
            Program::event(vec![assign("x", Term::int(1))]),
            Program::event(vec![assign("x", Term::int(2))]),
        ]);
        let fixed = enforce_parallel_restriction(&par);
        assert_eq!(
            fixed,
            Program::Par(vec![
                Program::event(vec![assign("x0", Term::int(1))]),
                Program::event(vec![assign("x", Term::int(2))]),
            ])
        );
    }

    #[test]
    fn parallel_restriction_is_identity_when_satisfied() {
        let par = Program::Par(vec![
            Program::event(vec![assign("x", Term::int(1))]),
            Program::event(vec![assign("y", Term::int(2))]),
        ]);
        assert_eq!(enforce_parallel_restriction(&par), par);
    }

    #[test]
    fn nullable_examples() {
        let a = Program::epsilon();
        assert!(Program::star(a.clone()).nullable().unwrap());
        assert!(!Program::seq(a.clone(), Program::Nothing).nullable().unwrap());
        assert!(!Program::Halt.nullable().unwrap());
        assert!(Program::Par(vec![a]).nullable().is_err());
    }

    #[test]
    fn closedness() {
        let emit = Program::event(vec![MicroEvent::Emit { signal: "s".into(), value: None }]);
        assert!(!emit.is_closed());
        assert!(Program::Par(vec![emit.clone()]).is_closed());
        assert!(!Program::seq(Program::epsilon(), emit).is_closed());
    }
}
