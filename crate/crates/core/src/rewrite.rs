//! Rewrite rules for sequential and parallel programs, the guarded normal
//! form of a parallel program, and its linearization into a sequential
//! program by solving the resulting system of equations.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::merge::{self, Comb, MergeFailure, MergedEvent};
use crate::syntax::{Formula, MacroEvent, Program, StarAnnotation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RewriteRule {
    NothingSeq,
    NothingStar,
    HaltSeq,
    HaltStar,
    SeqAssoc,
    SeqDis1,
    SeqDis2,
    ChoiceAssoc,
    StarExp,
    ParNothing,
    ParHalt,
    ParDis,
    ParMerge,
    ParSeq,
}

impl RewriteRule {
    pub const SEQUENTIAL: [RewriteRule; 9] = [
        RewriteRule::NothingSeq,
        RewriteRule::NothingStar,
        RewriteRule::HaltSeq,
        RewriteRule::HaltStar,
        RewriteRule::SeqAssoc,
        RewriteRule::SeqDis1,
        RewriteRule::SeqDis2,
        RewriteRule::ChoiceAssoc,
        RewriteRule::StarExp,
    ];

    pub const PARALLEL: [RewriteRule; 4] = [
        RewriteRule::ParNothing,
        RewriteRule::ParHalt,
        RewriteRule::ParDis,
        RewriteRule::ParMerge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewriteRule::NothingSeq => "(nothing,;)",
            RewriteRule::NothingStar => "(nothing,*)",
            RewriteRule::HaltSeq => "(halt,;)",
            RewriteRule::HaltStar => "(halt,*)",
            RewriteRule::SeqAssoc => "(;,ass)",
            RewriteRule::SeqDis1 => "(;,dis1)",
            RewriteRule::SeqDis2 => "(;,dis2)",
            RewriteRule::ChoiceAssoc => "(+,ass)",
            RewriteRule::StarExp => "(*,exp)",
            RewriteRule::ParNothing => "(par,nothing)",
            RewriteRule::ParHalt => "(par,halt)",
            RewriteRule::ParDis => "(par,dis)",
            RewriteRule::ParMerge => "(par,mer)",
            RewriteRule::ParSeq => "(par,seq)",
        }
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("cannot resolve the instant of '{config}': {failure}")]
    NonConstructive { config: String, failure: MergeFailure },
    #[error("the loop coefficient '{0}' admits an empty step")]
    NullableCoefficient(String),
    #[error("'{0}' is not a parallel composition")]
    NotParallel(String),
    #[error("hole does not address a subprogram")]
    BadHole,
}

/// Applies `rule` at the root of `p` when its left-hand side matches.
/// `(par,seq)` is not a one-step rule; see [`to_seq`].
pub fn apply_named(rule: RewriteRule, p: &Program, comb: Comb) -> Result<Option<Program>, RewriteError> {
    use Program::*;
    let c = |q: &Program| q.clone();
    Ok(match (rule, p) {
        (RewriteRule::NothingSeq, Seq(a, q)) if **a == Nothing => Some(c(q)),
        (RewriteRule::NothingStar, Star(a, _)) if **a == Nothing => Some(Nothing),
        (RewriteRule::HaltSeq, Seq(a, _)) if **a == Halt => Some(Halt),
        (RewriteRule::HaltStar, Star(a, _)) if **a == Halt => Some(Nothing),
        (RewriteRule::SeqAssoc, Seq(a, r)) => match &**a {
            Seq(p1, q1) => Some(Program::seq(c(p1), Program::seq(c(q1), c(r)))),
            _ => None,
        },
        (RewriteRule::SeqDis1, Seq(a, b)) => match &**b {
            Choice(q, r) => Some(Program::choice(Program::seq(c(a), c(q)), Program::seq(c(a), c(r)))),
            _ => None,
        },
        (RewriteRule::SeqDis2, Seq(a, b)) => match &**a {
            Choice(q, r) => Some(Program::choice(Program::seq(c(q), c(b)), Program::seq(c(r), c(b)))),
            _ => None,
        },
        (RewriteRule::ChoiceAssoc, Choice(a, r)) => match &**a {
            Choice(p1, q1) => Some(Program::choice(c(p1), Program::choice(c(q1), c(r)))),
            _ => None,
        },
        (RewriteRule::StarExp, Star(a, ann)) => {
            Some(Program::choice(Nothing, Program::seq(c(a), Program::Star(a.clone(), ann.clone()))))
        }
        (RewriteRule::ParNothing | RewriteRule::ParHalt | RewriteRule::ParDis | RewriteRule::ParMerge, Par(_)) => {
            par_named(rule, p, comb)?
        }
        _ => None,
    })
}

/// Applies the first matching rule for sequential programs at the root.
pub fn apply_seq_rule(p: &Program) -> Option<(RewriteRule, Program)> {
    RewriteRule::SEQUENTIAL.iter().find_map(|&r| {
        apply_named(r, p, Comb::Add).expect("sequential rules do not fail").map(|q| (r, q))
    })
}

fn is_head_form(p: &Program) -> bool {
    merge::split_head(p).is_some()
}

fn par_named(rule: RewriteRule, p: &Program, comb: Comb) -> Result<Option<Program>, RewriteError> {
    let Program::Par(ps) = p else { return Ok(None) };
    Ok(match rule {
        RewriteRule::ParNothing => ps.iter().position(|q| *q == Program::Nothing).map(|i| {
            let mut rest = ps.clone();
            rest.remove(i);
            if rest.is_empty() {
                Program::Nothing
            } else {
                Program::Par(rest)
            }
        }),
        RewriteRule::ParHalt => ps.iter().any(|q| *q == Program::Halt).then_some(Program::Halt),
        RewriteRule::ParDis => ps.iter().position(|q| matches!(q, Program::Choice(..))).map(|i| {
            let Program::Choice(a, b) = &ps[i] else { unreachable!() };
            let mut left = ps.clone();
            let mut right = ps.clone();
            left[i] = (**a).clone();
            right[i] = (**b).clone();
            Program::choice(Program::Par(left), Program::Par(right))
        }),
        RewriteRule::ParMerge => {
            if ps.is_empty() || !ps.iter().all(is_head_form) {
                return Ok(None);
            }
            let pattern: Vec<(MacroEvent, Program)> =
                ps.iter().map(|q| merge::split_head(q).expect("head form")).collect();
            let out = merge::merge(&pattern, comb);
            if let Some(failure) = out.failure {
                return Err(RewriteError::NonConstructive { config: p.to_string(), failure });
            }
            let head = match out.event {
                MergedEvent::Halt => Program::Halt,
                MergedEvent::Event(a) => Program::Event(a),
            };
            Some(Program::seq(head, Program::Par(out.residuals)))
        }
        _ => None,
    })
}

/// Applies the first matching rule for parallel programs at the root.
/// `Ok(None)` means no rule applies there.
pub fn apply_par_rule(p: &Program, comb: Comb) -> Result<Option<(RewriteRule, Program)>, RewriteError> {
    for r in RewriteRule::PARALLEL {
        if let Some(q) = par_named(r, p, comb)? {
            return Ok(Some((r, q)));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Holes

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HoleStep {
    SeqLeft,
    SeqRight,
    ChoiceLeft,
    ChoiceRight,
    StarBody,
    ParArg(usize),
}

/// A position inside a program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ProgramHole {
    pub path: Vec<HoleStep>,
}

impl ProgramHole {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn push(mut self, s: HoleStep) -> Self {
        self.path.push(s);
        self
    }

    pub fn get<'a>(&self, p: &'a Program) -> Option<&'a Program> {
        let mut cur = p;
        for s in &self.path {
            cur = match (s, cur) {
                (HoleStep::SeqLeft, Program::Seq(a, _)) => a,
                (HoleStep::SeqRight, Program::Seq(_, b)) => b,
                (HoleStep::ChoiceLeft, Program::Choice(a, _)) => a,
                (HoleStep::ChoiceRight, Program::Choice(_, b)) => b,
                (HoleStep::StarBody, Program::Star(a, _)) => a,
                (HoleStep::ParArg(i), Program::Par(ps)) => ps.get(*i)?,
                _ => return None,
            };
        }
        Some(cur)
    }

    pub fn fill(&self, p: &Program, q: Program) -> Option<Program> {
        fn go(path: &[HoleStep], p: &Program, q: Program) -> Option<Program> {
            let Some((s, rest)) = path.split_first() else { return Some(q) };
            Some(match (s, p) {
                (HoleStep::SeqLeft, Program::Seq(a, b)) => Program::seq(go(rest, a, q)?, (**b).clone()),
                (HoleStep::SeqRight, Program::Seq(a, b)) => Program::seq((**a).clone(), go(rest, b, q)?),
                (HoleStep::ChoiceLeft, Program::Choice(a, b)) => {
                    Program::choice(go(rest, a, q)?, (**b).clone())
                }
                (HoleStep::ChoiceRight, Program::Choice(a, b)) => {
                    Program::choice((**a).clone(), go(rest, b, q)?)
                }
                (HoleStep::StarBody, Program::Star(a, ann)) => Program::star_with(go(rest, a, q)?, ann.clone()),
                (HoleStep::ParArg(i), Program::Par(ps)) => {
                    let mut ps = ps.clone();
                    let slot = ps.get_mut(*i)?;
                    *slot = go(rest, slot, q)?;
                    Program::Par(ps)
                }
                _ => return None,
            })
        }
        go(&self.path, p, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaStep {
    NotArg,
    Left,
    Right,
    QuantBody,
    ModalBody,
}

/// A position of a program inside a formula: a path to a modality followed
/// by a position inside its program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FormulaHole {
    pub path: Vec<FormulaStep>,
    pub program: ProgramHole,
}

impl FormulaHole {
    pub fn get<'a>(&self, f: &'a Formula) -> Option<&'a Program> {
        let mut cur = f;
        for s in &self.path {
            cur = match (s, cur) {
                (FormulaStep::NotArg, Formula::Not(a)) => a,
                (FormulaStep::Left, Formula::And(a, _) | Formula::Or(a, _) | Formula::Implies(a, _)) => a,
                (FormulaStep::Right, Formula::And(_, b) | Formula::Or(_, b) | Formula::Implies(_, b)) => b,
                (FormulaStep::QuantBody, Formula::Forall(_, a) | Formula::Exists(_, a)) => a,
                (FormulaStep::ModalBody, Formula::Modal(_, _, a)) => a,
                _ => return None,
            };
        }
        match cur {
            Formula::Modal(_, p, _) => self.program.get(p),
            _ => None,
        }
    }

    pub fn fill(&self, f: &Formula, q: Program) -> Option<Formula> {
        fn go(path: &[FormulaStep], hole: &ProgramHole, f: &Formula, q: Program) -> Option<Formula> {
            let Some((s, rest)) = path.split_first() else {
                let Formula::Modal(m, p, a) = f else { return None };
                return Some(Formula::modal(*m, hole.fill(p, q)?, (**a).clone()));
            };
            Some(match (s, f) {
                (FormulaStep::NotArg, Formula::Not(a)) => Formula::not(go(rest, hole, a, q)?),
                (FormulaStep::Left, Formula::And(a, b)) => Formula::and(go(rest, hole, a, q)?, (**b).clone()),
                (FormulaStep::Left, Formula::Or(a, b)) => Formula::or(go(rest, hole, a, q)?, (**b).clone()),
                (FormulaStep::Left, Formula::Implies(a, b)) => {
                    Formula::implies(go(rest, hole, a, q)?, (**b).clone())
                }
                (FormulaStep::Right, Formula::And(a, b)) => Formula::and((**a).clone(), go(rest, hole, b, q)?),
                (FormulaStep::Right, Formula::Or(a, b)) => Formula::or((**a).clone(), go(rest, hole, b, q)?),
                (FormulaStep::Right, Formula::Implies(a, b)) => {
                    Formula::implies((**a).clone(), go(rest, hole, b, q)?)
                }
                (FormulaStep::QuantBody, Formula::Forall(x, a)) => Formula::forall(x, go(rest, hole, a, q)?),
                (FormulaStep::QuantBody, Formula::Exists(x, a)) => Formula::exists(x, go(rest, hole, a, q)?),
                (FormulaStep::ModalBody, Formula::Modal(m, p, a)) => {
                    Formula::modal(*m, (**p).clone(), go(rest, hole, a, q)?)
                }
                _ => return None,
            })
        }
        go(&self.path, &self.program, f, q)
    }
}

/// One rewrite of a sequential or parallel rule at a hole of a program.
pub fn rewrite_in_hole(
    p: &Program,
    hole: &ProgramHole,
    comb: Comb,
) -> Result<Option<(RewriteRule, Program)>, RewriteError> {
    let sub = hole.get(p).ok_or(RewriteError::BadHole)?;
    let step = match apply_seq_rule(sub) {
        Some(s) => Some(s),
        None => apply_par_rule(sub, comb)?,
    };
    Ok(match step {
        Some((rule, q)) => Some((rule, hole.fill(p, q).ok_or(RewriteError::BadHole)?)),
        None => None,
    })
}

// ---------------------------------------------------------------------------
// Canonical forms

fn flatten_seq(p: &Program, out: &mut Vec<Program>) {
    match p {
        Program::Seq(a, b) => {
            flatten_seq(a, out);
            flatten_seq(b, out);
        }
        _ => out.push(p.clone()),
    }
}

fn flatten_choice(p: &Program, out: &mut Vec<Program>) {
    match p {
        Program::Choice(a, b) => {
            flatten_choice(a, out);
            flatten_choice(b, out);
        }
        _ => out.push(p.clone()),
    }
}

/// Sequence that drops `nothing` and absorbs into `halt`.
pub fn seq_simp(a: Program, b: Program) -> Program {
    match (&a, &b) {
        (Program::Halt, _) | (_, Program::Halt) => Program::Halt,
        (Program::Nothing, _) => b,
        (_, Program::Nothing) => a,
        _ => Program::seq(a, b),
    }
}

/// Semantics-preserving normal form used to identify configurations:
/// sequences and choices are flattened and right-nested, `nothing` units
/// and `halt` branches are dropped, choice branches are deduplicated and
/// sorted by their printed form, and a parallel composition drops finished
/// components and unwraps a single closed one.
pub fn canonical(p: &Program) -> Program {
    match p {
        Program::Nothing | Program::Halt | Program::Event(_) => p.clone(),
        Program::Seq(..) => {
            let mut parts = Vec::new();
            flatten_seq(p, &mut parts);
            let mut out = Vec::new();
            for q in parts {
                let q = canonical(&q);
                match q {
                    Program::Halt => return Program::Halt,
                    Program::Nothing => {}
                    Program::Seq(..) => flatten_seq(&q, &mut out),
                    _ => out.push(q),
                }
            }
            Program::seq_all(out)
        }
        Program::Choice(..) => {
            let mut parts = Vec::new();
            flatten_choice(p, &mut parts);
            let mut keyed: Vec<(String, Program)> = Vec::new();
            let mut seen = BTreeSet::new();
            for q in parts {
                let q = canonical(&q);
                let mut sub = Vec::new();
                flatten_choice(&q, &mut sub);
                for r in sub {
                    if r == Program::Halt {
                        continue;
                    }
                    let key = r.to_string();
                    if seen.insert(key.clone()) {
                        keyed.push((key, r));
                    }
                }
            }
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            Program::choice_all(keyed.into_iter().map(|(_, r)| r))
        }
        Program::Star(a, ann) => match canonical(a) {
            Program::Nothing | Program::Halt => Program::Nothing,
            body => Program::star_with(body, ann.clone()),
        },
        Program::Par(ps) => {
            let mut comps = Vec::new();
            for q in ps {
                match canonical(q) {
                    Program::Halt => return Program::Halt,
                    Program::Nothing => {}
                    c => comps.push(c),
                }
            }
            match comps.len() {
                0 => Program::Nothing,
                1 if comps[0].is_closed() => comps.pop().expect("one component"),
                _ => Program::Par(comps),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Guarded normal form

/// A rule applied while computing a guarded normal form: `summand` was
/// rewritten at `hole` into `result`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: RewriteRule,
    pub hole: ProgramHole,
    pub summand: Program,
    pub result: Program,
}

/// `b ∪ α₁;l₁ ∪ ... ∪ αₙ;lₙ`, where `b` is `nothing` or `halt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedForm {
    pub base: Program,
    pub arms: Vec<(MacroEvent, Program)>,
    pub steps: Vec<RewriteStep>,
}

impl GuardedForm {
    pub fn to_program(&self) -> Program {
        let mut parts = vec![self.base.clone()];
        parts.extend(self.arms.iter().map(|(a, l)| seq_simp(Program::Event(a.clone()), l.clone())));
        Program::choice_all(parts)
    }
}

fn head_step(p: &Program, comb: Comb) -> Result<Option<(RewriteRule, ProgramHole, Program)>, RewriteError> {
    match p {
        Program::Seq(a, _) => {
            if let Some((r, q)) = apply_seq_rule(p) {
                return Ok(Some((r, ProgramHole::root(), q)));
            }
            Ok(head_step(a, comb)?.map(|(r, h, q)| {
                let mut path = vec![HoleStep::SeqLeft];
                path.extend(h.path);
                (r, ProgramHole { path }, q)
            }))
        }
        Program::Star(..) => Ok(apply_seq_rule(p).map(|(r, q)| (r, ProgramHole::root(), q))),
        Program::Par(ps) => {
            if let Some((r, q)) = apply_par_rule(p, comb)? {
                return Ok(Some((r, ProgramHole::root(), q)));
            }
            for (i, c) in ps.iter().enumerate() {
                if is_head_form(c) {
                    continue;
                }
                if let Some((r, h, q)) = head_step(c, comb)? {
                    let mut path = vec![HoleStep::ParArg(i)];
                    path.extend(h.path);
                    return Ok(Some((r, ProgramHole { path }, q)));
                }
            }
            Ok(None)
        }
        _ => Ok(None),
    }
}

/// Rewrites `p` by the structural, sequential and parallel rules until every
/// summand is `nothing`, `halt` or guarded by a macro event. A summand that
/// reappears while being rewritten contributes nothing new and is dropped.
pub fn guarded_normal_form(p: &Program, comb: Comb) -> Result<GuardedForm, RewriteError> {
    let mut queue: VecDeque<Program> = VecDeque::from([p.clone()]);
    let mut seen: BTreeSet<Program> = BTreeSet::new();
    let mut base = Program::Halt;
    let mut arms: Vec<(MacroEvent, Program)> = Vec::new();
    let mut steps = Vec::new();
    while let Some(s) = queue.pop_front() {
        if !seen.insert(s.clone()) {
            continue;
        }
        match &s {
            Program::Nothing => base = Program::Nothing,
            Program::Halt => {}
            Program::Choice(a, b) => {
                queue.push_front((**b).clone());
                queue.push_front((**a).clone());
            }
            _ => {
                if let Some((a, q)) = merge::split_head(&s) {
                    if !arms.contains(&(a.clone(), q.clone())) {
                        arms.push((a, q));
                    }
                    continue;
                }
                let Some((rule, hole, q)) = head_step(&s, comb)? else {
                    unreachable!("no rule applies to {s}")
                };
                let result = hole.fill(&s, q).ok_or(RewriteError::BadHole)?;
                steps.push(RewriteStep { rule, hole, summand: s.clone(), result: result.clone() });
                queue.push_front(result);
            }
        }
    }
    Ok(GuardedForm { base, arms, steps })
}

// ---------------------------------------------------------------------------
// Equations

/// Arden's rule: `X ≡ p ∪ q;X` has the solution `q*;p` when `q` is not nullable.
pub fn arden_solve(base: &Program, coeff: &Program) -> Result<Program, RewriteError> {
    match coeff.nullable() {
        Ok(false) => Ok(Program::seq(Program::star(coeff.clone()), base.clone())),
        _ => Err(RewriteError::NullableCoefficient(coeff.to_string())),
    }
}

/// `l ≡ base ∪ ⋃ cᵢ;l_{tᵢ}` with sequential `base` and coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub base: Program,
    pub terms: Vec<(Program, usize)>,
}

impl Equation {
    fn add_term(&mut self, coeff: Program, target: usize) {
        if coeff == Program::Halt {
            return;
        }
        match self.terms.iter_mut().find(|(_, t)| *t == target) {
            Some((c, _)) => *c = canonical(&Program::choice(c.clone(), coeff)),
            None => self.terms.push((coeff, target)),
        }
    }
}

/// The result of linearizing a parallel program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linearization {
    pub program: Program,
    /// Configurations `l₁, ..., lₙ` in discovery order.
    pub configs: Vec<Program>,
    /// The equations before elimination.
    pub equations: Vec<Equation>,
}

/// `ToSeq`: builds one equation per reachable configuration from its guarded
/// normal form, then eliminates configurations from last to first.
pub fn to_seq(p: &Program, comb: Comb) -> Result<Linearization, RewriteError> {
    if !matches!(p, Program::Par(_)) {
        return Err(RewriteError::NotParallel(p.to_string()));
    }
    let start = canonical(p);
    let mut configs: Vec<Program> = Vec::new();
    let mut index: HashMap<Program, usize> = HashMap::new();
    let mut equations: Vec<Equation> = Vec::new();
    if !start.contains_par() {
        return Ok(Linearization { program: start, configs, equations });
    }
    configs.push(start.clone());
    index.insert(start, 0);
    let mut k = 0;
    while k < configs.len() {
        let gnf = guarded_normal_form(&configs[k], comb)?;
        let mut eq = Equation { base: gnf.base.clone(), terms: Vec::new() };
        for (a, l) in gnf.arms {
            let l = canonical(&l);
            let guard = Program::Event(a);
            if l.contains_par() {
                let target = match index.get(&l) {
                    Some(&t) => t,
                    None => {
                        configs.push(l.clone());
                        index.insert(l, configs.len() - 1);
                        configs.len() - 1
                    }
                };
                eq.add_term(guard, target);
            } else {
                eq.base = canonical(&Program::choice(eq.base, seq_simp(guard, l)));
            }
        }
        equations.push(eq);
        k += 1;
    }
    let original = equations.clone();
    for k in (0..equations.len()).rev() {
        let eq = equations[k].clone();
        let mut own = Program::Halt;
        let mut others = Vec::new();
        for (c, t) in eq.terms {
            if t == k {
                own = canonical(&Program::choice(own, c));
            } else {
                others.push((c, t));
            }
        }
        let (prefix, solved_base) = if own == Program::Halt {
            (Program::Nothing, eq.base.clone())
        } else {
            let sol = arden_solve(&eq.base, &own)?;
            let Program::Seq(star, _) = &sol else { unreachable!() };
            ((**star).clone(), canonical(&sol))
        };
        let solved = Equation {
            base: solved_base,
            terms: others
                .into_iter()
                .map(|(c, t)| (canonical(&seq_simp(prefix.clone(), c)), t))
                .collect(),
        };
        for j in 0..k {
            let terms = std::mem::take(&mut equations[j].terms);
            for (c, t) in terms {
                if t == k {
                    let base = canonical(&Program::choice(
                        equations[j].base.clone(),
                        seq_simp(c.clone(), solved.base.clone()),
                    ));
                    equations[j].base = base;
                    for (c2, t2) in &solved.terms {
                        let coeff = canonical(&seq_simp(c.clone(), c2.clone()));
                        equations[j].add_term(coeff, *t2);
                    }
                } else {
                    equations[j].add_term(c, t);
                }
            }
        }
        equations[k] = solved;
    }
    let program = equations[0].base.clone();
    Ok(Linearization { program, configs, equations: original })
}

/// Removes star annotations; linearized programs carry none.
pub fn strip_annotations(p: &Program) -> Program {
    match p {
        Program::Nothing | Program::Halt | Program::Event(_) => p.clone(),
        Program::Seq(a, b) => Program::seq(strip_annotations(a), strip_annotations(b)),
        Program::Choice(a, b) => Program::choice(strip_annotations(a), strip_annotations(b)),
        Program::Star(a, _) => Program::star_with(strip_annotations(a), StarAnnotation::default()),
        Program::Par(ps) => Program::Par(ps.iter().map(strip_annotations).collect()),
    }
}
