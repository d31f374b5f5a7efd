//! Sequent calculus for SDL. Goals are reduced backwards to arithmetic
//! first-order obligations; parallel programs are linearized first.

use std::fmt;

use thiserror::Error;

use crate::merge::Comb;
use crate::rewrite::{self, HoleStep, ProgramHole, RewriteError};
use crate::syntax::{
    FreshNameSupply, Formula, MacroEvent, MicroEvent, Modality, Program, Rel, Term, VarSet,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub antecedent: Vec<Formula>,
    pub succedent: Vec<Formula>,
}

impl Sequent {
    pub fn goal(phi: Formula) -> Self {
        Sequent { antecedent: Vec::new(), succedent: vec![phi] }
    }

    pub fn is_afol(&self) -> bool {
        self.antecedent.iter().chain(&self.succedent).all(Formula::is_afol)
    }

    /// `∧Γ → ∨Δ`.
    pub fn to_formula(&self) -> Formula {
        let rhs = Formula::disj(self.succedent.iter().cloned());
        if self.antecedent.is_empty() {
            rhs
        } else {
            Formula::implies(Formula::conj(self.antecedent.iter().cloned()), rhs)
        }
    }

    fn vars(&self) -> VarSet {
        let mut out = VarSet::new();
        for f in self.antecedent.iter().chain(&self.succedent) {
            out.extend(f.all_vars());
        }
        out
    }

    fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        for f in self.antecedent.iter().chain(&self.succedent) {
            out.extend(f.free_vars());
        }
        out
    }

    fn side(&self, side: Side) -> &Vec<Formula> {
        match side {
            Side::Left => &self.antecedent,
            Side::Right => &self.succedent,
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut Vec<Formula> {
        match side {
            Side::Left => &mut self.antecedent,
            Side::Right => &mut self.succedent,
        }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |fs: &[Formula]| fs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let l = join(&self.antecedent);
        let r = join(&self.succedent);
        match (l.is_empty(), r.is_empty()) {
            (true, true) => write!(f, "==>"),
            (true, false) => write!(f, "==> {r}"),
            (false, true) => write!(f, "{l} ==>"),
            (false, false) => write!(f, "{l} ==> {r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Ax,
    TrueRight,
    Weaken,
    Cut,
    NotRight,
    NotLeft,
    AndRight,
    AndLeft,
    OrRight,
    OrLeft,
    ImpRight,
    ImpLeft,
    ForallRight,
    ForallLeft,
    ExistsRight,
    ExistsLeft,
    AlphaAlways,
    Test,
    Assign,
    Epsilon,
    Nothing,
    Halt,
    SeqState,
    SeqAlways,
    Choice,
    StarAlways,
    Star,
    StarInvariant,
    StarVariant,
    ParSeq,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Ax => "(ax)",
            Rule::TrueRight => "(true r)",
            Rule::Weaken => "(weak)",
            Rule::Cut => "(cut)",
            Rule::NotRight => "(not r)",
            Rule::NotLeft => "(not l)",
            Rule::AndRight => "(and r)",
            Rule::AndLeft => "(and l)",
            Rule::OrRight => "(or r)",
            Rule::OrLeft => "(or l)",
            Rule::ImpRight => "(imp r)",
            Rule::ImpLeft => "(imp l)",
            Rule::ForallRight => "(forall r)",
            Rule::ForallLeft => "(forall l)",
            Rule::ExistsRight => "(exists r)",
            Rule::ExistsLeft => "(exists l)",
            Rule::AlphaAlways => "(alpha,always)",
            Rule::Test => "(test)",
            Rule::Assign => "(x:=e)",
            Rule::Epsilon => "(eps)",
            Rule::Nothing => "(nothing)",
            Rule::Halt => "(halt)",
            Rule::SeqState => "(;,phi)",
            Rule::SeqAlways => "(;,always)",
            Rule::Choice => "(+)",
            Rule::StarAlways => "(*,always)",
            Rule::Star => "(*)",
            Rule::StarInvariant => "([*])",
            Rule::StarVariant => "(<*>)",
            Rule::ParSeq => "(par,seq)",
        }
    }

    /// Rules that rewrite a modal formula into an equivalent one.
    pub fn is_program_equivalence(self) -> bool {
        matches!(
            self,
            Rule::AlphaAlways
                | Rule::Test
                | Rule::Assign
                | Rule::Epsilon
                | Rule::Nothing
                | Rule::Halt
                | Rule::SeqState
                | Rule::SeqAlways
                | Rule::Choice
                | Rule::StarAlways
                | Rule::Star
                | Rule::ParSeq
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleArg {
    None,
    Formula(Formula),
    Term(Term),
    Fresh(String),
    Variant { var: String, formula: Formula },
}

/// A rule applied to the formula at `index` on `side`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleApp {
    pub rule: Rule,
    pub side: Side,
    pub index: usize,
    pub arg: RuleArg,
}

impl RuleApp {
    pub fn new(rule: Rule, side: Side, index: usize) -> Self {
        RuleApp { rule, side, index, arg: RuleArg::None }
    }

    pub fn with(mut self, arg: RuleArg) -> Self {
        self.arg = arg;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("rule {rule} does not match {formula}")]
    SchemaMismatch { rule: Rule, formula: String },
    #[error("no formula at position {0}")]
    BadIndex(usize),
    #[error("'{0}' is not fresh in the sequent")]
    NotFresh(String),
    #[error("no loop invariant for '{0}'")]
    MissingInvariant(String),
    #[error("no loop variant for '{0}'")]
    MissingVariant(String),
    #[error("variant variable '{var}' occurs in '{program}'")]
    VariantInProgram { var: String, program: String },
    #[error("program '{0}' is not closed")]
    OpenProgram(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("proof exceeds {0} nodes")]
    TooLarge(usize),
}

#[derive(Debug, Clone)]
pub struct ProverConfig {
    pub comb: Comb,
    /// Invariant for stars without their own annotation.
    pub default_invariant: Option<Formula>,
    /// Declared variables; closures list free variables in this order.
    pub var_order: Vec<String>,
    pub max_nodes: usize,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig { comb: Comb::Add, default_invariant: None, var_order: Vec::new(), max_nodes: 200_000 }
    }
}

impl ProverConfig {
    /// `∀(φ)` over the free variables of `φ`, declared ones first.
    pub fn closure(&self, phi: Formula) -> Formula {
        let fv = phi.free_vars();
        let mut vars: Vec<String> = self.var_order.iter().filter(|v| fv.contains(*v)).cloned().collect();
        vars.extend(fv.iter().filter(|v| !self.var_order.contains(v)).cloned());
        Formula::forall_all(&vars, phi)
    }
}

fn mismatch(rule: Rule, f: &Formula) -> ProofError {
    ProofError::SchemaMismatch { rule, formula: f.to_string() }
}

/// The formula `[α]φ` for a macro event given as its micro events.
fn event_formula(m: Modality, events: &[MicroEvent], post: &Formula) -> Formula {
    Formula::modal(m, Program::Event(MacroEvent::new(events.to_vec())), post.clone())
}

fn first_par(p: &Program) -> Option<ProgramHole> {
    match p {
        Program::Par(_) => Some(ProgramHole::root()),
        Program::Seq(a, b) => first_par(a)
            .map(|h| prefix(HoleStep::SeqLeft, h))
            .or_else(|| first_par(b).map(|h| prefix(HoleStep::SeqRight, h))),
        Program::Choice(a, b) => first_par(a)
            .map(|h| prefix(HoleStep::ChoiceLeft, h))
            .or_else(|| first_par(b).map(|h| prefix(HoleStep::ChoiceRight, h))),
        Program::Star(a, _) => first_par(a).map(|h| prefix(HoleStep::StarBody, h)),
        _ => None,
    }
}

fn prefix(s: HoleStep, h: ProgramHole) -> ProgramHole {
    let mut path = vec![s];
    path.extend(h.path);
    ProgramHole { path }
}

/// The single premise formula of a rule that rewrites a modal formula.
pub fn program_rule(rule: Rule, f: &Formula, comb: Comb) -> Result<Formula, ProofError> {
    let Formula::Modal(m, p, post) = f else { return Err(mismatch(rule, f)) };
    let (m, box_like) = (*m, m.is_box());
    match (rule, &**p) {
        (Rule::AlphaAlways, Program::Event(a)) if m.is_temporal() => {
            let plain = if box_like { Modality::Box } else { Modality::Diamond };
            let step = Formula::modal(plain, Program::Event(a.clone()), (**post).clone());
            Ok(if box_like { Formula::and((**post).clone(), step) } else { Formula::or((**post).clone(), step) })
        }
        (Rule::Test, Program::Event(a)) if !m.is_temporal() => match a.events.split_first() {
            Some((MicroEvent::Test(psi), rest)) => {
                let inner = event_formula(m, rest, post);
                Ok(if box_like { Formula::implies(psi.clone(), inner) } else { Formula::and(psi.clone(), inner) })
            }
            _ => Err(mismatch(rule, f)),
        },
        (Rule::Assign, Program::Event(a)) if !m.is_temporal() => match a.events.split_first() {
            Some((MicroEvent::Assign(x, e), rest)) => Ok(event_formula(m, rest, post).substitute(e, x)),
            _ => Err(mismatch(rule, f)),
        },
        (Rule::Epsilon, Program::Event(a)) if !m.is_temporal() && a.events.is_empty() => Ok((**post).clone()),
        (Rule::Nothing, Program::Nothing) => Ok((**post).clone()),
        (Rule::Halt, Program::Halt) => Ok(if box_like { Formula::True } else { Formula::falsum() }),
        (Rule::SeqState, Program::Seq(a, b)) if !m.is_temporal() => {
            Ok(Formula::modal(m, (**a).clone(), Formula::modal(m, (**b).clone(), (**post).clone())))
        }
        (Rule::SeqAlways, Program::Seq(a, b)) if m.is_temporal() => {
            let plain = if box_like { Modality::Box } else { Modality::Diamond };
            let first = Formula::modal(m, (**a).clone(), (**post).clone());
            let rest = Formula::modal(plain, (**a).clone(), Formula::modal(m, (**b).clone(), (**post).clone()));
            Ok(if box_like { Formula::and(first, rest) } else { Formula::or(first, rest) })
        }
        (Rule::Choice, Program::Choice(a, b)) => {
            let l = Formula::modal(m, (**a).clone(), (**post).clone());
            let r = Formula::modal(m, (**b).clone(), (**post).clone());
            Ok(if box_like { Formula::and(l, r) } else { Formula::or(l, r) })
        }
        (Rule::StarAlways, Program::Star(body, _)) if m.is_temporal() => {
            let plain = if box_like { Modality::Box } else { Modality::Diamond };
            let step = Formula::modal(plain, (**p).clone(), Formula::modal(m, (**body).clone(), (**post).clone()));
            Ok(if box_like { Formula::and((**post).clone(), step) } else { Formula::or((**post).clone(), step) })
        }
        (Rule::Star, Program::Star(body, _)) => {
            let unfolded = Program::choice(Program::Nothing, Program::seq((**body).clone(), (**p).clone()));
            Ok(Formula::modal(m, unfolded, (**post).clone()))
        }
        (Rule::ParSeq, _) => {
            let hole = first_par(p).ok_or_else(|| mismatch(rule, f))?;
            let par = hole.get(p).expect("hole of a parallel subprogram");
            let lin = rewrite::to_seq(par, comb)?;
            let q = hole.fill(p, lin.program).expect("hole of a parallel subprogram");
            Ok(Formula::modal(m, q, (**post).clone()))
        }
        _ => Err(mismatch(rule, f)),
    }
}

/// The literal star rule for always-formulas, `[p*]□φ ⟺ [p*][p]□φ`,
/// kept for comparison with [`program_rule`].
pub fn literal_star_always(f: &Formula) -> Option<Formula> {
    let Formula::Modal(Modality::BoxAlways, p, post) = f else { return None };
    let Program::Star(body, _) = &**p else { return None };
    Some(Formula::boxed(
        (**p).clone(),
        Formula::always((**body).clone(), (**post).clone()),
    ))
}

fn replace(s: &Sequent, side: Side, i: usize, with: Vec<Formula>) -> Sequent {
    let mut out = s.clone();
    out.side_mut(side).splice(i..=i, with);
    out
}

fn check_fresh(s: &Sequent, y: &str) -> Result<(), ProofError> {
    if s.vars().contains(y) {
        Err(ProofError::NotFresh(y.to_string()))
    } else {
        Ok(())
    }
}

/// Applies one rule backwards and returns its premises.
pub fn apply_rule(s: &Sequent, app: &RuleApp, cfg: &ProverConfig) -> Result<Vec<Sequent>, ProofError> {
    let f = s.side(app.side).get(app.index).ok_or(ProofError::BadIndex(app.index))?.clone();
    let rule = app.rule;
    let (l, r) = (Side::Left, Side::Right);
    let i = app.index;
    match (rule, app.side, &f) {
        (Rule::Ax, Side::Right, _) => {
            if s.antecedent.iter().any(|g| g == &f || g.alpha_eq(&f)) {
                Ok(vec![])
            } else {
                Err(mismatch(rule, &f))
            }
        }
        (Rule::TrueRight, Side::Right, Formula::True) => Ok(vec![]),
        (Rule::Weaken, side, _) => Ok(vec![replace(s, side, i, vec![])]),
        (Rule::Cut, _, _) => {
            let RuleArg::Formula(c) = &app.arg else { return Err(mismatch(rule, &f)) };
            let mut a = s.clone();
            a.succedent.push(c.clone());
            let mut b = s.clone();
            b.antecedent.push(c.clone());
            Ok(vec![a, b])
        }
        (Rule::NotRight, Side::Right, Formula::Not(a)) => {
            let mut out = replace(s, r, i, vec![]);
            out.antecedent.push((**a).clone());
            Ok(vec![out])
        }
        (Rule::NotLeft, Side::Left, Formula::Not(a)) => {
            let mut out = replace(s, l, i, vec![]);
            out.succedent.push((**a).clone());
            Ok(vec![out])
        }
        (Rule::AndRight, Side::Right, Formula::And(a, b)) => {
            Ok(vec![replace(s, r, i, vec![(**a).clone()]), replace(s, r, i, vec![(**b).clone()])])
        }
        (Rule::AndLeft, Side::Left, Formula::And(a, b)) => Ok(vec![replace(s, l, i, vec![(**a).clone(), (**b).clone()])]),
        (Rule::OrRight, Side::Right, Formula::Or(a, b)) => Ok(vec![replace(s, r, i, vec![(**a).clone(), (**b).clone()])]),
        (Rule::OrLeft, Side::Left, Formula::Or(a, b)) => {
            Ok(vec![replace(s, l, i, vec![(**a).clone()]), replace(s, l, i, vec![(**b).clone()])])
        }
        (Rule::ImpRight, Side::Right, Formula::Implies(a, b)) => {
            let mut out = replace(s, r, i, vec![(**b).clone()]);
            out.antecedent.push((**a).clone());
            Ok(vec![out])
        }
        (Rule::ImpLeft, Side::Left, Formula::Implies(a, b)) => {
            let mut first = replace(s, l, i, vec![]);
            first.succedent.push((**a).clone());
            Ok(vec![first, replace(s, l, i, vec![(**b).clone()])])
        }
        (Rule::ForallRight, Side::Right, Formula::Forall(x, body)) | (Rule::ExistsLeft, Side::Left, Formula::Exists(x, body)) => {
            let RuleArg::Fresh(y) = &app.arg else { return Err(mismatch(rule, &f)) };
            if y != x {
                check_fresh(s, y)?;
            } else if replace(s, app.side, i, vec![]).free_vars().contains(x) {
                return Err(ProofError::NotFresh(y.clone()));
            }
            let inst = if y == x { (**body).clone() } else { body.rename_all(x, y) };
            Ok(vec![replace(s, app.side, i, vec![inst])])
        }
        (Rule::ForallLeft, Side::Left, Formula::Forall(x, body)) | (Rule::ExistsRight, Side::Right, Formula::Exists(x, body)) => {
            let RuleArg::Term(e) = &app.arg else { return Err(mismatch(rule, &f)) };
            Ok(vec![replace(s, app.side, i, vec![body.substitute(e, x)])])
        }
        (Rule::StarInvariant, Side::Right, Formula::Modal(Modality::Box, p, post)) => {
            let Program::Star(body, _) = &**p else { return Err(mismatch(rule, &f)) };
            let RuleArg::Formula(psi) = &app.arg else { return Err(mismatch(rule, &f)) };
            let step = cfg.closure(Formula::implies(psi.clone(), Formula::boxed((**body).clone(), psi.clone())));
            let post = cfg.closure(Formula::implies(psi.clone(), (**post).clone()));
            Ok(vec![
                replace(s, r, i, vec![psi.clone()]),
                replace(s, r, i, vec![step]),
                replace(s, r, i, vec![post]),
            ])
        }
        (Rule::StarVariant, Side::Right, Formula::Modal(Modality::Diamond, p, post)) => {
            let Program::Star(body, _) = &**p else { return Err(mismatch(rule, &f)) };
            let RuleArg::Variant { var: v, formula: psi } = &app.arg else { return Err(mismatch(rule, &f)) };
            if body.all_vars().contains(v) {
                return Err(ProofError::VariantInProgram { var: v.clone(), program: p.to_string() });
            }
            let vt = Term::var(v);
            let exists = Formula::exists(v, Formula::and(Formula::rel(Rel::Ge, vt.clone(), Term::int(0)), psi.clone()));
            let dec = psi.substitute(&Term::sub(vt.clone(), Term::int(1)), v);
            let step = cfg.closure(Formula::implies(
                Formula::and(Formula::rel(Rel::Gt, vt, Term::int(0)), psi.clone()),
                Formula::modal(Modality::Diamond, (**body).clone(), dec),
            ));
            let post = cfg.closure(Formula::implies(psi.substitute(&Term::int(0), v), (**post).clone()));
            Ok(vec![
                replace(s, r, i, vec![exists]),
                replace(s, r, i, vec![step]),
                replace(s, r, i, vec![post]),
            ])
        }
        (rule, side, Formula::Modal(..)) if rule.is_program_equivalence() => {
            Ok(vec![replace(s, side, i, vec![program_rule(rule, &f, cfg.comb)?])])
        }
        _ => Err(mismatch(rule, &f)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub id: usize,
    pub formula: Formula,
    /// Rule names from the root down to the leaf.
    pub provenance: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofNode {
    Rule { app: RuleApp, children: Vec<ProofTree> },
    Obligation(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTree {
    pub sequent: Sequent,
    pub node: ProofNode,
}

impl ProofTree {
    pub fn size(&self) -> usize {
        match &self.node {
            ProofNode::Rule { children, .. } => 1 + children.iter().map(ProofTree::size).sum::<usize>(),
            ProofNode::Obligation(_) => 1,
        }
    }

    /// Rules in pre-order.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out = Vec::new();
        self.collect_rules(&mut out);
        out
    }

    fn collect_rules(&self, out: &mut Vec<Rule>) {
        if let ProofNode::Rule { app, children } = &self.node {
            out.push(app.rule);
            children.iter().for_each(|c| c.collect_rules(out));
        }
    }

    /// Indented text form: one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match &self.node {
            ProofNode::Rule { app, children } => {
                out.push_str(&format!("{pad}{} {}\n", app.rule, self.sequent));
                children.iter().for_each(|c| c.render_into(depth + 1, out));
            }
            ProofNode::Obligation(id) => out.push_str(&format!("{pad}[obligation {id}] {}\n", self.sequent)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Proof {
    pub tree: ProofTree,
    pub obligations: Vec<Obligation>,
}

fn star_invariant(p: &Program, cfg: &ProverConfig) -> Result<Formula, ProofError> {
    let Program::Star(_, ann) = p else { unreachable!() };
    ann.invariant
        .clone()
        .or_else(|| cfg.default_invariant.clone())
        .ok_or_else(|| ProofError::MissingInvariant(p.to_string()))
}

fn modal_rule(side: Side, m: Modality, p: &Program) -> Result<Option<Rule>, ProofError> {
    if p.contains_par() {
        return Ok(Some(Rule::ParSeq));
    }
    Ok(Some(match p {
        Program::Event(_) if m.is_temporal() => Rule::AlphaAlways,
        Program::Event(a) => match a.events.first() {
            None => Rule::Epsilon,
            Some(MicroEvent::Test(_)) => Rule::Test,
            Some(MicroEvent::Assign(..)) => Rule::Assign,
            Some(_) => return Err(ProofError::OpenProgram(p.to_string())),
        },
        Program::Nothing => Rule::Nothing,
        Program::Halt => Rule::Halt,
        Program::Seq(..) if m.is_temporal() => Rule::SeqAlways,
        Program::Seq(..) => Rule::SeqState,
        Program::Choice(..) => Rule::Choice,
        Program::Star(..) if m.is_temporal() => Rule::StarAlways,
        Program::Star(..) if side == Side::Left => return Ok(None),
        Program::Star(..) if m.is_box() => Rule::StarInvariant,
        Program::Star(..) => Rule::StarVariant,
        Program::Par(_) => unreachable!(),
    }))
}

fn fresh_for(s: &Sequent, side: Side, i: usize, x: &str) -> String {
    if !replace(s, side, i, vec![]).free_vars().contains(x) {
        return x.to_string();
    }
    FreshNameSupply::new().fresh(x, &s.vars())
}

/// The rule the default strategy applies to `s`, or `None` at an AFOL leaf.
pub fn next_rule(s: &Sequent, cfg: &ProverConfig) -> Result<Option<RuleApp>, ProofError> {
    if let Some(i) = s.succedent.iter().position(|f| *f == Formula::True) {
        return Ok(Some(RuleApp::new(Rule::TrueRight, Side::Right, i)));
    }
    if let Some(i) = s.succedent.iter().position(|f| s.antecedent.iter().any(|g| g == f || g.alpha_eq(f))) {
        return Ok(Some(RuleApp::new(Rule::Ax, Side::Right, i)));
    }
    for side in [Side::Right, Side::Left] {
        for (i, f) in s.side(side).iter().enumerate() {
            if f.is_afol() {
                continue;
            }
            let rule = match (side, f) {
                (Side::Right, Formula::Not(_)) => Rule::NotRight,
                (Side::Left, Formula::Not(_)) => Rule::NotLeft,
                (Side::Right, Formula::And(..)) => Rule::AndRight,
                (Side::Left, Formula::And(..)) => Rule::AndLeft,
                (Side::Right, Formula::Or(..)) => Rule::OrRight,
                (Side::Left, Formula::Or(..)) => Rule::OrLeft,
                (Side::Right, Formula::Implies(..)) => Rule::ImpRight,
                (Side::Left, Formula::Implies(..)) => Rule::ImpLeft,
                (Side::Right, Formula::Forall(x, _)) => {
                    let y = fresh_for(s, side, i, x);
                    return Ok(Some(RuleApp::new(Rule::ForallRight, side, i).with(RuleArg::Fresh(y))));
                }
                (Side::Left, Formula::Exists(x, _)) => {
                    let y = fresh_for(s, side, i, x);
                    return Ok(Some(RuleApp::new(Rule::ExistsLeft, side, i).with(RuleArg::Fresh(y))));
                }
                (_, Formula::Modal(m, p, _)) => match modal_rule(side, *m, p)? {
                    Some(Rule::StarInvariant) => {
                        let psi = star_invariant(p, cfg)?;
                        return Ok(Some(RuleApp::new(Rule::StarInvariant, side, i).with(RuleArg::Formula(psi))));
                    }
                    Some(Rule::StarVariant) => {
                        let Program::Star(_, ann) = &**p else { unreachable!() };
                        let v = ann.variant.clone().ok_or_else(|| ProofError::MissingVariant(p.to_string()))?;
                        let arg = RuleArg::Variant { var: v.var, formula: v.formula };
                        return Ok(Some(RuleApp::new(Rule::StarVariant, side, i).with(arg)));
                    }
                    Some(rule) => rule,
                    None => Rule::Weaken,
                },
                _ => Rule::Weaken,
            };
            return Ok(Some(RuleApp::new(rule, side, i)));
        }
    }
    Ok(None)
}

fn check_closed(f: &Formula) -> Result<(), ProofError> {
    match f {
        Formula::True | Formula::Rel(..) => Ok(()),
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => check_closed(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check_closed(a)?;
            check_closed(b)
        }
        Formula::Modal(_, p, a) => {
            if !p.is_closed() {
                return Err(ProofError::OpenProgram(p.to_string()));
            }
            check_closed(a)
        }
    }
}

/// Builds the proof tree of `goal` under the default strategy.
pub fn verify(goal: &Formula, cfg: &ProverConfig) -> Result<Proof, ProofError> {
    check_closed(goal)?;
    let mut obligations = Vec::new();
    let mut nodes = 0;
    let mut path = Vec::new();
    let tree = build(Sequent::goal(goal.clone()), cfg, &mut obligations, &mut nodes, &mut path)?;
    Ok(Proof { tree, obligations })
}

fn build(
    s: Sequent,
    cfg: &ProverConfig,
    obligations: &mut Vec<Obligation>,
    nodes: &mut usize,
    path: &mut Vec<Rule>,
) -> Result<ProofTree, ProofError> {
    *nodes += 1;
    if *nodes > cfg.max_nodes {
        return Err(ProofError::TooLarge(cfg.max_nodes));
    }
    let Some(app) = next_rule(&s, cfg)? else {
        let id = obligations.len();
        obligations.push(Obligation { id, formula: s.to_formula(), provenance: path.clone() });
        return Ok(ProofTree { sequent: s, node: ProofNode::Obligation(id) });
    };
    let premises = apply_rule(&s, &app, cfg)?;
    path.push(app.rule);
    let mut children = Vec::with_capacity(premises.len());
    for p in premises {
        children.push(build(p, cfg, obligations, nodes, path)?);
    }
    path.pop();
    Ok(ProofTree { sequent: s, node: ProofNode::Rule { app, children } })
}

/// Re-applies every recorded rule and compares the premises with the
/// recorded children.
pub fn replay(tree: &ProofTree, cfg: &ProverConfig) -> bool {
    match &tree.node {
        ProofNode::Obligation(_) => tree.sequent.is_afol(),
        ProofNode::Rule { app, children } => match apply_rule(&tree.sequent, app, cfg) {
            Ok(premises) => {
                premises.len() == children.len()
                    && premises.iter().zip(children).all(|(p, c)| *p == c.sequent && replay(c, cfg))
            }
            Err(_) => false,
        },
    }
}
