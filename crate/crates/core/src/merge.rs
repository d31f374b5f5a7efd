//! Resolution of one synchronous instant: the macro events at the heads of
//! parallel components are merged into a single closed macro event, signal
//! tests are decided against emitted and possibly-emitted signals, and the
//! rest of every component is collected.

use std::fmt;

use crate::syntax::{MacroEvent, MicroEvent, Program, Term};

/// An emission `σ!e`; pure emissions carry the constant 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Emission {
    pub signal: String,
    pub value: Term,
}

impl Emission {
    pub fn new(signal: &str, value: Term) -> Self {
        Emission { signal: signal.to_string(), value }
    }
}

impl fmt::Display for Emission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}", self.signal, self.value)
    }
}

/// Combines the values of all emissions of one signal in an instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Comb {
    /// Left-nested sum; a single value is returned unchanged.
    #[default]
    Add,
}

impl Comb {
    pub fn from_name(name: &str) -> Option<Comb> {
        match name {
            "add" => Some(Comb::Add),
            _ => None,
        }
    }

    pub fn apply(self, values: &[Term]) -> Term {
        match self {
            Comb::Add => {
                let mut it = values.iter().cloned();
                match it.next() {
                    None => Term::int(0),
                    Some(first) => it.fold(first, Term::add),
                }
            }
        }
    }
}

/// `Match(ϱ, Y)`: a presence test matches when some emission of the signal is
/// in `Y`, an absence test when none is.
pub fn match_test(test: &MicroEvent, emitted: &[Emission]) -> bool {
    match test {
        MicroEvent::Present { signal, .. } => emitted.iter().any(|e| &e.signal == signal),
        MicroEvent::Absent(signal) => !emitted.iter().any(|e| &e.signal == signal),
        _ => false,
    }
}

/// `α ⌢ a`: appends a closed micro event before the trailing `ε`.
pub fn append_event(alpha: &MacroEvent, a: MicroEvent) -> MacroEvent {
    let mut events = alpha.events.clone();
    events.push(a);
    MacroEvent::new(events)
}

fn emission_of(e: &MicroEvent) -> Option<Emission> {
    match e {
        MicroEvent::Emit { signal, value } => Some(Emission {
            signal: signal.clone(),
            value: value.clone().unwrap_or(Term::Const(0)),
        }),
        _ => None,
    }
}

/// `getCan(A, M)`: emissions that may still happen in this instant, given
/// the emissions `must` that already happened.
pub fn get_can(heads: &[MacroEvent], must: &[Emission]) -> Vec<Emission> {
    let mut rest: Vec<&[MicroEvent]> = heads.iter().map(|a| a.events.as_slice()).collect();
    let mut can: Vec<Emission> = Vec::new();
    loop {
        let mut progressed = false;
        for slot in rest.iter_mut() {
            while let Some((first, tail)) = slot.split_first() {
                let advance = match first {
                    MicroEvent::Test(_) | MicroEvent::Assign(..) => true,
                    MicroEvent::Emit { .. } => {
                        can.extend(emission_of(first));
                        true
                    }
                    MicroEvent::Present { .. } => {
                        let mut pool = can.clone();
                        pool.extend(must.iter().cloned());
                        match_test(first, &pool)
                    }
                    MicroEvent::Absent(_) => match_test(first, must),
                };
                if !advance {
                    break;
                }
                *slot = tail;
                progressed = true;
            }
        }
        if !progressed {
            return can;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MergedEvent {
    Event(MacroEvent),
    Halt,
}

impl MergedEvent {
    pub fn into_program(self) -> Program {
        match self {
            MergedEvent::Event(a) => Program::Event(a),
            MergedEvent::Halt => Program::Halt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// Some absence test can neither be confirmed nor refuted.
    NonConstructive,
    /// A presence test observed fewer values than were emitted in the instant.
    IncoherentValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeFailure {
    pub reason: FailureReason,
    pub signal: Option<String>,
}

impl fmt::Display for MergeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.reason {
            FailureReason::NonConstructive => "non-constructive signal resolution",
            FailureReason::IncoherentValue => "incoherent signal value",
        };
        match &self.signal {
            Some(s) => write!(f, "{what} on signal '{s}'"),
            None => write!(f, "{what}"),
        }
    }
}

/// `(b, ρ, R)`. `blocked` is set when every pending signal test failed, in
/// which case the merged event is `halt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeOutcome {
    pub constructive: bool,
    pub event: MergedEvent,
    pub residuals: Vec<Program>,
    pub blocked: bool,
    pub failure: Option<MergeFailure>,
    /// `Can` as computed at each signal-resolution step, in order.
    pub can_history: Vec<Vec<Emission>>,
}

/// Splits `α ; q` (or a bare `α`) into its head and rest.
pub fn split_head(p: &Program) -> Option<(MacroEvent, Program)> {
    match p {
        Program::Event(a) => Some((a.clone(), Program::Nothing)),
        Program::Seq(a, q) => match &**a {
            Program::Event(a) => Some((a.clone(), (**q).clone())),
            _ => None,
        },
        _ => None,
    }
}

struct Pending {
    index: usize,
    events: Vec<MicroEvent>,
    rest: Program,
}

/// `Merge(α₁;q₁ | ... | αₙ;qₙ)`. Residuals are returned in component order.
/// A presence test `σ(x)?` that matches stores the combined value of `σ` by
/// an assignment `x := comb(...)` placed at the start of the rest of its
/// macro event.
pub fn merge(pattern: &[(MacroEvent, Program)], comb: Comb) -> MergeOutcome {
    let mut pending: Vec<Pending> = pattern
        .iter()
        .enumerate()
        .map(|(index, (a, q))| Pending { index, events: a.events.clone(), rest: q.clone() })
        .collect();
    let mut rho = MacroEvent::epsilon();
    let mut residuals: Vec<Option<Program>> = vec![None; pattern.len()];
    let mut must: Vec<Emission> = Vec::new();
    let mut observed: Vec<(String, Vec<Emission>)> = Vec::new();
    let mut can_history = Vec::new();

    let finish = |event: MergedEvent,
                  residuals: Vec<Option<Program>>,
                  pending: Vec<Pending>,
                  blocked: bool,
                  failure: Option<MergeFailure>,
                  can_history: Vec<Vec<Emission>>| {
        let mut rs = residuals;
        for p in pending {
            rs[p.index] = Some(Program::seq(
                Program::event(p.events),
                p.rest,
            ));
        }
        MergeOutcome {
            constructive: failure.is_none(),
            event,
            residuals: rs.into_iter().map(|r| r.unwrap_or(Program::Nothing)).collect(),
            blocked,
            failure,
            can_history,
        }
    };

    loop {
        // case 1
        if let Some(i) = pending.iter().position(|p| p.events.is_empty()) {
            let p = pending.remove(i);
            residuals[p.index] = Some(p.rest);
            continue;
        }
        // case 2
        if let Some(i) = pending
            .iter()
            .position(|p| matches!(p.events[0], MicroEvent::Test(_) | MicroEvent::Assign(..)))
        {
            let a = pending[i].events.remove(0);
            rho = append_event(&rho, a);
            continue;
        }
        // case 3
        if let Some(i) = pending.iter().position(|p| matches!(p.events[0], MicroEvent::Emit { .. })) {
            let a = pending[i].events.remove(0);
            must.extend(emission_of(&a));
            continue;
        }
        if pending.is_empty() {
            break;
        }
        // case 4: every head is a signal test
        let heads: Vec<MacroEvent> =
            pending.iter().map(|p| MacroEvent::new(p.events.clone())).collect();
        let can = get_can(&heads, &must);
        can_history.push(can.clone());
        if let Some(j) = pending.iter().position(|p| {
            matches!(p.events[0], MicroEvent::Present { .. }) && match_test(&p.events[0], &must)
        }) {
            let MicroEvent::Present { signal, bind } = pending[j].events.remove(0) else {
                unreachable!()
            };
            let values: Vec<Emission> = must.iter().filter(|e| e.signal == signal).cloned().collect();
            if let Some(x) = bind {
                let terms: Vec<Term> = values.iter().map(|e| e.value.clone()).collect();
                pending[j].events.insert(0, MicroEvent::Assign(x, comb.apply(&terms)));
            }
            observed.push((signal, values));
            continue;
        }
        let mut possible = can.clone();
        possible.extend(must.iter().cloned());
        if let Some(j) = pending.iter().position(|p| {
            matches!(p.events[0], MicroEvent::Absent(_)) && match_test(&p.events[0], &possible)
        }) {
            pending[j].events.remove(0);
            continue;
        }
        if pending.iter().all(|p| !match_test(&p.events[0], &must)) {
            return finish(MergedEvent::Halt, residuals, pending, true, coherence(&observed, &must), can_history);
        }
        let signal = pending.iter().find_map(|p| match &p.events[0] {
            MicroEvent::Absent(s) if match_test(&p.events[0], &must) => Some(s.clone()),
            _ => None,
        });
        return finish(
            MergedEvent::Event(rho),
            residuals,
            pending,
            false,
            Some(MergeFailure { reason: FailureReason::NonConstructive, signal }),
            can_history,
        );
    }
    let failure = coherence(&observed, &must);
    finish(MergedEvent::Event(rho), residuals, pending, false, failure, can_history)
}

// case 5
fn coherence(observed: &[(String, Vec<Emission>)], must: &[Emission]) -> Option<MergeFailure> {
    for (signal, seen) in observed {
        let mut all: Vec<Emission> = must.iter().filter(|e| &e.signal == signal).cloned().collect();
        let mut seen = seen.clone();
        all.sort();
        seen.sort();
        if all != seen {
            return Some(MergeFailure {
                reason: FailureReason::IncoherentValue,
                signal: Some(signal.clone()),
            });
        }
    }
    None
}
