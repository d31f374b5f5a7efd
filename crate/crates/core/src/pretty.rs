//! Concrete syntax printer. Output is accepted by the parser and parses back
//! to the same tree.

use std::fmt;

use crate::syntax::{BinOp, Formula, MacroEvent, MicroEvent, Modality, Program, Rel, Term};

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Var(_) | Term::Const(_) => 3,
        Term::Apply(BinOp::Add | BinOp::Sub, ..) => 1,
        Term::Apply(BinOp::Mul | BinOp::Div, ..) => 2,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    let lvl = term_level(t);
    if lvl < min {
        write!(f, "(")?;
        write_term(f, t, 0)?;
        return write!(f, ")");
    }
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Const(n) => write!(f, "{n}"),
        Term::Apply(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
            };
            write_term(f, a, lvl)?;
            write!(f, " {sym} ")?;
            write_term(f, b, lvl + 1)
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        })
    }
}

fn formula_level(phi: &Formula) -> u8 {
    match phi {
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(a) if **a == Formula::True => 5,
        Formula::Not(_) | Formula::Forall(..) | Formula::Exists(..) | Formula::Modal(..) => 4,
        Formula::True | Formula::Rel(..) => 5,
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula, min: u8) -> fmt::Result {
    let lvl = formula_level(phi);
    if lvl < min {
        write!(f, "(")?;
        write_formula(f, phi, 0)?;
        return write!(f, ")");
    }
    match phi {
        Formula::True => write!(f, "true"),
        Formula::Not(a) if **a == Formula::True => write!(f, "false"),
        Formula::Rel(r, a, b) => write!(f, "{a} {r} {b}"),
        Formula::Not(a) => {
            write!(f, "!")?;
            write_formula(f, a, 4)
        }
        Formula::And(a, b) => {
            write_formula(f, a, 3)?;
            write!(f, " && ")?;
            write_formula(f, b, 4)
        }
        Formula::Or(a, b) => {
            write_formula(f, a, 2)?;
            write!(f, " || ")?;
            write_formula(f, b, 3)
        }
        Formula::Implies(a, b) => {
            write_formula(f, a, 2)?;
            write!(f, " -> ")?;
            write_formula(f, b, 1)
        }
        Formula::Forall(x, a) => {
            write!(f, "forall {x}. ")?;
            write_formula(f, a, 4)
        }
        Formula::Exists(x, a) => {
            write!(f, "exists {x}. ")?;
            write_formula(f, a, 4)
        }
        Formula::Modal(m, p, a) => {
            match m {
                Modality::Box => write!(f, "[{p}] ")?,
                Modality::BoxAlways => write!(f, "[{p}] always ")?,
                Modality::Diamond => write!(f, "<{p}> ")?,
                Modality::DiamondEventually => write!(f, "<{p}> eventually ")?,
            }
            write_formula(f, a, 4)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}

impl fmt::Display for MicroEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MicroEvent::Test(phi) => {
                write!(f, "?")?;
                write_formula(f, phi, 5)
            }
            MicroEvent::Present { signal, bind: None } => write!(f, "{signal}?"),
            MicroEvent::Present { signal, bind: Some(x) } => write!(f, "{signal}?({x})"),
            MicroEvent::Absent(s) => write!(f, "!{s}"),
            MicroEvent::Emit { signal, value: None } => write!(f, "{signal}!"),
            MicroEvent::Emit { signal, value: Some(t) } => write!(f, "{signal}!{t}"),
            MicroEvent::Assign(x, t) => write!(f, "{x} := {t}"),
        }
    }
}

impl fmt::Display for MacroEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                write!(f, " . ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

fn program_level(p: &Program) -> u8 {
    match p {
        Program::Choice(..) => 1,
        Program::Seq(..) => 2,
        Program::Star(..) => 3,
        _ => 4,
    }
}

fn write_program(f: &mut fmt::Formatter<'_>, p: &Program, min: u8) -> fmt::Result {
    let lvl = program_level(p);
    if lvl < min {
        write!(f, "(")?;
        write_program(f, p, 0)?;
        return write!(f, ")");
    }
    match p {
        Program::Nothing => write!(f, "nothing"),
        Program::Halt => write!(f, "halt"),
        Program::Event(a) => write!(f, "{a}"),
        Program::Seq(a, b) => {
            write_program(f, a, 3)?;
            write!(f, " ; ")?;
            write_program(f, b, 2)
        }
        Program::Choice(a, b) => {
            write_program(f, a, 2)?;
            write!(f, " + ")?;
            write_program(f, b, 1)
        }
        Program::Star(a, ann) => {
            write_program(f, a, 3)?;
            write!(f, "*")?;
            if let Some(inv) = &ann.invariant {
                write!(f, " invariant ({inv})")?;
            }
            if let Some(v) = &ann.variant {
                write!(f, " variant {}: ({})", v.var, v.formula)?;
            }
            Ok(())
        }
        Program::Par(ps) => {
            write!(f, "par(")?;
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_program(f, q, 0)?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_program(f, self, 0)
    }
}
