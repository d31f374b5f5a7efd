//! Lexer and recursive-descent parser for programs, formulas and source files.
//!
//! ```text
//! file     := item*
//! item     := 'signal' ident (',' ident)*
//!           | 'var' ident (',' ident)*
//!           | 'program' ident '=' program
//!           | 'goal' ident '=' formula ('with' 'invariant' '(' formula ')')?
//! program  := seq ('+' program)?
//! seq      := postfix (';' seq)?
//! postfix  := atom ('*' annot)*
//! annot    := ('invariant' '(' formula ')')? ('variant' ident ':' '(' formula ')')?
//! atom     := 'nothing' | 'halt' | '[' events ']' | 'par' '(' program (',' program)* ')'
//!           | 'await' ident ('(' ident ')')? '[' events ']' | '(' program ')' | ident
//! event    := '?' unary | '!' ident | ident '?' ('(' ident ')')? | ident '!' term?
//!           | ident ':=' term
//! formula  := disj ('->' formula)?
//! disj     := conj ('||' conj)*
//! conj     := unary ('&&' unary)*
//! unary    := '!' unary | ('forall' | 'exists') ident '.' unary
//!           | '[' program ']' 'always'? unary | '<' program '>' 'eventually'? unary
//!           | 'true' | 'false' | '(' formula ')' | term rel term
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{
    BinOp, Formula, MacroEvent, MicroEvent, Modality, Program, Rel, StarAnnotation, Term, Variant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: unexpected character '{ch}'")]
    Lex { pos: Pos, ch: char },
    #[error("{pos}: expected {expected}, found {found}")]
    Unexpected { pos: Pos, expected: String, found: String },
    #[error("{pos}: undeclared {kind} '{name}'")]
    Undeclared { pos: Pos, kind: &'static str, name: String },
    #[error("{pos}: '{name}' is declared twice")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: annotation '{keyword}' must follow a star")]
    MisplacedAnnotation { pos: Pos, keyword: String },
    #[error("{pos}: tests and annotations must be first-order formulas")]
    ModalInTest { pos: Pos },
    #[error("{pos}: integer literal out of range")]
    IntRange { pos: Pos },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(n) => write!(f, "'{n}'"),
            Tok::Sym(s) => write!(f, "'{s}'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const SYMBOLS: &[&str] = &[
    "->", "&&", "||", ":=", "<=", ">=", "(", ")", "[", "]", "<", ">", "=", "?", "!", ".", ",",
    ";", "+", "-", "*", "/", ":",
];

const KEYWORDS: &[&str] = &[
    "nothing", "halt", "par", "await", "invariant", "variant", "always", "eventually", "forall",
    "exists", "true", "false", "signal", "var", "program", "goal", "with",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(s), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n = s.parse::<u64>().map_err(|_| ParseError::IntRange { pos })?;
            out.push((Tok::Int(n), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let sym = SYMBOLS
            .iter()
            .find(|s| rest.starts_with(**s))
            .ok_or(ParseError::Lex { pos, ch: c })?;
        i += sym.len();
        col += sym.len();
        out.push((Tok::Sym(sym), pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// A named goal with an optional default invariant for stars that carry no
/// annotation of their own (for instance those produced by linearization).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub name: String,
    pub formula: Formula,
    pub default_invariant: Option<Formula>,
}

/// A parsed source file. Program names are expanded in goals and in later
/// program definitions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceSpec {
    pub signals: Vec<String>,
    pub vars: Vec<String>,
    pub programs: Vec<(String, Program)>,
    pub goals: Vec<Goal>,
}

impl SourceSpec {
    pub fn program(&self, name: &str) -> Option<&Program> {
        self.programs.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    pub fn goal(&self, name: &str) -> Option<&Goal> {
        self.goals.iter().find(|g| g.name == name)
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.signals.is_empty() {
            writeln!(f, "signal {}", self.signals.join(", "))?;
        }
        if !self.vars.is_empty() {
            writeln!(f, "var {}", self.vars.join(", "))?;
        }
        for (name, p) in &self.programs {
            writeln!(f, "program {name} = {p}")?;
        }
        for g in &self.goals {
            write!(f, "goal {} = {}", g.name, g.formula)?;
            if let Some(inv) = &g.default_invariant {
                write!(f, " with invariant ({inv})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Scope {
    signals: BTreeSet<String>,
    vars: BTreeSet<String>,
    programs: BTreeMap<String, Program>,
    bound: Vec<String>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    scope: Option<Scope>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str, scope: Option<Scope>) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, at: 0, scope })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::Unexpected {
            pos: self.pos(),
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("'{s}'"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("'{k}'"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn check_var(&self, name: &str, pos: Pos) -> PResult<()> {
        if let Some(sc) = &self.scope {
            if !sc.vars.contains(name) && !sc.bound.iter().any(|b| b == name) {
                return Err(ParseError::Undeclared { pos, kind: "variable", name: name.into() });
            }
        }
        Ok(())
    }

    fn check_signal(&self, name: &str, pos: Pos) -> PResult<()> {
        if let Some(sc) = &self.scope {
            if !sc.signals.contains(name) {
                return Err(ParseError::Undeclared { pos, kind: "signal", name: name.into() });
            }
        }
        Ok(())
    }

    fn var(&mut self) -> PResult<String> {
        let pos = self.pos();
        let x = self.ident()?;
        self.check_var(&x, pos)?;
        Ok(x)
    }

    fn signal(&mut self) -> PResult<String> {
        let pos = self.pos();
        let s = self.ident()?;
        self.check_signal(&s, pos)?;
        Ok(s)
    }

    // -- terms -------------------------------------------------------------

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.term_mul()?;
        loop {
            let op = if self.is_sym("+") {
                BinOp::Add
            } else if self.is_sym("-") {
                BinOp::Sub
            } else {
                return Ok(t);
            };
            self.bump();
            let rhs = self.term_mul()?;
            t = Term::apply(op, t, rhs);
        }
    }

    fn term_mul(&mut self) -> PResult<Term> {
        let mut t = self.term_atom()?;
        loop {
            let op = if self.is_sym("*") {
                BinOp::Mul
            } else if self.is_sym("/") {
                BinOp::Div
            } else {
                return Ok(t);
            };
            self.bump();
            let rhs = self.term_atom()?;
            t = Term::apply(op, t, rhs);
        }
    }

    fn int_literal(&mut self, negative: bool) -> PResult<i64> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => {
                if negative {
                    if n <= i64::MAX as u64 + 1 {
                        Ok((n as i128).wrapping_neg() as i64)
                    } else {
                        Err(ParseError::IntRange { pos })
                    }
                } else {
                    i64::try_from(n).map_err(|_| ParseError::IntRange { pos })
                }
            }
            _ => unreachable!(),
        }
    }

    fn term_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(Term::Const(self.int_literal(false)?)),
            Tok::Sym("-") => {
                self.bump();
                if matches!(self.peek(), Tok::Int(_)) {
                    Ok(Term::Const(self.int_literal(true)?))
                } else {
                    let t = self.term_atom()?;
                    Ok(Term::sub(Term::int(0), t))
                }
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(_) => Ok(Term::Var(self.var()?)),
            _ => self.unexpected("a term"),
        }
    }

    fn rel(&mut self) -> Option<Rel> {
        let r = match self.peek() {
            Tok::Sym("<") => Rel::Lt,
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym("=") => Rel::Eq,
            Tok::Sym(">") => Rel::Gt,
            Tok::Sym(">=") => Rel::Ge,
            _ => return None,
        };
        self.bump();
        Some(r)
    }

    // -- formulas ----------------------------------------------------------

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disj()?;
        if self.eat_sym("->") {
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disj(&mut self) -> PResult<Formula> {
        let mut f = self.conj()?;
        while self.eat_sym("||") {
            let rhs = self.conj()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut f = self.unary()?;
        while self.eat_sym("&&") {
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn with_bound<T>(&mut self, x: &str, k: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        if let Some(sc) = &mut self.scope {
            sc.bound.push(x.to_string());
        }
        let r = k(self);
        if let Some(sc) = &mut self.scope {
            sc.bound.pop();
        }
        r
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            let is_forall = self.is_kw("forall");
            self.bump();
            let x = self.ident()?;
            self.expect_sym(".")?;
            let body = self.with_bound(&x, |p| p.unary())?;
            return Ok(if is_forall { Formula::forall(&x, body) } else { Formula::exists(&x, body) });
        }
        if self.eat_sym("[") {
            let p = self.program()?;
            self.expect_sym("]")?;
            let m = if self.eat_kw("always") { Modality::BoxAlways } else { Modality::Box };
            return Ok(Formula::modal(m, p, self.unary()?));
        }
        if self.eat_sym("<") {
            let p = self.program()?;
            self.expect_sym(">")?;
            let m = if self.eat_kw("eventually") {
                Modality::DiamondEventually
            } else {
                Modality::Diamond
            };
            return Ok(Formula::modal(m, p, self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.eat_kw("true") {
            return Ok(Formula::True);
        }
        if self.eat_kw("false") {
            return Ok(Formula::falsum());
        }
        if self.is_sym("(") {
            let save = self.at;
            if let Ok(f) = self.comparison() {
                return Ok(f);
            }
            self.at = save;
            self.bump();
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let a = self.term()?;
        match self.rel() {
            Some(r) => {
                let b = self.term()?;
                Ok(Formula::rel(r, a, b))
            }
            None => self.unexpected("a relation"),
        }
    }

    fn afol(&mut self, f: Formula, pos: Pos) -> PResult<Formula> {
        if f.is_afol() {
            Ok(f)
        } else {
            Err(ParseError::ModalInTest { pos })
        }
    }

    // -- programs ----------------------------------------------------------

    fn program(&mut self) -> PResult<Program> {
        let lhs = self.seq()?;
        if self.eat_sym("+") {
            let rhs = self.program()?;
            Ok(Program::choice(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn seq(&mut self) -> PResult<Program> {
        let lhs = self.postfix()?;
        if self.eat_sym(";") {
            let rhs = self.seq()?;
            Ok(Program::seq(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn paren_afol(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        if self.eat_kw("true") {
            return Ok(Formula::True);
        }
        if self.eat_kw("false") {
            return Ok(Formula::falsum());
        }
        self.expect_sym("(")?;
        let f = self.formula()?;
        self.expect_sym(")")?;
        self.afol(f, pos)
    }

    fn postfix(&mut self) -> PResult<Program> {
        let mut p = self.atom()?;
        loop {
            if self.eat_sym("*") {
                let mut ann = StarAnnotation::default();
                if self.eat_kw("invariant") {
                    ann.invariant = Some(self.paren_afol()?);
                }
                if self.eat_kw("variant") {
                    let var = self.ident()?;
                    self.expect_sym(":")?;
                    let formula = self.with_bound(&var, |q| q.paren_afol())?;
                    ann.variant = Some(Variant { var, formula });
                }
                p = Program::star_with(p, ann);
            } else if self.is_kw("invariant") || self.is_kw("variant") {
                let keyword = match self.peek() {
                    Tok::Ident(s) => s.clone(),
                    _ => unreachable!(),
                };
                return Err(ParseError::MisplacedAnnotation { pos: self.pos(), keyword });
            } else {
                return Ok(p);
            }
        }
    }

    fn events(&mut self) -> PResult<MacroEvent> {
        let mut evs = Vec::new();
        if self.eat_sym("]") {
            return Ok(MacroEvent::new(evs));
        }
        loop {
            evs.push(self.micro_event()?);
            if self.eat_sym(".") {
                continue;
            }
            self.expect_sym("]")?;
            return Ok(MacroEvent::new(evs));
        }
    }

    fn micro_event(&mut self) -> PResult<MicroEvent> {
        if self.eat_sym("?") {
            let pos = self.pos();
            let f = self.unary()?;
            return Ok(MicroEvent::Test(self.afol(f, pos)?));
        }
        if self.eat_sym("!") {
            return Ok(MicroEvent::Absent(self.signal()?));
        }
        match self.peek_at(1) {
            Tok::Sym("?") => {
                let signal = self.signal()?;
                self.bump();
                let bind = if self.eat_sym("(") {
                    let x = self.var()?;
                    self.expect_sym(")")?;
                    Some(x)
                } else {
                    None
                };
                Ok(MicroEvent::Present { signal, bind })
            }
            Tok::Sym("!") => {
                let signal = self.signal()?;
                self.bump();
                let value = if self.is_sym(".") || self.is_sym("]") {
                    None
                } else {
                    Some(self.term()?)
                };
                Ok(MicroEvent::Emit { signal, value })
            }
            Tok::Sym(":=") => {
                let x = self.var()?;
                self.bump();
                Ok(MicroEvent::Assign(x, self.term()?))
            }
            _ => self.unexpected("a micro event"),
        }
    }

    fn atom(&mut self) -> PResult<Program> {
        if self.eat_kw("nothing") {
            return Ok(Program::Nothing);
        }
        if self.eat_kw("halt") {
            return Ok(Program::Halt);
        }
        if self.eat_sym("[") {
            return Ok(Program::Event(self.events()?));
        }
        if self.eat_kw("par") {
            self.expect_sym("(")?;
            let mut ps = vec![self.program()?];
            while self.eat_sym(",") {
                ps.push(self.program()?);
            }
            self.expect_sym(")")?;
            return Ok(Program::Par(ps));
        }
        if self.eat_kw("await") {
            // await s(x) [a] stands for ([!s])* ; [s?(x) . a]
            let signal = self.signal()?;
            let bind = if self.eat_sym("(") {
                let x = self.var()?;
                self.expect_sym(")")?;
                Some(x)
            } else {
                None
            };
            self.expect_sym("[")?;
            let body = self.events()?;
            let wait = Program::star(Program::event(vec![MicroEvent::Absent(signal.clone())]));
            let mut evs = vec![MicroEvent::Present { signal, bind }];
            evs.extend(body.events);
            return Ok(Program::seq(wait, Program::event(evs)));
        }
        if self.eat_sym("(") {
            let p = self.program()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        if self.is_kw("invariant") || self.is_kw("variant") {
            let keyword = match self.peek() {
                Tok::Ident(s) => s.clone(),
                _ => unreachable!(),
            };
            return Err(ParseError::MisplacedAnnotation { pos: self.pos(), keyword });
        }
        let pos = self.pos();
        let name = self.ident()?;
        match &self.scope {
            Some(sc) => sc
                .programs
                .get(&name)
                .cloned()
                .ok_or(ParseError::Undeclared { pos, kind: "program", name }),
            None => Err(ParseError::Undeclared { pos, kind: "program", name }),
        }
    }

    // -- files ---------------------------------------------------------------

    fn file(&mut self) -> PResult<SourceSpec> {
        let mut spec = SourceSpec::default();
        let mut names = BTreeSet::new();
        loop {
            if matches!(self.peek(), Tok::Eof) {
                return Ok(spec);
            }
            let pos = self.pos();
            if self.eat_kw("signal") || self.eat_kw("var") {
                let is_signal = matches!(&self.toks[self.at - 1].0, Tok::Ident(k) if k == "signal");
                loop {
                    let pos = self.pos();
                    let x = self.ident()?;
                    if !names.insert(x.clone()) {
                        return Err(ParseError::Duplicate { pos, name: x });
                    }
                    let sc = self.scope.as_mut().expect("file scope");
                    if is_signal {
                        sc.signals.insert(x.clone());
                        spec.signals.push(x);
                    } else {
                        sc.vars.insert(x.clone());
                        spec.vars.push(x);
                    }
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            } else if self.eat_kw("program") {
                let pos = self.pos();
                let name = self.ident()?;
                if !names.insert(name.clone()) {
                    return Err(ParseError::Duplicate { pos, name });
                }
                self.expect_sym("=")?;
                let p = self.program()?;
                self.scope.as_mut().expect("file scope").programs.insert(name.clone(), p.clone());
                spec.programs.push((name, p));
            } else if self.eat_kw("goal") {
                let pos = self.pos();
                let name = self.ident()?;
                if !names.insert(name.clone()) {
                    return Err(ParseError::Duplicate { pos, name });
                }
                self.expect_sym("=")?;
                let formula = self.formula()?;
                let default_invariant = if self.eat_kw("with") {
                    self.expect_kw("invariant")?;
                    Some(self.paren_afol()?)
                } else {
                    None
                };
                spec.goals.push(Goal { name, formula, default_invariant });
            } else {
                let _ = pos;
                return self.unexpected("'signal', 'var', 'program' or 'goal'");
            }
        }
    }

    fn finish<T>(&mut self, v: T) -> PResult<T> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(v)
        } else {
            self.unexpected("end of input")
        }
    }
}

/// Parses a whole source file, checking that every name is declared.
pub fn parse(src: &str) -> Result<SourceSpec, ParseError> {
    let scope = Scope {
        signals: BTreeSet::new(),
        vars: BTreeSet::new(),
        programs: BTreeMap::new(),
        bound: Vec::new(),
    };
    let mut p = Parser::new(src, Some(scope))?;
    let spec = p.file()?;
    p.finish(spec)
}

/// Parses a single program without declaration checks.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src, None)?;
    let prog = p.program()?;
    p.finish(prog)
}

/// Parses a single formula without declaration checks.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, None)?;
    let f = p.formula()?;
    p.finish(f)
}

/// Parses a single term without declaration checks.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, None)?;
    let t = p.term()?;
    p.finish(t)
}
