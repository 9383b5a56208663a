//! Model files.
//!
//! ```text
//! param p;
//! clock x;                       // starts at 0 unless `= c` is given
//! signal s1 in [0, 10];
//! bool P = 1;
//! var v in [-2, 2];
//! automaton ptas spec {
//!     loc l1 invariant x <= p;
//!     loc l2 accepting;
//!     edge l1 -> l2 when x >= 5 && s1 = s2 sync sense do { x := 0 };
//!     init l1;
//! }
//! target l2;
//! ```
//!
//! Constraints are conjunctions (`&&`) of possibly chained comparisons
//! between linear expressions. A bare boolean `P` means `P = 1` and `!P`
//! means `P = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use super::lexer::{lex, Pos, Tok, Token};
use crate::automata::{
    private_action, validate, Automaton, AutomatonKind, Edge, Flow, InitInterval, Location,
    Network, VarKind, Violation,
};
use crate::poly::{
    AtomicConstraint, DimId, DimKind, LinearTerm, PolyError, Polyhedron, Rational, Space,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{file}:{pos}: {msg}")]
    Syntax { file: String, pos: Pos, msg: String },
    #[error("{file}:{pos}: undeclared identifier `{name}`")]
    Undeclared {
        file: String,
        pos: Pos,
        name: String,
    },
    #[error("`{0}` is declared twice with different meanings")]
    Redeclared(String),
    #[error("no `ptas` or `plma` automaton to act as the specification")]
    NoSpec,
    #[error("no target location: add a `target` line or mark a location `accepting`")]
    NoTarget,
    #[error("ill-formed model:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

// ---------------------------------------------------------------- AST

#[derive(Debug, Clone)]
struct RawTerm {
    coeffs: Vec<(String, Pos, Rational)>,
    constant: Rational,
}

impl RawTerm {
    fn constant(c: Rational) -> Self {
        RawTerm {
            coeffs: Vec::new(),
            constant: c,
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|(_, _, c)| c.is_zero())
    }

    fn scale(mut self, k: &Rational) -> Self {
        for (_, _, c) in &mut self.coeffs {
            *c = &*c * k;
        }
        self.constant = &self.constant * k;
        self
    }

    fn add(mut self, other: RawTerm, sign: &Rational) -> Self {
        for (n, p, c) in other.coeffs {
            self.coeffs.push((n, p, c * sign));
        }
        self.constant = &self.constant + &(other.constant * sign);
        self
    }
}

#[derive(Debug, Clone)]
enum RawAtom {
    Cmp {
        lhs: RawTerm,
        rel: Tok,
        rhs: RawTerm,
    },
    Bool {
        name: String,
        pos: Pos,
        value: bool,
    },
}

#[derive(Debug, Clone)]
enum RawFlow {
    Rate(Rational),
    Free,
}

#[derive(Debug, Clone)]
struct RawLoc {
    name: String,
    pos: Pos,
    accepting: bool,
    invariant: Vec<RawAtom>,
    flow: Vec<(String, Pos, RawFlow)>,
}

#[derive(Debug, Clone)]
struct RawEdge {
    source: (String, Pos),
    target: (String, Pos),
    guard: Vec<RawAtom>,
    action: Option<String>,
    updates: Vec<(String, Pos, Rational)>,
}

#[derive(Debug, Clone)]
struct RawAutomaton {
    file: String,
    kind: AutomatonKind,
    name: String,
    locs: Vec<RawLoc>,
    edges: Vec<RawEdge>,
    init: Option<(String, Pos)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct RawDecl {
    name: String,
    kind: Option<VarKind>,
    init: Option<(Rational, Rational)>,
}

#[derive(Debug, Clone, Default)]
struct RawModel {
    decls: Vec<RawDecl>,
    automata: Vec<RawAutomaton>,
    targets: Vec<(String, String, Pos)>,
}

// ---------------------------------------------------------------- parser

struct Parser<'a> {
    file: &'a str,
    toks: Vec<Token>,
    i: usize,
}

type PResult<T> = Result<T, ModelError>;

impl<'a> Parser<'a> {
    fn new(file: &'a str, src: &str) -> PResult<Self> {
        let toks = lex(src).map_err(|(pos, msg)| ModelError::Syntax {
            file: file.to_string(),
            pos,
            msg,
        })?;
        Ok(Parser { file, toks, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ModelError::Syntax {
            file: self.file.to_string(),
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {}, found {}", t, self.peek()))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.pos();
                self.bump();
                Ok((s, p))
            }
            other => self.err(format!("expected identifier, found {other}")),
        }
    }

    fn model(&mut self) -> PResult<RawModel> {
        let mut m = RawModel::default();
        loop {
            let (kw, _) = match self.peek() {
                Tok::Eof => break,
                Tok::Ident(_) => self.ident()?,
                other => return self.err(format!("expected a declaration, found {other}")),
            };
            match kw.as_str() {
                "param" => loop {
                    let (name, _) = self.ident()?;
                    m.decls.push(RawDecl {
                        name,
                        kind: None,
                        init: None,
                    });
                    if !self.eat(&Tok::Comma) {
                        self.expect(Tok::Semi)?;
                        break;
                    }
                },
                "clock" | "bool" => loop {
                    let kind = if kw == "clock" {
                        VarKind::Clock
                    } else {
                        VarKind::Boolean
                    };
                    let (name, _) = self.ident()?;
                    let init = if self.eat(&Tok::Eq) {
                        let v = self.constant()?;
                        Some((v.clone(), v))
                    } else {
                        Some((Rational::zero(), Rational::zero()))
                    };
                    m.decls.push(RawDecl {
                        name,
                        kind: Some(kind),
                        init,
                    });
                    if !self.eat(&Tok::Comma) {
                        self.expect(Tok::Semi)?;
                        break;
                    }
                },
                "signal" | "var" => {
                    let kind = if kw == "signal" {
                        VarKind::Signal
                    } else {
                        VarKind::Continuous
                    };
                    let (name, _) = self.ident()?;
                    let init = if self.eat(&Tok::Eq) {
                        let v = self.constant()?;
                        (v.clone(), v)
                    } else {
                        if !self.is_kw("in") {
                            return self.err("expected `in [lo, hi]` or `= value`");
                        }
                        self.bump();
                        self.expect(Tok::LBrack)?;
                        let lo = self.constant()?;
                        self.expect(Tok::Comma)?;
                        let hi = self.constant()?;
                        self.expect(Tok::RBrack)?;
                        if lo > hi {
                            return self.err(format!("empty interval [{lo}, {hi}]"));
                        }
                        (lo, hi)
                    };
                    self.expect(Tok::Semi)?;
                    m.decls.push(RawDecl {
                        name,
                        kind: Some(kind),
                        init: Some(init),
                    });
                }
                "automaton" => {
                    let a = self.automaton()?;
                    m.automata.push(a);
                }
                "target" => loop {
                    let (name, pos) = self.ident()?;
                    m.targets.push((self.file.to_string(), name, pos));
                    if !self.eat(&Tok::Comma) {
                        self.expect(Tok::Semi)?;
                        break;
                    }
                },
                other => return self.err(format!("unknown declaration `{other}`")),
            }
        }
        Ok(m)
    }

    fn automaton(&mut self) -> PResult<RawAutomaton> {
        let (k, _) = self.ident()?;
        let kind = match k.as_str() {
            "ptas" => AutomatonKind::Ptas,
            "sba" => AutomatonKind::Sba,
            "plma" => AutomatonKind::Plma,
            other => {
                return self.err(format!(
                    "unknown automaton kind `{other}` (ptas, sba or plma)"
                ))
            }
        };
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut a = RawAutomaton {
            file: self.file.to_string(),
            kind,
            name,
            locs: Vec::new(),
            edges: Vec::new(),
            init: None,
        };
        while !self.eat(&Tok::RBrace) {
            let (kw, _) = self.ident()?;
            match kw.as_str() {
                "loc" => {
                    let (name, pos) = self.ident()?;
                    let mut loc = RawLoc {
                        name,
                        pos,
                        accepting: false,
                        invariant: Vec::new(),
                        flow: Vec::new(),
                    };
                    while !self.eat(&Tok::Semi) {
                        let (kw, _) = self.ident()?;
                        match kw.as_str() {
                            "accepting" => loc.accepting = true,
                            "invariant" => loc.invariant.extend(self.constraint()?),
                            "flow" => {
                                self.expect(Tok::LBrace)?;
                                while !self.eat(&Tok::RBrace) {
                                    let (v, p) = self.ident()?;
                                    self.expect(Tok::Colon)?;
                                    let f = if self.is_kw("free") {
                                        self.bump();
                                        RawFlow::Free
                                    } else {
                                        RawFlow::Rate(self.constant()?)
                                    };
                                    loc.flow.push((v, p, f));
                                    if !self.eat(&Tok::Comma) {
                                        self.expect(Tok::RBrace)?;
                                        break;
                                    }
                                }
                            }
                            other => return self.err(format!("unexpected `{other}` in location")),
                        }
                    }
                    a.locs.push(loc);
                }
                "edge" => {
                    let source = self.ident()?;
                    self.expect(Tok::Arrow)?;
                    let target = self.ident()?;
                    let mut e = RawEdge {
                        source,
                        target,
                        guard: Vec::new(),
                        action: None,
                        updates: Vec::new(),
                    };
                    while !self.eat(&Tok::Semi) {
                        let (kw, _) = self.ident()?;
                        match kw.as_str() {
                            "when" => e.guard.extend(self.constraint()?),
                            "sync" => e.action = Some(self.ident()?.0),
                            "do" => {
                                self.expect(Tok::LBrace)?;
                                while !self.eat(&Tok::RBrace) {
                                    let (v, p) = self.ident()?;
                                    self.expect(Tok::Assign)?;
                                    let val = if self.is_kw("true") {
                                        self.bump();
                                        Rational::one()
                                    } else if self.is_kw("false") {
                                        self.bump();
                                        Rational::zero()
                                    } else {
                                        self.constant()?
                                    };
                                    e.updates.push((v, p, val));
                                    if !self.eat(&Tok::Comma) {
                                        self.expect(Tok::RBrace)?;
                                        break;
                                    }
                                }
                            }
                            other => return self.err(format!("unexpected `{other}` in edge")),
                        }
                    }
                    a.edges.push(e);
                }
                "init" => {
                    a.init = Some(self.ident()?);
                    self.expect(Tok::Semi)?;
                }
                other => return self.err(format!("unexpected `{other}` in automaton body")),
            }
        }
        Ok(a)
    }

    fn constant(&mut self) -> PResult<Rational> {
        let pos = self.pos();
        let t = self.sum()?;
        if !t.is_constant() {
            return Err(ModelError::Syntax {
                file: self.file.to_string(),
                pos,
                msg: "expected a constant".into(),
            });
        }
        Ok(t.constant)
    }

    fn constraint(&mut self) -> PResult<Vec<RawAtom>> {
        let mut atoms = Vec::new();
        loop {
            if self.is_kw("true") {
                self.bump();
            } else if *self.peek() == Tok::Bang {
                self.bump();
                let (name, pos) = self.ident()?;
                atoms.push(RawAtom::Bool {
                    name,
                    pos,
                    value: false,
                });
            } else if matches!(self.peek(), Tok::Ident(_)) && !is_term_cont(self.peek_at(1)) {
                let (name, pos) = self.ident()?;
                atoms.push(RawAtom::Bool {
                    name,
                    pos,
                    value: true,
                });
            } else {
                let mut lhs = self.sum()?;
                let mut any = false;
                while let Some(rel) = rel_tok(self.peek()) {
                    self.bump();
                    let rhs = self.sum()?;
                    atoms.push(RawAtom::Cmp {
                        lhs,
                        rel,
                        rhs: rhs.clone(),
                    });
                    lhs = rhs;
                    any = true;
                }
                if !any {
                    return self.err(format!("expected a comparison, found {}", self.peek()));
                }
            }
            if !self.eat(&Tok::And) {
                break;
            }
        }
        Ok(atoms)
    }

    fn sum(&mut self) -> PResult<RawTerm> {
        let mut acc = self.product()?;
        loop {
            let sign = match self.peek() {
                Tok::Plus => Rational::one(),
                Tok::Minus => -Rational::one(),
                _ => break,
            };
            self.bump();
            let rhs = self.product()?;
            acc = acc.add(rhs, &sign);
        }
        Ok(acc)
    }

    fn product(&mut self) -> PResult<RawTerm> {
        let mut acc = self.unary()?;
        loop {
            let op = self.peek().clone();
            if op != Tok::Star && op != Tok::Slash {
                break;
            }
            let pos = self.pos();
            self.bump();
            let rhs = self.unary()?;
            let bad = |msg: &str| ModelError::Syntax {
                file: self.file.to_string(),
                pos,
                msg: msg.into(),
            };
            acc = if op == Tok::Star {
                if rhs.is_constant() {
                    acc.scale(&rhs.constant)
                } else if acc.is_constant() {
                    rhs.scale(&acc.constant)
                } else {
                    return Err(bad("product of two variables is not linear"));
                }
            } else {
                if !rhs.is_constant() {
                    return Err(bad("division by a variable is not linear"));
                }
                if rhs.constant.is_zero() {
                    return Err(bad("division by zero"));
                }
                acc.scale(&rhs.constant.recip())
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult<RawTerm> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(self.unary()?.scale(&-Rational::one()))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            Tok::Num(s) => {
                let pos = self.pos();
                self.bump();
                let v: Rational = s.parse().map_err(|_| ModelError::Syntax {
                    file: self.file.to_string(),
                    pos,
                    msg: format!("bad number {s}"),
                })?;
                Ok(RawTerm::constant(v))
            }
            Tok::Ident(s) => {
                let pos = self.pos();
                self.bump();
                Ok(RawTerm {
                    coeffs: vec![(s, pos, Rational::one())],
                    constant: Rational::zero(),
                })
            }
            Tok::LParen => {
                self.bump();
                let t = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => self.err(format!("expected an expression, found {other}")),
        }
    }
}

fn rel_tok(t: &Tok) -> Option<Tok> {
    matches!(t, Tok::Lt | Tok::Le | Tok::Eq | Tok::Ge | Tok::Gt).then(|| t.clone())
}

/// Tokens that continue an arithmetic term after an identifier.
fn is_term_cont(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Lt
            | Tok::Le
            | Tok::Eq
            | Tok::Ge
            | Tok::Gt
            | Tok::Plus
            | Tok::Minus
            | Tok::Star
            | Tok::Slash
    )
}

// ---------------------------------------------------------------- resolution

struct Resolver<'a> {
    file: &'a str,
    space: &'a Space,
    kinds: &'a BTreeMap<String, VarKind>,
}

impl Resolver<'_> {
    fn dim(&self, name: &str, pos: Pos) -> Result<DimId, ModelError> {
        self.space
            .lookup(name)
            .ok_or_else(|| ModelError::Undeclared {
                file: self.file.to_string(),
                pos,
                name: name.to_string(),
            })
    }

    fn term(&self, t: &RawTerm) -> Result<LinearTerm, ModelError> {
        let mut out = LinearTerm::constant(t.constant.clone());
        for (n, p, c) in &t.coeffs {
            out.add_coeff(self.dim(n, *p)?, c);
        }
        Ok(out)
    }

    fn atoms(&self, raw: &[RawAtom]) -> Result<Vec<AtomicConstraint>, ModelError> {
        let mut out = Vec::new();
        for a in raw {
            match a {
                RawAtom::Cmp { lhs, rel, rhs } => {
                    let (l, r) = (self.term(lhs)?, self.term(rhs)?);
                    out.push(match rel {
                        Tok::Lt => AtomicConstraint::lt(l, r),
                        Tok::Le => AtomicConstraint::le(l, r),
                        Tok::Eq => AtomicConstraint::eq(l, r),
                        Tok::Ge => AtomicConstraint::ge(l, r),
                        Tok::Gt => AtomicConstraint::gt(l, r),
                        _ => unreachable!("relation token"),
                    });
                }
                RawAtom::Bool { name, pos, value } => {
                    let d = self.dim(name, *pos)?;
                    if self.kinds.get(name) != Some(&VarKind::Boolean) {
                        return Err(ModelError::Syntax {
                            file: self.file.to_string(),
                            pos: *pos,
                            msg: format!("`{name}` is not a boolean; compare it explicitly"),
                        });
                    }
                    let v = if *value {
                        Rational::one()
                    } else {
                        Rational::zero()
                    };
                    out.push(AtomicConstraint::eq(
                        LinearTerm::var(d),
                        LinearTerm::constant(v),
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Parses a constraint over an existing registry, e.g. `0 <= x < 5 && y > x`.
pub fn parse_constraint(space: &Arc<Space>, text: &str) -> Result<Polyhedron, ModelError> {
    let file = "<constraint>";
    let mut p = Parser::new(file, text)?;
    let raw = p.constraint()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {}", p.peek()));
    }
    let kinds = BTreeMap::new();
    let r = Resolver {
        file,
        space,
        kinds: &kinds,
    };
    Ok(Polyhedron::from_atoms(space, &r.atoms(&raw)?)?)
}

/// Parses and merges model files given as `(name, contents)` pairs. The
/// first `ptas` (or else `plma`) block is the specification; `sba` blocks
/// are its bounders.
pub fn parse_model(files: &[(&str, &str)]) -> Result<Network, ModelError> {
    let mut merged = RawModel::default();
    for (name, text) in files {
        let m = Parser::new(name, text)?.model()?;
        for d in m.decls {
            match merged.decls.iter().find(|e| e.name == d.name) {
                Some(prev) if *prev == d => {}
                Some(_) => return Err(ModelError::Redeclared(d.name)),
                None => merged.decls.push(d),
            }
        }
        merged.automata.extend(m.automata);
        merged.targets.extend(m.targets);
    }
    build_network(merged)
}

pub fn parse_model_str(text: &str) -> Result<Network, ModelError> {
    parse_model(&[("<input>", text)])
}

fn build_network(m: RawModel) -> Result<Network, ModelError> {
    // params, clocks, then everything else, each in declaration order
    let mut global = Space::new();
    let mut kinds: BTreeMap<String, VarKind> = BTreeMap::new();
    let mut inits: BTreeMap<String, InitInterval> = BTreeMap::new();
    for d in m.decls.iter().filter(|d| d.kind.is_none()) {
        global.push(d.name.clone(), DimKind::Parameter);
    }
    let clocks = m.decls.iter().filter(|d| d.kind == Some(VarKind::Clock));
    let others = m
        .decls
        .iter()
        .filter(|d| d.kind.is_some() && d.kind != Some(VarKind::Clock));
    for d in clocks.chain(others) {
        global.push(d.name.clone(), DimKind::Variable);
        kinds.insert(d.name.clone(), d.kind.expect("variable"));
        let (lo, hi) = d.init.clone().expect("variables carry an init");
        inits.insert(d.name.clone(), InitInterval { lo, hi });
    }
    let global = Arc::new(global);

    let spec_idx = m
        .automata
        .iter()
        .position(|a| a.kind == AutomatonKind::Ptas)
        .or_else(|| {
            m.automata
                .iter()
                .position(|a| a.kind == AutomatonKind::Plma)
        })
        .ok_or(ModelError::NoSpec)?;
    let mut spec = None;
    let mut bounders = Vec::new();
    let mut violations = Vec::new();
    for (i, raw) in m.automata.iter().enumerate() {
        if i != spec_idx && raw.kind != AutomatonKind::Sba {
            violations.push(Violation {
                automaton: raw.name.clone(),
                message: format!(
                    "only one specification allowed; extra `{}` block",
                    raw.kind.keyword()
                ),
            });
            continue;
        }
        let mut a = build_automaton(raw, &global, &kinds, &inits)?;
        if i == spec_idx {
            for (file, name, pos) in &m.targets {
                let l = a.loc_id(name).ok_or_else(|| ModelError::Undeclared {
                    file: file.clone(),
                    pos: *pos,
                    name: name.clone(),
                })?;
                a.locations[l].accepting = true;
            }
            spec = Some(a);
        } else {
            bounders.push(a);
        }
    }
    let spec = spec.expect("spec index is valid");
    for a in std::iter::once(&spec).chain(&bounders) {
        violations.extend(validate(a));
    }
    if !violations.is_empty() {
        return Err(ModelError::Invalid(violations));
    }
    if spec.accepting().is_empty() {
        return Err(ModelError::NoTarget);
    }
    Ok(Network { spec, bounders })
}

fn build_automaton(
    raw: &RawAutomaton,
    global: &Arc<Space>,
    kinds: &BTreeMap<String, VarKind>,
    inits: &BTreeMap<String, InitInterval>,
) -> Result<Automaton, ModelError> {
    let r = Resolver {
        file: &raw.file,
        space: global,
        kinds,
    };
    let syntax = |pos: Pos, msg: String| ModelError::Syntax {
        file: raw.file.clone(),
        pos,
        msg,
    };

    // Resolve everything against the global registry first.
    let mut invs = Vec::new();
    let mut used: BTreeSet<DimId> = BTreeSet::new();
    for l in &raw.locs {
        let atoms = r.atoms(&l.invariant)?;
        used.extend(atoms.iter().flat_map(|a| a.term.dims().collect::<Vec<_>>()));
        let mut flow = Vec::new();
        for (n, p, f) in &l.flow {
            let d = r.dim(n, *p)?;
            if global.dim(d).kind == DimKind::Parameter {
                return Err(syntax(*p, format!("parameter `{n}` cannot have a flow")));
            }
            used.insert(d);
            flow.push((d, f.clone()));
        }
        invs.push((atoms, flow));
    }
    let loc_id = |name: &str, pos: Pos| -> Result<usize, ModelError> {
        raw.locs
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| ModelError::Undeclared {
                file: raw.file.clone(),
                pos,
                name: name.to_string(),
            })
    };
    for (i, l) in raw.locs.iter().enumerate() {
        if raw.locs[..i].iter().any(|o| o.name == l.name) {
            return Err(syntax(
                l.pos,
                format!("location `{}` defined twice", l.name),
            ));
        }
    }
    let mut edges_g = Vec::new();
    for e in &raw.edges {
        let src = loc_id(&e.source.0, e.source.1)?;
        let tgt = loc_id(&e.target.0, e.target.1)?;
        let atoms = r.atoms(&e.guard)?;
        used.extend(atoms.iter().flat_map(|a| a.term.dims().collect::<Vec<_>>()));
        let mut ups = BTreeMap::new();
        for (n, p, v) in &e.updates {
            let d = r.dim(n, *p)?;
            if global.dim(d).kind == DimKind::Parameter {
                return Err(syntax(*p, format!("parameter `{n}` cannot be updated")));
            }
            used.insert(d);
            ups.insert(d, v.clone());
        }
        edges_g.push((src, tgt, atoms, ups));
    }

    // Specifications see every declaration; bounders only what they use.
    let keep: Vec<DimId> = if raw.kind == AutomatonKind::Sba {
        (0..global.len()).filter(|d| used.contains(d)).collect()
    } else {
        (0..global.len()).collect()
    };
    let mut local = Space::new();
    for &d in &keep {
        local.push(global.name(d).to_string(), global.dim(d).kind);
    }
    let local = Arc::new(local);
    let to_local: BTreeMap<DimId, DimId> = keep.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let remap_atoms = |atoms: &[AtomicConstraint]| -> Vec<AtomicConstraint> {
        atoms
            .iter()
            .map(|a| {
                AtomicConstraint::new(
                    LinearTerm::from_parts(
                        a.term
                            .coeffs()
                            .iter()
                            .map(|(d, c)| (to_local[d], c.clone())),
                        a.term.constant_part().clone(),
                    ),
                    a.rel,
                )
            })
            .collect()
    };

    let mut var_kinds = BTreeMap::new();
    let mut init_box = BTreeMap::new();
    for (i, d) in keep.iter().enumerate() {
        if global.dim(*d).kind == DimKind::Variable {
            let name = global.name(*d);
            var_kinds.insert(i, kinds[name]);
            init_box.insert(i, inits[name].clone());
        }
    }

    let mut locations = Vec::new();
    for (l, (atoms, flows)) in raw.locs.iter().zip(invs) {
        let mut flow = BTreeMap::new();
        for (d, k) in &var_kinds {
            let default = match k {
                VarKind::Clock => Some(Flow::Rate(Rational::one())),
                VarKind::Boolean => Some(Flow::Rate(Rational::zero())),
                VarKind::Signal if raw.kind == AutomatonKind::Ptas => Some(Flow::Free),
                _ => None,
            };
            if let Some(f) = default {
                flow.insert(*d, f);
            }
        }
        for (d, f) in flows {
            let f = match f {
                RawFlow::Rate(q) => Flow::Rate(q),
                RawFlow::Free => Flow::Free,
            };
            flow.insert(to_local[&d], f);
        }
        locations.push(Location {
            name: l.name.clone(),
            accepting: l.accepting,
            invariant: Polyhedron::from_atoms(&local, &remap_atoms(&atoms))?,
            flow,
        });
    }
    let mut edges = Vec::new();
    let mut actions = BTreeSet::new();
    for (i, ((src, tgt, atoms, ups), raw_e)) in edges_g.into_iter().zip(&raw.edges).enumerate() {
        let action = raw_e
            .action
            .clone()
            .unwrap_or_else(|| private_action(&raw.name, i));
        actions.insert(action.clone());
        edges.push(Edge {
            source: src,
            target: tgt,
            guard: Polyhedron::from_atoms(&local, &remap_atoms(&atoms))?,
            action,
            updates: ups.into_iter().map(|(d, v)| (to_local[&d], v)).collect(),
        });
    }
    let initial = match &raw.init {
        Some((n, p)) => loc_id(n, *p)?,
        None if !raw.locs.is_empty() => 0,
        None => {
            return Err(syntax(
                Pos::default(),
                format!("automaton `{}` has no locations", raw.name),
            ))
        }
    };
    Ok(Automaton {
        name: raw.name.clone(),
        kind: raw.kind,
        space: local,
        var_kinds,
        init_box,
        actions,
        locations,
        initial,
        edges,
    })
}
