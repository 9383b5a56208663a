//! Automaton syntax: locations, invariants, per-location flows, guarded
//! edges with constant updates. One type covers specifications with signals,
//! signal bounding automata and their linear multi-rate product.

mod compose;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::poly::{DimId, DimKind, FlowMap, Polyhedron, Rational, Space};

pub use compose::compose;
pub use validate::{
    is_strongly_deterministic, validate, validate_plma, validate_ptas, validate_sba, Violation,
};

pub type LocId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// Rate 1 everywhere in a specification.
    Clock,
    /// Rate left free by the specification, fixed by a bounding automaton.
    Signal,
    /// Rate-0 signal restricted to {0, 1}.
    Boolean,
    /// Arbitrary constant-rate variable.
    Continuous,
}

impl VarKind {
    pub fn keyword(self) -> &'static str {
        match self {
            VarKind::Clock => "clock",
            VarKind::Signal => "signal",
            VarKind::Boolean => "bool",
            VarKind::Continuous => "var",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AutomatonKind {
    Ptas,
    Sba,
    Plma,
}

impl AutomatonKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AutomatonKind::Ptas => "ptas",
            AutomatonKind::Sba => "sba",
            AutomatonKind::Plma => "plma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flow {
    Rate(Rational),
    /// Any real rate.
    Free,
}

#[derive(Debug, Clone)]
pub struct Location {
    pub name: String,
    pub accepting: bool,
    pub invariant: Polyhedron,
    /// One entry per variable dim of the owning automaton.
    pub flow: BTreeMap<DimId, Flow>,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub source: LocId,
    pub target: LocId,
    pub guard: Polyhedron,
    pub action: String,
    pub updates: BTreeMap<DimId, Rational>,
}

/// Closed initial interval of a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl InitInterval {
    pub fn point(v: Rational) -> Self {
        InitInterval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }
}

#[derive(Debug, Clone)]
pub struct Automaton {
    pub name: String,
    pub kind: AutomatonKind,
    pub space: Arc<Space>,
    /// Kind of every variable dim.
    pub var_kinds: BTreeMap<DimId, VarKind>,
    pub init_box: BTreeMap<DimId, InitInterval>,
    pub actions: BTreeSet<String>,
    pub locations: Vec<Location>,
    pub initial: LocId,
    pub edges: Vec<Edge>,
}

/// A specification plus one bounding automaton per signal.
#[derive(Debug, Clone)]
pub struct Network {
    pub spec: Automaton,
    pub bounders: Vec<Automaton>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("variable `{var}` gets rates {a} and {b} in location {loc}")]
    FlowConflict {
        var: String,
        a: Rational,
        b: Rational,
        loc: String,
    },
    #[error("variable `{var}` has no constant rate in location {loc}")]
    FreeFlow { var: String, loc: String },
    #[error("edge on `{action}` assigns `{var}` both {a} and {b}")]
    UpdateConflict {
        action: String,
        var: String,
        a: Rational,
        b: Rational,
    },
    #[error("variable `{0}` is declared with different kinds across components")]
    KindMismatch(String),
    #[error("signal `{0}` is bounded by {1} automata")]
    Ownership(String, usize),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
}

impl Automaton {
    pub fn loc_id(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn var_name(&self, d: DimId) -> &str {
        self.space.name(d)
    }

    pub fn vars(&self) -> impl Iterator<Item = DimId> + '_ {
        self.var_kinds.keys().copied()
    }

    pub fn params(&self) -> impl Iterator<Item = DimId> + '_ {
        self.space.params()
    }

    pub fn vars_of_kind(&self, kind: VarKind) -> impl Iterator<Item = DimId> + '_ {
        self.var_kinds
            .iter()
            .filter(move |(_, k)| **k == kind)
            .map(|(d, _)| *d)
    }

    pub fn accepting(&self) -> BTreeSet<LocId> {
        self.locations
            .iter()
            .enumerate()
            .filter(|(_, l)| l.accepting)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn outgoing(&self, loc: LocId) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == loc)
    }

    /// Constant rates of location `loc`. Free rates are reported as `None`.
    pub fn flow_map(&self, loc: LocId) -> Option<FlowMap> {
        let mut out = FlowMap::new();
        for (d, f) in &self.locations[loc].flow {
            match f {
                Flow::Rate(r) => {
                    out.insert(*d, r.clone());
                }
                Flow::Free => return None,
            }
        }
        Some(out)
    }

    /// Conjunction of the initial intervals.
    pub fn init_polyhedron(&self) -> Polyhedron {
        use crate::poly::{AtomicConstraint, LinearTerm};
        let mut atoms = Vec::new();
        for (d, iv) in &self.init_box {
            atoms.push(AtomicConstraint::ge(
                LinearTerm::var(*d),
                LinearTerm::constant(iv.lo.clone()),
            ));
            atoms.push(AtomicConstraint::le(
                LinearTerm::var(*d),
                LinearTerm::constant(iv.hi.clone()),
            ));
        }
        Polyhedron::universe(&self.space).with_atoms(&atoms)
    }

    /// `p >= 0` for every parameter.
    pub fn nonnegative_params(&self) -> Polyhedron {
        use crate::poly::{AtomicConstraint, LinearTerm};
        let atoms: Vec<AtomicConstraint> = self
            .space
            .params()
            .map(|p| AtomicConstraint::ge(LinearTerm::var(p), LinearTerm::zero()))
            .collect();
        Polyhedron::universe(&self.space).with_atoms(&atoms)
    }

    pub fn is_param(&self, d: DimId) -> bool {
        self.space.dim(d).kind == DimKind::Parameter
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flow::Rate(r) => write!(f, "{r}"),
            Flow::Free => f.write_str("free"),
        }
    }
}

/// Incremental construction of an [`Automaton`], mainly for tests and
/// generated models. Variables and parameters must be registered before
/// locations.
#[derive(Debug, Clone)]
pub struct AutomatonBuilder {
    name: String,
    kind: AutomatonKind,
    space: Space,
    var_kinds: BTreeMap<DimId, VarKind>,
    init_box: BTreeMap<DimId, InitInterval>,
    locations: Vec<(
        String,
        bool,
        Vec<crate::poly::AtomicConstraint>,
        BTreeMap<DimId, Flow>,
    )>,
    edges: Vec<(
        LocId,
        LocId,
        Vec<crate::poly::AtomicConstraint>,
        Option<String>,
        BTreeMap<DimId, Rational>,
    )>,
    initial: LocId,
}

impl AutomatonBuilder {
    pub fn new(name: impl Into<String>, kind: AutomatonKind) -> Self {
        AutomatonBuilder {
            name: name.into(),
            kind,
            space: Space::new(),
            var_kinds: BTreeMap::new(),
            init_box: BTreeMap::new(),
            locations: Vec::new(),
            edges: Vec::new(),
            initial: 0,
        }
    }

    pub fn param(&mut self, name: &str) -> DimId {
        self.space.push(name, DimKind::Parameter)
    }

    pub fn var(&mut self, name: &str, kind: VarKind, init: InitInterval) -> DimId {
        let d = self.space.push(name, DimKind::Variable);
        self.var_kinds.insert(d, kind);
        self.init_box.insert(d, init);
        d
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Flows not listed default per variable kind: clocks 1, booleans 0,
    /// signals free in a specification; anything else must be given.
    pub fn location(
        &mut self,
        name: &str,
        accepting: bool,
        invariant: Vec<crate::poly::AtomicConstraint>,
        flows: &[(DimId, Flow)],
    ) -> LocId {
        let mut flow = BTreeMap::new();
        for (d, k) in &self.var_kinds {
            let default = match k {
                VarKind::Clock => Some(Flow::Rate(Rational::one())),
                VarKind::Boolean => Some(Flow::Rate(Rational::zero())),
                VarKind::Signal if self.kind == AutomatonKind::Ptas => Some(Flow::Free),
                _ => None,
            };
            if let Some(f) = default {
                flow.insert(*d, f);
            }
        }
        for (d, f) in flows {
            flow.insert(*d, f.clone());
        }
        self.locations
            .push((name.to_string(), accepting, invariant, flow));
        self.locations.len() - 1
    }

    pub fn initial(&mut self, loc: LocId) {
        self.initial = loc;
    }

    pub fn edge(
        &mut self,
        source: LocId,
        target: LocId,
        guard: Vec<crate::poly::AtomicConstraint>,
        action: Option<&str>,
        updates: &[(DimId, Rational)],
    ) -> EdgeId {
        self.edges.push((
            source,
            target,
            guard,
            action.map(str::to_string),
            updates.iter().cloned().collect(),
        ));
        self.edges.len() - 1
    }

    pub fn build(self) -> Result<Automaton, crate::poly::PolyError> {
        let space = Arc::new(self.space);
        let mut locations = Vec::new();
        for (name, accepting, inv, flow) in self.locations {
            locations.push(Location {
                name,
                accepting,
                invariant: Polyhedron::from_atoms(&space, &inv)?,
                flow,
            });
        }
        let mut edges = Vec::new();
        let mut actions = BTreeSet::new();
        for (i, (source, target, guard, action, updates)) in self.edges.into_iter().enumerate() {
            let action = action.unwrap_or_else(|| private_action(&self.name, i));
            actions.insert(action.clone());
            edges.push(Edge {
                source,
                target,
                guard: Polyhedron::from_atoms(&space, &guard)?,
                action,
                updates,
            });
        }
        Ok(Automaton {
            name: self.name,
            kind: self.kind,
            space,
            var_kinds: self.var_kinds,
            init_box: self.init_box,
            actions,
            locations,
            initial: self.initial,
            edges,
        })
    }
}

/// Action name given to an unlabeled edge so that it never synchronizes.
pub fn private_action(automaton: &str, edge: EdgeId) -> String {
    format!("{automaton}.e{edge}")
}
