use std::collections::BTreeSet;
use std::fmt;

use super::{Automaton, AutomatonKind, Flow, VarKind};
use crate::poly::{DimKind, Polyhedron, Rational};

/// A well-formedness violation, reported as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub automaton: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.automaton, self.message)
    }
}

struct Report<'a> {
    a: &'a Automaton,
    out: Vec<Violation>,
}

impl Report<'_> {
    fn push(&mut self, message: String) {
        self.out.push(Violation {
            automaton: self.a.name.clone(),
            message,
        });
    }
}

fn kind_of(a: &Automaton, d: usize) -> Option<VarKind> {
    a.var_kinds.get(&d).copied()
}

fn mixed_atoms(a: &Automaton, c: &Polyhedron) -> Vec<String> {
    let mut bad = Vec::new();
    for atom in c.atoms() {
        let kinds: BTreeSet<VarKind> = atom.term.dims().filter_map(|d| kind_of(a, d)).collect();
        let has_clock = kinds.contains(&VarKind::Clock);
        let has_signal = kinds
            .iter()
            .any(|k| matches!(k, VarKind::Signal | VarKind::Boolean));
        if has_clock && has_signal {
            bad.push(atom.display(&a.space).to_string());
        }
    }
    bad
}

/// Specification rules: clocks have rate 1, signals are free and never
/// updated, and no atomic constraint mixes a clock with a signal.
pub fn validate_ptas(a: &Automaton) -> Vec<Violation> {
    let mut r = Report { a, out: Vec::new() };
    for (d, k) in &a.var_kinds {
        if *k == VarKind::Continuous {
            r.push(format!(
                "variable `{}` is neither a clock nor a signal",
                a.var_name(*d)
            ));
        }
    }
    for loc in &a.locations {
        for (d, f) in &loc.flow {
            match (kind_of(a, *d), f) {
                (Some(VarKind::Clock), Flow::Rate(q)) if q.is_one() => {}
                (Some(VarKind::Clock), _) => r.push(format!(
                    "clock `{}` has rate {} in location {}",
                    a.var_name(*d),
                    f,
                    loc.name
                )),
                (Some(VarKind::Signal), Flow::Free) => {}
                (Some(VarKind::Signal), _) => r.push(format!(
                    "signal `{}` has a fixed rate in location {}",
                    a.var_name(*d),
                    loc.name
                )),
                (Some(VarKind::Boolean), Flow::Free) => {}
                (Some(VarKind::Boolean), Flow::Rate(q)) if q.is_zero() => {}
                (Some(VarKind::Boolean), _) => r.push(format!(
                    "boolean `{}` drifts in location {}",
                    a.var_name(*d),
                    loc.name
                )),
                _ => {}
            }
        }
        for atom in mixed_atoms(a, &loc.invariant) {
            r.push(format!(
                "invariant of {} mixes a clock and a signal: {}",
                loc.name, atom
            ));
        }
    }
    for (i, e) in a.edges.iter().enumerate() {
        let label = edge_label(a, i);
        for d in e.updates.keys() {
            if kind_of(a, *d) == Some(VarKind::Signal) {
                r.push(format!(
                    "edge {} updates signal `{}`",
                    label,
                    a.var_name(*d)
                ));
            }
        }
        for atom in mixed_atoms(a, &e.guard) {
            r.push(format!(
                "guard of edge {} mixes a clock and a signal: {}",
                label, atom
            ));
        }
    }
    r.out
}

/// Bounding automaton rules: no parameters, a single signal (or only
/// booleans), never updated, with a constant rate in every location.
pub fn validate_sba(a: &Automaton) -> Vec<Violation> {
    let mut r = Report { a, out: Vec::new() };
    let used_params: BTreeSet<usize> = a
        .locations
        .iter()
        .map(|l| &l.invariant)
        .chain(a.edges.iter().map(|e| &e.guard))
        .flat_map(|c| c.constrained_dims())
        .filter(|d| a.space.dim(*d).kind == DimKind::Parameter)
        .collect();
    if a.space.params().next().is_some() {
        let names: Vec<&str> = a.space.params().map(|p| a.space.name(p)).collect();
        r.push(format!(
            "bounding automata take no parameters (found {})",
            names.join(", ")
        ));
    } else if !used_params.is_empty() {
        r.push("bounding automata take no parameters".to_string());
    }
    let signals: Vec<usize> = a.vars_of_kind(VarKind::Signal).collect();
    let booleans = a.vars_of_kind(VarKind::Boolean).count();
    match signals.len() {
        1 => {}
        0 if booleans > 0 => {}
        0 => r.push("no signal to bound".to_string()),
        n => r.push(format!("bounds {n} signals, expected one")),
    }
    for (d, k) in &a.var_kinds {
        if *k == VarKind::Continuous {
            r.push(format!(
                "variable `{}` is not a signal or clock",
                a.var_name(*d)
            ));
        }
    }
    for loc in &a.locations {
        for d in a.vars() {
            let f = loc.flow.get(&d);
            match (kind_of(a, d), f) {
                (Some(VarKind::Clock), Some(Flow::Rate(q))) if !q.is_one() => r.push(format!(
                    "clock `{}` has rate {} in location {}",
                    a.var_name(d),
                    q,
                    loc.name
                )),
                (_, Some(Flow::Rate(_))) => {}
                _ => r.push(format!(
                    "`{}` has no constant rate in location {}",
                    a.var_name(d),
                    loc.name
                )),
            }
        }
    }
    for (i, e) in a.edges.iter().enumerate() {
        for d in e.updates.keys() {
            if kind_of(a, *d) == Some(VarKind::Signal) {
                r.push(format!(
                    "edge {} updates signal `{}`",
                    edge_label(a, i),
                    a.var_name(*d)
                ));
            }
        }
    }
    r.out
}

/// Every variable has a constant rate in every location.
pub fn validate_plma(a: &Automaton) -> Vec<Violation> {
    let mut r = Report { a, out: Vec::new() };
    for loc in &a.locations {
        for d in a.vars() {
            match loc.flow.get(&d) {
                Some(Flow::Rate(_)) => {}
                _ => r.push(format!(
                    "`{}` has no constant rate in location {}",
                    a.var_name(d),
                    loc.name
                )),
            }
        }
    }
    r.out
}

/// Checks the rules matching the automaton's declared kind, plus boolean
/// updates being 0 or 1.
pub fn validate(a: &Automaton) -> Vec<Violation> {
    let mut out = match a.kind {
        AutomatonKind::Ptas => validate_ptas(a),
        AutomatonKind::Sba => validate_sba(a),
        AutomatonKind::Plma => validate_plma(a),
    };
    for (i, e) in a.edges.iter().enumerate() {
        for (d, v) in &e.updates {
            if kind_of(a, *d) == Some(VarKind::Boolean) && !(v.is_zero() || *v == Rational::one()) {
                out.push(Violation {
                    automaton: a.name.clone(),
                    message: format!(
                        "edge {} sets boolean `{}` to {}",
                        edge_label(a, i),
                        a.var_name(*d),
                        v
                    ),
                });
            }
        }
    }
    out
}

/// At most one outgoing edge per (location, action).
pub fn is_strongly_deterministic(a: &Automaton) -> bool {
    let mut seen = BTreeSet::new();
    a.edges
        .iter()
        .all(|e| seen.insert((e.source, e.action.as_str())))
}

fn edge_label(a: &Automaton, i: usize) -> String {
    let e = &a.edges[i];
    format!(
        "{} -> {} ({})",
        a.locations[e.source].name, a.locations[e.target].name, e.action
    )
}
