use std::fmt::Write;

use crate::automata::{private_action, Automaton, AutomatonKind, Flow, Network, VarKind};
use crate::poly::{DimKind, Polyhedron};

fn constraint_text(a: &Automaton, c: &Polyhedron) -> String {
    c.atoms()
        .iter()
        .map(|x| x.display(&a.space).to_string())
        .collect::<Vec<_>>()
        .join(" && ")
}

/// Renders a network back into model syntax with every flow spelled out,
/// so that parsing the output yields the same network.
pub fn emit_model(net: &Network) -> String {
    let mut out = String::new();
    let comps: Vec<&Automaton> = std::iter::once(&net.spec).chain(&net.bounders).collect();

    let mut params: Vec<&str> = Vec::new();
    let mut vars: Vec<(&str, VarKind, &Automaton, usize)> = Vec::new();
    for c in &comps {
        for d in 0..c.space.len() {
            let name = c.space.name(d);
            match c.space.dim(d).kind {
                DimKind::Parameter if !params.contains(&name) => params.push(name),
                DimKind::Variable if !vars.iter().any(|v| v.0 == name) => {
                    vars.push((name, c.var_kinds[&d], c, d))
                }
                _ => {}
            }
        }
    }
    for p in &params {
        let _ = writeln!(out, "param {p};");
    }
    for (name, kind, c, d) in &vars {
        let iv = &c.init_box[d];
        match kind {
            VarKind::Clock | VarKind::Boolean if iv.lo == iv.hi => {
                let _ = writeln!(out, "{} {} = {};", kind.keyword(), name, iv.lo);
            }
            _ => {
                let _ = writeln!(
                    out,
                    "{} {} in [{}, {}];",
                    kind.keyword(),
                    name,
                    iv.lo,
                    iv.hi
                );
            }
        }
    }

    for (k, c) in comps.iter().enumerate() {
        let _ = writeln!(out, "\nautomaton {} {} {{", c.kind.keyword(), c.name);
        for l in &c.locations {
            let _ = write!(out, "    loc {}", l.name);
            if l.accepting && k > 0 {
                out.push_str(" accepting");
            }
            if !l.invariant.is_universe() {
                let _ = write!(out, " invariant {}", constraint_text(c, &l.invariant));
            }
            if !l.flow.is_empty() {
                let parts: Vec<String> = l
                    .flow
                    .iter()
                    .map(|(d, f)| match f {
                        Flow::Rate(r) => format!("{}: {}", c.var_name(*d), r),
                        Flow::Free => format!("{}: free", c.var_name(*d)),
                    })
                    .collect();
                let _ = write!(out, " flow {{ {} }}", parts.join(", "));
            }
            out.push_str(";\n");
        }
        for (i, e) in c.edges.iter().enumerate() {
            let _ = write!(
                out,
                "    edge {} -> {}",
                c.locations[e.source].name, c.locations[e.target].name
            );
            if !e.guard.is_universe() {
                let _ = write!(out, " when {}", constraint_text(c, &e.guard));
            }
            if e.action != private_action(&c.name, i) {
                let _ = write!(out, " sync {}", e.action);
            }
            if !e.updates.is_empty() {
                let parts: Vec<String> = e
                    .updates
                    .iter()
                    .map(|(d, v)| format!("{} := {}", c.var_name(*d), v))
                    .collect();
                let _ = write!(out, " do {{ {} }}", parts.join(", "));
            }
            out.push_str(";\n");
        }
        let _ = writeln!(out, "    init {};", c.locations[c.initial].name);
        out.push_str("}\n");
    }
    let targets: Vec<&str> = net
        .spec
        .locations
        .iter()
        .filter(|l| l.accepting)
        .map(|l| l.name.as_str())
        .collect();
    if !targets.is_empty() {
        let _ = writeln!(out, "\ntarget {};", targets.join(", "));
    }
    debug_assert!(matches!(
        net.spec.kind,
        AutomatonKind::Ptas | AutomatonKind::Plma
    ));
    out
}
