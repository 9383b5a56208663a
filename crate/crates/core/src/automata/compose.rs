use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{
    Automaton, AutomatonKind, ComposeError, Edge, Flow, InitInterval, LocId, Location, Network,
    VarKind,
};
use crate::poly::{DimId, DimKind, Polyhedron, Rational, Space};

/// Synchronized product of the specification with its bounders.
///
/// An action synchronizes exactly the components whose alphabet contains
/// it; all other actions interleave. Every location tuple is built, even
/// those unreachable from the initial tuple, so edge counts stay
/// predictable. The result has a constant rate for every variable in every
/// location or composition fails.
pub fn compose(net: &Network) -> Result<Automaton, ComposeError> {
    let comps: Vec<&Automaton> = std::iter::once(&net.spec)
        .chain(net.bounders.iter())
        .collect();
    check_ownership(net)?;
    let (space, var_kinds) = product_space(&comps)?;
    let space = Arc::new(space);
    // component dim -> product dim
    let maps: Vec<BTreeMap<DimId, DimId>> = comps
        .iter()
        .map(|c| {
            (0..c.space.len())
                .map(|d| {
                    (
                        d,
                        space
                            .lookup(c.space.name(d))
                            .expect("dim registered in product"),
                    )
                })
                .collect()
        })
        .collect();

    let invariants: Vec<Vec<Polyhedron>> = comps
        .iter()
        .map(|c| {
            c.locations
                .iter()
                .map(|l| l.invariant.remap(&space))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let guards: Vec<Vec<Polyhedron>> = comps
        .iter()
        .map(|c| {
            c.edges
                .iter()
                .map(|e| e.guard.remap(&space))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let radix: Vec<usize> = comps.iter().map(|c| c.locations.len()).collect();
    let total: usize = radix.iter().product();
    let tuple_of = |mut idx: usize| -> Vec<LocId> {
        let mut t = vec![0; radix.len()];
        for k in (0..radix.len()).rev() {
            t[k] = idx % radix[k];
            idx /= radix[k];
        }
        t
    };
    let index_of =
        |t: &[LocId]| -> usize { t.iter().zip(&radix).fold(0, |acc, (l, r)| acc * r + l) };
    let single = comps.len() == 1;

    let mut locations = Vec::with_capacity(total);
    for idx in 0..total {
        let t = tuple_of(idx);
        let name = if single {
            comps[0].locations[t[0]].name.clone()
        } else {
            let parts: Vec<&str> = t
                .iter()
                .enumerate()
                .map(|(k, l)| comps[k].locations[*l].name.as_str())
                .collect();
            format!("({})", parts.join(", "))
        };
        let mut inv = Polyhedron::universe(&space);
        for (k, l) in t.iter().enumerate() {
            inv = inv.conj(&invariants[k][*l])?;
        }
        let mut flow = BTreeMap::new();
        for &d in var_kinds.keys() {
            let mut rate: Option<Rational> = None;
            for (k, c) in comps.iter().enumerate() {
                let Some(local) = c.space.lookup(space.name(d)) else {
                    continue;
                };
                match c.locations[t[k]].flow.get(&local) {
                    Some(Flow::Rate(r)) => match &rate {
                        None => rate = Some(r.clone()),
                        Some(prev) if prev == r => {}
                        Some(prev) => {
                            return Err(ComposeError::FlowConflict {
                                var: space.name(d).to_string(),
                                a: prev.clone(),
                                b: r.clone(),
                                loc: name,
                            })
                        }
                    },
                    Some(Flow::Free) | None => {}
                }
            }
            match rate {
                Some(r) => {
                    flow.insert(d, Flow::Rate(r));
                }
                None => {
                    return Err(ComposeError::FreeFlow {
                        var: space.name(d).to_string(),
                        loc: name,
                    })
                }
            }
        }
        let accepting = comps[0].locations[t[0]].accepting;
        locations.push(Location {
            name,
            accepting,
            invariant: inv,
            flow,
        });
    }

    // Which components take part in each action.
    let mut participants: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (k, c) in comps.iter().enumerate() {
        for a in &c.actions {
            participants.entry(a.as_str()).or_default().push(k);
        }
    }

    let mut edges = Vec::new();
    for idx in 0..total {
        let t = tuple_of(idx);
        for (k, c) in comps.iter().enumerate() {
            for (ei, e) in c.edges.iter().enumerate() {
                if e.source != t[k] {
                    continue;
                }
                let parts = &participants[e.action.as_str()];
                if parts[0] != k {
                    continue;
                }
                // One edge choice per participant, cartesian over the rest.
                let mut choices: Vec<Vec<(usize, usize)>> = vec![vec![(k, ei)]];
                for &other in &parts[1..] {
                    let opts: Vec<usize> = comps[other]
                        .edges
                        .iter()
                        .enumerate()
                        .filter(|(_, oe)| oe.source == t[other] && oe.action == e.action)
                        .map(|(i, _)| i)
                        .collect();
                    let mut next = Vec::new();
                    for ch in &choices {
                        for &oi in &opts {
                            let mut c2 = ch.clone();
                            c2.push((other, oi));
                            next.push(c2);
                        }
                    }
                    choices = next;
                }
                for ch in choices {
                    let mut target = t.clone();
                    let mut guard = Polyhedron::universe(&space);
                    let mut updates: BTreeMap<DimId, Rational> = BTreeMap::new();
                    for &(comp, ce) in &ch {
                        let ed = &comps[comp].edges[ce];
                        target[comp] = ed.target;
                        guard = guard.conj(&guards[comp][ce])?;
                        for (d, v) in &ed.updates {
                            let pd = maps[comp][d];
                            if let Some(prev) = updates.get(&pd) {
                                if prev != v {
                                    return Err(ComposeError::UpdateConflict {
                                        action: e.action.clone(),
                                        var: space.name(pd).to_string(),
                                        a: prev.clone(),
                                        b: v.clone(),
                                    });
                                }
                            }
                            updates.insert(pd, v.clone());
                        }
                    }
                    edges.push(Edge {
                        source: idx,
                        target: index_of(&target),
                        guard,
                        action: e.action.clone(),
                        updates,
                    });
                }
            }
        }
    }

    let mut init_box = BTreeMap::new();
    for (&d, kind) in &var_kinds {
        let name = space.name(d);
        let owner = if matches!(kind, VarKind::Signal | VarKind::Boolean) {
            comps[1..]
                .iter()
                .find(|c| c.space.lookup(name).is_some())
                .copied()
        } else {
            None
        }
        .or_else(|| {
            comps
                .iter()
                .find(|c| c.space.lookup(name).is_some())
                .copied()
        })
        .expect("variable comes from some component");
        let local = owner.space.lookup(name).expect("owner has the variable");
        let iv = owner
            .init_box
            .get(&local)
            .cloned()
            .unwrap_or_else(|| InitInterval::point(Rational::zero()));
        init_box.insert(d, iv);
    }

    let initial_tuple: Vec<LocId> = comps.iter().map(|c| c.initial).collect();
    let actions: BTreeSet<String> = comps
        .iter()
        .flat_map(|c| c.actions.iter().cloned())
        .collect();
    let unused: Vec<&String> = actions
        .iter()
        .filter(|a| !edges.iter().any(|e| &e.action == *a))
        .collect();
    if !unused.is_empty() {
        log::warn!("actions never enabled in the product: {unused:?}");
    }
    Ok(Automaton {
        name: comps
            .iter()
            .map(|c| c.name.as_str())
            .collect::<Vec<_>>()
            .join("||"),
        kind: AutomatonKind::Plma,
        space,
        var_kinds,
        init_box,
        actions,
        locations,
        initial: index_of(&initial_tuple),
        edges,
    })
}

fn check_ownership(net: &Network) -> Result<(), ComposeError> {
    for s in net.spec.vars_of_kind(VarKind::Signal) {
        let name = net.spec.var_name(s);
        let owners = net
            .bounders
            .iter()
            .filter(|b| b.space.lookup(name).is_some())
            .count();
        if owners > 1 {
            return Err(ComposeError::Ownership(name.to_string(), owners));
        }
    }
    Ok(())
}

/// Parameters first, then clocks, then every other variable, each group in
/// order of first appearance.
fn product_space(comps: &[&Automaton]) -> Result<(Space, BTreeMap<DimId, VarKind>), ComposeError> {
    let mut params: Vec<String> = Vec::new();
    let mut vars: Vec<(String, VarKind)> = Vec::new();
    for c in comps {
        for d in 0..c.space.len() {
            let name = c.space.name(d).to_string();
            match c.space.dim(d).kind {
                DimKind::Parameter => {
                    if !params.contains(&name) {
                        params.push(name);
                    }
                }
                DimKind::Variable => {
                    let kind = c.var_kinds[&d];
                    match vars.iter().find(|(n, _)| *n == name) {
                        Some((_, k)) if *k != kind => return Err(ComposeError::KindMismatch(name)),
                        Some(_) => {}
                        None => vars.push((name, kind)),
                    }
                }
            }
        }
    }
    let mut space = Space::new();
    for p in &params {
        space.push(p.clone(), DimKind::Parameter);
    }
    let mut kinds = BTreeMap::new();
    let clocks = vars.iter().filter(|(_, k)| *k == VarKind::Clock);
    let others = vars.iter().filter(|(_, k)| *k != VarKind::Clock);
    for (n, k) in clocks.chain(others) {
        let d = space.push(n.clone(), DimKind::Variable);
        kinds.insert(d, *k);
    }
    Ok((space, kinds))
}
