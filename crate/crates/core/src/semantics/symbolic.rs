use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{Automaton, EdgeId, LocId};
use crate::poly::{
    AtomicConstraint, DimId, DimKind, FlowMap, LinearTerm, PolyError, Polyhedron, Rational, Space,
};

/// Name of the injected global clock.
pub const GLOBAL_CLOCK: &str = "t_abs";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("location {0} has a variable without a constant rate")]
    NotLinear(String),
    #[error("the initial zone is empty")]
    EmptyInit,
    #[error("`{GLOBAL_CLOCK}` is reserved")]
    Reserved,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone)]
pub struct SymbolicState {
    pub location: LocId,
    /// Over the automaton's dims plus the global clock.
    pub zone: Polyhedron,
}

/// Exploration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_depth: usize,
    pub max_states: usize,
    /// Stop after this many distinct target states.
    pub max_hits: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_depth: 50,
            max_states: 10_000,
            max_hits: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZoneGraph {
    pub states: Vec<SymbolicState>,
    /// `(source state, automaton edge, target state)` in discovery order.
    pub edges: Vec<(usize, EdgeId, usize)>,
    pub init: usize,
    /// BFS layer of each state.
    pub depth: Vec<usize>,
    /// Target states in discovery order.
    pub hits: Vec<usize>,
    /// False when a budget limit cut exploration short.
    pub exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct SymbolicRun {
    pub states: Vec<SymbolicState>,
    pub edges: Vec<EdgeId>,
}

impl SymbolicRun {
    pub fn state_at(&self, k: usize) -> &SymbolicState {
        &self.states[k]
    }

    pub fn edge_at(&self, k: usize) -> EdgeId {
        self.edges[k]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Symbolic view of a linear multi-rate automaton: every constraint is
/// lifted to a registry with one extra rate-1 clock that is never reset.
#[derive(Debug, Clone)]
pub struct Symbolic {
    pub automaton: Automaton,
    pub space: Arc<Space>,
    pub t_abs: DimId,
    pub invariants: Vec<Polyhedron>,
    pub guards: Vec<Polyhedron>,
    /// Per location, rates of every variable and of the global clock.
    pub flows: Vec<FlowMap>,
    /// Initial box, global clock at 0, parameters nonnegative.
    pub init_box: Polyhedron,
    /// Optional redundancy removal after each successor.
    pub minimize: bool,
}

impl Symbolic {
    pub fn new(a: &Automaton) -> Result<Self, SemanticsError> {
        if a.space.lookup(GLOBAL_CLOCK).is_some() {
            return Err(SemanticsError::Reserved);
        }
        let mut sp = (*a.space).clone();
        let t_abs = sp.push(GLOBAL_CLOCK, DimKind::Variable);
        let space = Arc::new(sp);
        let lift = |p: &Polyhedron| p.remap(&space);
        let invariants = a
            .locations
            .iter()
            .map(|l| lift(&l.invariant))
            .collect::<Result<Vec<_>, _>>()?;
        let guards = a
            .edges
            .iter()
            .map(|e| lift(&e.guard))
            .collect::<Result<Vec<_>, _>>()?;
        let mut flows = Vec::new();
        for (i, l) in a.locations.iter().enumerate() {
            let mut f = a
                .flow_map(i)
                .ok_or_else(|| SemanticsError::NotLinear(l.name.clone()))?;
            f.insert(t_abs, Rational::one());
            flows.push(f);
        }
        let init_box = lift(&a.init_polyhedron())?
            .conj(&lift(&a.nonnegative_params())?)?
            .fix(&[(t_abs, Rational::zero())]);
        Ok(Symbolic {
            automaton: a.clone(),
            space,
            t_abs,
            invariants,
            guards,
            flows,
            init_box,
            minimize: true,
        })
    }

    fn tidy(&self, z: Polyhedron) -> Polyhedron {
        if self.minimize {
            z.minimize()
        } else {
            z
        }
    }

    /// Initial zone. The invariant is applied before and after the elapse so
    /// that no time is spent outside it.
    pub fn initial_state(&self) -> Result<SymbolicState, SemanticsError> {
        let l = self.automaton.initial;
        let inv = &self.invariants[l];
        let start = self.init_box.conj(inv)?;
        let zone = start.time_elapse(&self.flows[l]).conj(inv)?;
        if !zone.is_satisfiable() {
            return Err(SemanticsError::EmptyInit);
        }
        Ok(SymbolicState {
            location: l,
            zone: self.tidy(zone),
        })
    }

    /// `((C ∧ g)[R] ∧ I')↗ ∧ I'`, or `None` when empty.
    pub fn succ(&self, s: &SymbolicState, e: EdgeId) -> Option<SymbolicState> {
        let edge = &self.automaton.edges[e];
        debug_assert_eq!(edge.source, s.location);
        let inv = &self.invariants[edge.target];
        let fired = s.zone.conj(&self.guards[e]).ok()?;
        if !fired.is_satisfiable() {
            return None;
        }
        let landed = fired.update(&edge.updates).conj(inv).ok()?;
        // minimization decides emptiness itself
        if !self.minimize && !landed.is_satisfiable() {
            return None;
        }
        let zone = self.tidy(
            landed
                .time_elapse(&self.flows[edge.target])
                .conj(inv)
                .ok()?,
        );
        if zone.is_trivially_empty() {
            return None;
        }
        Some(SymbolicState {
            location: edge.target,
            zone,
        })
    }

    /// Zone with the global clock projected away.
    pub fn hide_clock(&self, z: &Polyhedron) -> Polyhedron {
        z.eliminate_dims(&[self.t_abs])
    }

    fn hidden(&self, z: &Polyhedron) -> Hidden {
        Hidden {
            zone: self.hide_clock(z),
        }
    }

    /// Ranges of every visible dim and of every sum and difference of two
    /// of them. Equal zones have equal signatures.
    fn signature(&self, z: &Polyhedron) -> Vec<String> {
        let dims: Vec<DimId> = (0..self.space.len()).filter(|d| *d != self.t_abs).collect();
        let mut terms: Vec<LinearTerm> = dims.iter().map(|d| LinearTerm::var(*d)).collect();
        for (i, a) in dims.iter().enumerate() {
            for b in &dims[i + 1..] {
                for sign in [-1, 1] {
                    terms.push(LinearTerm::var(*a).plus(*b, Rational::from(sign)));
                }
            }
        }
        match z.term_intervals(&terms) {
            Ok(ivs) => ivs.iter().map(|iv| iv.to_string()).collect(),
            Err(_) => Vec::new(),
        }
    }

    /// Breadth-first construction of the parametric zone graph. A new state
    /// is merged into a stored one with the same location and the same zone
    /// once the global clock is hidden.
    pub fn explore(
        &self,
        targets: &BTreeSet<LocId>,
        budget: Budget,
    ) -> Result<ZoneGraph, SemanticsError> {
        let init = self.initial_state()?;
        let mut g = ZoneGraph {
            states: Vec::new(),
            edges: Vec::new(),
            init: 0,
            depth: Vec::new(),
            hits: Vec::new(),
            exhausted: true,
        };
        let mut hidden: Vec<Hidden> = Vec::new();
        let mut index: HashMap<(LocId, Vec<String>), Vec<usize>> = HashMap::new();
        let mut queue = VecDeque::new();

        let h = self.hidden(&init.zone);
        index
            .entry((init.location, self.signature(&h.zone)))
            .or_default()
            .push(0);
        hidden.push(h);
        if targets.contains(&init.location) {
            g.hits.push(0);
        }
        g.states.push(init);
        g.depth.push(0);
        queue.push_back(0);

        'bfs: while let Some(si) = queue.pop_front() {
            if g.hits.len() >= budget.max_hits {
                break;
            }
            if g.depth[si] >= budget.max_depth {
                g.exhausted = false;
                continue;
            }
            let loc = g.states[si].location;
            let out: Vec<EdgeId> = self.automaton.outgoing(loc).map(|(i, _)| i).collect();
            for e in out {
                let Some(next) = self.succ(&g.states[si], e) else {
                    continue;
                };
                let h = self.hidden(&next.zone);
                let key = (next.location, self.signature(&h.zone));
                let mut found = None;
                if let Some(cands) = index.get(&key) {
                    for &c in cands {
                        if hidden[c].same_set(&h)? {
                            found = Some(c);
                            break;
                        }
                    }
                }
                if let Some(c) = found {
                    g.edges.push((si, e, c));
                    continue;
                }
                if g.states.len() >= budget.max_states {
                    g.exhausted = false;
                    break 'bfs;
                }
                let ni = g.states.len();
                index.entry(key).or_default().push(ni);
                hidden.push(h);
                g.depth.push(g.depth[si] + 1);
                if targets.contains(&next.location) {
                    g.hits.push(ni);
                }
                g.states.push(next);
                g.edges.push((si, e, ni));
                queue.push_back(ni);
                if g.hits.len() >= budget.max_hits {
                    break 'bfs;
                }
            }
        }
        log::debug!(
            "zone graph: {} states, {} edges, {} hits",
            g.states.len(),
            g.edges.len(),
            g.hits.len()
        );
        Ok(g)
    }

    /// Shortest path from the initial state to `target`, rebuilt backwards
    /// taking the lowest-indexed graph edge at each step. The zones are then
    /// recomputed along the chosen edge word so that global-clock values are
    /// consistent from one state to the next.
    pub fn pick_symb_run(&self, g: &ZoneGraph, target: usize) -> Option<SymbolicRun> {
        let word = shortest_word(g, target)?;
        self.replay(&word)
    }

    /// Successive zones along an edge word from the initial state.
    pub fn replay(&self, word: &[EdgeId]) -> Option<SymbolicRun> {
        let mut states = vec![self.initial_state().ok()?];
        for &e in word {
            let last = states.last().expect("nonempty");
            if self.automaton.edges[e].source != last.location {
                return None;
            }
            states.push(self.succ(last, e)?);
        }
        Some(SymbolicRun {
            states,
            edges: word.to_vec(),
        })
    }

    /// `d = value` atoms fixing every parameter.
    pub fn fix_params(&self, z: &Polyhedron, pval: &[Rational]) -> Polyhedron {
        let fixed: Vec<(DimId, Rational)> = self.space.params().zip(pval.iter().cloned()).collect();
        z.fix(&fixed)
    }

    /// Lifts a point of the automaton's registry (plus a global-clock value)
    /// to the extended registry.
    pub fn lift_point(&self, point: &[Rational], t: Rational) -> Vec<Rational> {
        let mut v = point.to_vec();
        v.push(t);
        v
    }

    pub fn point_polyhedron(&self, point: &[Rational]) -> Polyhedron {
        Polyhedron::point(&self.space, point)
    }

    /// Constraint fixing only the dims in `dims` to their values in `point`.
    pub fn fix_dims(&self, point: &[Rational], dims: impl Iterator<Item = DimId>) -> Polyhedron {
        let atoms: Vec<AtomicConstraint> = dims
            .map(|d| {
                AtomicConstraint::eq(LinearTerm::var(d), LinearTerm::constant(point[d].clone()))
            })
            .collect();
        Polyhedron::universe(&self.space).with_atoms(&atoms)
    }
}

/// A zone with the global clock hidden.
struct Hidden {
    zone: Polyhedron,
}

impl Hidden {
    fn same_set(&self, other: &Hidden) -> Result<bool, PolyError> {
        if self.zone == other.zone {
            return Ok(true);
        }
        self.zone.equals(&other.zone)
    }
}

/// Edge word of a shortest path to `target`, ties broken by the lowest
/// graph-edge index at each backward step.
pub fn shortest_word(g: &ZoneGraph, target: usize) -> Option<Vec<EdgeId>> {
    let dist = distances(g);
    if dist[target] == usize::MAX {
        return None;
    }
    let mut word = Vec::new();
    let mut cur = target;
    while cur != g.init {
        let k = g
            .edges
            .iter()
            .enumerate()
            .position(|(_, (s, _, t))| {
                *t == cur && dist[*s] != usize::MAX && dist[*s] + 1 == dist[cur]
            })
            .expect("a predecessor on a shortest path");
        word.push(g.edges[k].1);
        cur = g.edges[k].0;
    }
    word.reverse();
    Some(word)
}

/// Every shortest edge word to `target`, at most `limit` of them, in the
/// order of the backward edge choices. The first is [`shortest_word`].
pub fn shortest_words(g: &ZoneGraph, target: usize, limit: usize) -> Vec<Vec<EdgeId>> {
    let dist = distances(g);
    let mut out = Vec::new();
    if dist[target] == usize::MAX || limit == 0 {
        return out;
    }
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); g.states.len()];
    for (k, (s, _, t)) in g.edges.iter().enumerate() {
        if dist[*s] != usize::MAX && dist[*s] + 1 == dist[*t] {
            into[*t].push(k);
        }
    }
    let mut suffix = Vec::new();
    collect_words(g, &into, g.init, target, &mut suffix, &mut out, limit);
    out
}

fn collect_words(
    g: &ZoneGraph,
    into: &[Vec<usize>],
    init: usize,
    cur: usize,
    suffix: &mut Vec<EdgeId>,
    out: &mut Vec<Vec<EdgeId>>,
    limit: usize,
) {
    if cur == init {
        out.push(suffix.iter().rev().copied().collect());
        return;
    }
    for &k in &into[cur] {
        if out.len() >= limit {
            return;
        }
        suffix.push(g.edges[k].1);
        collect_words(g, into, init, g.edges[k].0, suffix, out, limit);
        suffix.pop();
    }
}

fn distances(g: &ZoneGraph) -> Vec<usize> {
    let n = g.states.len();
    let mut dist = vec![usize::MAX; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, (s, _, _)) in g.edges.iter().enumerate() {
        adj[*s].push(k);
    }
    dist[g.init] = 0;
    let mut q = VecDeque::from([g.init]);
    while let Some(u) = q.pop_front() {
        for &k in &adj[u] {
            let v = g.edges[k].2;
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}
