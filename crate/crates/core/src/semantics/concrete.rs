use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{Automaton, EdgeId, LocId};
use crate::poly::{DimId, Rational, Valuation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteState {
    pub location: LocId,
    /// One value per variable, in `Automaton::vars` order.
    pub valuation: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub edge: EdgeId,
    pub duration: Rational,
}

/// Alternating states and steps: `states.len() == steps.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteRun {
    /// One value per parameter, in registry order.
    pub pval: Vec<Rational>,
    pub states: Vec<ConcreteState>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailReason {
    /// Initial state outside the initial box or invariant, or a negative
    /// parameter.
    Init,
    /// A state violates its location invariant.
    Invariant,
    /// The delay leaves the invariant or is negative.
    Flow,
    /// The guard does not hold after the delay.
    Guard,
    /// The next state is not the updated valuation.
    Update,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailReason::Init => "init",
            FailReason::Invariant => "invariant",
            FailReason::Flow => "flow",
            FailReason::Guard => "guard",
            FailReason::Update => "update",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Positive,
    /// `index` is the step at which the run leaves the semantics (0 for
    /// initial-state failures).
    Negative {
        index: usize,
        reason: FailReason,
    },
}

impl Verdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, Verdict::Positive)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("run has {states} states for {steps} steps")]
    Shape { states: usize, steps: usize },
    #[error("step {0} names an unknown edge {1}")]
    UnknownEdge(usize, EdgeId),
    #[error("step {0}: edge {1} does not connect the surrounding locations")]
    Disconnected(usize, EdgeId),
    #[error("state {0} names an unknown location")]
    UnknownLocation(usize),
    #[error("state {0} has {1} values, expected {2}")]
    Arity(usize, usize, usize),
    #[error("expected {1} parameter values, got {0}")]
    ParamArity(usize, usize),
}

impl ConcreteRun {
    pub fn single(pval: Vec<Rational>, state: ConcreteState) -> Self {
        ConcreteRun {
            pval,
            states: vec![state],
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn edge_word(&self) -> Vec<EdgeId> {
        self.steps.iter().map(|s| s.edge).collect()
    }

    /// Absolute time at which each state is entered.
    pub fn timestamps(&self) -> Vec<Rational> {
        let mut t = Rational::zero();
        let mut out = vec![t.clone()];
        for s in &self.steps {
            t += &s.duration;
            out.push(t.clone());
        }
        out
    }
}

/// Full-space point from a parameter valuation and a variable valuation.
pub fn full_point(a: &Automaton, pval: &[Rational], vars: &[Rational]) -> Valuation {
    let mut v = vec![Rational::zero(); a.space.len()];
    for (d, x) in a.params().zip(pval) {
        v[d] = x.clone();
    }
    for (d, x) in a.vars().zip(vars) {
        v[d] = x.clone();
    }
    v
}

fn delayed(a: &Automaton, loc: LocId, point: &Valuation, d: &Rational) -> Option<Valuation> {
    let flow = a.flow_map(loc)?;
    let mut out = point.clone();
    for (x, r) in flow {
        out[x] = &out[x] + &(r * d);
    }
    Some(out)
}

/// Checks a run against the concrete semantics under its parameter
/// valuation. Delays are checked at both endpoints, which suffices because
/// invariants are convex and flows are constant.
pub fn validate_run(a: &Automaton, run: &ConcreteRun) -> Result<Verdict, RunError> {
    let nvars = a.var_kinds.len();
    let nparams = a.params().count();
    if run.states.len() != run.steps.len() + 1 {
        return Err(RunError::Shape {
            states: run.states.len(),
            steps: run.steps.len(),
        });
    }
    if run.pval.len() != nparams {
        return Err(RunError::ParamArity(run.pval.len(), nparams));
    }
    for (i, s) in run.states.iter().enumerate() {
        if s.location >= a.locations.len() {
            return Err(RunError::UnknownLocation(i));
        }
        if s.valuation.len() != nvars {
            return Err(RunError::Arity(i, s.valuation.len(), nvars));
        }
    }
    for (i, st) in run.steps.iter().enumerate() {
        let e = a
            .edges
            .get(st.edge)
            .ok_or(RunError::UnknownEdge(i, st.edge))?;
        if e.source != run.states[i].location || e.target != run.states[i + 1].location {
            return Err(RunError::Disconnected(i, st.edge));
        }
    }

    let neg = |index, reason| Ok(Verdict::Negative { index, reason });
    if run.pval.iter().any(|p| p.is_negative()) {
        return neg(0, FailReason::Init);
    }
    let s0 = &run.states[0];
    let p0 = full_point(a, &run.pval, &s0.valuation);
    let in_box = a
        .vars()
        .zip(&s0.valuation)
        .all(|(d, v)| a.init_box.get(&d).is_none_or(|iv| iv.contains(v)));
    if s0.location != a.initial || !in_box || !a.locations[s0.location].invariant.contains(&p0) {
        return neg(0, FailReason::Init);
    }
    for (i, st) in run.steps.iter().enumerate() {
        let e = &a.edges[st.edge];
        let src = &run.states[i];
        let here = full_point(a, &run.pval, &src.valuation);
        if !a.locations[src.location].invariant.contains(&here) {
            return neg(i, FailReason::Invariant);
        }
        if st.duration.is_negative() {
            return neg(i, FailReason::Flow);
        }
        let Some(there) = delayed(a, src.location, &here, &st.duration) else {
            return neg(i, FailReason::Flow);
        };
        if !a.locations[src.location].invariant.contains(&there) {
            return neg(i, FailReason::Flow);
        }
        if !e.guard.contains(&there) {
            return neg(i, FailReason::Guard);
        }
        let mut post = there;
        for (d, v) in &e.updates {
            post[*d] = v.clone();
        }
        let next = full_point(a, &run.pval, &run.states[i + 1].valuation);
        if post != next {
            return neg(i, FailReason::Update);
        }
        if !a.locations[e.target].invariant.contains(&next) {
            return neg(i, FailReason::Invariant);
        }
    }
    Ok(Verdict::Positive)
}

/// Variable values of a full-space point, in `Automaton::vars` order.
pub fn project_vars(a: &Automaton, point: &[Rational]) -> Vec<Rational> {
    a.vars().map(|d: DimId| point[d].clone()).collect()
}

/// Parameter values of a full-space point, in registry order.
pub fn project_params(a: &Automaton, point: &[Rational]) -> Vec<Rational> {
    a.params().map(|d: DimId| point[d].clone()).collect()
}
