//! Concrete example runs extracted from symbolic runs.
//!
//! Each symbolic run to a target yields one positive run and, when the run
//! exhibits a parametric or a variable deadlock, a negative run with the same
//! edge word.

mod negative;
mod positive;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{Automaton, LocId, VarKind};
use crate::poly::{DimId, PolyError, Polyhedron, Rational, Valuation};
use crate::semantics::{
    project_params, project_vars, shortest_word, shortest_words, validate_run, Budget, ConcreteRun,
    ConcreteState, RunError, SemanticsError, Step, Symbolic, SymbolicRun, Verdict, ZoneGraph,
};

pub use negative::concat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExemplifyError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("state {0} of the symbolic run has no predecessor of the given point")]
    NoPredecessor(usize),
    #[error("global clock goes backwards before state {0}")]
    NegativeDuration(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RunKind {
    #[serde(rename = "pos")]
    Positive,
    /// Negative run under another parameter valuation.
    #[serde(rename = "neg_param")]
    NegParam,
    /// Negative run under the positive run's parameter valuation.
    #[serde(rename = "neg_var")]
    NegVar,
}

impl RunKind {
    pub fn tag(self) -> &'static str {
        match self {
            RunKind::Positive => "pos",
            RunKind::NegParam => "neg_param",
            RunKind::NegVar => "neg_var",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeadlockKind {
    Parametric,
    Variable,
}

/// Where a negative run was derived: the symbolic state whose outgoing edge
/// the starting point cannot take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Deadlock {
    pub kind: DeadlockKind,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedRun {
    pub kind: RunKind,
    pub run: ConcreteRun,
    pub verdict: Verdict,
    pub deadlock: Option<Deadlock>,
}

#[derive(Debug, Clone)]
pub struct ExemplifyResult {
    /// 1-based attempt number.
    pub attempt: usize,
    pub symbolic_run: SymbolicRun,
    pub runs: Vec<TaggedRun>,
}

impl ExemplifyResult {
    pub fn get(&self, kind: RunKind) -> Option<&TaggedRun> {
        self.runs.iter().find(|r| r.kind == kind)
    }

    pub fn positive(&self) -> Option<&TaggedRun> {
        self.get(RunKind::Positive)
    }
}

/// Runs the exemplification algorithms on one automaton. Points are handled
/// over the symbolic registry (automaton dims plus the global clock) and
/// projected when runs are built.
#[derive(Debug, Clone)]
pub struct Exemplifier {
    pub symbolic: Symbolic,
    order: Vec<DimId>,
}

impl Exemplifier {
    pub fn new(a: &Automaton) -> Result<Self, ExemplifyError> {
        let symbolic = Symbolic::new(a)?;
        // parameters, clocks, other variables, global clock
        let mut order: Vec<DimId> = a.params().collect();
        order.extend(a.vars_of_kind(VarKind::Clock));
        order.extend(
            a.var_kinds
                .iter()
                .filter(|(_, k)| **k != VarKind::Clock)
                .map(|(d, _)| *d),
        );
        order.push(symbolic.t_abs);
        Ok(Exemplifier { symbolic, order })
    }

    pub fn automaton(&self) -> &Automaton {
        &self.symbolic.automaton
    }

    /// Dimension order used for every point choice.
    pub fn order(&self) -> &[DimId] {
        &self.order
    }

    pub fn exhibit(&self, z: &Polyhedron) -> Result<Valuation, PolyError> {
        z.exhibit_point_in_order(&self.order)
    }

    /// Breadth-first exploration continued until `attempts` target states
    /// are found or the budget runs out.
    pub fn explore(
        &self,
        targets: &BTreeSet<LocId>,
        budget: Budget,
        attempts: usize,
    ) -> Result<ZoneGraph, ExemplifyError> {
        Ok(self.symbolic.explore(
            targets,
            Budget {
                max_hits: attempts.max(1),
                ..budget
            },
        )?)
    }

    /// Up to `attempts` symbolic runs with pairwise distinct edge words: the
    /// shortest run to each target state in discovery order, then other
    /// shortest runs to the same states.
    pub fn symbolic_runs(&self, g: &ZoneGraph, attempts: usize) -> Vec<SymbolicRun> {
        let mut words = Vec::new();
        for &h in &g.hits {
            if let Some(w) = shortest_word(g, h) {
                if !words.contains(&w) {
                    words.push(w);
                }
            }
        }
        for &h in &g.hits {
            if words.len() >= attempts {
                break;
            }
            for w in shortest_words(g, h, attempts + 1) {
                if words.len() >= attempts {
                    break;
                }
                if !words.contains(&w) {
                    words.push(w);
                }
            }
        }
        words.truncate(attempts);
        words
            .iter()
            .filter_map(|w| self.symbolic.replay(w))
            .collect()
    }

    /// Explores, picks up to `attempts` symbolic runs and exemplifies each.
    /// Empty when no target is reached within the budget.
    pub fn exemplify(
        &self,
        targets: &BTreeSet<LocId>,
        budget: Budget,
        attempts: usize,
    ) -> Result<Vec<ExemplifyResult>, ExemplifyError> {
        let g = self.explore(targets, budget, attempts)?;
        let runs = self.symbolic_runs(&g, attempts);
        log::info!(
            "{} symbolic run(s) from {} zone-graph states",
            runs.len(),
            g.states.len()
        );
        let mut out = Vec::new();
        for (k, r) in runs.into_iter().enumerate() {
            let runs = self.exemplify3(&r)?;
            out.push(ExemplifyResult {
                attempt: k + 1,
                symbolic_run: r,
                runs,
            });
        }
        Ok(out)
    }

    /// One positive run through the last zone of `r`, then a negative run per
    /// deadlock kind found along `r`. Negative candidates that happen to
    /// satisfy the semantics are dropped.
    pub fn exemplify3(&self, r: &SymbolicRun) -> Result<Vec<TaggedRun>, ExemplifyError> {
        let a = self.automaton();
        let last = r.states.last().expect("symbolic runs have a state");
        let w = self.exhibit(&last.zone)?;
        let pval = project_params(a, &w);
        let pos = self.reconstruct_pos(r, r.len(), &w)?;
        let verdict = validate_run(a, &pos)?;
        if !verdict.is_positive() {
            log::warn!("reconstructed run is not positive: {verdict:?}");
        }
        let mut out = vec![TaggedRun {
            kind: RunKind::Positive,
            run: pos,
            verdict,
            deadlock: None,
        }];

        if let Some((_, i, wi)) = self.find_pdeadlock(r)? {
            let deadlock = Deadlock {
                kind: DeadlockKind::Parametric,
                index: i,
            };
            self.push_negative(r, &wi, RunKind::NegParam, deadlock, &mut out)?;
        }
        if let Some((wi, i)) = self.find_vdeadlock(r, &pval)? {
            let deadlock = Deadlock {
                kind: DeadlockKind::Variable,
                index: i,
            };
            self.push_negative(r, &wi, RunKind::NegVar, deadlock, &mut out)?;
        }
        Ok(out)
    }

    fn push_negative(
        &self,
        r: &SymbolicRun,
        wi: &Valuation,
        kind: RunKind,
        deadlock: Deadlock,
        out: &mut Vec<TaggedRun>,
    ) -> Result<(), ExemplifyError> {
        let run = self.negative_run(r, deadlock.index, wi)?;
        let verdict = validate_run(self.automaton(), &run)?;
        if verdict.is_positive() {
            log::warn!(
                "{} candidate at index {} satisfies the semantics; dropped",
                kind.tag(),
                deadlock.index
            );
            return Ok(());
        }
        out.push(TaggedRun {
            kind,
            run,
            verdict,
            deadlock: Some(deadlock),
        });
        Ok(())
    }

    /// Builds a run of the automaton from full points, one per state, taken
    /// before time elapses; durations are global-clock differences.
    fn run_from_points(
        &self,
        r: &SymbolicRun,
        points: &[Valuation],
    ) -> Result<ConcreteRun, ExemplifyError> {
        let a = self.automaton();
        let t = self.symbolic.t_abs;
        let mut states = Vec::with_capacity(points.len());
        let mut steps = Vec::with_capacity(points.len().saturating_sub(1));
        for (k, p) in points.iter().enumerate() {
            states.push(ConcreteState {
                location: r.states[k].location,
                valuation: project_vars(a, p),
            });
            if k + 1 < points.len() {
                let duration = compute_dur(t, p, &points[k + 1])
                    .ok_or(ExemplifyError::NegativeDuration(k + 1))?;
                steps.push(Step {
                    edge: r.edges[k],
                    duration,
                });
            }
        }
        Ok(ConcreteRun {
            pval: project_params(a, &points[0]),
            states,
            steps,
        })
    }
}

/// Global-clock difference between two full points, `None` when negative.
pub fn compute_dur(t_abs: DimId, from: &[Rational], to: &[Rational]) -> Option<Rational> {
    let d = &to[t_abs] - &from[t_abs];
    (!d.is_negative()).then_some(d)
}

/// [`Exemplifier::exemplify`] on a fresh exemplifier.
pub fn exemplify(
    a: &Automaton,
    targets: &BTreeSet<LocId>,
    budget: Budget,
    attempts: usize,
) -> Result<Vec<ExemplifyResult>, ExemplifyError> {
    Exemplifier::new(a)?.exemplify(targets, budget, attempts)
}
