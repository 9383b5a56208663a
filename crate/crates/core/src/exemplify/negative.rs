use crate::poly::{Rational, Valuation};
use crate::semantics::{
    project_params, project_vars, ConcreteRun, ConcreteState, Step, SymbolicRun,
};

use super::{Exemplifier, ExemplifyError};

impl Exemplifier {
    /// First index `i` at which the parameter projection strictly shrinks
    /// along `r`, with a parameter valuation lost there and a point of zone
    /// `i` under that valuation.
    pub fn find_pdeadlock(
        &self,
        r: &SymbolicRun,
    ) -> Result<Option<(Vec<Rational>, usize, Valuation)>, ExemplifyError> {
        let a = self.automaton();
        if a.params().next().is_none() {
            return Ok(None);
        }
        let mut here = r.states[0].zone.project_params();
        for i in 0..r.len() {
            let next = r.states[i + 1].zone.project_params();
            if let Some(piece) = here.difference_piece(&next)? {
                let pval = project_params(a, &self.exhibit(&piece)?);
                let at = self.symbolic.fix_params(&r.states[i].zone, &pval);
                return Ok(Some((pval, i, self.exhibit(&at)?)));
            }
            here = next;
        }
        Ok(None)
    }

    /// First index `i` at which some point of zone `i` under `pval` can
    /// never take edge `i`, even after waiting inside the invariant.
    pub fn find_vdeadlock(
        &self,
        r: &SymbolicRun,
        pval: &[Rational],
    ) -> Result<Option<(Valuation, usize)>, ExemplifyError> {
        let s = &self.symbolic;
        for i in 0..r.len() {
            let st = &r.states[i];
            let e = r.edges[i];
            let zone = s.fix_params(&st.zone, pval);
            let able = s.guards[e]
                .time_past(&s.flows[st.location])
                .conj(&s.invariants[st.location])?;
            if let Some(piece) = zone.difference_piece(&s.fix_params(&able, pval))? {
                return Ok(Some((self.exhibit(&piece)?, i)));
            }
        }
        Ok(None)
    }

    /// From `w` in state `i`, takes every remaining edge of `r` after a delay
    /// of 1, each new state being `w` with all variables increased by the
    /// number of steps taken. Flows and updates are ignored.
    pub fn construct_neg(&self, r: &SymbolicRun, i: usize, w: &Valuation) -> ConcreteRun {
        let a = self.automaton();
        let start = project_vars(a, w);
        let mut states = vec![ConcreteState {
            location: r.states[i].location,
            valuation: start.clone(),
        }];
        let mut steps = Vec::new();
        for k in i..r.len() {
            let inc = Rational::from((k - i + 1) as i64);
            steps.push(Step {
                edge: r.edges[k],
                duration: Rational::one(),
            });
            let valuation = start.iter().map(|x| x + &inc).collect();
            states.push(ConcreteState {
                location: r.states[k + 1].location,
                valuation,
            });
        }
        ConcreteRun {
            pval: project_params(a, w),
            states,
            steps,
        }
    }

    /// Positive prefix up to state `i` ending where `w` is reached by delay,
    /// followed by [`Self::construct_neg`] from `w`.
    pub(super) fn negative_run(
        &self,
        r: &SymbolicRun,
        i: usize,
        w: &Valuation,
    ) -> Result<ConcreteRun, ExemplifyError> {
        let points = self.backward(r, i, w)?;
        let prefix = self.run_from_points(r, &points)?;
        let last = points.last().expect("nonempty");
        let t = self.symbolic.t_abs;
        let gap = super::compute_dur(t, last, w).ok_or(ExemplifyError::NegativeDuration(i))?;
        Ok(concat(&prefix, &gap, &self.construct_neg(r, i, w)))
    }
}

/// Joins two runs where the suffix starts in the prefix's last location,
/// `gap` time units after the prefix ends. The suffix's first state is
/// dropped and the gap is added to its first step.
pub fn concat(prefix: &ConcreteRun, gap: &Rational, suffix: &ConcreteRun) -> ConcreteRun {
    let mut out = prefix.clone();
    let mut steps = suffix.steps.iter().cloned();
    if let Some(first) = steps.next() {
        out.steps.push(Step {
            edge: first.edge,
            duration: &first.duration + gap,
        });
        out.steps.extend(steps);
        out.states.extend(suffix.states[1..].iter().cloned());
    }
    out
}
