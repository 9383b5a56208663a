use crate::automata::{EdgeId, LocId};
use crate::poly::{Polyhedron, Valuation};
use crate::semantics::{ConcreteRun, SymbolicRun};

use super::{Exemplifier, ExemplifyError};

impl Exemplifier {
    /// Positive run along the first `i` edges of `r` ending in the point `w`
    /// of state `i`. The run stops at the moment state `i` is entered; the
    /// delay leading to `w` is not part of it.
    pub fn reconstruct_pos(
        &self,
        r: &SymbolicRun,
        i: usize,
        w: &Valuation,
    ) -> Result<ConcreteRun, ExemplifyError> {
        let points = self.backward(r, i, w)?;
        self.run_from_points(r, &points)
    }

    /// Points of states `0..=i`, each taken before time elapses.
    pub(super) fn backward(
        &self,
        r: &SymbolicRun,
        i: usize,
        w: &Valuation,
    ) -> Result<Vec<Valuation>, ExemplifyError> {
        let mut points = vec![self.pred_cont_at(r, i, w)?];
        for k in (0..i).rev() {
            let next = points.last().expect("nonempty");
            let fired = self
                .exhibit_pred_disc(&r.states[k].zone, r.edges[k], next)
                .map_err(|_| ExemplifyError::NoPredecessor(k))?;
            points.push(self.pred_cont_at(r, k, &fired)?);
        }
        points.reverse();
        Ok(points)
    }

    fn pred_cont_at(
        &self,
        r: &SymbolicRun,
        n: usize,
        v: &Valuation,
    ) -> Result<Valuation, ExemplifyError> {
        let prev = n.checked_sub(1).map(|p| (&r.states[p].zone, r.edges[p]));
        self.exhibit_pred_cont(prev, r.states[n].location, v)
            .map_err(|_| ExemplifyError::NoPredecessor(n))
    }

    /// A point from which `v` is reached by pure delay in `loc`, inside the
    /// invariant, and which is either initial (`prev` is `None`) or the
    /// image of `prev`'s zone through `prev`'s edge.
    pub fn exhibit_pred_cont(
        &self,
        prev: Option<(&Polyhedron, EdgeId)>,
        loc: LocId,
        v: &Valuation,
    ) -> Result<Valuation, ExemplifyError> {
        let s = &self.symbolic;
        let past = s
            .point_polyhedron(v)
            .time_past(&s.flows[loc])
            .conj(&s.invariants[loc])?;
        let from = match prev {
            None => s.init_box.clone(),
            Some((c, e)) => c.conj(&s.guards[e])?.update(&s.automaton.edges[e].updates),
        };
        Ok(self.exhibit(&past.conj(&from)?)?)
    }

    /// A point of `c` satisfying the guard of `e` whose update is `v`.
    pub fn exhibit_pred_disc(
        &self,
        c: &Polyhedron,
        e: EdgeId,
        v: &Valuation,
    ) -> Result<Valuation, ExemplifyError> {
        let s = &self.symbolic;
        let updates = &s.automaton.edges[e].updates;
        let kept = (0..s.space.len()).filter(|d| !updates.contains_key(d));
        let set = s.fix_dims(v, kept).conj(c)?.conj(&s.guards[e])?;
        Ok(self.exhibit(&set)?)
    }
}
