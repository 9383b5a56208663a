use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::rational::Rational;
use super::space::{DimId, DimKind, Space};
use super::system::System;
use super::term::{AtomicConstraint, LinearTerm, Relation};

/// Rate per variable dimension. Dimensions absent from the map do not move.
pub type FlowMap = BTreeMap<DimId, Rational>;

/// A point, indexed by dimension id.
pub type Valuation = Vec<Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension registries differ: {0} vs {1}")]
    RegistryMismatch(String, String),
    #[error("polyhedron is unsatisfiable")]
    Unsatisfiable,
    #[error("dimension {0} is not registered")]
    UnknownDim(DimId),
    #[error("dimension `{0}` has no counterpart in the target registry")]
    MissingName(String),
}

/// Possibly-open convex polyhedron over a shared dimension registry.
#[derive(Clone)]
pub struct Polyhedron {
    space: Arc<Space>,
    sys: System,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Finite(Rational),
    Infinite,
}

/// Exact one-dimensional shadow with attainedness of each end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimInterval {
    pub lower: Endpoint,
    pub lower_attained: bool,
    pub upper: Endpoint,
    pub upper_attained: bool,
}

impl DimInterval {
    pub fn unbounded() -> Self {
        DimInterval {
            lower: Endpoint::Infinite,
            lower_attained: false,
            upper: Endpoint::Infinite,
            upper_attained: false,
        }
    }

    /// From optional `(value, strict)` endpoints.
    pub(crate) fn from_bounds(lo: Option<(Rational, bool)>, hi: Option<(Rational, bool)>) -> Self {
        let mut out = DimInterval::unbounded();
        if let Some((v, strict)) = lo {
            out.lower = Endpoint::Finite(v);
            out.lower_attained = !strict;
        }
        if let Some((v, strict)) = hi {
            out.upper = Endpoint::Finite(v);
            out.upper_attained = !strict;
        }
        out
    }

    fn shifted(mut self, c: &Rational) -> Self {
        if let Endpoint::Finite(v) = &mut self.lower {
            *v = &*v + c;
        }
        if let Endpoint::Finite(v) = &mut self.upper {
            *v = &*v + c;
        }
        self
    }

    pub fn is_unbounded(&self) -> bool {
        self.lower == Endpoint::Infinite && self.upper == Endpoint::Infinite
    }

    pub fn lower_value(&self) -> Option<&Rational> {
        match &self.lower {
            Endpoint::Finite(v) => Some(v),
            Endpoint::Infinite => None,
        }
    }

    pub fn upper_value(&self) -> Option<&Rational> {
        match &self.upper {
            Endpoint::Finite(v) => Some(v),
            Endpoint::Infinite => None,
        }
    }

    pub fn minimum(&self) -> Option<&Rational> {
        if self.lower_attained {
            self.lower_value()
        } else {
            None
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        let lo = match &self.lower {
            Endpoint::Infinite => true,
            Endpoint::Finite(l) => v > l || (v == l && self.lower_attained),
        };
        let hi = match &self.upper {
            Endpoint::Infinite => true,
            Endpoint::Finite(u) => v < u || (v == u && self.upper_attained),
        };
        lo && hi
    }

    /// Representative value: the attained minimum (1 or a point below the
    /// supremum when the minimum is 0), else a point strictly inside.
    pub fn pick(&self) -> Rational {
        let one = Rational::one();
        if self.is_unbounded() {
            return one;
        }
        if let Some(min) = self.minimum() {
            if min.is_zero() {
                match self.upper_value() {
                    None => return one,
                    Some(sup) if sup > &one => return one,
                    Some(sup) if sup.is_positive() => return sup / &Rational::from(2),
                    _ => {}
                }
            }
            return min.clone();
        }
        match (self.lower_value(), self.upper_value()) {
            (Some(inf), None) => inf + &one,
            (None, Some(sup)) => one.min(sup - &Rational::one()),
            (Some(inf), Some(sup)) => (inf + sup) / Rational::from(2),
            (None, None) => unreachable!("unbounded handled above"),
        }
    }
}

impl fmt::Display for DimInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lower {
            Endpoint::Infinite => f.write_str("(-inf")?,
            Endpoint::Finite(v) => {
                write!(f, "{}{}", if self.lower_attained { '[' } else { '(' }, v)?
            }
        }
        f.write_str(", ")?;
        match &self.upper {
            Endpoint::Infinite => f.write_str("+inf)"),
            Endpoint::Finite(v) => {
                write!(f, "{}{}", v, if self.upper_attained { ']' } else { ')' })
            }
        }
    }
}

impl Polyhedron {
    pub fn universe(space: &Arc<Space>) -> Self {
        Polyhedron {
            space: space.clone(),
            sys: System::universe(),
        }
    }

    pub fn empty(space: &Arc<Space>) -> Self {
        Polyhedron {
            space: space.clone(),
            sys: System::empty(),
        }
    }

    pub fn from_atoms(space: &Arc<Space>, atoms: &[AtomicConstraint]) -> Result<Self, PolyError> {
        for a in atoms {
            if let Some(d) = a.term.dims().find(|d| *d >= space.len()) {
                return Err(PolyError::UnknownDim(d));
            }
        }
        Ok(Polyhedron {
            space: space.clone(),
            sys: System::from_atoms(atoms),
        })
    }

    /// The single point `v`.
    pub fn point(space: &Arc<Space>, v: &[Rational]) -> Self {
        let atoms: Vec<AtomicConstraint> = v
            .iter()
            .enumerate()
            .map(|(d, x)| AtomicConstraint::eq(LinearTerm::var(d), LinearTerm::constant(x.clone())))
            .collect();
        Polyhedron {
            space: space.clone(),
            sys: System::from_atoms(&atoms),
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn atoms(&self) -> Vec<AtomicConstraint> {
        self.sys.atoms()
    }

    pub fn is_universe(&self) -> bool {
        !self.sys.empty && self.sys.rows.is_empty()
    }

    /// True when the polyhedron is known to be empty without running
    /// elimination. Use `is_satisfiable` for a decision.
    pub fn is_trivially_empty(&self) -> bool {
        self.sys.empty
    }

    fn check_same(&self, other: &Polyhedron) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space {
            Ok(())
        } else {
            Err(PolyError::RegistryMismatch(
                self.space.to_string(),
                other.space.to_string(),
            ))
        }
    }

    pub fn conj(&self, other: &Polyhedron) -> Result<Polyhedron, PolyError> {
        self.check_same(other)?;
        Ok(Polyhedron {
            space: self.space.clone(),
            sys: self.sys.conj(&other.sys),
        })
    }

    pub fn with_atom(&self, atom: &AtomicConstraint) -> Polyhedron {
        let mut sys = self.sys.clone();
        sys.add(atom);
        Polyhedron {
            space: self.space.clone(),
            sys,
        }
    }

    pub fn with_atoms(&self, atoms: &[AtomicConstraint]) -> Polyhedron {
        let mut sys = self.sys.clone();
        for a in atoms {
            sys.add(a);
        }
        Polyhedron {
            space: self.space.clone(),
            sys,
        }
    }

    /// Conjoins `d = value` for each pair.
    pub fn fix(&self, values: &[(DimId, Rational)]) -> Polyhedron {
        let atoms: Vec<AtomicConstraint> = values
            .iter()
            .map(|(d, v)| {
                AtomicConstraint::eq(LinearTerm::var(*d), LinearTerm::constant(v.clone()))
            })
            .collect();
        self.with_atoms(&atoms)
    }

    pub fn is_satisfiable(&self) -> bool {
        self.sys.is_satisfiable()
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.sys.holds(point)
    }

    pub fn eliminate(&self, dims: &BTreeSet<DimId>) -> Polyhedron {
        Polyhedron {
            space: self.space.clone(),
            sys: self.sys.eliminate(dims),
        }
    }

    pub fn eliminate_dims(&self, dims: &[DimId]) -> Polyhedron {
        self.eliminate(&dims.iter().copied().collect())
    }

    pub fn project_params(&self) -> Polyhedron {
        self.eliminate(&self.space.vars().collect())
    }

    pub fn minimize(&self) -> Polyhedron {
        Polyhedron {
            space: self.space.clone(),
            sys: self.sys.minimize(),
        }
    }

    fn drift(&self, flow: &FlowMap, sign: i64) -> Polyhedron {
        if self.sys.empty || flow.values().all(|r| r.is_zero()) {
            return self.clone();
        }
        let d = self.space.len();
        let sign = Rational::from(sign);
        let mut sys = System::universe();
        for a in self.sys.atoms() {
            let mut t = a.term.clone();
            let mut dc = Rational::zero();
            for (x, c) in a.term.coeffs() {
                if let Some(r) = flow.get(x) {
                    dc += c * r;
                }
            }
            // x := x - sign * f(x) * d
            t.add_coeff(d, &-(&dc * &sign));
            sys.add(&AtomicConstraint::new(t, a.rel));
        }
        sys.add(&AtomicConstraint::new(
            LinearTerm::var(d).neg(),
            Relation::Le,
        ));
        let out = sys.eliminate(&BTreeSet::from([d]));
        Polyhedron {
            space: self.space.clone(),
            sys: out,
        }
    }

    /// Forward cone under constant rates, delays `d >= 0`.
    pub fn time_elapse(&self, flow: &FlowMap) -> Polyhedron {
        self.drift(flow, 1)
    }

    /// Backward cone under constant rates, delays `d >= 0`.
    pub fn time_past(&self, flow: &FlowMap) -> Polyhedron {
        self.drift(flow, -1)
    }

    pub fn update(&self, assigns: &BTreeMap<DimId, Rational>) -> Polyhedron {
        if assigns.is_empty() {
            return self.clone();
        }
        let freed = self.eliminate(&assigns.keys().copied().collect());
        let vals: Vec<(DimId, Rational)> = assigns.iter().map(|(d, v)| (*d, v.clone())).collect();
        freed.fix(&vals)
    }

    pub fn dim_interval(&self, dim: DimId) -> Result<DimInterval, PolyError> {
        if dim >= self.space.len() {
            return Err(PolyError::UnknownDim(dim));
        }
        Self::interval_of(&self.sys, dim)
    }

    /// Range of values the term takes over the polyhedron.
    pub fn term_interval(&self, t: &LinearTerm) -> Result<DimInterval, PolyError> {
        Ok(self.term_intervals(std::slice::from_ref(t))?.remove(0))
    }

    /// [`Self::term_interval`] for several terms at once.
    pub fn term_intervals(&self, terms: &[LinearTerm]) -> Result<Vec<DimInterval>, PolyError> {
        let forms: Option<Vec<Vec<(DimId, i64)>>> = terms
            .iter()
            .map(|t| {
                t.coeffs()
                    .iter()
                    .map(|(d, c)| match c.to_i64_parts() {
                        Some((n, 1)) => Some((*d, n)),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        if let Some(bounds) = forms.and_then(|f| super::dense::form_bounds(&self.sys, &f)) {
            let bounds = bounds.ok_or(PolyError::Unsatisfiable)?;
            return Ok(bounds
                .into_iter()
                .zip(terms)
                .map(|((lo, hi), t)| DimInterval::from_bounds(lo, hi).shifted(t.constant_part()))
                .collect());
        }
        let fresh = self.space.len();
        terms
            .iter()
            .map(|t| {
                let mut sys = self.sys.clone();
                sys.add(&AtomicConstraint::eq(LinearTerm::var(fresh), t.clone()));
                Self::interval_of(&sys, fresh)
            })
            .collect()
    }

    fn interval_of(sys: &System, dim: DimId) -> Result<DimInterval, PolyError> {
        if let Some(fast) = super::dense::dim_bounds(sys, dim) {
            let (lo, hi) = fast.ok_or(PolyError::Unsatisfiable)?;
            return Ok(DimInterval::from_bounds(lo, hi));
        }
        let others: BTreeSet<DimId> = sys.dims().into_iter().filter(|d| *d != dim).collect();
        let shadow = sys.eliminate(&others);
        if shadow.empty {
            return Err(PolyError::Unsatisfiable);
        }
        let mut out = DimInterval::unbounded();
        for (dir, b) in &shadow.rows {
            // only the direction [(dim, 1)] can remain
            debug_assert_eq!(dir.len(), 1);
            if let Some(l) = &b.lower {
                out.lower = Endpoint::Finite(l.value.clone());
                out.lower_attained = !l.strict;
            }
            if let Some(u) = &b.upper {
                out.upper = Endpoint::Finite(u.value.clone());
                out.upper_attained = !u.strict;
            }
        }
        Ok(out)
    }

    /// Picks a human-friendly point, one dimension at a time in registry
    /// order, fixing each choice before moving on.
    pub fn exhibit_point(&self) -> Result<Valuation, PolyError> {
        self.exhibit_point_in_order(&(0..self.space.len()).collect::<Vec<_>>())
    }

    pub fn exhibit_point_in_order(&self, order: &[DimId]) -> Result<Valuation, PolyError> {
        if !self.is_satisfiable() {
            return Err(PolyError::Unsatisfiable);
        }
        let mut cur = self.sys.clone();
        let mut point = vec![Rational::zero(); self.space.len()];
        for &d in order {
            let v = if cur.mentions(d) {
                Polyhedron {
                    space: self.space.clone(),
                    sys: cur.clone(),
                }
                .dim_interval(d)?
                .pick()
            } else {
                Rational::one()
            };
            cur.add(&AtomicConstraint::eq(
                LinearTerm::var(d),
                LinearTerm::constant(v.clone()),
            ));
            // Substituting keeps later interval queries small.
            cur = cur.eliminate(&BTreeSet::from([d]));
            point[d] = v;
        }
        debug_assert!(self.contains(&point));
        Ok(point)
    }

    /// A point of `self \ other`, if any. Pieces `self ∧ ¬atom` are tried in
    /// the stored order of `other`'s atoms.
    pub fn point_in_difference(&self, other: &Polyhedron) -> Result<Option<Valuation>, PolyError> {
        match self.difference_piece(other)? {
            Some(piece) => Ok(Some(piece.exhibit_point()?)),
            None => Ok(None),
        }
    }

    /// First satisfiable piece of `self \ other`.
    pub fn difference_piece(&self, other: &Polyhedron) -> Result<Option<Polyhedron>, PolyError> {
        self.check_same(other)?;
        if !self.is_satisfiable() {
            return Ok(None);
        }
        if other.sys.empty {
            return Ok(Some(self.clone()));
        }
        for atom in other.sys.atoms() {
            for neg in atom.negate() {
                let piece = self.with_atom(&neg);
                if piece.is_satisfiable() {
                    return Ok(Some(piece));
                }
            }
        }
        Ok(None)
    }

    pub fn is_subset(&self, other: &Polyhedron) -> Result<bool, PolyError> {
        Ok(self.difference_piece(other)?.is_none())
    }

    /// Set equality by mutual inclusion.
    pub fn equals(&self, other: &Polyhedron) -> Result<bool, PolyError> {
        Ok(self.is_subset(other)? && other.is_subset(self)?)
    }

    /// Rewrites the polyhedron over another registry, matching dims by
    /// name. Dims that are not mentioned need no counterpart.
    pub fn remap(&self, target: &Arc<Space>) -> Result<Polyhedron, PolyError> {
        let mut map = BTreeMap::new();
        for d in self.sys.dims() {
            let name = self.space.name(d);
            let t = target
                .lookup(name)
                .ok_or_else(|| PolyError::MissingName(name.to_string()))?;
            map.insert(d, t);
        }
        let atoms: Vec<AtomicConstraint> = self
            .sys
            .atoms()
            .into_iter()
            .map(|a| {
                let t = LinearTerm::from_parts(
                    a.term
                        .coeffs()
                        .iter()
                        .map(|(d, c)| (*map.get(d).unwrap_or(d), c.clone())),
                    a.term.constant_part().clone(),
                );
                AtomicConstraint::new(t, a.rel)
            })
            .collect();
        Ok(Polyhedron {
            space: target.clone(),
            sys: System::from_atoms(&atoms),
        })
    }

    /// Dims mentioned by at least one atom.
    pub fn constrained_dims(&self) -> BTreeSet<DimId> {
        self.sys.dims()
    }

    pub fn mentions_kind(&self, kind: DimKind) -> bool {
        self.sys
            .dims()
            .iter()
            .any(|d| self.space.dim(*d).kind == kind)
    }
}

impl PartialEq for Polyhedron {
    /// Syntactic equality of the canonical form. Use `equals` for set
    /// equality.
    fn eq(&self, other: &Self) -> bool {
        *self.space == *other.space && self.sys == other.sys
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sys.empty {
            return f.write_str("false");
        }
        let atoms = self.sys.atoms();
        if atoms.is_empty() {
            return f.write_str("true");
        }
        let parts: Vec<String> = atoms
            .iter()
            .map(|a| a.display(&self.space).to_string())
            .collect();
        f.write_str(&parts.join(" && "))
    }
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polyhedron{{{}}}", self)
    }
}
