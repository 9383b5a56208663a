//! Exact kernel for parametric linear constraints over rationals.
//!
//! Polyhedra are not necessarily closed: strict and non-strict inequalities
//! and equalities are all first-class. Every operation is exact.

mod dense;
mod fast;
mod polyhedron;
mod rational;
mod space;
mod system;
mod term;

pub use polyhedron::{DimInterval, Endpoint, FlowMap, PolyError, Polyhedron, Valuation};
pub use rational::{ParseRationalError, Rational};
pub use space::{Dim, DimId, DimKind, Space};
pub use term::{AtomicConstraint, LinearTerm, Relation};
