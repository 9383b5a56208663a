//! Exemplification of parametric timed specifications over bounded signals.
//!
//! A specification automaton with timing parameters is composed with one
//! bounding automaton per signal. The product is explored symbolically, and
//! concrete parameter valuations with positive and negative example runs are
//! extracted from the resulting symbolic runs.

pub mod automata;
pub mod exemplify;
pub mod io;
pub mod poly;
pub mod semantics;
