//! Concrete semantics (run checking) and symbolic semantics (parametric
//! zone graph).

mod concrete;
mod symbolic;

pub use concrete::{
    full_point, project_params, project_vars, validate_run, ConcreteRun, ConcreteState, FailReason,
    RunError, Step, Verdict,
};
pub use symbolic::{
    shortest_word, shortest_words, Budget, SemanticsError, Symbolic, SymbolicRun, SymbolicState,
    ZoneGraph, GLOBAL_CLOCK,
};
