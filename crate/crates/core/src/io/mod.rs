//! Model files, trace documents and plots.

mod emit;
mod lexer;
mod model;
mod plot;
mod trace;

pub use emit::emit_model;
pub use lexer::Pos;
pub use model::{parse_constraint, parse_model, parse_model_str, ModelError};
pub use plot::{breakpoints, emit_plot, polyline, PlotFormat};
pub use trace::{
    emit_trace, location_parts, model_hash, parse_trace, TraceDocument, TraceError, TraceStep,
};
