//! JSON trace documents for concrete runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::automata::Automaton;
use crate::exemplify::{Deadlock, RunKind};
use crate::poly::Rational;
use crate::semantics::{ConcreteRun, ConcreteState, Step, Verdict};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("malformed trace document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("no value for `{0}`")]
    Missing(String),
    #[error("unknown name `{0}`")]
    Unknown(String),
    #[error("step {0} names edge {1}, which the automaton does not have")]
    UnknownEdge(usize, usize),
    #[error("the last state carries an action")]
    TrailingAction,
    #[error("state {0} has no outgoing step")]
    MissingStep(usize),
}

/// One state of a trace, with the step leaving it (absent for the last).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Component locations, in network order.
    pub location: Vec<String>,
    pub valuation: BTreeMap<String, Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    /// SHA-256 of the model files, see [`model_hash`].
    pub model: String,
    pub kind: RunKind,
    pub parameters: BTreeMap<String, Rational>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadlock: Option<Deadlock>,
    pub steps: Vec<TraceStep>,
}

/// Hex SHA-256 over the model texts, each followed by a NUL byte.
pub fn model_hash(texts: &[&str]) -> String {
    let mut h = Sha256::new();
    for t in texts {
        h.update(t.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Component location names of a product location `(a, b, c)`.
pub fn location_parts(name: &str) -> Vec<String> {
    match name.strip_prefix('(').and_then(|n| n.strip_suffix(')')) {
        Some(inner) => inner.split(", ").map(str::to_string).collect(),
        None => vec![name.to_string()],
    }
}

fn location_name(parts: &[String]) -> String {
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("({})", parts.join(", "))
    }
}

impl TraceDocument {
    pub fn from_run(
        a: &Automaton,
        model: &str,
        kind: RunKind,
        run: &ConcreteRun,
        verdict: Verdict,
        deadlock: Option<Deadlock>,
    ) -> Self {
        let parameters = a
            .params()
            .zip(&run.pval)
            .map(|(d, v)| (a.space.name(d).to_string(), v.clone()))
            .collect();
        let steps = run
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let step = run.steps.get(k);
                TraceStep {
                    location: location_parts(&a.locations[s.location].name),
                    valuation: a
                        .vars()
                        .zip(&s.valuation)
                        .map(|(d, v)| (a.var_name(d).to_string(), v.clone()))
                        .collect(),
                    edge: step.map(|st| st.edge),
                    action: step.map(|st| a.edges[st.edge].action.clone()),
                    duration: step.map(|st| st.duration.clone()),
                }
            })
            .collect();
        TraceDocument {
            model: model.to_string(),
            kind,
            parameters,
            verdict,
            deadlock,
            steps,
        }
    }

    /// Rebuilds the run over `a`.
    pub fn to_run(&self, a: &Automaton) -> Result<ConcreteRun, TraceError> {
        let pval = a
            .params()
            .map(|d| {
                let name = a.space.name(d);
                self.parameters
                    .get(name)
                    .cloned()
                    .ok_or_else(|| TraceError::Missing(name.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(extra) = self.parameters.keys().find(|n| a.space.lookup(n).is_none()) {
            return Err(TraceError::Unknown(extra.clone()));
        }
        let mut states = Vec::new();
        let mut steps = Vec::new();
        let n = self.steps.len();
        for (k, ts) in self.steps.iter().enumerate() {
            let name = location_name(&ts.location);
            let location = a.loc_id(&name).ok_or(TraceError::UnknownLocation(name))?;
            let valuation = a
                .vars()
                .map(|d| {
                    let v = a.var_name(d);
                    ts.valuation
                        .get(v)
                        .cloned()
                        .ok_or_else(|| TraceError::Missing(v.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(extra) = ts.valuation.keys().find(|v| a.space.lookup(v).is_none()) {
                return Err(TraceError::Unknown(extra.clone()));
            }
            states.push(ConcreteState {
                location,
                valuation,
            });
            match (&ts.edge, &ts.duration, k + 1 == n) {
                (None, None, true) => {}
                (Some(_), _, true) | (_, Some(_), true) => return Err(TraceError::TrailingAction),
                (Some(e), Some(d), false) => {
                    if *e >= a.edges.len() {
                        return Err(TraceError::UnknownEdge(k, *e));
                    }
                    steps.push(Step {
                        edge: *e,
                        duration: d.clone(),
                    });
                }
                _ => return Err(TraceError::MissingStep(k)),
            }
        }
        Ok(ConcreteRun {
            pval,
            states,
            steps,
        })
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn emit_trace(doc: &TraceDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("trace documents serialize");
    s.push('\n');
    s
}

pub fn parse_trace(text: &str) -> Result<TraceDocument, TraceError> {
    Ok(serde_json::from_str(text)?)
}
