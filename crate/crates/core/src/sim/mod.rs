//! Requests, configurations and the small-step Double Coverage simulator.

mod dc;
mod verify;

pub use dc::{run_double_coverage, DoubleCoverage};
pub use verify::{cost_summary, verify_trace, CostSummary, TraceReport, Violation, ViolationKind};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{SubdividedTree, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Request {
    Simple { s: VertexId },
    Relocate { s: VertexId, d: VertexId },
}

impl Request {
    pub fn source(&self) -> VertexId {
        match *self {
            Request::Simple { s } | Request::Relocate { s, .. } => s,
        }
    }

    /// Where a server sits at `s`'s position once the request is done.
    pub fn destination(&self) -> VertexId {
        match *self {
            Request::Simple { s } => s,
            Request::Relocate { d, .. } => d,
        }
    }

    pub fn is_relocation(&self) -> bool {
        matches!(self, Request::Relocate { .. })
    }
}

impl std::fmt::Display for Request {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            Request::Simple { s } => write!(f, "{s}"),
            Request::Relocate { s, d } => write!(f, "{s}->{d}"),
        }
    }
}

/// Server index to short-vertex position.
pub type Configuration = Vec<VertexId>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub server: usize,
    pub from: VertexId,
    pub to: VertexId,
}

/// One unit of simultaneous motion. `up` moves toward the root, `down` away.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallStep {
    pub up: Vec<usize>,
    pub down: Vec<usize>,
    pub moves: Vec<Move>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RequestEvent {
    Simple { steps: Vec<SmallStep> },
    Relocate { server: usize, from: VertexId, to: VertexId },
}

impl RequestEvent {
    pub fn step_count(&self) -> usize {
        match self {
            RequestEvent::Simple { steps } => steps.len(),
            RequestEvent::Relocate { .. } => 0,
        }
    }
}

/// Full history of a Double Coverage run.
#[derive(Clone, Debug)]
pub struct Trace {
    pub tree: Arc<SubdividedTree>,
    pub initial: Configuration,
    pub requests: Vec<Request>,
    pub events: Vec<RequestEvent>,
    pub cost_up: i64,
    pub cost_down: i64,
    pub final_config: Configuration,
}

/// A unit of time for the dual: a small step or a relocation.
#[derive(Clone, Copy, Debug)]
pub enum Tick<'a> {
    Step { request: usize, step: &'a SmallStep },
    Relocate { request: usize, server: usize, from: VertexId, to: VertexId },
}

impl Tick<'_> {
    pub fn request(&self) -> usize {
        match *self {
            Tick::Step { request, .. } | Tick::Relocate { request, .. } => request,
        }
    }
}

impl Trace {
    pub fn k(&self) -> usize {
        self.initial.len()
    }

    pub fn total_cost(&self) -> i64 {
        self.cost_up + self.cost_down
    }

    /// Small steps and relocations in forward order.
    pub fn ticks(&self) -> impl Iterator<Item = Tick<'_>> + '_ {
        self.events.iter().enumerate().flat_map(|(t, e)| {
            let v: Vec<Tick<'_>> = match e {
                RequestEvent::Simple { steps } => {
                    steps.iter().map(|step| Tick::Step { request: t, step }).collect()
                }
                &RequestEvent::Relocate { server, from, to } => {
                    vec![Tick::Relocate { request: t, server, from, to }]
                }
            };
            v.into_iter()
        })
    }

    pub fn tick_count(&self) -> usize {
        self.events.iter().map(|e| e.step_count().max(matches!(e, RequestEvent::Relocate { .. }) as usize)).sum()
    }

    /// Configuration before each tick, plus the final one (length ticks+1).
    pub fn configurations(&self) -> Vec<Configuration> {
        let mut cur = self.initial.clone();
        let mut out = vec![cur.clone()];
        for tick in self.ticks() {
            match tick {
                Tick::Step { step, .. } => {
                    for m in &step.moves {
                        cur[m.server] = m.to;
                    }
                }
                Tick::Relocate { server, to, .. } => cur[server] = to,
            }
            out.push(cur.clone());
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("configuration has no servers")]
    NoServers,
    #[error("position {0} is not a vertex of the tree")]
    UnknownVertex(VertexId),
    #[error("request {0} targets synthetic vertex {1}")]
    SyntheticRequest(usize, VertexId),
    #[error("request {0} is a relocation that does not follow a request ending at {1}")]
    UnanchoredRelocation(usize, VertexId),
    #[error("request {0}: no server at {1} to relocate")]
    NoOccupant(usize, VertexId),
    #[error("request {0} targets {1}, which is not a leaf")]
    NotLeaf(usize, VertexId),
}

/// Checks request vertices and the relocation anchoring rule: every
/// `Relocate(s, _)` directly follows a request that ends with a server at `s`.
pub fn validate_sequence(
    tree: &SubdividedTree,
    initial: &[VertexId],
    requests: &[Request],
    leaves_only: bool,
) -> Result<(), SimError> {
    if initial.is_empty() {
        return Err(SimError::NoServers);
    }
    if let Some(&v) = initial.iter().find(|&&v| !tree.contains(v)) {
        return Err(SimError::UnknownVertex(v));
    }
    for (t, r) in requests.iter().enumerate() {
        for v in [r.source(), r.destination()] {
            if !tree.contains(v) {
                return Err(SimError::UnknownVertex(v));
            }
            if !tree.is_original(v) {
                return Err(SimError::SyntheticRequest(t, v));
            }
            if leaves_only && !tree.children(v).is_empty() {
                return Err(SimError::NotLeaf(t, v));
            }
        }
        if let Request::Relocate { s, .. } = *r {
            let anchored = t > 0 && requests[t - 1].destination() == s;
            if !anchored {
                return Err(SimError::UnanchoredRelocation(t, s));
            }
        }
    }
    Ok(())
}
