//! Versioned JSON files shared by the CLI and the harness.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::sim::{validate_sequence, verify_trace, Configuration, Request, RequestEvent, SimError, Trace};
use crate::tree::{SubdividedTree, TreeDescription, TreeError, VertexId};

pub const SCENARIO_FORMAT: &str = "scenario/v1";
pub const TRACE_FORMAT: &str = "trace/v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("expected format {expected:?}, found {found:?}")]
    Version { expected: &'static str, found: String },
    #[error("k = {k} but {positions} initial positions")]
    ServerCount { k: usize, positions: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("trace does not replay: {0}")]
    Trace(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn check_version(found: &str, expected: &'static str) -> Result<(), FormatError> {
    if found == expected {
        Ok(())
    } else {
        Err(FormatError::Version { expected, found: found.into() })
    }
}

/// SHA-256 of the compact JSON form, hex encoded.
pub fn content_hash<T: Serialize + ?Sized>(v: &T) -> String {
    let bytes = serde_json::to_vec(v).expect("value serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub format: String,
    pub tree: TreeDescription,
    pub k: usize,
    pub initial_positions: Vec<VertexId>,
    pub requests: Vec<Request>,
}

/// A scenario with its tree built and the sequence validated.
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub tree: Arc<SubdividedTree>,
    pub initial: Configuration,
    pub requests: Vec<Request>,
}

impl Scenario {
    pub fn new(tree: TreeDescription, initial: Vec<VertexId>, requests: Vec<Request>) -> Self {
        Scenario { format: SCENARIO_FORMAT.into(), tree, k: initial.len(), initial_positions: initial, requests }
    }

    pub fn load(&self) -> Result<LoadedScenario, FormatError> {
        check_version(&self.format, SCENARIO_FORMAT)?;
        if self.k != self.initial_positions.len() {
            return Err(FormatError::ServerCount { k: self.k, positions: self.initial_positions.len() });
        }
        let tree = Arc::new(SubdividedTree::new(self.tree.build()?));
        validate_sequence(&tree, &self.initial_positions, &self.requests, false)?;
        Ok(LoadedScenario { tree, initial: self.initial_positions.clone(), requests: self.requests.clone() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    pub fn hash(&self) -> String {
        content_hash(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub format: String,
    pub tree: TreeDescription,
    pub initial: Configuration,
    pub requests: Vec<Request>,
    pub events: Vec<RequestEvent>,
    pub cost_up: i64,
    pub cost_down: i64,
    pub final_config: Configuration,
}

impl From<&Trace> for TraceFile {
    fn from(t: &Trace) -> Self {
        TraceFile {
            format: TRACE_FORMAT.into(),
            tree: TreeDescription::from(t.tree.base()),
            initial: t.initial.clone(),
            requests: t.requests.clone(),
            events: t.events.clone(),
            cost_up: t.cost_up,
            cost_down: t.cost_down,
            final_config: t.final_config.clone(),
        }
    }
}

impl TraceFile {
    /// Rebuilds the trace and re-verifies it from scratch.
    pub fn load(&self) -> Result<Trace, FormatError> {
        check_version(&self.format, TRACE_FORMAT)?;
        let tree = Arc::new(SubdividedTree::new(self.tree.build()?));
        let trace = Trace {
            tree,
            initial: self.initial.clone(),
            requests: self.requests.clone(),
            events: self.events.clone(),
            cost_up: self.cost_up,
            cost_down: self.cost_down,
            final_config: self.final_config.clone(),
        };
        match verify_trace(&trace).violation {
            Some(v) => Err(FormatError::Trace(v.to_string())),
            None => Ok(trace),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run_double_coverage;
    use crate::tree::WeightedTree;

    fn scenario() -> Scenario {
        let t = WeightedTree::from_edges(&[(1, 0, 2), (2, 0, 1), (3, 1, 1)]).unwrap();
        let reqs = vec![Request::Simple { s: 2 }, Request::Relocate { s: 2, d: 3 }, Request::Simple { s: 0 }];
        Scenario::new(TreeDescription::from(&t), vec![3, 0], reqs)
    }

    #[test]
    fn scenario_round_trip() {
        let s = scenario();
        let json = s.to_json();
        assert!(json.contains("\"format\":\"scenario/v1\""));
        assert!(json.contains("{\"type\":\"relocate\",\"s\":2,\"d\":3}"));
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.hash(), s.hash());
        assert_eq!(s.hash().len(), 64);
        let l = s.load().unwrap();
        assert_eq!(l.requests.len(), 3);
    }

    #[test]
    fn scenario_rejections() {
        let mut s = scenario();
        s.format = "scenario/v0".into();
        assert!(matches!(s.load(), Err(FormatError::Version { .. })));
        let mut s = scenario();
        s.k = 3;
        assert!(matches!(s.load(), Err(FormatError::ServerCount { .. })));
        let mut s = scenario();
        s.requests.insert(0, Request::Relocate { s: 1, d: 2 });
        assert!(matches!(s.load(), Err(FormatError::Sim(SimError::UnanchoredRelocation(0, 1)))));
        let mut other = scenario();
        other.requests.pop();
        assert_ne!(other.hash(), scenario().hash());
    }

    #[test]
    fn trace_round_trip() {
        let l = scenario().load().unwrap();
        let tr = run_double_coverage(&l.tree, &l.initial, &l.requests).unwrap();
        let f = TraceFile::from(&tr);
        let back: TraceFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        let tr2 = back.load().unwrap();
        assert_eq!(tr2.events, tr.events);
        assert_eq!(tr2.total_cost(), tr.total_cost());
        let mut bad = f.clone();
        bad.cost_up += 1;
        assert!(matches!(bad.load(), Err(FormatError::Trace(_))));
    }
}
