//! Exact offline optima for k-taxi sequences: a configuration DP for tiny
//! instances and a min-cost-flow reduction for everything else.

mod assignment;
mod dp;
mod flow;
mod reduction;

pub use assignment::{min_cost_assignment, EXHAUSTIVE_LIMIT};
pub use dp::{optimal_cost_dp, DEFAULT_BUDGET};
pub use flow::{min_cost_flow, FlowArc, FlowError, FlowNetwork, FlowSolution};
pub use reduction::{build_network, optimal_cost_flow};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::Request;
use crate::tree::{SubdividedTree, VertexId};

/// Asymmetric-capable move cost between points.
pub trait MoveCost {
    fn cost(&self, from: usize, to: usize) -> i64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostMode {
    /// Tree distance.
    Full,
    /// Only the climb toward the root is charged.
    UpwardOnly,
}

#[derive(Clone, Copy, Debug)]
pub struct TreeCost<'a> {
    pub tree: &'a SubdividedTree,
    pub mode: CostMode,
}

impl<'a> TreeCost<'a> {
    pub fn full(tree: &'a SubdividedTree) -> Self {
        TreeCost { tree, mode: CostMode::Full }
    }

    pub fn upward(tree: &'a SubdividedTree) -> Self {
        TreeCost { tree, mode: CostMode::UpwardOnly }
    }
}

impl MoveCost for TreeCost<'_> {
    fn cost(&self, from: usize, to: usize) -> i64 {
        match self.mode {
            CostMode::Full => self.tree.distance(from, to),
            CostMode::UpwardOnly => self.tree.upward_distance(from, to),
        }
    }
}

/// Dense cost matrix, e.g. an integer-scaled metric.
#[derive(Clone, Debug)]
pub struct MatrixCost(pub Vec<Vec<i64>>);

impl MoveCost for MatrixCost {
    fn cost(&self, from: usize, to: usize) -> i64 {
        self.0[from][to]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServedBy {
    pub request: usize,
    pub server: usize,
    pub from: VertexId,
    pub cost: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalMove {
    pub server: usize,
    pub from: VertexId,
    pub to: VertexId,
    pub cost: i64,
}

/// A feasible offline schedule with server identities attached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfflineSchedule {
    pub served: Vec<ServedBy>,
    /// Moves into a prescribed final configuration, if one was fixed.
    pub final_moves: Vec<FinalMove>,
    pub final_config: Vec<VertexId>,
    pub total_cost: i64,
}

impl OfflineSchedule {
    /// Re-derives the cost under `cost` and checks the schedule is
    /// executable: each serving server is where the schedule says it is.
    pub fn replay(&self, cost: &impl MoveCost, initial: &[VertexId], requests: &[Request]) -> Result<i64, OfflineError> {
        let mut pos = initial.to_vec();
        let mut total = 0;
        if self.served.len() != requests.len() {
            return Err(OfflineError::Internal("schedule length".into()));
        }
        for (t, (sb, r)) in self.served.iter().zip(requests).enumerate() {
            if sb.request != t || pos.get(sb.server) != Some(&sb.from) {
                return Err(OfflineError::Internal(format!("schedule inconsistent at request {t}")));
            }
            total += cost.cost(sb.from, r.source());
            pos[sb.server] = r.destination();
        }
        for m in &self.final_moves {
            if pos[m.server] != m.from {
                return Err(OfflineError::Internal("final move from wrong position".into()));
            }
            total += cost.cost(m.from, m.to);
            pos[m.server] = m.to;
        }
        if pos != self.final_config {
            return Err(OfflineError::Internal("final configuration".into()));
        }
        Ok(total)
    }

    /// Cost of the schedule charged upward only, on a tree.
    pub fn upward_cost(&self, tree: &SubdividedTree, initial: &[VertexId], requests: &[Request]) -> i64 {
        self.replay(&TreeCost::upward(tree), initial, requests).expect("schedule replays")
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OfflineError {
    #[error("configuration space needs more than {budget} state-steps")]
    Budget { budget: u64 },
    #[error("fixed final configuration has {got} servers, expected {expected}")]
    FinalSize { expected: usize, got: usize },
    #[error("request {0} is a relocation without a server at its source")]
    UnanchoredRelocation(usize),
    #[error("instance has no servers")]
    NoServers,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("internal error: {0}")]
    Internal(String),
}

pub(crate) fn check_instance(k: usize, requests: &[Request], fixed_final: Option<&[VertexId]>) -> Result<(), OfflineError> {
    if k == 0 {
        return Err(OfflineError::NoServers);
    }
    if let Some(f) = fixed_final {
        if f.len() != k {
            return Err(OfflineError::FinalSize { expected: k, got: f.len() });
        }
    }
    for (t, r) in requests.iter().enumerate() {
        if let Request::Relocate { s, .. } = *r {
            if t == 0 || requests[t - 1].destination() != s {
                return Err(OfflineError::UnanchoredRelocation(t));
            }
        }
    }
    Ok(())
}

/// Turns a per-request choice of "move a server from position p" into a
/// schedule with identities: the lowest-index server at `p` moves.
pub(crate) fn label_schedule(
    cost: &impl MoveCost,
    initial: &[VertexId],
    requests: &[Request],
    from_positions: &[VertexId],
    fixed_final: Option<&[VertexId]>,
) -> OfflineSchedule {
    let mut pos = initial.to_vec();
    let mut served = Vec::with_capacity(requests.len());
    let mut total = 0;
    for (t, (r, &p)) in requests.iter().zip(from_positions).enumerate() {
        let server = pos.iter().position(|&x| x == p).expect("position occupied");
        let c = cost.cost(p, r.source());
        total += c;
        served.push(ServedBy { request: t, server, from: p, cost: c });
        pos[server] = r.destination();
    }
    let mut final_moves = vec![];
    if let Some(f) = fixed_final {
        let m: Vec<Vec<i64>> = pos.iter().map(|&a| f.iter().map(|&b| cost.cost(a, b)).collect()).collect();
        let (v, perm) = min_cost_assignment(&m);
        total += v;
        for (server, &slot) in perm.iter().enumerate() {
            if pos[server] != f[slot] {
                final_moves.push(FinalMove { server, from: pos[server], to: f[slot], cost: m[server][slot] });
            }
        }
        for mv in &final_moves {
            pos[mv.server] = mv.to;
        }
    }
    OfflineSchedule { served, final_moves, final_config: pos, total_cost: total }
}
