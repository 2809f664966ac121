//! Lower-bound instance generators: the j-match recursion and situation
//! transformations on unit k-ary trees, and the recursive HST family.

mod builder;
mod hst;
mod tree;

pub use hst::{gen_hst_lowerbound, hst_bound_identity};
pub use tree::{b_h, gen_jmatch, gen_transform, gen_tree_lowerbound, jmatch_cost, tree_lowerbound_cost, Transform};

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::offline::OfflineSchedule;
use crate::sim::{Configuration, Request, SimError};
use crate::tree::{SubdividedTree, TreeError, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LowerBoundError {
    #[error("construction needs k >= {min}, got {k}")]
    SmallK { k: usize, min: usize },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("alpha must be at least 2, got {0}")]
    SmallAlpha(i64),
    #[error("situation invariant fails: {0}")]
    Situation(String),
    #[error("vertex {0} has too few free children")]
    Branching(VertexId),
    #[error("pulling servers into place did not converge")]
    NoConvergence,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Online and offline configurations. The offline side is a multiset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Situation {
    pub online: Configuration,
    pub offline: Vec<VertexId>,
}

impl Situation {
    pub fn same(cfg: Configuration) -> Self {
        Situation { offline: cfg.clone(), online: cfg }
    }

    /// Multiset intersection, sorted.
    pub fn matched(&self) -> Vec<VertexId> {
        let (a, b) = (sorted(&self.online), sorted(&self.offline));
        let (mut i, mut j, mut out) = (0, 0, vec![]);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    pub fn unmatched_online(&self) -> Vec<VertexId> {
        multiset_minus(&self.online, &self.matched())
    }

    pub fn unmatched_offline(&self) -> Vec<VertexId> {
        multiset_minus(&self.offline, &self.matched())
    }
}

fn sorted(v: &[VertexId]) -> Vec<VertexId> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

pub(crate) fn multiset_minus(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let mut rest = sorted(a);
    for x in b {
        if let Some(i) = rest.iter().position(|y| y == x) {
            rest.remove(i);
        }
    }
    rest
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prediction {
    /// Exact DC total cost (tree family).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dc_cost: Option<i64>,
    /// Lower bound on DC upward cost (HST family).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dc_up_lb: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_cost: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_up_ub: Option<i64>,
}

#[derive(Clone, Debug)]
pub struct LowerBoundInstance {
    pub family: &'static str,
    pub k: usize,
    pub d: usize,
    pub alpha: Option<i64>,
    pub tree: Arc<SubdividedTree>,
    /// Shared by the online and offline algorithms.
    pub initial: Configuration,
    pub requests: Vec<Request>,
    pub prediction: Prediction,
    /// The offline strategy followed while generating.
    pub offline_schedule: OfflineSchedule,
}
