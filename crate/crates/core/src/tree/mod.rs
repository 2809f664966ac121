//! Rooted trees with integral edge weights, their unit-length refinement,
//! HST construction and finite metric spaces.
//!
//! Vertices of a [`WeightedTree`] are dense ids `0..n`. Subdividing a tree
//! keeps those ids and appends one synthetic vertex per interior unit point
//! of every long edge, so a server position is always a plain `usize`.

mod hst;
mod lca;
mod metric;
mod subdivide;

pub use hst::{geometric_leaf_distance, Hst, HstSpec};
pub use metric::{DistValue, MetricDescription, MetricError, MetricSpace, Rational, METRIC_FORMAT};
pub use subdivide::{ShortOrigin, SubdividedTree, VertexMeasures};

pub(crate) use lca::AncestorIndex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree has no vertices")]
    Empty,
    #[error("vertex {0} is out of range for a tree with {1} vertices")]
    UnknownVertex(VertexId, usize),
    #[error("vertex {0} appears as a child more than once")]
    DuplicateChild(VertexId),
    #[error("edge into {0} has non-positive weight {1}")]
    NonPositiveWeight(VertexId, i64),
    #[error("root {0} appears as a child")]
    RootIsChild(VertexId),
    #[error("vertex {0} lies on a cycle")]
    Cycle(VertexId),
    #[error("vertex {0} is not connected to the root")]
    Disconnected(VertexId),
    #[error("could not determine a unique root")]
    AmbiguousRoot,
    #[error("label count {0} does not match vertex count {1}")]
    LabelCount(usize, usize),
    #[error("leaves are not all at the same depth")]
    NonUniformDepth,
    #[error("invalid HST spec: {0}")]
    InvalidHst(String),
}

/// Rooted tree with positive integral edge weights.
#[derive(Clone, Debug)]
pub struct WeightedTree {
    root: VertexId,
    parent: Vec<Option<VertexId>>,
    weight: Vec<i64>,
    children: Vec<Vec<VertexId>>,
    depth: Vec<i64>,
    labels: Option<Vec<String>>,
    index: AncestorIndex,
}

/// One `(child, parent, weight)` triple of a tree description.
pub type Edge = (VertexId, VertexId, i64);

impl WeightedTree {
    /// Builds a tree rooted at `root`. Ids must be exactly `0..=edges.len()`.
    pub fn new(
        root: VertexId,
        edges: &[Edge],
        labels: Option<Vec<String>>,
    ) -> Result<Self, TreeError> {
        let n = edges.len() + 1;
        if root >= n {
            return Err(TreeError::UnknownVertex(root, n));
        }
        let mut parent = vec![None; n];
        let mut weight = vec![0i64; n];
        let mut seen = vec![false; n];
        for &(c, p, w) in edges {
            if c >= n {
                return Err(TreeError::UnknownVertex(c, n));
            }
            if p >= n {
                return Err(TreeError::UnknownVertex(p, n));
            }
            if w <= 0 {
                return Err(TreeError::NonPositiveWeight(c, w));
            }
            if c == root {
                return Err(TreeError::RootIsChild(root));
            }
            if seen[c] {
                return Err(TreeError::DuplicateChild(c));
            }
            seen[c] = true;
            parent[c] = Some(p);
            weight[c] = w;
        }
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(TreeError::LabelCount(l.len(), n));
            }
        }
        // n-1 distinct children and a root that is never a child: every
        // non-root vertex has exactly one parent. Walk each chain to the root.
        let mut state = vec![0u8; n]; // 0 unknown, 1 on current walk, 2 reaches root
        state[root] = 2;
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            while state[v] == 0 {
                state[v] = 1;
                path.push(v);
                v = parent[v].ok_or(TreeError::Disconnected(v))?;
            }
            if state[v] == 1 {
                return Err(TreeError::Cycle(v));
            }
            for u in path {
                state[u] = 2;
            }
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(v);
            }
        }
        let index = AncestorIndex::new(root, &parent, &children);
        let mut order: Vec<VertexId> = (0..n).collect();
        order.sort_by_key(|&v| index.level(v));
        let mut depth = vec![0i64; n];
        for v in order {
            if let Some(p) = parent[v] {
                depth[v] = depth[p] + weight[v];
            }
        }
        Ok(WeightedTree { root, parent, weight, children, depth, labels, index })
    }

    /// Builds a tree from edges alone; the root is the unique vertex that is
    /// never a child.
    pub fn from_edges(edges: &[Edge]) -> Result<Self, TreeError> {
        let n = edges.len() + 1;
        let mut is_child = vec![false; n];
        for &(c, _, _) in edges {
            if c >= n {
                return Err(TreeError::UnknownVertex(c, n));
            }
            if is_child[c] {
                return Err(TreeError::DuplicateChild(c));
            }
            is_child[c] = true;
        }
        let mut roots = (0..n).filter(|&v| !is_child[v]);
        let root = roots.next().ok_or(TreeError::AmbiguousRoot)?;
        if roots.next().is_some() {
            return Err(TreeError::AmbiguousRoot);
        }
        Self::new(root, edges, None)
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    /// Weight of the edge from `v` to its parent (0 for the root).
    pub fn edge_weight(&self, v: VertexId) -> i64 {
        self.weight[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: VertexId) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.children[v].is_empty()
    }

    pub fn leaves(&self) -> Vec<VertexId> {
        (0..self.vertex_count()).filter(|&v| self.is_leaf(v)).collect()
    }

    /// Edges as `(child, parent, weight)` in child-id order.
    pub fn edges(&self) -> Vec<Edge> {
        (0..self.vertex_count())
            .filter_map(|v| self.parent[v].map(|p| (v, p, self.weight[v])))
            .collect()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.vertex_count()
    }

    fn check(&self, v: VertexId) -> Result<(), TreeError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(TreeError::UnknownVertex(v, self.vertex_count()))
        }
    }

    /// Sum of edge weights from the root.
    pub fn weighted_depth(&self, v: VertexId) -> i64 {
        self.depth[v]
    }

    /// Number of edges from the root.
    pub fn combinatorial_depth(&self, v: VertexId) -> usize {
        self.index.level(v) as usize
    }

    /// Maximum combinatorial depth over all vertices.
    pub fn depth(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.combinatorial_depth(v))
            .max()
            .unwrap_or(0)
    }

    pub fn is_ancestor(&self, u: VertexId, v: VertexId) -> bool {
        self.index.in_subtree(u, v)
    }

    pub fn lca(&self, u: VertexId, v: VertexId) -> Result<VertexId, TreeError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.index.lca(u, v))
    }

    pub fn distance(&self, u: VertexId, v: VertexId) -> Result<i64, TreeError> {
        let l = self.lca(u, v)?;
        Ok(self.depth[u] + self.depth[v] - 2 * self.depth[l])
    }

    /// Largest pairwise distance between vertices.
    pub fn diameter(&self) -> i64 {
        // two sweeps from the root: farthest vertex, then farthest from it
        let n = self.vertex_count();
        let far = (0..n).max_by_key(|&v| self.depth[v]).unwrap_or(self.root);
        (0..n)
            .map(|v| self.distance(far, v).unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// True when every leaf sits at the same combinatorial depth.
    pub fn has_uniform_leaf_depth(&self) -> bool {
        let mut depths = self.leaves().into_iter().map(|v| self.combinatorial_depth(v));
        match depths.next() {
            Some(d) => depths.all(|x| x == d),
            None => true,
        }
    }

    /// Edge length per level (root-down) when the tree is HST-shaped: uniform
    /// leaf depth and every edge at a given level has the same weight.
    pub fn hst_level_lengths(&self) -> Option<Vec<i64>> {
        if !self.has_uniform_leaf_depth() {
            return None;
        }
        let d = self.depth();
        let mut lengths = vec![0i64; d];
        for v in 0..self.vertex_count() {
            if self.parent[v].is_some() {
                let lvl = self.combinatorial_depth(v) - 1;
                if lengths[lvl] == 0 {
                    lengths[lvl] = self.weight[v];
                } else if lengths[lvl] != self.weight[v] {
                    return None;
                }
            }
        }
        Some(lengths)
    }
}

/// Serializable `tree/v1` description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TreeDescription {
    #[serde(default = "tree_format")]
    pub format: String,
    pub root: VertexId,
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

pub const TREE_FORMAT: &str = "tree/v1";

fn tree_format() -> String {
    TREE_FORMAT.to_string()
}

impl TreeDescription {
    pub fn build(&self) -> Result<WeightedTree, TreeError> {
        WeightedTree::new(self.root, &self.edges, self.labels.clone())
    }
}

impl From<&WeightedTree> for TreeDescription {
    fn from(t: &WeightedTree) -> Self {
        TreeDescription {
            format: tree_format(),
            root: t.root(),
            edges: t.edges(),
            labels: t.labels().map(|l| l.to_vec()),
        }
    }
}
