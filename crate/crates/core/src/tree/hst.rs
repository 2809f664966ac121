use serde::{Deserialize, Serialize};

use super::{Edge, TreeError, VertexId, WeightedTree};

/// Shape of a complete HST: `depth` levels, edge length per level from the
/// root down, and a fixed number of children per internal vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HstSpec {
    pub level_lengths: Vec<i64>,
    pub branching: usize,
}

/// A built HST with its leaf set, which is the associated metric space.
#[derive(Clone, Debug)]
pub struct Hst {
    pub tree: WeightedTree,
    pub leaves: Vec<VertexId>,
    pub spec: HstSpec,
}

impl HstSpec {
    pub fn new(level_lengths: Vec<i64>, branching: usize) -> Result<Self, TreeError> {
        let spec = HstSpec { level_lengths, branching };
        spec.validate()?;
        Ok(spec)
    }

    /// `T_{alpha,d}`: lengths `alpha^(d-1), ..., alpha, 1`.
    pub fn geometric(alpha: i64, depth: usize, branching: usize) -> Result<Self, TreeError> {
        if alpha < 1 {
            return Err(TreeError::InvalidHst(format!("alpha must be >= 1, got {alpha}")));
        }
        let lengths = (0..depth).rev().map(|h| alpha.pow(h as u32)).collect();
        Self::new(lengths, branching)
    }

    pub fn depth(&self) -> usize {
        self.level_lengths.len()
    }

    /// Root-to-leaf distance.
    pub fn leaf_distance(&self) -> i64 {
        self.level_lengths.iter().sum()
    }

    /// Ratio between consecutive levels, if constant and integral.
    pub fn geometric_ratio(&self) -> Option<i64> {
        let l = &self.level_lengths;
        if l.len() < 2 {
            return None;
        }
        let r = l[0] / l[1];
        l.windows(2).all(|w| w[1] * r == w[0]).then_some(r)
    }

    fn validate(&self) -> Result<(), TreeError> {
        if self.level_lengths.is_empty() {
            return Err(TreeError::InvalidHst("depth must be positive".into()));
        }
        if self.branching == 0 {
            return Err(TreeError::InvalidHst("branching must be positive".into()));
        }
        if let Some(l) = self.level_lengths.iter().find(|&&l| l <= 0) {
            return Err(TreeError::InvalidHst(format!("non-positive level length {l}")));
        }
        let leaves = (self.branching as u128).checked_pow(self.depth() as u32);
        if leaves.is_none_or(|x| x > 1 << 22) {
            return Err(TreeError::InvalidHst("too many leaves".into()));
        }
        Ok(())
    }

    /// Builds the tree breadth-first: root is 0, level by level.
    pub fn build(&self) -> Result<Hst, TreeError> {
        self.validate()?;
        let mut edges: Vec<Edge> = Vec::new();
        let mut frontier = vec![0usize];
        let mut next = 1usize;
        for &len in &self.level_lengths {
            let mut below = Vec::with_capacity(frontier.len() * self.branching);
            for &p in &frontier {
                for _ in 0..self.branching {
                    edges.push((next, p, len));
                    below.push(next);
                    next += 1;
                }
            }
            frontier = below;
        }
        let tree = WeightedTree::new(0, &edges, None)?;
        Ok(Hst { tree, leaves: frontier, spec: self.clone() })
    }
}

/// `W_{alpha,d} = sum_{h<d} alpha^h`.
pub fn geometric_leaf_distance(alpha: i64, d: usize) -> i64 {
    (0..d).map(|h| alpha.pow(h as u32)).sum()
}
