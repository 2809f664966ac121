use super::{AncestorIndex, TreeError, VertexId, WeightedTree};

/// Where a short vertex comes from in the long-edge tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShortOrigin {
    /// An original vertex of the weighted tree.
    Original,
    /// Interior point of the long edge into `edge_child`, `offset` short
    /// edges below the parent endpoint.
    Interior { edge_child: VertexId, offset: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexMeasures {
    /// Number of short edges from the root.
    pub weighted_depth: i64,
    /// Fewest long edges of a root path that includes the vertex.
    pub combinatorial_depth: usize,
    /// Short edges down to a leaf; present only when all leaves share one
    /// weighted depth.
    pub weighted_height: Option<i64>,
}

/// Unit-length refinement of a [`WeightedTree`].
///
/// Original vertices keep their ids; synthetic vertices follow in the order
/// of their long edge's child id, top to bottom.
#[derive(Clone, Debug)]
pub struct SubdividedTree {
    base: WeightedTree,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    depth: Vec<i64>,
    band_depth: Vec<usize>,
    origin: Vec<ShortOrigin>,
    index: AncestorIndex,
    leaf_depth: Option<i64>,
}

impl SubdividedTree {
    pub fn new(base: WeightedTree) -> Self {
        let n = base.vertex_count();
        let extra: i64 = (0..n).map(|v| (base.edge_weight(v) - 1).max(0)).sum();
        let total = n + extra as usize;
        let mut parent = vec![None; total];
        let mut origin = vec![ShortOrigin::Original; total];
        let mut next = n;
        for c in 0..n {
            let Some(p) = base.parent(c) else { continue };
            let w = base.edge_weight(c);
            let mut above = p;
            for offset in 1..w {
                parent[next] = Some(above);
                origin[next] = ShortOrigin::Interior { edge_child: c, offset };
                above = next;
                next += 1;
            }
            parent[c] = Some(above);
        }
        let mut children = vec![Vec::new(); total];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(v);
            }
        }
        let root = base.root();
        let index = AncestorIndex::new(root, &parent, &children);
        let depth: Vec<i64> = (0..total).map(|v| index.level(v) as i64).collect();
        let band_depth = (0..total)
            .map(|v| match origin[v] {
                ShortOrigin::Original => base.combinatorial_depth(v),
                ShortOrigin::Interior { edge_child, .. } => base.combinatorial_depth(edge_child),
            })
            .collect();
        let mut leaf_depths = base.leaves().into_iter().map(|l| depth[l]);
        let first = leaf_depths.next();
        let leaf_depth = match first {
            Some(d) if leaf_depths.all(|x| x == d) => Some(d),
            _ => None,
        };
        SubdividedTree { base, parent, children, depth, band_depth, origin, index, leaf_depth }
    }

    pub fn base(&self) -> &WeightedTree {
        &self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn original_count(&self) -> usize {
        self.base.vertex_count()
    }

    pub fn is_original(&self, v: VertexId) -> bool {
        v < self.original_count()
    }

    pub fn root(&self) -> VertexId {
        self.base.root()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn origin(&self, v: VertexId) -> ShortOrigin {
        self.origin[v]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.vertex_count()
    }

    pub fn weighted_depth(&self, v: VertexId) -> i64 {
        self.depth[v]
    }

    /// `d_u`: long-edge depth of the lower endpoint of `v`'s long edge.
    pub fn band_depth(&self, v: VertexId) -> usize {
        self.band_depth[v]
    }

    /// Common weighted depth of all leaves, if there is one.
    pub fn uniform_leaf_depth(&self) -> Option<i64> {
        self.leaf_depth
    }

    pub fn weighted_height(&self, v: VertexId) -> Result<i64, TreeError> {
        self.leaf_depth
            .map(|h| h - self.depth[v])
            .ok_or(TreeError::NonUniformDepth)
    }

    pub fn measures(&self, v: VertexId) -> Result<VertexMeasures, TreeError> {
        if !self.contains(v) {
            return Err(TreeError::UnknownVertex(v, self.vertex_count()));
        }
        Ok(VertexMeasures {
            weighted_depth: self.depth[v],
            combinatorial_depth: self.band_depth[v],
            weighted_height: self.leaf_depth.map(|h| h - self.depth[v]),
        })
    }

    /// True when `v` lies in the subtree rooted at `u` (inclusive).
    pub fn in_subtree(&self, u: VertexId, v: VertexId) -> bool {
        self.index.in_subtree(u, v)
    }

    pub fn lca(&self, u: VertexId, v: VertexId) -> VertexId {
        self.index.lca(u, v)
    }

    pub fn distance(&self, u: VertexId, v: VertexId) -> i64 {
        let l = self.index.lca(u, v);
        self.depth[u] + self.depth[v] - 2 * self.depth[l]
    }

    /// Short edges traversed towards the root on the way from `u` to `v`.
    pub fn upward_distance(&self, u: VertexId, v: VertexId) -> i64 {
        self.depth[u] - self.depth[self.index.lca(u, v)]
    }

    /// Neighbour of `from` on the path to `to` (`from != to`).
    pub fn step_towards(&self, from: VertexId, to: VertexId) -> VertexId {
        debug_assert_ne!(from, to);
        if self.index.in_subtree(from, to) {
            let target_level = self.index.level(from) + 1;
            self.index.ancestor_at_level(to, target_level)
        } else {
            self.parent[from].expect("non-root when target is outside subtree")
        }
    }

    /// Vertices on the path from `u` to `v`, both ends included.
    pub fn path(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        let l = self.lca(u, v);
        let mut up = Vec::new();
        let mut x = u;
        while x != l {
            up.push(x);
            x = self.parent[x].unwrap();
        }
        up.push(l);
        let mut down = Vec::new();
        let mut y = v;
        while y != l {
            down.push(y);
            y = self.parent[y].unwrap();
        }
        up.extend(down.into_iter().rev());
        up
    }

    pub fn diameter(&self) -> i64 {
        self.base.diameter()
    }

    /// Calls `f` on every vertex of `V_top` that is not inside any `V_c` for
    /// `c` in `cut`.
    pub fn for_each_in_component(&self, top: VertexId, cut: &[VertexId], mut f: impl FnMut(VertexId)) {
        if cut.contains(&top) {
            return;
        }
        let mut stack = vec![top];
        while let Some(v) = stack.pop() {
            f(v);
            for &c in &self.children[v] {
                if !cut.contains(&c) {
                    stack.push(c);
                }
            }
        }
    }

    /// True when `v` is in `V_top` minus the subtrees rooted at `cut`.
    pub fn component_contains(&self, top: VertexId, cut: &[VertexId], v: VertexId) -> bool {
        self.in_subtree(top, v) && !cut.iter().any(|&c| self.in_subtree(c, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::HstSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_weights_are_identity() {
        let t = WeightedTree::from_edges(&[(1, 0, 1), (2, 0, 1), (3, 2, 1)]).unwrap();
        let s = SubdividedTree::new(t.clone());
        assert_eq!(s.vertex_count(), 4);
        for v in 0..4 {
            assert_eq!(s.parent(v), t.parent(v));
            assert_eq!(s.origin(v), ShortOrigin::Original);
        }
    }

    #[test]
    fn weight_three_edge_gets_two_interior_vertices() {
        let t = WeightedTree::from_edges(&[(1, 0, 3)]).unwrap();
        let s = SubdividedTree::new(t);
        assert_eq!(s.vertex_count(), 4);
        assert_eq!(s.origin(2), ShortOrigin::Interior { edge_child: 1, offset: 1 });
        assert_eq!(s.origin(3), ShortOrigin::Interior { edge_child: 1, offset: 2 });
        assert_eq!(s.path(0, 1), vec![0, 2, 3, 1]);
    }

    #[test]
    fn weight_w_edge_has_w_short_edges() {
        for w in 1..=10 {
            let s = SubdividedTree::new(WeightedTree::from_edges(&[(1, 0, w)]).unwrap());
            let mut count = 0;
            let mut v = 1;
            while let Some(p) = s.parent(v) {
                count += 1;
                v = p;
            }
            assert_eq!(count, w);
            assert_eq!(s.weighted_depth(1), w);
        }
    }

    #[test]
    fn measures() {
        let hst = HstSpec::new(vec![2, 1], 2).unwrap().build().unwrap();
        let s = SubdividedTree::new(hst.tree.clone());
        let root = s.measures(s.root()).unwrap();
        assert_eq!(root, VertexMeasures { weighted_depth: 0, combinatorial_depth: 0, weighted_height: Some(3) });
        let leaf = hst.leaves[0];
        assert_eq!(s.measures(leaf).unwrap().weighted_height, Some(0));
        // midpoint of a weight-2 level-1 edge
        let mid = (0..s.vertex_count())
            .find(|&v| matches!(s.origin(v), ShortOrigin::Interior { .. }) && s.weighted_depth(v) == 1)
            .unwrap();
        let m = s.measures(mid).unwrap();
        assert_eq!(m.weighted_depth, 1);
        assert_eq!(m.combinatorial_depth, 1);
    }

    #[test]
    fn height_on_non_uniform_tree_is_an_error() {
        let s = SubdividedTree::new(WeightedTree::from_edges(&[(1, 0, 1), (2, 1, 1), (3, 0, 1)]).unwrap());
        assert_eq!(s.weighted_height(0), Err(TreeError::NonUniformDepth));
        assert_eq!(s.measures(0).unwrap().weighted_height, None);
    }

    #[test]
    fn subdivision_preserves_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(2..15);
            let edges: Vec<_> = (1..n).map(|v| (v, rng.gen_range(0..v), rng.gen_range(1..=5))).collect();
            let t = WeightedTree::new(0, &edges, None).unwrap();
            let s = SubdividedTree::new(t.clone());
            for u in 0..n {
                for v in 0..n {
                    assert_eq!(s.distance(u, v), t.distance(u, v).unwrap());
                }
            }
            // short-tree distance is a metric as well
            let m = s.vertex_count().min(50);
            for u in 0..m {
                for v in 0..m {
                    assert_eq!(s.distance(u, v), s.path(u, v).len() as i64 - 1);
                    if u != v {
                        let nxt = s.step_towards(u, v);
                        assert_eq!(s.distance(nxt, v), s.distance(u, v) - 1);
                    }
                }
            }
        }
    }
}
