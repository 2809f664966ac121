use serde::{Deserialize, Serialize};

use super::c_kd_i64;
use crate::tree::{SubdividedTree, TreeError, VertexId};

/// `Psi = -sum_{i<j} depth(lca(i, j))`.
pub fn psi_kserver(t: &SubdividedTree, cfg: &[VertexId]) -> i64 {
    let mut sum = 0;
    for (a, &u) in cfg.iter().enumerate() {
        for &v in &cfg[a + 1..] {
            sum += t.weighted_depth(t.lca(u, v));
        }
    }
    -sum
}

/// Weighted heights `alpha_0 = 0 < alpha_1 < ... < alpha_d` of the HST layers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HstLayerHeights(pub Vec<i64>);

impl HstLayerHeights {
    pub fn from_level_lengths(lengths: &[i64]) -> Self {
        let mut a = vec![0];
        for l in lengths.iter().rev() {
            a.push(a.last().unwrap() + l);
        }
        HstLayerHeights(a)
    }

    pub fn of_tree(t: &SubdividedTree) -> Result<Self, TreeError> {
        let lengths = t.base().hst_level_lengths().ok_or(TreeError::NonUniformDepth)?;
        Ok(Self::from_level_lengths(&lengths))
    }

    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    /// Layer index `l` with `alpha_l <= h < alpha_{l+1}`, clamped to `d-1`.
    pub fn band_of(&self, h: i64) -> usize {
        let d = self.depth();
        (0..d).rev().find(|&l| self.0[l] <= h).unwrap_or(0)
    }
}

/// Per-server weight table `c_{i,l}` for `i < k`, `l < d`.
pub(crate) fn coefficient_table(k: usize, d: usize) -> Vec<Vec<i64>> {
    (0..k)
        .map(|i| (0..d).map(|l| c_kd_i64(i as u32, l as u32).expect("coefficient fits in i64")).collect())
        .collect()
}

/// `Psi = sum_i sum_{l<d} c_{i,l} * max(alpha_l, min(h_i, alpha_{l+1}))`
/// with heights sorted ascending.
pub fn psi_ktaxi_hst(t: &SubdividedTree, layers: &HstLayerHeights, cfg: &[VertexId]) -> Result<i64, TreeError> {
    let mut h = cfg.iter().map(|&v| t.weighted_height(v)).collect::<Result<Vec<_>, _>>()?;
    h.sort_unstable();
    Ok(psi_from_heights(&coefficient_table(cfg.len(), layers.depth()), layers, &h))
}

pub(crate) fn psi_from_heights(coef: &[Vec<i64>], layers: &HstLayerHeights, sorted: &[i64]) -> i64 {
    let a = &layers.0;
    let mut total = 0;
    for (i, &h) in sorted.iter().enumerate() {
        for l in 0..layers.depth() {
            total += coef[i][l] * a[l].max(h.min(a[l + 1]));
        }
    }
    total
}
