//! Random bounded-depth HST embeddings of finite metrics and Double
//! Coverage run through them.

mod run;

pub use run::{run_on_metric, MetricRun};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::sim::SimError;
use crate::tree::{Edge, MetricError, MetricSpace, Rational, TreeError, VertexId, WeightedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("metric has no points")]
    Empty,
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("edge weights overflow i64")]
    Overflow,
    #[error("embedding contracts the pair ({0}, {1})")]
    Contraction(usize, usize),
    #[error("no seeds given")]
    NoSeeds,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// FRT-style decomposition with base `alpha`. Distances in `hst` are in the
/// integer units of `scaled` (the source metric times `scale`).
#[derive(Clone, Debug)]
pub struct HstEmbedding {
    pub source: MetricSpace,
    pub hst: WeightedTree,
    pub leaf_of: Vec<VertexId>,
    pub alpha: i64,
    pub d: usize,
    pub seed: u64,
    pub scale: Rational,
    pub scaled: Vec<Vec<i64>>,
}

impl HstEmbedding {
    pub fn tree_distance(&self, x: usize, y: usize) -> i64 {
        self.hst.distance(self.leaf_of[x], self.leaf_of[y]).expect("leaf ids are valid")
    }

    /// Tree over metric distance; `None` for coincident points.
    pub fn stretch(&self, x: usize, y: usize) -> Option<f64> {
        let m = self.scaled[x][y];
        (m > 0).then(|| self.tree_distance(x, y) as f64 / m as f64)
    }
}

/// Smallest `a >= 2` with `a^d * lo >= hi`.
fn base_for(lo: i64, hi: i64, d: usize) -> i64 {
    let mut a = 2i64;
    loop {
        let reach = (a as i128).checked_pow(d as u32).map(|p| p * lo as i128);
        if reach.map_or(true, |r| r >= hi as i128) {
            return a;
        }
        a += 1;
    }
}

pub fn frt_embed(m: &MetricSpace, d: usize, seed: u64) -> Result<HstEmbedding, EmbedError> {
    if m.is_empty() {
        return Err(EmbedError::Empty);
    }
    if d == 0 {
        return Err(EmbedError::ZeroDepth);
    }
    let n = m.len();
    let (scaled, scale) = m.integer_scaled()?;
    let pos = || scaled.iter().flatten().copied().filter(|&x| x > 0);
    let delta = pos().min().unwrap_or(1);
    let alpha = base_for(delta, pos().max().unwrap_or(1), d);
    let kappa = (alpha + 1) / 2;
    // w[l]: weight of an edge from level l-1 to level l
    let mut w = vec![0i64; d + 1];
    for (l, slot) in w.iter_mut().enumerate().skip(1) {
        *slot = alpha
            .checked_pow((d - l) as u32)
            .and_then(|p| p.checked_mul(kappa * delta))
            .ok_or(EmbedError::Overflow)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let beta = (alpha as f64).powf(rng.gen::<f64>() - 1.0);

    let mut edges: Vec<Edge> = vec![];
    let mut cluster_vertex = vec![0usize; n];
    for l in 1..=d {
        let radius = beta * (alpha as f64).powi((d - l) as i32) * delta as f64 / 2.0;
        let mut next = vec![usize::MAX; n];
        for &c in &order {
            for x in 0..n {
                if next[x] == usize::MAX && scaled[c][x] as f64 <= radius {
                    next[x] = c;
                }
            }
        }
        // one new vertex per (parent, center) pair, in center order
        let mut made: Vec<(usize, usize, VertexId)> = vec![];
        let mut assigned = vec![0; n];
        for x in 0..n {
            let key = (cluster_vertex[x], next[x]);
            let v = match made.iter().find(|e| (e.0, e.1) == key) {
                Some(e) => e.2,
                None => {
                    let v = edges.len() + 1;
                    edges.push((v, key.0, w[l]));
                    made.push((key.0, key.1, v));
                    v
                }
            };
            assigned[x] = v;
        }
        cluster_vertex = assigned;
    }
    let hst = WeightedTree::new(0, &edges, None)?;
    let emb = HstEmbedding { source: m.clone(), hst, leaf_of: cluster_vertex, alpha, d, seed, scale, scaled };
    for x in 0..n {
        for y in x + 1..n {
            if emb.tree_distance(x, y) < emb.scaled[x][y] {
                return Err(EmbedError::Contraction(x, y));
            }
        }
    }
    Ok(emb)
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionStats {
    pub seeds: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Mean stretch over pairs, per seed.
    pub per_seed_mean: Vec<f64>,
    /// Mean stretch over seeds, per pair `(x, y)` with `x < y`.
    pub per_pair_mean: Vec<((usize, usize), f64)>,
}

impl DistortionStats {
    pub fn median_seed_mean(&self) -> f64 {
        let mut v = self.per_seed_mean.clone();
        v.sort_by(f64::total_cmp);
        match v.len() {
            0 => f64::NAN,
            n if n % 2 == 1 => v[n / 2],
            n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
        }
    }
}

/// Stretch statistics over independent embeddings, one per seed.
pub fn distortion_stats(m: &MetricSpace, d: usize, seeds: &[u64]) -> Result<DistortionStats, EmbedError> {
    if seeds.is_empty() {
        return Err(EmbedError::NoSeeds);
    }
    let n = m.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect();
    let rows: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&s| {
            let e = frt_embed(m, d, s)?;
            Ok(pairs.iter().filter_map(|&(x, y)| e.stretch(x, y)).collect())
        })
        .collect::<Result<_, EmbedError>>()?;
    let all = || rows.iter().flatten().copied();
    let count = all().count().max(1) as f64;
    let per_seed_mean = rows.iter().map(|r| r.iter().sum::<f64>() / r.len().max(1) as f64).collect();
    // metrics have no zero distances, so every pair has a stretch
    let per_pair_mean = pairs
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64))
        .collect();
    Ok(DistortionStats {
        seeds: seeds.len(),
        min: all().fold(f64::INFINITY, f64::min),
        max: all().fold(0.0, f64::max),
        mean: all().sum::<f64>() / count,
        per_seed_mean,
        per_pair_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Request;
    use crate::tree::HstSpec;
    use rand::Rng;

    fn random_metric(n: usize, rng: &mut ChaCha8Rng) -> MetricSpace {
        // shortest paths over random weights keep the triangle inequality
        let mut d = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let w = rng.gen_range(1..=20);
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        MetricSpace::from_integers(&d).unwrap()
    }

    #[test]
    fn two_points() {
        let m = MetricSpace::from_integers(&[vec![0, 1], vec![1, 0]]).unwrap();
        let e = frt_embed(&m, 1, 0).unwrap();
        assert_eq!(e.hst.leaves().len(), 2);
        assert!(e.tree_distance(0, 1) >= 1);
        let s = distortion_stats(&m, 1, &[0]).unwrap();
        assert_eq!(s.per_pair_mean.len(), 1);
        assert!(s.min >= 1.0);
    }

    #[test]
    fn uniform_metric_is_symmetric() {
        let n = 6;
        let d: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i != j) as i64).collect()).collect();
        let m = MetricSpace::from_integers(&d).unwrap();
        for seed in 0..10 {
            let e = frt_embed(&m, 1, seed).unwrap();
            let first = e.tree_distance(0, 1);
            assert!((0..n).all(|x| (x + 1..n).all(|y| e.tree_distance(x, y) == first)));
        }
    }

    #[test]
    fn non_contraction_and_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for trial in 0..60 {
            let m = random_metric(rng.gen_range(1..12), &mut rng);
            let d = rng.gen_range(1..=4);
            let e = frt_embed(&m, d, trial).unwrap();
            assert!(e.hst.depth() <= d);
            assert!(e.hst.has_uniform_leaf_depth());
            assert_eq!(e.hst.leaves().len(), m.len());
            let again = frt_embed(&m, d, trial).unwrap();
            assert_eq!(again.leaf_of, e.leaf_of);
            assert_eq!(again.hst.edges(), e.hst.edges());
        }
        assert_eq!(frt_embed(&random_metric(3, &mut rng), 0, 0).unwrap_err(), EmbedError::ZeroDepth);
        assert!(distortion_stats(&random_metric(3, &mut rng), 1, &[]).is_err());
    }

    #[test]
    fn metric_run_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for seed in 0..30 {
            let n = rng.gen_range(2..10);
            let m = random_metric(n, &mut rng);
            let k = rng.gen_range(1..=3);
            let init: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            let mut seq = vec![];
            for _ in 0..10 {
                let s = rng.gen_range(0..n);
                seq.push(Request::Simple { s });
                if rng.gen_bool(0.3) {
                    seq.push(Request::Relocate { s, d: rng.gen_range(0..n) });
                }
            }
            let r = run_on_metric(&m, &init, &seq, 2, seed).unwrap();
            assert_eq!(r.move_violations, 0);
            assert!(r.metric_cost <= r.hst_cost);
        }
    }

    #[test]
    fn hst_leaf_metric_round_trip() {
        // a leaf metric of a star embeds with every pair at the same distance
        let h = HstSpec::new(vec![3], 4).unwrap().build().unwrap();
        let d: Vec<Vec<i64>> = h
            .leaves
            .iter()
            .map(|&a| h.leaves.iter().map(|&b| h.tree.distance(a, b).unwrap()).collect())
            .collect();
        let m = MetricSpace::from_integers(&d).unwrap();
        let seq = vec![Request::Simple { s: 3 }, Request::Simple { s: 0 }];
        let r = run_on_metric(&m, &[0, 1], &seq, 1, 5).unwrap();
        // scaled distance 1 and edges of 1; the second server waits at the
        // centre after the first request, then drops to leaf 0
        assert_eq!(r.hst_cost, 4);
        assert_eq!(r.metric_cost, 2);
    }
}
