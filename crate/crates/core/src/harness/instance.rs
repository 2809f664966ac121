use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::Scenario;
use crate::sim::Request;
use crate::tree::{HstSpec, MetricSpace, TreeDescription, VertexId, WeightedTree};

pub const DEFAULT_RELOCATION_RATE: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TreeFamily {
    /// Requests go to leaves only.
    Hst { spec: HstSpec },
    UnweightedKAry { branching: usize, depth: usize },
    /// Random recursive tree on `vertices` vertices with height at most
    /// `depth` and weights in `1..=max_weight`.
    RandomWeighted { depth: usize, max_weight: i64, vertices: usize },
}

impl TreeFamily {
    fn build(&self, rng: &mut ChaCha8Rng) -> (WeightedTree, Vec<VertexId>) {
        match self {
            TreeFamily::Hst { spec } => {
                let h = spec.build().expect("valid HST spec");
                (h.tree, h.leaves)
            }
            TreeFamily::UnweightedKAry { branching, depth } => {
                let h = HstSpec::new(vec![1; *depth], *branching).expect("valid k-ary shape").build().unwrap();
                let n = h.tree.vertex_count();
                (h.tree, (0..n).collect())
            }
            TreeFamily::RandomWeighted { depth, max_weight, vertices } => {
                let n = (*vertices).max(1);
                let mut level = vec![0usize];
                let mut edges = vec![];
                for v in 1..n {
                    let p = if *depth == 0 {
                        0
                    } else {
                        loop {
                            let p = rng.gen_range(0..v);
                            if level[p] < *depth {
                                break p;
                            }
                        }
                    };
                    level.push(level[p] + 1);
                    edges.push((v, p, rng.gen_range(1..=*max_weight)));
                }
                (WeightedTree::new(0, &edges, None).unwrap(), (0..n).collect())
            }
        }
    }
}

/// Seeded scenario with about 30% relocations.
pub fn random_instance(k: usize, family: &TreeFamily, length: usize, seed: u64) -> Scenario {
    random_instance_with(k, family, length, DEFAULT_RELOCATION_RATE, seed)
}

/// `length` counts relocations too. A relocation always starts at the
/// vertex served just before it.
pub fn random_instance_with(k: usize, family: &TreeFamily, length: usize, relocation_rate: f64, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (tree, points) = family.build(&mut rng);
    let (initial, requests) = random_requests(&points, k, length, relocation_rate, &mut rng);
    Scenario::new(TreeDescription::from(&tree), initial, requests)
}

/// Initial positions and a request sequence drawn uniformly from `points`.
pub fn random_requests(
    points: &[usize],
    k: usize,
    length: usize,
    relocation_rate: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<Request>) {
    let pick = |rng: &mut ChaCha8Rng| points[rng.gen_range(0..points.len())];
    let initial: Vec<_> = (0..k).map(|_| pick(rng)).collect();
    let mut requests = Vec::with_capacity(length);
    while requests.len() < length {
        let s = pick(rng);
        requests.push(Request::Simple { s });
        if requests.len() < length && rng.gen_bool(relocation_rate) {
            requests.push(Request::Relocate { s, d: pick(rng) });
        }
    }
    (initial, requests)
}

/// Shortest-path closure of a complete graph with weights in `1..=max_weight`.
pub fn random_metric(n: usize, max_weight: i64, seed: u64) -> MetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..=max_weight);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][m] + d[m][j]);
            }
        }
    }
    MetricSpace::from_integers(&d).expect("closure is a metric")
}

/// Points `0, step, 2 step, ...` with aspect ratio `n - 1`.
pub fn line_metric(n: usize) -> MetricSpace {
    let d: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i as i64 - j as i64).abs()).collect()).collect();
    MetricSpace::from_integers(&d).expect("line is a metric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_double_coverage, verify_trace};

    fn families() -> Vec<TreeFamily> {
        vec![
            TreeFamily::Hst { spec: HstSpec::geometric(2, 2, 3).unwrap() },
            TreeFamily::UnweightedKAry { branching: 3, depth: 2 },
            TreeFamily::RandomWeighted { depth: 3, max_weight: 5, vertices: 10 },
            TreeFamily::RandomWeighted { depth: 0, max_weight: 5, vertices: 1 },
        ]
    }

    #[test]
    fn reproducible_bytes() {
        for f in families() {
            let a = random_instance(3, &f, 20, 9).to_json();
            assert_eq!(a, random_instance(3, &f, 20, 9).to_json());
            assert_ne!(a, random_instance(3, &f, 20, 10).to_json());
        }
    }

    #[test]
    fn sequences_validate_and_verify() {
        for (i, f) in families().iter().enumerate() {
            for seed in 0..40 {
                let s = random_instance(1 + seed as usize % 4, f, 25, seed);
                assert_eq!(s.requests.len(), 25);
                let l = s.load().unwrap();
                let tr = run_double_coverage(&l.tree, &l.initial, &l.requests).unwrap();
                assert!(verify_trace(&tr).is_clean(), "family {i} seed {seed}");
            }
        }
    }

    #[test]
    fn hst_requests_hit_leaves_and_depth_is_bounded() {
        let f = TreeFamily::Hst { spec: HstSpec::geometric(2, 2, 2).unwrap() };
        let s = random_instance_with(2, &f, 50, 0.3, 1);
        let t = s.tree.build().unwrap();
        assert!(s.requests.iter().all(|r| t.is_leaf(r.source()) && t.is_leaf(r.destination())));
        let relocs = s.requests.iter().filter(|r| r.is_relocation()).count();
        assert!(relocs > 5 && relocs < 25, "{relocs}");
        for seed in 0..30 {
            let f = TreeFamily::RandomWeighted { depth: 2, max_weight: 5, vertices: 12 };
            assert!(random_instance(1, &f, 1, seed).tree.build().unwrap().depth() <= 2);
        }
    }

    #[test]
    fn metrics() {
        let m = random_metric(8, 20, 3);
        assert_eq!(m.len(), 8);
        assert_eq!(line_metric(5).aspect_ratio(), 4.into());
    }
}
