use serde::Serialize;

use super::psi::{coefficient_table, psi_from_heights, psi_kserver, HstLayerHeights};
use crate::sim::{Tick, Trace};
use crate::tree::{SubdividedTree, TreeError, VertexId};

#[derive(Clone, Debug)]
pub enum Potential {
    KServer,
    KTaxiHst(HstLayerHeights),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Relocation,
    NoDown,
    OneDown,
    /// The height-sorted numbering is not shared by both ends of the step.
    Crossing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepViolation {
    pub tick: usize,
    pub request: usize,
    pub kind: StepKind,
    /// `|U| + dPsi` for steps, `dPsi` for relocations.
    pub lhs: i64,
    pub bound: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PotentialReport {
    pub c: i64,
    pub steps: usize,
    pub relocations: usize,
    pub cost_up: i64,
    /// Psi before each tick and after the last one.
    pub psi: Vec<i64>,
    pub violations: Vec<StepViolation>,
}

impl PotentialReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn psi_initial(&self) -> i64 {
        self.psi[0]
    }

    pub fn psi_final(&self) -> i64 {
        *self.psi.last().unwrap()
    }
}

struct Evaluator<'a> {
    tree: &'a SubdividedTree,
    potential: &'a Potential,
    coef: Vec<Vec<i64>>,
}

impl Evaluator<'_> {
    fn heights(&self, cfg: &[VertexId]) -> Vec<i64> {
        cfg.iter().map(|&v| self.tree.weighted_height(v).unwrap()).collect()
    }

    fn psi(&self, cfg: &[VertexId]) -> i64 {
        match self.potential {
            Potential::KServer => psi_kserver(self.tree, cfg),
            Potential::KTaxiHst(layers) => {
                let mut h = self.heights(cfg);
                h.sort_unstable();
                psi_from_heights(&self.coef, layers, &h)
            }
        }
    }
}

/// Checks the per-step potential requirements: `dPsi = 0` on relocations
/// (k-taxi only), `|U| + dPsi <= c` when nothing moves down, and
/// `|U| + dPsi <= 0` when one server moves down.
pub fn check_step_inequalities(trace: &Trace, potential: &Potential, c: i64) -> Result<PotentialReport, TreeError> {
    let tree = &*trace.tree;
    let coef = match potential {
        Potential::KServer => vec![],
        Potential::KTaxiHst(layers) => {
            tree.uniform_leaf_depth().ok_or(TreeError::NonUniformDepth)?;
            coefficient_table(trace.k(), layers.depth())
        }
    };
    let ev = Evaluator { tree, potential, coef };
    let mut cfg = trace.initial.clone();
    let mut psi = ev.psi(&cfg);
    let mut rep = PotentialReport { c, steps: 0, relocations: 0, cost_up: 0, psi: vec![psi], violations: vec![] };
    for (tick, tk) in trace.ticks().enumerate() {
        let before = cfg.clone();
        match tk {
            Tick::Relocate { server, to, .. } => cfg[server] = to,
            Tick::Step { step, .. } => {
                for m in &step.moves {
                    cfg[m.server] = m.to;
                }
            }
        }
        let next = ev.psi(&cfg);
        let dpsi = next - psi;
        psi = next;
        rep.psi.push(psi);
        let request = tk.request();
        let mut push = |kind, lhs, bound| rep.violations.push(StepViolation { tick, request, kind, lhs, bound });
        match tk {
            Tick::Relocate { .. } => {
                rep.relocations += 1;
                if matches!(potential, Potential::KTaxiHst(_)) && dpsi != 0 {
                    push(StepKind::Relocation, dpsi, 0);
                }
            }
            Tick::Step { step, .. } => {
                rep.steps += 1;
                rep.cost_up += step.up.len() as i64;
                if matches!(potential, Potential::KTaxiHst(_)) && !non_crossing(&ev.heights(&before), &ev.heights(&cfg)) {
                    push(StepKind::Crossing, 0, 0);
                }
                let lhs = step.up.len() as i64 + dpsi;
                if step.down.is_empty() {
                    if lhs > c {
                        push(StepKind::NoDown, lhs, c);
                    }
                } else if lhs > 0 {
                    push(StepKind::OneDown, lhs, 0);
                }
            }
        }
    }
    Ok(rep)
}

/// Sorting by (height before, height after, index) leaves the after-heights
/// non-decreasing.
pub fn non_crossing(before: &[i64], after: &[i64]) -> bool {
    let mut order: Vec<usize> = (0..before.len()).collect();
    order.sort_by_key(|&i| (before[i], after[i], i));
    order.windows(2).all(|w| after[w[0]] <= after[w[1]])
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::potentials::c_kd_i64;
    use crate::sim::{run_double_coverage, Request};
    use crate::tree::{HstSpec, WeightedTree};

    #[test]
    fn kserver_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = rng.gen_range(2..14);
            let edges: Vec<_> = (1..n).map(|v| (v, rng.gen_range(0..v), rng.gen_range(1..=3))).collect();
            let t = Arc::new(SubdividedTree::new(WeightedTree::new(0, &edges, None).unwrap()));
            let k = rng.gen_range(1..=4);
            let init: Vec<_> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            let seq: Vec<_> = (0..20).map(|_| Request::Simple { s: rng.gen_range(0..n) }).collect();
            let tr = run_double_coverage(&t, &init, &seq).unwrap();
            let rep = check_step_inequalities(&tr, &Potential::KServer, k as i64).unwrap();
            assert!(rep.is_clean(), "{:?}", rep.violations);
        }
    }

    #[test]
    fn ktaxi_on_random_hsts() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..100 {
            let d = rng.gen_range(1..=3);
            let spec = HstSpec::geometric(rng.gen_range(1..=3), d, rng.gen_range(2..=4)).unwrap();
            let h = spec.build().unwrap();
            let t = Arc::new(SubdividedTree::new(h.tree));
            let k = rng.gen_range(1..=4);
            let leaf = |rng: &mut ChaCha8Rng| h.leaves[rng.gen_range(0..h.leaves.len())];
            let init: Vec<_> = (0..k).map(|_| leaf(&mut rng)).collect();
            let mut seq = vec![];
            for _ in 0..25 {
                let s = leaf(&mut rng);
                seq.push(Request::Simple { s });
                if rng.gen_bool(0.4) {
                    seq.push(Request::Relocate { s, d: leaf(&mut rng) });
                }
            }
            let tr = run_double_coverage(&t, &init, &seq).unwrap();
            let layers = HstLayerHeights::from_level_lengths(&spec.level_lengths);
            let c = c_kd_i64(k as u32, d as u32).unwrap();
            let rep = check_step_inequalities(&tr, &Potential::KTaxiHst(layers), c).unwrap();
            assert!(rep.is_clean(), "{:?}", rep.violations);
        }
    }

    #[test]
    fn crossing_detection() {
        assert!(!non_crossing(&[0, 1, 1], &[1, 0, 2]));
        assert!(non_crossing(&[0, 1, 1], &[1, 1, 2]));
        assert!(non_crossing(&[2, 2], &[1, 3]));
    }
}
