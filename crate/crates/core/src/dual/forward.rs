use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::offline::{optimal_cost_dp, TreeCost, DEFAULT_BUDGET};
use crate::sim::Request;
use crate::tree::{SubdividedTree, VertexId, WeightedTree};

const ROOT: VertexId = 0;
const LEAVES: [VertexId; 2] = [1, 2];

/// Altitudes of (root, leaf 1, leaf 2).
pub type Altitudes = [i64; 3];

/// An online rule fixing the altitudes of time `t` after seeing request `t`
/// and nothing later.
pub trait DualStrategy {
    fn name(&self) -> String;
    fn initial(&mut self) -> Altitudes;
    fn respond(&mut self, time: usize, request: Request, prev: &Altitudes) -> Altitudes;
}

/// Raises what is needed so both leaf slopes lie in `[-1, 1]`.
fn repair(mut a: Altitudes) -> Altitudes {
    a[ROOT] = a[ROOT].max(a[1].max(a[2]) - 1);
    for l in LEAVES {
        a[l] = a[l].max(a[ROOT] - 1);
    }
    a
}

pub struct ConstantStrategy;

impl DualStrategy for ConstantStrategy {
    fn name(&self) -> String {
        "constant".into()
    }
    fn initial(&mut self) -> Altitudes {
        [0; 3]
    }
    fn respond(&mut self, _: usize, _: Request, prev: &Altitudes) -> Altitudes {
        *prev
    }
}

/// Raises the requested leaf by one on every simple request.
pub struct RaiseRequested;

impl DualStrategy for RaiseRequested {
    fn name(&self) -> String {
        "raise-requested".into()
    }
    fn initial(&mut self) -> Altitudes {
        [0; 3]
    }
    fn respond(&mut self, _: usize, r: Request, prev: &Altitudes) -> Altitudes {
        let mut a = *prev;
        if let Request::Simple { s } = r {
            a[s] += 1;
        }
        repair(a)
    }
}

pub struct RandomStrategy {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStrategy {
    pub fn new(seed: u64) -> Self {
        RandomStrategy { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl DualStrategy for RandomStrategy {
    fn name(&self) -> String {
        format!("random-{}", self.seed)
    }
    fn initial(&mut self) -> Altitudes {
        let base = self.rng.gen_range(-3..=3);
        repair([base, base + self.rng.gen_range(-1..=1), base + self.rng.gen_range(-1..=1)])
    }
    fn respond(&mut self, _: usize, _: Request, prev: &Altitudes) -> Altitudes {
        let mut a = *prev;
        for x in &mut a {
            *x += self.rng.gen_range(0..=2);
        }
        repair(a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyFault {
    TimeDecrease { time: usize, vertex: VertexId },
    Slope { time: usize, vertex: VertexId, slope: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GadgetRecord {
    pub round: usize,
    pub requests: Vec<Request>,
    pub d: i64,
    pub cumulative: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryTranscript {
    pub strategy: String,
    pub requests: Vec<Request>,
    /// Altitudes at times `0..=T`.
    pub altitudes: Vec<Altitudes>,
    pub d_per_request: Vec<i64>,
    pub gadgets: Vec<GadgetRecord>,
    pub total_d: i64,
    pub opt: i64,
    pub fault: Option<StrategyFault>,
}

impl AdversaryTranscript {
    pub fn max_cumulative(&self) -> i64 {
        self.gadgets.iter().map(|g| g.cumulative).max().unwrap_or(0)
    }
}

fn check(time: usize, prev: Option<&Altitudes>, a: &Altitudes) -> Option<StrategyFault> {
    if let Some(p) = prev {
        if let Some(v) = (0..3).find(|&v| a[v] < p[v]) {
            return Some(StrategyFault::TimeDecrease { time, vertex: v });
        }
    }
    LEAVES
        .iter()
        .find(|&&l| (a[l] - a[ROOT]).abs() > 1)
        .map(|&l| StrategyFault::Slope { time, vertex: l, slope: a[l] - a[ROOT] })
}

pub fn two_leaf_tree() -> Arc<SubdividedTree> {
    let t = WeightedTree::from_edges(&[(1, 0, 1), (2, 0, 1)]).expect("static tree");
    Arc::new(SubdividedTree::new(t))
}

/// Runs `rounds` gadgets against `strategy` on the two-leaf unit tree with a
/// single server that starts (and is first requested) at leaf 1. Each round
/// lets `u` be the lower leaf and `w` the other one: with the server at `w`
/// the round is `Relocate(w, u), Simple(w)`, otherwise just `Simple(w)`.
pub fn forward_adversary(strategy: &mut dyn DualStrategy, rounds: usize) -> AdversaryTranscript {
    let mut tr = AdversaryTranscript {
        strategy: strategy.name(),
        requests: vec![],
        altitudes: vec![strategy.initial()],
        d_per_request: vec![],
        gadgets: vec![],
        total_d: 0,
        opt: 0,
        fault: None,
    };
    tr.fault = check(0, None, &tr.altitudes[0]);
    let mut server = LEAVES[0];
    let mut issue = |tr: &mut AdversaryTranscript, r: Request, server: &mut VertexId| -> Option<i64> {
        let time = tr.requests.len() + 1;
        let prev = *tr.altitudes.last().unwrap();
        let next = strategy.respond(time, r, &prev);
        tr.requests.push(r);
        tr.altitudes.push(next);
        if let Some(f) = check(time, Some(&prev), &next) {
            tr.fault = Some(f);
            return None;
        }
        let d = match r {
            Request::Simple { s } => prev[*server] - prev[s],
            Request::Relocate { d, .. } => prev[d] - next[d],
        };
        *server = r.destination();
        tr.d_per_request.push(d);
        tr.total_d += d;
        Some(d)
    };
    if tr.fault.is_none() && issue(&mut tr, Request::Simple { s: server }, &mut server).is_some() {
        for round in 0..rounds {
            let a = *tr.altitudes.last().unwrap();
            let (u, w) = if a[1] < a[2] || (a[1] == a[2] && server == 1) { (1, 2) } else { (2, 1) };
            let mut reqs = vec![];
            if server == w {
                reqs.push(Request::Relocate { s: w, d: u });
            }
            reqs.push(Request::Simple { s: w });
            let mut d = 0;
            for &r in &reqs {
                match issue(&mut tr, r, &mut server) {
                    Some(x) => d += x,
                    None => break,
                }
            }
            if tr.fault.is_some() {
                break;
            }
            let cumulative = tr.total_d;
            tr.gadgets.push(GadgetRecord { round, requests: reqs, d, cumulative });
        }
    }
    let tree = two_leaf_tree();
    tr.opt = optimal_cost_dp(&TreeCost::full(&tree), &[LEAVES[0]], &tr.requests, None, DEFAULT_BUDGET)
        .map(|s| s.total_cost)
        .expect("one server is always within budget");
    tr
}
