use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub cap: i64,
    pub cost: i64,
}

/// Network asking for exactly `demand` units from `source` to `sink`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FlowNetwork {
    pub nodes: usize,
    pub arcs: Vec<FlowArc>,
    pub source: usize,
    pub sink: usize,
    pub demand: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSolution {
    /// Flow on each arc of the input network, lower bounds included.
    pub flow: Vec<i64>,
    pub cost: i64,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("arc {0} references a missing node")]
    BadNode(usize),
    #[error("arc {0} has lower bound above capacity or a negative bound")]
    BadBounds(usize),
    #[error("no feasible flow: {0} units of required flow could not be routed")]
    Infeasible(i64),
    #[error("negative-cost cycle in the residual network")]
    NegativeCycle,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize, demand: i64) -> Self {
        FlowNetwork { nodes, arcs: vec![], source, sink, demand }
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    pub fn add_arc(&mut self, from: usize, to: usize, lower: i64, cap: i64, cost: i64) -> usize {
        self.arcs.push(FlowArc { from, to, lower, cap, cost });
        self.arcs.len() - 1
    }

    pub fn cost_of(&self, flow: &[i64]) -> i64 {
        self.arcs.iter().zip(flow).map(|(a, f)| a.cost * f).sum()
    }
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual { head: vec![], cap: vec![], cost: vec![], adj: vec![vec![]; n] }
    }

    fn add(&mut self, u: usize, v: usize, cap: i64, cost: i64) -> usize {
        let e = self.head.len();
        self.head.push(v);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[u].push(e);
        self.head.push(u);
        self.cap.push(0);
        self.cost.push(-cost);
        self.adj[v].push(e + 1);
        e
    }
}

const INF: i64 = i64::MAX / 4;

/// Exact min-cost flow by successive shortest paths. Lower bounds are
/// removed by shifting them into node imbalances served from a super source.
pub fn min_cost_flow(net: &FlowNetwork) -> Result<FlowSolution, FlowError> {
    let n = net.nodes;
    for (i, a) in net.arcs.iter().enumerate() {
        if a.from >= n || a.to >= n {
            return Err(FlowError::BadNode(i));
        }
        if a.lower < 0 || a.lower > a.cap {
            return Err(FlowError::BadBounds(i));
        }
    }
    if net.source >= n || net.sink >= n {
        return Err(FlowError::BadNode(usize::MAX));
    }
    let (ss, tt) = (n, n + 1);
    let mut g = Residual::new(n + 2);
    let mut excess = vec![0i64; n];
    excess[net.source] += net.demand;
    excess[net.sink] -= net.demand;
    let mut base_cost = 0i64;
    let ids: Vec<usize> = net
        .arcs
        .iter()
        .map(|a| {
            excess[a.to] += a.lower;
            excess[a.from] -= a.lower;
            base_cost += a.lower * a.cost;
            g.add(a.from, a.to, a.cap - a.lower, a.cost)
        })
        .collect();
    let mut required = 0;
    for (v, &e) in excess.iter().enumerate() {
        if e > 0 {
            g.add(ss, v, e, 0);
            required += e;
        } else if e < 0 {
            g.add(v, tt, -e, 0);
        }
    }

    // Bellman-Ford for initial potentials (costs may be negative)
    let nn = n + 2;
    let mut pot = vec![INF; nn];
    pot[ss] = 0;
    for round in 0..nn {
        let mut changed = false;
        for u in 0..nn {
            if pot[u] == INF {
                continue;
            }
            for &e in &g.adj[u] {
                if g.cap[e] > 0 && pot[u] + g.cost[e] < pot[g.head[e]] {
                    pot[g.head[e]] = pot[u] + g.cost[e];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        if round == nn - 1 {
            return Err(FlowError::NegativeCycle);
        }
    }
    for p in pot.iter_mut() {
        if *p == INF {
            *p = 0;
        }
    }

    let mut pushed = 0i64;
    let mut total = 0i64;
    let mut dist = vec![INF; nn];
    let mut prev = vec![usize::MAX; nn];
    while pushed < required {
        dist.fill(INF);
        prev.fill(usize::MAX);
        dist[ss] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, ss)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &g.adj[u] {
                if g.cap[e] == 0 {
                    continue;
                }
                let v = g.head[e];
                let nd = d + g.cost[e] + pot[u] - pot[v];
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = e;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        if dist[tt] == INF {
            return Err(FlowError::Infeasible(required - pushed));
        }
        for v in 0..nn {
            if dist[v] < INF {
                pot[v] += dist[v];
            }
        }
        let mut aug = required - pushed;
        let mut v = tt;
        while v != ss {
            let e = prev[v];
            aug = aug.min(g.cap[e]);
            v = g.head[e ^ 1];
        }
        let mut v = tt;
        while v != ss {
            let e = prev[v];
            g.cap[e] -= aug;
            g.cap[e ^ 1] += aug;
            total += aug * g.cost[e];
            v = g.head[e ^ 1];
        }
        pushed += aug;
    }
    let flow: Vec<i64> = net.arcs.iter().zip(&ids).map(|(a, &e)| a.lower + g.cap[e ^ 1]).collect();
    Ok(FlowSolution { flow, cost: base_cost + total })
}
