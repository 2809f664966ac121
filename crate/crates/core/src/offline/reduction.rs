use super::{check_instance, label_schedule, min_cost_flow, FlowNetwork, MoveCost, OfflineError, OfflineSchedule};
use crate::sim::Request;
use crate::tree::VertexId;

/// Node layout of the k-taxi flow network.
pub(crate) struct Layout {
    pub k: usize,
    pub t: usize,
    pub slots: usize,
}

impl Layout {
    const SOURCE: usize = 0;
    const SINK: usize = 1;

    fn server(&self, i: usize) -> usize {
        2 + i
    }
    fn arrival(&self, t: usize) -> usize {
        2 + self.k + 2 * t
    }
    fn departure(&self, t: usize) -> usize {
        self.arrival(t) + 1
    }
    fn slot(&self, j: usize) -> usize {
        2 + self.k + 2 * self.t + j
    }
    fn nodes(&self) -> usize {
        2 + self.k + 2 * self.t + self.slots
    }
}

/// One unit per server. Each request is a job `arrival -> departure` that
/// must carry exactly one unit; a unit enters the arrival from a server's
/// start or from an earlier job's departure, paying the move to `s_t`.
pub fn build_network(
    cost: &impl MoveCost,
    initial: &[VertexId],
    requests: &[Request],
    fixed_final: Option<&[VertexId]>,
) -> FlowNetwork {
    let k = initial.len();
    let lay = Layout { k, t: requests.len(), slots: fixed_final.map_or(0, |f| f.len()) };
    let mut net = FlowNetwork::new(lay.nodes(), Layout::SOURCE, Layout::SINK, k as i64);
    // (node, position) of everything a unit can leave from
    let mut ends: Vec<(usize, VertexId)> = Vec::with_capacity(k + requests.len());
    for (i, &p) in initial.iter().enumerate() {
        net.add_arc(Layout::SOURCE, lay.server(i), 0, 1, 0);
        ends.push((lay.server(i), p));
    }
    for (t, r) in requests.iter().enumerate() {
        let s = r.source();
        for &(node, p) in &ends {
            net.add_arc(node, lay.arrival(t), 0, 1, cost.cost(p, s));
        }
        net.add_arc(lay.arrival(t), lay.departure(t), 1, 1, 0);
        ends.push((lay.departure(t), r.destination()));
    }
    match fixed_final {
        None => {
            for &(node, _) in &ends {
                net.add_arc(node, Layout::SINK, 0, 1, 0);
            }
        }
        Some(f) => {
            for (j, &q) in f.iter().enumerate() {
                for &(node, p) in &ends {
                    net.add_arc(node, lay.slot(j), 0, 1, cost.cost(p, q));
                }
                net.add_arc(lay.slot(j), Layout::SINK, 0, 1, 0);
            }
        }
    }
    net
}

pub fn optimal_cost_flow(
    cost: &impl MoveCost,
    initial: &[VertexId],
    requests: &[Request],
    fixed_final: Option<&[VertexId]>,
) -> Result<OfflineSchedule, OfflineError> {
    check_instance(initial.len(), requests, fixed_final)?;
    let net = build_network(cost, initial, requests, fixed_final);
    let sol = min_cost_flow(&net)?;
    let k = initial.len();
    let lay = Layout { k, t: requests.len(), slots: 0 };
    let mut from = vec![usize::MAX; requests.len()];
    for (a, &f) in net.arcs.iter().zip(&sol.flow) {
        if f == 0 || a.to < lay.arrival(0) || a.to >= lay.arrival(requests.len()) {
            continue;
        }
        let off = a.to - lay.arrival(0);
        if off % 2 != 0 {
            continue;
        }
        let t = off / 2;
        from[t] = if a.from < 2 + k {
            initial[a.from - 2]
        } else {
            requests[(a.from - lay.arrival(0)) / 2].destination()
        };
    }
    if from.contains(&usize::MAX) {
        return Err(OfflineError::Internal("request without an incoming unit".into()));
    }
    let schedule = label_schedule(cost, initial, requests, &from, fixed_final);
    if schedule.total_cost != sol.cost {
        return Err(OfflineError::Internal(format!(
            "flow value {} but schedule costs {}",
            sol.cost, schedule.total_cost
        )));
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offline::{optimal_cost_dp, TreeCost, DEFAULT_BUDGET};
    use crate::tree::{SubdividedTree, WeightedTree};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_sequence_with_fixed_final() {
        let t = SubdividedTree::new(WeightedTree::from_edges(&[(1, 0, 2)]).unwrap());
        let c = TreeCost::full(&t);
        assert_eq!(optimal_cost_flow(&c, &[0, 1], &[], Some(&[0, 1])).unwrap().total_cost, 0);
        assert_eq!(optimal_cost_flow(&c, &[0, 1], &[], Some(&[1, 1])).unwrap().total_cost, 2);
    }

    #[test]
    fn agrees_with_dp() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..150 {
            let n = rng.gen_range(2..=8);
            let edges: Vec<_> = (1..n).map(|v| (v, rng.gen_range(0..v), rng.gen_range(1..=3))).collect();
            let t = SubdividedTree::new(WeightedTree::new(0, &edges, None).unwrap());
            let k = rng.gen_range(1..=3);
            let init: Vec<_> = (0..k).map(|_| rng.gen_range(0..t.vertex_count())).collect();
            let mut seq = vec![];
            while seq.len() < rng.gen_range(0..=8) {
                let s = rng.gen_range(0..n);
                seq.push(Request::Simple { s });
                if rng.gen_bool(0.3) {
                    seq.push(Request::Relocate { s, d: rng.gen_range(0..n) });
                }
            }
            let fin: Option<Vec<_>> =
                (trial % 2 == 0).then(|| (0..k).map(|_| rng.gen_range(0..t.vertex_count())).collect());
            for c in [TreeCost::full(&t), TreeCost::upward(&t)] {
                let a = optimal_cost_dp(&c, &init, &seq, fin.as_deref(), DEFAULT_BUDGET).unwrap();
                let b = optimal_cost_flow(&c, &init, &seq, fin.as_deref()).unwrap();
                assert_eq!(a.total_cost, b.total_cost, "trial {trial}");
                assert_eq!(b.replay(&c, &init, &seq).unwrap(), b.total_cost);
            }
        }
    }
}
