use serde::Serialize;
use thiserror::Error;

use super::{Request, RequestEvent, SmallStep, Trace};
use crate::tree::{SubdividedTree, VertexId};

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    #[error("trace has {events} events for {requests} requests")]
    LengthMismatch { events: usize, requests: usize },
    #[error("event kind does not match the request")]
    KindMismatch,
    #[error("request at synthetic or unknown vertex {0}")]
    BadRequestVertex(VertexId),
    #[error("step taken although the request vertex is occupied")]
    StepAfterServed,
    #[error("request left unserved")]
    NotServed,
    #[error("B not singleton")]
    BNotSingleton,
    #[error("moving servers {got:?}, expected {expected:?}")]
    WrongMovers { expected: Vec<usize>, got: Vec<usize> },
    #[error("server {0} does not move one short edge toward the request")]
    BadMove(usize),
    #[error("U/B labels disagree with move directions")]
    DirectionMismatch,
    #[error("subtrees of U servers overlap")]
    OverlappingUp,
    #[error("a U subtree contains the request")]
    UpContainsRequest,
    #[error("U server {0} outside the subtree of the B server")]
    UpOutsideB(usize),
    #[error("relocation by server {0} is not the lowest-index occupant of the source")]
    WrongRelocation(usize),
    #[error("{field} recorded {recorded}, recomputed {recomputed}")]
    Tally { field: &'static str, recorded: i64, recomputed: i64 },
    #[error("final configuration does not match the replay")]
    FinalConfiguration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub request: Option<usize>,
    pub step: Option<usize>,
    pub kind: ViolationKind,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match (self.request, self.step) {
            (Some(r), Some(s)) => write!(f, "request {r} step {s}: {}", self.kind),
            (Some(r), None) => write!(f, "request {r}: {}", self.kind),
            _ => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub requests: usize,
    pub steps: usize,
    pub violation: Option<Violation>,
}

impl TraceReport {
    pub fn is_clean(&self) -> bool {
        self.violation.is_none()
    }
}

/// Path from `a` to `b` by climbing parent pointers; no ancestor index.
fn walk(tree: &SubdividedTree, a: VertexId, b: VertexId) -> Vec<VertexId> {
    let (mut x, mut y) = (a, b);
    let mut left = vec![];
    let mut right = vec![];
    while tree.weighted_depth(x) > tree.weighted_depth(y) {
        left.push(x);
        x = tree.parent(x).unwrap();
    }
    while tree.weighted_depth(y) > tree.weighted_depth(x) {
        right.push(y);
        y = tree.parent(y).unwrap();
    }
    while x != y {
        left.push(x);
        right.push(y);
        x = tree.parent(x).unwrap();
        y = tree.parent(y).unwrap();
    }
    left.push(x);
    left.extend(right.into_iter().rev());
    left
}

fn below(tree: &SubdividedTree, top: VertexId, v: VertexId) -> bool {
    let mut x = v;
    loop {
        if x == top {
            return true;
        }
        match tree.parent(x) {
            Some(p) if tree.weighted_depth(x) > tree.weighted_depth(top) => x = p,
            _ => return false,
        }
    }
}

fn expected_movers(tree: &SubdividedTree, pos: &[VertexId], s: VertexId) -> Vec<usize> {
    let mut out = vec![];
    for (i, &v) in pos.iter().enumerate() {
        if pos[..i].contains(&v) {
            continue;
        }
        let path = walk(tree, v, s);
        let blocked = path[1..].iter().any(|x| pos.contains(x));
        if !blocked {
            out.push(i);
        }
    }
    out
}

fn check_step(
    tree: &SubdividedTree,
    pos: &mut [VertexId],
    s: VertexId,
    step: &SmallStep,
) -> Result<(), ViolationKind> {
    if step.down.len() > 1 {
        return Err(ViolationKind::BNotSingleton);
    }
    if pos.contains(&s) {
        return Err(ViolationKind::StepAfterServed);
    }
    let expected = expected_movers(tree, pos, s);
    let mut got: Vec<usize> = step.moves.iter().map(|m| m.server).collect();
    got.sort_unstable();
    if got != expected {
        return Err(ViolationKind::WrongMovers { expected, got });
    }
    let mut up = vec![];
    let mut down = vec![];
    for m in &step.moves {
        let path = walk(tree, pos[m.server], s);
        if m.from != pos[m.server] || path.get(1) != Some(&m.to) {
            return Err(ViolationKind::BadMove(m.server));
        }
        if tree.parent(m.from) == Some(m.to) {
            up.push(m.server);
        } else {
            down.push(m.server);
        }
    }
    let mut su = step.up.clone();
    su.sort_unstable();
    let mut sd = step.down.clone();
    sd.sort_unstable();
    up.sort_unstable();
    down.sort_unstable();
    if su != up || sd != down {
        return Err(ViolationKind::DirectionMismatch);
    }
    if down.len() > 1 {
        return Err(ViolationKind::BNotSingleton);
    }
    for (a, &i) in up.iter().enumerate() {
        if below(tree, pos[i], s) {
            return Err(ViolationKind::UpContainsRequest);
        }
        for &j in &up[a + 1..] {
            if below(tree, pos[i], pos[j]) || below(tree, pos[j], pos[i]) {
                return Err(ViolationKind::OverlappingUp);
            }
        }
    }
    if let Some(&j) = down.first() {
        let after = step.moves.iter().find(|m| m.server == j).unwrap().to;
        if let Some(&i) = up.iter().find(|&&i| !below(tree, after, pos[i])) {
            return Err(ViolationKind::UpOutsideB(i));
        }
    }
    for m in &step.moves {
        pos[m.server] = m.to;
    }
    Ok(())
}

/// Replays a trace with an independent obstruction rule and reports the
/// first inconsistency.
pub fn verify_trace(trace: &Trace) -> TraceReport {
    let tree = &*trace.tree;
    let mut report = TraceReport { requests: trace.requests.len(), steps: 0, violation: None };
    let fail = |request, step, kind| Some(Violation { request, step, kind });
    if trace.events.len() != trace.requests.len() {
        report.violation = fail(
            None,
            None,
            ViolationKind::LengthMismatch { events: trace.events.len(), requests: trace.requests.len() },
        );
        return report;
    }
    let mut pos = trace.initial.clone();
    let (mut up, mut down) = (0i64, 0i64);
    for (t, (req, ev)) in trace.requests.iter().zip(&trace.events).enumerate() {
        for v in [req.source(), req.destination()] {
            if !tree.contains(v) || !tree.is_original(v) {
                report.violation = fail(Some(t), None, ViolationKind::BadRequestVertex(v));
                return report;
            }
        }
        match (req, ev) {
            (&Request::Simple { s }, RequestEvent::Simple { steps }) => {
                for (i, st) in steps.iter().enumerate() {
                    if let Err(kind) = check_step(tree, &mut pos, s, st) {
                        report.violation = fail(Some(t), Some(i), kind);
                        return report;
                    }
                    up += st.up.len() as i64;
                    down += st.down.len() as i64;
                    report.steps += 1;
                }
                if !pos.contains(&s) {
                    report.violation = fail(Some(t), None, ViolationKind::NotServed);
                    return report;
                }
            }
            (&Request::Relocate { s, d }, &RequestEvent::Relocate { server, from, to }) => {
                let lowest = pos.iter().position(|&p| p == s);
                if lowest != Some(server) || from != s || to != d {
                    report.violation = fail(Some(t), None, ViolationKind::WrongRelocation(server));
                    return report;
                }
                pos[server] = d;
            }
            _ => {
                report.violation = fail(Some(t), None, ViolationKind::KindMismatch);
                return report;
            }
        }
    }
    for (field, recorded, recomputed) in [("cost_up", trace.cost_up, up), ("cost_down", trace.cost_down, down)] {
        if recorded != recomputed {
            report.violation = fail(None, None, ViolationKind::Tally { field, recorded, recomputed });
            return report;
        }
    }
    if pos != trace.final_config {
        report.violation = fail(None, None, ViolationKind::FinalConfiguration);
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostSummary {
    pub total: i64,
    pub up: i64,
    pub down: i64,
    /// `(up, down)` per request; relocations are `(0, 0)`.
    pub per_request: Vec<(i64, i64)>,
}

pub fn cost_summary(trace: &Trace) -> CostSummary {
    let per_request: Vec<(i64, i64)> = trace
        .events
        .iter()
        .map(|e| match e {
            RequestEvent::Simple { steps } => steps
                .iter()
                .fold((0, 0), |(u, d), st| (u + st.up.len() as i64, d + st.down.len() as i64)),
            RequestEvent::Relocate { .. } => (0, 0),
        })
        .collect();
    let up = per_request.iter().map(|p| p.0).sum();
    let down = per_request.iter().map(|p| p.1).sum();
    CostSummary { total: up + down, up, down, per_request }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::sim::{run_double_coverage, Move};
    use crate::tree::{HstSpec, WeightedTree};

    fn random_run(rng: &mut ChaCha8Rng) -> Trace {
        let n = rng.gen_range(2..12);
        let edges: Vec<_> = (1..n).map(|v| (v, rng.gen_range(0..v), rng.gen_range(1..=4))).collect();
        let t = Arc::new(SubdividedTree::new(WeightedTree::new(0, &edges, None).unwrap()));
        let k = rng.gen_range(1..=4);
        let init: Vec<_> = (0..k).map(|_| rng.gen_range(0..t.vertex_count())).collect();
        let mut seq = vec![];
        for _ in 0..rng.gen_range(0..15) {
            let s = rng.gen_range(0..n);
            seq.push(Request::Simple { s });
            if rng.gen_bool(0.3) {
                seq.push(Request::Relocate { s, d: rng.gen_range(0..n) });
            }
        }
        run_double_coverage(&t, &init, &seq).unwrap()
    }

    #[test]
    fn simulator_output_verifies() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let tr = random_run(&mut rng);
            let rep = verify_trace(&tr);
            assert!(rep.is_clean(), "{:?}", rep.violation);
        }
    }

    #[test]
    fn injected_double_b() {
        let h = HstSpec::new(vec![1], 4).unwrap().build().unwrap();
        let t = Arc::new(SubdividedTree::new(h.tree));
        let mut tr = run_double_coverage(&t, &[1, 2, 3], &[Request::Simple { s: 4 }]).unwrap();
        let RequestEvent::Simple { steps } = &mut tr.events[0] else { panic!() };
        steps[0].down = vec![0, 1];
        let v = verify_trace(&tr).violation.unwrap();
        assert_eq!(v.kind, ViolationKind::BNotSingleton);
        assert_eq!(v.kind.to_string(), "B not singleton");
    }

    #[test]
    fn corrupted_tally() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut tr = random_run(&mut rng);
        while tr.total_cost() == 0 {
            tr = random_run(&mut rng);
        }
        tr.cost_up += 1;
        assert!(matches!(
            verify_trace(&tr).violation.unwrap().kind,
            ViolationKind::Tally { field: "cost_up", .. }
        ));
    }

    #[test]
    fn wrong_mover_detected() {
        let t = Arc::new(SubdividedTree::new(WeightedTree::from_edges(&[(1, 0, 1), (2, 1, 1), (3, 2, 1)]).unwrap()));
        let mut tr = run_double_coverage(&t, &[0, 3], &[Request::Simple { s: 1 }]).unwrap();
        let RequestEvent::Simple { steps } = &mut tr.events[0] else { panic!() };
        steps[0].moves.pop();
        steps[0].up.clear();
        assert!(matches!(verify_trace(&tr).violation.unwrap().kind, ViolationKind::WrongMovers { .. }));
        let mut tr = run_double_coverage(&t, &[0, 3], &[Request::Simple { s: 1 }]).unwrap();
        let RequestEvent::Simple { steps } = &mut tr.events[0] else { panic!() };
        steps[0].moves[1] = Move { server: 1, from: 3, to: 3 };
        assert!(matches!(verify_trace(&tr).violation.unwrap().kind, ViolationKind::BadMove(1)));
    }

    #[test]
    fn summary() {
        let t = Arc::new(SubdividedTree::new(WeightedTree::from_edges(&[(1, 0, 1)]).unwrap()));
        let tr = run_double_coverage(&t, &[0], &[]).unwrap();
        let c = cost_summary(&tr);
        assert_eq!((c.total, c.up, c.down), (0, 0, 0));

        let h = HstSpec::new(vec![1], 4).unwrap().build().unwrap();
        let t = Arc::new(SubdividedTree::new(h.tree));
        let tr = run_double_coverage(&t, &[1, 2, 3], &[Request::Simple { s: 4 }]).unwrap();
        let c = cost_summary(&tr);
        assert_eq!((c.total, c.up, c.down), (4, 3, 1));
        assert_eq!(c.per_request, vec![(3, 1)]);
    }

    #[test]
    fn up_down_gap_on_hst_leaf_requests() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let spec = HstSpec::geometric(rng.gen_range(2..4), rng.gen_range(1..4), 3).unwrap();
            let h = spec.build().unwrap();
            let w = spec.leaf_distance();
            let t = Arc::new(SubdividedTree::new(h.tree));
            let k = rng.gen_range(1..4);
            let init: Vec<_> = (0..k).map(|_| h.leaves[rng.gen_range(0..h.leaves.len())]).collect();
            let mut seq = vec![];
            for _ in 0..30 {
                let s = h.leaves[rng.gen_range(0..h.leaves.len())];
                seq.push(Request::Simple { s });
                if rng.gen_bool(0.3) {
                    seq.push(Request::Relocate { s, d: h.leaves[rng.gen_range(0..h.leaves.len())] });
                }
            }
            let tr = run_double_coverage(&t, &init, &seq).unwrap();
            assert!((tr.cost_up - tr.cost_down).abs() <= k as i64 * w);
        }
    }
}
