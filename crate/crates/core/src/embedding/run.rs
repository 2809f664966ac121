use std::sync::Arc;

use super::{frt_embed, EmbedError, HstEmbedding};
use crate::sim::{run_double_coverage, Request, Tick, Trace};
use crate::tree::SubdividedTree;

#[derive(Clone, Debug)]
pub struct MetricRun {
    pub embedding: HstEmbedding,
    pub trace: Trace,
    /// Both costs are in the embedding's scaled integer units.
    pub hst_cost: i64,
    pub metric_cost: i64,
    /// Leaf-to-leaf moves whose metric length exceeded the tree path walked.
    pub move_violations: usize,
}

/// Embeds `m`, serves the point requests with Double Coverage on the HST,
/// and charges each server's leaf-to-leaf trips at metric distance.
pub fn run_on_metric(
    m: &crate::tree::MetricSpace,
    k_init: &[usize],
    seq: &[Request],
    d: usize,
    seed: u64,
) -> Result<MetricRun, EmbedError> {
    for &p in k_init.iter().chain(seq.iter().flat_map(|r| [r.source(), r.destination()]).collect::<Vec<_>>().iter()) {
        m.check_point(p)?;
    }
    let emb = frt_embed(m, d, seed)?;
    let mut point_of = vec![None; emb.hst.vertex_count()];
    for (x, &l) in emb.leaf_of.iter().enumerate() {
        point_of[l] = Some(x);
    }
    let tree = Arc::new(SubdividedTree::new(emb.hst.clone()));
    let init: Vec<_> = k_init.iter().map(|&p| emb.leaf_of[p]).collect();
    let reqs: Vec<Request> = seq
        .iter()
        .map(|r| match *r {
            Request::Simple { s } => Request::Simple { s: emb.leaf_of[s] },
            Request::Relocate { s, d } => Request::Relocate { s: emb.leaf_of[s], d: emb.leaf_of[d] },
        })
        .collect();
    let trace = run_double_coverage(&tree, &init, &reqs)?;
    let mut last: Vec<usize> = k_init.to_vec();
    let mut walked = vec![0i64; k_init.len()];
    let (mut metric_cost, mut move_violations) = (0, 0);
    for tick in trace.ticks() {
        match tick {
            Tick::Step { step, .. } => {
                for mv in &step.moves {
                    walked[mv.server] += 1;
                    let Some(p) = point_of.get(mv.to).copied().flatten() else { continue };
                    if tree.is_original(mv.to) {
                        let c = emb.scaled[last[mv.server]][p];
                        metric_cost += c;
                        move_violations += (c > walked[mv.server]) as usize;
                        last[mv.server] = p;
                        walked[mv.server] = 0;
                    }
                }
            }
            Tick::Relocate { server, to, .. } => {
                last[server] = point_of[to].expect("relocations end at leaves");
                walked[server] = 0;
            }
        }
    }
    Ok(MetricRun { hst_cost: trace.total_cost(), embedding: emb, trace, metric_cost, move_violations })
}
