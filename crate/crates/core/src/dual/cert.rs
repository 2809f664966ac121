use serde::{Deserialize, Serialize};

use super::DualError;
use crate::potentials::{bands, BandTable};
use crate::sim::{verify_trace, Configuration, Tick, Trace};
use crate::tree::{SubdividedTree, VertexId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertMode {
    /// Slopes in {0, 1}; bounds upward movement.
    Monotone,
    /// Slopes in `[m_{d_u}, M_{d_u}]`; bounds total movement after scaling.
    Banded(BandTable),
}

impl CertMode {
    pub fn name(&self) -> &'static str {
        match self {
            CertMode::Monotone => "monotone",
            CertMode::Banded(_) => "banded",
        }
    }
}

/// In reverse time, altitudes of `V_top` minus the subtrees rooted at `cut`
/// drop by `delta` across tick `tick`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertEvent {
    pub tick: usize,
    pub top: VertexId,
    pub cut: Vec<VertexId>,
    pub delta: i64,
}

/// Event-log form of an altitude function over all tick boundaries.
/// Boundary `i` sits before tick `i`; boundary `ticks` is after the last one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltitudeCertificate {
    pub mode: CertMode,
    pub base: i64,
    pub ticks: usize,
    /// Reverse time order, one per small step (delta 0 marks a no-op).
    pub events: Vec<CertEvent>,
}

impl AltitudeCertificate {
    pub fn contains(&self, tree: &SubdividedTree, e: &CertEvent, v: VertexId) -> bool {
        tree.component_contains(e.top, &e.cut, v)
    }

    /// Streams altitudes backward. `f(i, before, after)` is called for each
    /// tick `i` from last to first with the altitude arrays at boundaries
    /// `i` and `i + 1`.
    pub fn sweep_backward(&self, tree: &SubdividedTree, mut f: impl FnMut(usize, &[i64], &[i64])) {
        let mut after = vec![self.base; tree.vertex_count()];
        let mut before = after.clone();
        let mut next = 0;
        for i in (0..self.ticks).rev() {
            while next < self.events.len() && self.events[next].tick == i {
                let e = &self.events[next];
                tree.for_each_in_component(e.top, &e.cut, |u| before[u] -= e.delta);
                next += 1;
            }
            f(i, &before, &after);
            after.copy_from_slice(&before);
        }
    }

    /// Altitudes at the given boundaries, ascending indices.
    pub fn altitudes_at(&self, tree: &SubdividedTree, boundaries: &[usize]) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]; boundaries.len()];
        for (slot, &b) in boundaries.iter().enumerate() {
            if b == self.ticks {
                out[slot] = vec![self.base; tree.vertex_count()];
            }
        }
        self.sweep_backward(tree, |i, before, _| {
            for (slot, &b) in boundaries.iter().enumerate() {
                if b == i {
                    out[slot] = before.to_vec();
                }
            }
        });
        out
    }
}

pub(crate) fn slope(tree: &SubdividedTree, a: &[i64], u: VertexId) -> i64 {
    a[u] - a[tree.parent(u).expect("non-root")]
}

/// Before-positions of the upward movers and the after-position of the
/// downward mover, if any.
pub(crate) fn step_shape(tick: &Tick<'_>, before: &Configuration) -> Option<(Vec<VertexId>, Option<VertexId>)> {
    let Tick::Step { step, .. } = tick else { return None };
    let up_before = step.up.iter().map(|&i| before[i]).collect();
    let down_after = step.down.first().map(|&j| step.moves.iter().find(|m| m.server == j).unwrap().to);
    Some((up_before, down_after))
}

fn build(trace: &Trace, mode: CertMode) -> Result<AltitudeCertificate, DualError> {
    let report = verify_trace(trace);
    if let Some(v) = report.violation {
        return Err(DualError::InvalidTrace(v.to_string()));
    }
    let tree = &*trace.tree;
    let configs = trace.configurations();
    let ticks: Vec<Tick<'_>> = trace.ticks().collect();
    let base = 0;
    let mut alt = vec![base; tree.vertex_count()];
    let mut events = Vec::new();
    let root = tree.root();
    for i in (0..ticks.len()).rev() {
        let Some((cut, down_after)) = step_shape(&ticks[i], &configs[i]) else { continue };
        let (top, delta) = match (&mode, down_after) {
            (CertMode::Monotone, None) => {
                let on_slope = cut.iter().any(|&v| slope(tree, &alt, v) == 1);
                (root, if on_slope { 0 } else { 1 })
            }
            (CertMode::Monotone, Some(vj)) => {
                let blocked = cut.iter().any(|&v| slope(tree, &alt, v) == 1) || slope(tree, &alt, vj) == 0;
                (vj, if blocked { 0 } else { 1 })
            }
            (CertMode::Banded(b), down) => {
                let up_slack = cut.iter().map(|&v| b.hi(tree.band_depth(v)) - slope(tree, &alt, v));
                match down {
                    None => (root, up_slack.min().expect("a step moves someone")),
                    Some(vj) => {
                        let own = slope(tree, &alt, vj) - b.lo(tree.band_depth(vj));
                        (vj, up_slack.fold(own, i64::min))
                    }
                }
            }
        };
        if delta != 0 {
            tree.for_each_in_component(top, &cut, |u| alt[u] -= delta);
        }
        events.push(CertEvent { tick: i, top, cut, delta });
    }
    Ok(AltitudeCertificate { mode, base, ticks: ticks.len(), events })
}

/// Reverse-time construction with slopes in {0, 1}.
pub fn build_certificate_hst(trace: &Trace) -> Result<AltitudeCertificate, DualError> {
    build(trace, CertMode::Monotone)
}

/// Reverse-time construction with per-depth slope bands for depth `d`.
pub fn build_certificate_weighted(trace: &Trace, d: u32) -> Result<AltitudeCertificate, DualError> {
    let depth = trace.tree.base().depth() as u32;
    if depth > d {
        return Err(DualError::DepthExceeded { tree: depth, d });
    }
    let k = (trace.k() as u32).max(2);
    build(trace, CertMode::Banded(bands(k, d.max(1))?))
}
