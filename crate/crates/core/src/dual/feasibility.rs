use serde::Serialize;

use super::cert::slope;
use super::eval::check_events;
use super::{AltitudeCertificate, CertMode};
use crate::tree::{SubdividedTree, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibilityIssue {
    Malformed { detail: String },
    /// Altitude decreases in forward time across `tick`.
    TimeDecrease { tick: usize, vertex: VertexId },
    Slope { boundary: usize, vertex: VertexId, slope: i64, lo: i64, hi: i64 },
    /// Slope outside `[-1, 1]` once divided by `c = M_d`.
    Scaled { boundary: usize, vertex: VertexId, slope: i64, c: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub boundaries: usize,
    pub issue_count: usize,
    /// First few issues only.
    pub issues: Vec<FeasibilityIssue>,
}

impl FeasibilityReport {
    pub fn is_clean(&self) -> bool {
        self.issue_count == 0
    }
}

const KEEP: usize = 32;

/// Replays the event log and checks monotonicity in time and the mode's
/// slope band at every boundary and every short edge.
pub fn verify_feasibility(cert: &AltitudeCertificate, t: &SubdividedTree) -> FeasibilityReport {
    let mut rep = FeasibilityReport { boundaries: cert.ticks + 1, issue_count: 0, issues: vec![] };
    let push = |rep: &mut FeasibilityReport, i| {
        rep.issue_count += 1;
        if rep.issues.len() < KEEP {
            rep.issues.push(i);
        }
    };
    if let Err(e) = check_events(cert, t.vertex_count()) {
        push(&mut rep, FeasibilityIssue::Malformed { detail: e.to_string() });
        return rep;
    }
    let root = t.root();
    let check_slopes = |rep: &mut FeasibilityReport, boundary: usize, a: &[i64]| {
        for u in (0..t.vertex_count()).filter(|&u| u != root) {
            let s = slope(t, a, u);
            let (lo, hi) = match &cert.mode {
                CertMode::Monotone => (0, 1),
                CertMode::Banded(b) => {
                    let c = b.c_i64();
                    if s.abs() > c {
                        push(rep, FeasibilityIssue::Scaled { boundary, vertex: u, slope: s, c });
                    }
                    let du = t.band_depth(u);
                    (b.lo(du), b.hi(du))
                }
            };
            if s < lo || s > hi {
                push(rep, FeasibilityIssue::Slope { boundary, vertex: u, slope: s, lo, hi });
            }
        }
    };
    check_slopes(&mut rep, cert.ticks, &vec![cert.base; t.vertex_count()]);
    cert.sweep_backward(t, |i, before, after| {
        if let Some(v) = (0..before.len()).find(|&v| before[v] > after[v]) {
            push(&mut rep, FeasibilityIssue::TimeDecrease { tick: i, vertex: v });
        }
        check_slopes(&mut rep, i, before);
    });
    rep
}
