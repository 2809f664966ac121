use serde::Serialize;

use super::{AltitudeCertificate, CertMode, DualError};
use crate::sim::{Tick, Trace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualEvaluation {
    pub per_tick: Vec<i64>,
    pub per_request: Vec<i64>,
    pub total: i64,
}

/// `D` from altitude changes at the request and at server positions.
pub fn evaluate_dual(cert: &AltitudeCertificate, trace: &Trace) -> Result<DualEvaluation, DualError> {
    let tree = &*trace.tree;
    let ticks: Vec<Tick<'_>> = trace.ticks().collect();
    if ticks.len() != cert.ticks {
        return Err(DualError::LengthMismatch { cert: cert.ticks, trace: ticks.len() });
    }
    check_events(cert, tree.vertex_count())?;
    let configs = trace.configurations();
    let mut per_tick = vec![0; ticks.len()];
    cert.sweep_backward(tree, |i, before, after| {
        let (pre, post) = (&configs[i], &configs[i + 1]);
        per_tick[i] = match ticks[i] {
            Tick::Step { request, .. } => {
                let s = trace.requests[request].source();
                let servers: i64 = pre.iter().zip(post).map(|(&a, &b)| after[b] - before[a]).sum();
                after[s] - before[s] - servers
            }
            Tick::Relocate { .. } => -post.iter().map(|&b| after[b] - before[b]).sum::<i64>(),
        };
    });
    let mut per_request = vec![0; trace.requests.len()];
    for (i, t) in ticks.iter().enumerate() {
        per_request[t.request()] += per_tick[i];
    }
    let total = per_tick.iter().sum();
    Ok(DualEvaluation { per_tick, per_request, total })
}

pub(crate) fn check_events(cert: &AltitudeCertificate, n: usize) -> Result<(), DualError> {
    for (idx, e) in cert.events.iter().enumerate() {
        let ordered = idx == 0 || cert.events[idx - 1].tick >= e.tick;
        if e.tick >= cert.ticks || !ordered || e.top >= n || e.cut.iter().any(|&c| c >= n) {
            return Err(DualError::MalformedEvent(idx));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuaranteeViolation {
    pub tick: usize,
    pub request: usize,
    pub delta_d: i64,
    pub required: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuaranteeReport {
    pub steps: usize,
    pub relocations: usize,
    pub violations: Vec<GuaranteeViolation>,
}

impl GuaranteeReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-tick lower bounds on `dD`. Monotone: 1 with no downward mover, else
/// 0. Banded: `|U| + |B|`. Relocations: exactly 0 in both modes.
pub fn check_guarantees(cert: &AltitudeCertificate, trace: &Trace, eval: &DualEvaluation) -> GuaranteeReport {
    let mut rep = GuaranteeReport { steps: 0, relocations: 0, violations: vec![] };
    for (i, t) in trace.ticks().enumerate() {
        let dd = eval.per_tick[i];
        let (ok, need) = match t {
            Tick::Relocate { .. } => {
                rep.relocations += 1;
                (dd == 0, 0)
            }
            Tick::Step { step, .. } => {
                rep.steps += 1;
                let need = match cert.mode {
                    CertMode::Monotone => step.down.is_empty() as i64,
                    CertMode::Banded(_) => (step.up.len() + step.down.len()) as i64,
                };
                (dd >= need, need)
            }
        };
        if !ok {
            rep.violations.push(GuaranteeViolation { tick: i, request: t.request(), delta_d: dd, required: need });
        }
    }
    rep
}
