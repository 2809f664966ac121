use serde::Serialize;

use super::{evaluate_dual, AltitudeCertificate, DualError};
use crate::sim::{Request, RequestEvent, Trace};
use crate::tree::{SubdividedTree, VertexId};

/// The certificate in the original dual's variables, indexed by request
/// time `t = 0..=T` (time `t` ends with request `t - 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaB {
    /// `lambda[t - 1][u]` for `t = 1..=T`.
    pub lambda: Vec<Vec<i64>>,
    /// `b[t][u]` for `t = 0..=T`; the root entry is unused and 0.
    pub b: Vec<Vec<i64>>,
    /// Non-zero `xi_{ut}` per relocation time.
    pub xi: Vec<(usize, Vec<(VertexId, i64)>)>,
    pub objective: i64,
    pub d: i64,
}

fn counts_below(t: &SubdividedTree, cfg: &[VertexId]) -> Vec<i64> {
    let mut x = vec![0; t.vertex_count()];
    for &v in cfg {
        let mut cur = Some(v);
        while let Some(u) = cur {
            x[u] += 1;
            cur = t.parent(u);
        }
    }
    x
}

fn xi_of(t: &SubdividedTree, s: VertexId, d: VertexId) -> Vec<(VertexId, i64)> {
    (0..t.vertex_count())
        .filter(|&u| u != t.root())
        .filter_map(|u| match (t.in_subtree(u, s), t.in_subtree(u, d)) {
            (true, false) => Some((u, -1)),
            (false, true) => Some((u, 1)),
            _ => None,
        })
        .collect()
}

/// Builds `(lambda, b)`, checks `lambda >= 0` and
/// `lambda_u - lambda_{p(u)} = b_t - b_{t-1}` everywhere, and checks that
/// the original objective equals `D`.
pub fn transform_to_lambda_b(cert: &AltitudeCertificate, trace: &Trace) -> Result<LambdaB, DualError> {
    let tree = &*trace.tree;
    let d = evaluate_dual(cert, trace)?.total;
    let mut bounds = vec![0];
    for e in &trace.events {
        let n = match e {
            RequestEvent::Simple { steps } => steps.len(),
            RequestEvent::Relocate { .. } => 1,
        };
        bounds.push(bounds.last().unwrap() + n);
    }
    let alt = cert.altitudes_at(tree, &bounds);
    let configs = trace.configurations();
    let root = tree.root();
    let n = tree.vertex_count();
    let b: Vec<Vec<i64>> = alt
        .iter()
        .map(|a| (0..n).map(|u| if u == root { 0 } else { a[u] - a[tree.parent(u).unwrap()] }).collect())
        .collect();
    let lambda: Vec<Vec<i64>> = alt.windows(2).map(|w| (0..n).map(|u| w[1][u] - w[0][u]).collect()).collect();
    for (ti, l) in lambda.iter().enumerate() {
        let time = ti + 1;
        for u in 0..n {
            if l[u] < 0 {
                return Err(DualError::Constraint { vertex: u, time });
            }
            if let Some(p) = tree.parent(u) {
                if l[u] - l[p] != b[time][u] - b[time - 1][u] {
                    return Err(DualError::Constraint { vertex: u, time });
                }
            }
        }
    }
    let k = trace.k() as i64;
    let mut objective = 0;
    let mut xi = vec![];
    for (ti, r) in trace.requests.iter().enumerate() {
        let time = ti + 1;
        let l = &lambda[ti];
        objective -= k * l[root];
        match *r {
            Request::Simple { s } => objective += l[s],
            Request::Relocate { s, d } => {
                let x = xi_of(tree, s, d);
                objective += x.iter().map(|&(u, sign)| sign * b[time - 1][u]).sum::<i64>();
                xi.push((time, x));
            }
        }
    }
    let last = trace.requests.len();
    let x0 = counts_below(tree, &configs[0]);
    let xt = counts_below(tree, &configs[bounds[last]]);
    for u in (0..n).filter(|&u| u != root) {
        objective += x0[u] * b[0][u] - xt[u] * b[last][u];
    }
    if objective != d {
        return Err(DualError::ObjectiveMismatch { original: objective, d });
    }
    Ok(LambdaB { lambda, b, xi, objective, d })
}
