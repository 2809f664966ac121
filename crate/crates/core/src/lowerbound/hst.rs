use std::sync::Arc;

use super::builder::Builder;
use super::{multiset_minus, LowerBoundError, LowerBoundInstance, Prediction, Situation};
use crate::potentials::c_kd_i64;
use crate::tree::{geometric_leaf_distance, HstSpec, SubdividedTree, VertexId};

/// `k W + (alpha-1)^{d-1} sum_{i<k} c_{i,d-1} >= (alpha-1)^{d-1} c_{kd}`.
pub fn hst_bound_identity(k: u32, d: u32, alpha: i64) -> bool {
    let scale = (alpha - 1).pow(d.saturating_sub(1));
    let w = geometric_leaf_distance(alpha, d as usize);
    let sum: i64 = (0..k).map(|i| c_kd_i64(i, d.saturating_sub(1)).unwrap()).sum();
    k as i64 * w + scale * sum >= scale * c_kd_i64(k, d).unwrap()
}

fn first_leaf(b: &Builder<'_>, mut v: VertexId) -> VertexId {
    while let Some(&c) = b.t.base().children(v).first() {
        v = c;
    }
    v
}

/// Requests offline positions until Double Coverage covers all of them.
fn pull(b: &mut Builder<'_>, targets: &[VertexId], cap: usize) -> Result<(), LowerBoundError> {
    for _ in 0..cap {
        let missing = multiset_minus(targets, b.online());
        match missing.first() {
            None => return Ok(()),
            Some(&v) => b.simple(v)?,
        }
    }
    Err(LowerBoundError::NoConvergence)
}

struct Params {
    alpha: i64,
    cap: usize,
}

/// Sequence on the depth-`dd` subtree at `r` for the servers paired at
/// `pairs`. With `extra` the offline side holds one more server at `ell`;
/// otherwise it pays to bring one there. Returns the final pair positions and
/// the leaf left holding the spare offline server.
fn gen(
    b: &mut Builder<'_>,
    p: &Params,
    r: VertexId,
    dd: usize,
    pairs: Vec<VertexId>,
    extra: bool,
    ell: VertexId,
) -> Result<(Vec<VertexId>, Option<VertexId>), LowerBoundError> {
    let k = pairs.len();
    if dd == 0 || k == 0 {
        return Ok((pairs, extra.then_some(ell)));
    }
    let t = b.t;
    let others: Vec<VertexId> = t.base().children(r).iter().copied().filter(|&c| !t.in_subtree(c, ell)).collect();
    if others.len() < k {
        return Err(LowerBoundError::Branching(r));
    }
    let spots: Vec<VertexId> = others[..k].iter().map(|&c| first_leaf(b, c)).collect();
    b.arrange(&pairs, &spots)?;
    if extra {
        b.simple(ell)?;
    } else {
        b.simple_from(ell, spots[k - 1])?;
    }
    let mut matched = vec![ell];
    for i in 1..k {
        let li = spots[i - 1];
        if dd == 1 {
            // the subtree is the leaf itself
            b.simple(li)?;
            matched.push(li);
            continue;
        }
        let (mut inner, mut spare) = (matched.clone(), li);
        for _ in 1..p.alpha {
            let (next, idle) = gen(b, p, others[i - 1], dd - 1, inner, true, spare)?;
            inner = next;
            spare = idle.expect("spare offline server");
        }
        inner.push(spare);
        pull(b, &inner, p.cap)?;
        matched = inner;
    }
    Ok((matched, extra.then_some(spots[k - 1])))
}

/// Recursive instance on `T_{alpha d}` with branching `k + 1`.
pub fn gen_hst_lowerbound(k: usize, d: usize, alpha: i64) -> Result<LowerBoundInstance, LowerBoundError> {
    if k < 1 {
        return Err(LowerBoundError::SmallK { k, min: 1 });
    }
    if d == 0 {
        return Err(LowerBoundError::ZeroDepth);
    }
    if alpha < 2 {
        return Err(LowerBoundError::SmallAlpha(alpha));
    }
    let spec = HstSpec::geometric(alpha, d, k + 1)?;
    let h = spec.build()?;
    let tree = Arc::new(SubdividedTree::new(h.tree));
    let initial: Vec<VertexId> = h.leaves[..k].to_vec();
    let ell = *h.leaves.last().unwrap();
    let cap = k * tree.diameter() as usize;
    let mut b = Builder::new(&tree, &Situation::same(initial.clone()))?;
    gen(&mut b, &Params { alpha, cap }, tree.root(), d, initial.clone(), false, ell)?;
    let offline_schedule = b.schedule(&initial);
    let requests = b.requests.clone();
    drop(b);
    let scale = (alpha - 1).pow(d as u32 - 1);
    Ok(LowerBoundInstance {
        family: "hst",
        k,
        d,
        alpha: Some(alpha),
        tree,
        initial,
        requests,
        prediction: Prediction {
            dc_cost: None,
            dc_up_lb: Some(scale * c_kd_i64(k as u32, d as u32).unwrap()),
            opt_cost: None,
            opt_up_ub: Some(geometric_leaf_distance(alpha, d)),
        },
        offline_schedule,
    })
}
