use std::sync::Arc;

use num_integer::binomial;
use serde::Serialize;

use super::builder::Builder;
use super::{LowerBoundError, LowerBoundInstance, Prediction, Situation};
use crate::sim::Request;
use crate::tree::{HstSpec, SubdividedTree, VertexId};

/// `2 C(j+h, h) - 1`.
pub fn jmatch_cost(j: i64, h: i64) -> i64 {
    2 * binomial(j + h, h) - 1
}

/// `b_h = 2 C(k+h-1, h+1)`.
pub fn b_h(k: i64, h: i64) -> i64 {
    2 * binomial(k + h - 1, h + 1)
}

/// `4 sum_{h=1}^{d-1} C(k+h-2, h) + 2 C(k+d-2, d) + 1`.
pub fn tree_lowerbound_cost(k: i64, d: i64) -> i64 {
    4 * (1..d).map(|h| binomial(k + h - 2, h)).sum::<i64>() + 2 * binomial(k + d - 2, d) + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Transform {
    /// Unmatched online at `x` (height `h`), unmatched offline at its parent.
    Up { h: usize, x: VertexId },
    /// Unmatched online at `x` (height `h`), unmatched offline at a child.
    Down { h: usize, x: VertexId },
}

fn height(t: &SubdividedTree, v: VertexId) -> usize {
    t.weighted_height(v).expect("unit k-ary tree") as usize
}

fn fail<T>(msg: impl Into<String>) -> Result<T, LowerBoundError> {
    Err(LowerBoundError::Situation(msg.into()))
}

/// `n` children of `v` outside `exclude` that hold no unmatched server,
/// those already holding a matched pair first.
fn pick_children(
    b: &Builder<'_>,
    v: VertexId,
    exclude: &[VertexId],
    n: usize,
) -> Result<Vec<VertexId>, LowerBoundError> {
    let s = b.situation();
    let (matched, uon, uoff) = (s.matched(), s.unmatched_online(), s.unmatched_offline());
    let mut c: Vec<VertexId> = b
        .t
        .children(v)
        .iter()
        .copied()
        .filter(|c| !exclude.contains(c) && !uon.contains(c) && !uoff.contains(c))
        .collect();
    c.sort_by_key(|c| (!matched.contains(c), *c));
    if c.len() < n {
        return Err(LowerBoundError::Branching(v));
    }
    c.truncate(n);
    Ok(c)
}

fn jmatch(b: &mut Builder<'_>, x: VertexId, y: VertexId, j: usize) -> Result<(), LowerBoundError> {
    let t = b.t;
    let s = b.situation();
    if t.parent(y) != Some(x) {
        return fail(format!("{y} is not a child of {x}"));
    }
    let matched = s.matched();
    if matched.len() != j {
        return fail(format!("{} matched pairs, expected {j}", matched.len()));
    }
    let uon = s.unmatched_online();
    if !uon.contains(&x) || uon.iter().any(|&v| v != x && t.in_subtree(x, v)) {
        return fail(format!("unmatched online servers around {x}: {uon:?}"));
    }
    if !s.unmatched_offline().contains(&y) {
        return fail(format!("no unmatched offline server at {y}"));
    }
    let h = height(t, y);
    if h == 0 {
        return b.simple(y);
    }
    let zs = pick_children(b, y, &[], j)?;
    b.arrange(&matched, &zs)?;
    b.simple(y)?;
    for (l, &z) in zs.iter().enumerate() {
        jmatch(b, y, z, l + 1)?;
    }
    Ok(())
}

/// `(h, up)` step. With `initial` the configurations still coincide and the
/// offline server for `parent(x)` comes from `x` at cost 1. Returns the new
/// unmatched online and offline positions.
fn up(b: &mut Builder<'_>, x: VertexId, initial: bool) -> Result<(VertexId, VertexId), LowerBoundError> {
    let t = b.t;
    let k = b.online().len();
    let y = t.parent(x).ok_or_else(|| LowerBoundError::Situation("x is the root".into()))?;
    let s = b.situation();
    let mut pairs = s.matched();
    if initial {
        if pairs.len() != k || !pairs.contains(&x) {
            return fail("initial configurations differ");
        }
        pairs.remove(pairs.iter().position(|&p| p == x).unwrap());
    } else if pairs.len() != k - 1 || s.unmatched_online() != [x] || s.unmatched_offline() != [y] {
        return fail(format!("not an up-situation at {x}"));
    }
    let z = match t.parent(y) {
        Some(z) => z,
        None => pick_children(b, y, &[x], 1)?[0],
    };
    let sibs = pick_children(b, y, &[x, z], k - 2)?;
    let targets: Vec<VertexId> = std::iter::once(z).chain(sibs.iter().copied()).collect();
    b.arrange(&pairs, &targets)?;
    if initial {
        b.simple_from(y, x)?;
    } else {
        b.simple(y)?;
    }
    for (l, &xi) in sibs.iter().enumerate() {
        jmatch(b, y, xi, l + 1)?;
    }
    Ok((y, z))
}

fn down(b: &mut Builder<'_>, x: VertexId, y: VertexId) -> Result<(VertexId, VertexId), LowerBoundError> {
    let t = b.t;
    let k = b.online().len();
    let s = b.situation();
    let pairs = s.matched();
    if t.parent(y) != Some(x) || pairs.len() != k - 1 || s.unmatched_online() != [x] || s.unmatched_offline() != [y] {
        return fail(format!("not a down-situation at {x}"));
    }
    if height(t, x) < 2 {
        return fail("down transform needs height >= 2");
    }
    let zs = pick_children(b, y, &[], k - 1)?;
    b.arrange(&pairs, &zs)?;
    b.simple(y)?;
    for (l, &z) in zs[..k - 2].iter().enumerate() {
        jmatch(b, y, z, l + 1)?;
    }
    Ok((y, zs[k - 2]))
}

/// Fragment for a `j`-match around `(x, y)`, and the situation it leaves.
pub fn gen_jmatch(
    t: &SubdividedTree,
    s: &Situation,
    j: usize,
    x: VertexId,
    y: VertexId,
) -> Result<(Vec<Request>, Situation), LowerBoundError> {
    let mut b = Builder::new(t, s)?;
    jmatch(&mut b, x, y, j)?;
    Ok((b.requests.clone(), b.situation()))
}

pub fn gen_transform(
    t: &SubdividedTree,
    s: &Situation,
    tr: Transform,
) -> Result<(Vec<Request>, Situation), LowerBoundError> {
    if s.online.len() < 2 {
        return Err(LowerBoundError::SmallK { k: s.online.len(), min: 2 });
    }
    let mut b = Builder::new(t, s)?;
    match tr {
        Transform::Up { h, x } => {
            if height(t, x) != h {
                return fail(format!("{x} is not at height {h}"));
            }
            up(&mut b, x, false)?;
        }
        Transform::Down { h, x } => {
            if height(t, x) != h {
                return fail(format!("{x} is not at height {h}"));
            }
            let y = match s.unmatched_offline()[..] {
                [y] => y,
                _ => return fail("expected one unmatched offline server"),
            };
            down(&mut b, x, y)?;
        }
    }
    Ok((b.requests.clone(), b.situation()))
}

/// All servers start on one leaf of the unit `(k+1)`-ary depth-`d` tree;
/// the offline algorithm pays 1 in total.
pub fn gen_tree_lowerbound(k: usize, d: usize) -> Result<LowerBoundInstance, LowerBoundError> {
    if k < 2 {
        return Err(LowerBoundError::SmallK { k, min: 2 });
    }
    if d == 0 {
        return Err(LowerBoundError::ZeroDepth);
    }
    let h = HstSpec::new(vec![1; d], k + 1)?.build()?;
    let tree = Arc::new(SubdividedTree::new(h.tree));
    let initial = vec![h.leaves[0]; k];
    let mut b = Builder::new(&tree, &Situation::same(initial.clone()))?;
    let (mut x, mut z) = up(&mut b, h.leaves[0], true)?;
    for _ in 1..d {
        (x, z) = up(&mut b, x, false)?;
    }
    for _ in 2..=d {
        (x, z) = down(&mut b, x, z)?;
    }
    let _ = x;
    b.simple(z)?;
    let offline_schedule = b.schedule(&initial);
    let requests = b.requests.clone();
    drop(b);
    Ok(LowerBoundInstance {
        family: "tree",
        k,
        d,
        alpha: None,
        tree,
        initial,
        requests,
        prediction: Prediction {
            dc_cost: Some(tree_lowerbound_cost(k as i64, d as i64)),
            dc_up_lb: None,
            opt_cost: Some(1),
            opt_up_ub: None,
        },
        offline_schedule,
    })
}
