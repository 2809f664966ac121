use std::sync::Arc;

use super::{validate_sequence, Configuration, Move, Request, RequestEvent, SimError, SmallStep, Trace};
use crate::tree::{SubdividedTree, VertexId};

/// Online Double Coverage state over a subdivided tree.
///
/// Among servers sharing a vertex only the lowest index is ever unobstructed,
/// and relocations always pick the lowest index at the source.
#[derive(Clone, Debug)]
pub struct DoubleCoverage<'a> {
    tree: &'a SubdividedTree,
    pos: Configuration,
}

impl<'a> DoubleCoverage<'a> {
    pub fn new(tree: &'a SubdividedTree, initial: Configuration) -> Result<Self, SimError> {
        if initial.is_empty() {
            return Err(SimError::NoServers);
        }
        if let Some(&v) = initial.iter().find(|&&v| !tree.contains(v)) {
            return Err(SimError::UnknownVertex(v));
        }
        Ok(DoubleCoverage { tree, pos: initial })
    }

    pub fn positions(&self) -> &[VertexId] {
        &self.pos
    }

    pub fn occupant(&self, v: VertexId) -> Option<usize> {
        self.pos.iter().position(|&p| p == v)
    }

    /// Servers that move in the next small step toward `s`.
    pub fn unobstructed(&self, s: VertexId) -> Vec<usize> {
        let t = self.tree;
        let mut out = Vec::new();
        'outer: for (i, &v) in self.pos.iter().enumerate() {
            let l = t.lca(v, s);
            for (j, &w) in self.pos.iter().enumerate() {
                if w == v {
                    if j < i {
                        continue 'outer;
                    }
                    continue;
                }
                // w lies on the v-s path
                if t.in_subtree(l, w) && (t.in_subtree(w, v) || t.in_subtree(w, s)) {
                    continue 'outer;
                }
            }
            out.push(i);
        }
        out
    }

    pub fn small_step(&mut self, s: VertexId) -> SmallStep {
        let movers = self.unobstructed(s);
        let mut step = SmallStep { up: Vec::new(), down: Vec::new(), moves: Vec::with_capacity(movers.len()) };
        for i in movers {
            let from = self.pos[i];
            let to = self.tree.step_towards(from, s);
            if self.tree.parent(from) == Some(to) {
                step.up.push(i);
            } else {
                step.down.push(i);
            }
            step.moves.push(Move { server: i, from, to });
        }
        for m in &step.moves {
            self.pos[m.server] = m.to;
        }
        step
    }

    /// Serves request `t`. Vertex checks are the caller's responsibility;
    /// only the occupancy of a relocation source is enforced here.
    pub fn serve(&mut self, t: usize, r: Request) -> Result<RequestEvent, SimError> {
        match r {
            Request::Simple { s } => {
                let mut steps = Vec::new();
                while self.occupant(s).is_none() {
                    steps.push(self.small_step(s));
                }
                Ok(RequestEvent::Simple { steps })
            }
            Request::Relocate { s, d } => {
                let server = self.occupant(s).ok_or(SimError::NoOccupant(t, s))?;
                self.pos[server] = d;
                Ok(RequestEvent::Relocate { server, from: s, to: d })
            }
        }
    }
}

pub fn run_double_coverage(
    tree: &Arc<SubdividedTree>,
    initial: &[VertexId],
    requests: &[Request],
) -> Result<Trace, SimError> {
    validate_sequence(tree, initial, requests, false)?;
    let mut dc = DoubleCoverage::new(tree, initial.to_vec())?;
    let mut events = Vec::with_capacity(requests.len());
    let (mut up, mut down) = (0i64, 0i64);
    for (t, &r) in requests.iter().enumerate() {
        let e = dc.serve(t, r)?;
        if let RequestEvent::Simple { steps } = &e {
            for st in steps {
                up += st.up.len() as i64;
                down += st.down.len() as i64;
            }
        }
        events.push(e);
    }
    Ok(Trace {
        tree: Arc::clone(tree),
        initial: initial.to_vec(),
        requests: requests.to_vec(),
        events,
        cost_up: up,
        cost_down: down,
        final_config: dc.pos,
    })
}
