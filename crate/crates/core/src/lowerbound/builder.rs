use super::{LowerBoundError, Situation};
use crate::offline::{label_schedule, OfflineSchedule, TreeCost};
use crate::sim::{DoubleCoverage, Request};
use crate::tree::{SubdividedTree, VertexId};

/// Emits requests while serving them with live Double Coverage and with
/// an explicitly tracked offline configuration.
pub(crate) struct Builder<'a> {
    pub t: &'a SubdividedTree,
    dc: DoubleCoverage<'a>,
    initial_offline: Vec<VertexId>,
    pub offline: Vec<VertexId>,
    pub requests: Vec<Request>,
    offline_from: Vec<VertexId>,
}

impl<'a> Builder<'a> {
    pub fn new(t: &'a SubdividedTree, s: &Situation) -> Result<Self, LowerBoundError> {
        Ok(Builder {
            t,
            dc: DoubleCoverage::new(t, s.online.clone())?,
            initial_offline: s.offline.clone(),
            offline: s.offline.clone(),
            requests: vec![],
            offline_from: vec![],
        })
    }

    pub fn situation(&self) -> Situation {
        Situation { online: self.dc.positions().to_vec(), offline: self.offline.clone() }
    }

    pub fn online(&self) -> &[VertexId] {
        self.dc.positions()
    }

    fn push(&mut self, r: Request, from: VertexId) -> Result<(), LowerBoundError> {
        let slot = self
            .offline
            .iter()
            .position(|&p| p == from)
            .ok_or_else(|| LowerBoundError::Situation(format!("no offline server at {from}")))?;
        self.offline[slot] = r.destination();
        self.dc.serve(self.requests.len(), r)?;
        self.requests.push(r);
        self.offline_from.push(from);
        Ok(())
    }

    /// Simple request served offline from `s` itself.
    pub fn simple(&mut self, s: VertexId) -> Result<(), LowerBoundError> {
        self.push(Request::Simple { s }, s)
    }

    pub fn simple_from(&mut self, s: VertexId, from: VertexId) -> Result<(), LowerBoundError> {
        self.push(Request::Simple { s }, from)
    }

    /// Moves a co-located online/offline pair at `a` to `b` for free.
    pub fn move_pair(&mut self, a: VertexId, b: VertexId) -> Result<(), LowerBoundError> {
        if a == b {
            return Ok(());
        }
        self.simple(a)?;
        self.push(Request::Relocate { s: a, d: b }, a)
    }

    /// Puts the pairs currently at `pairs` onto `targets`, reusing pairs that
    /// already sit on a target.
    pub fn arrange(&mut self, pairs: &[VertexId], targets: &[VertexId]) -> Result<(), LowerBoundError> {
        assert_eq!(pairs.len(), targets.len());
        let mut left: Vec<VertexId> = pairs.to_vec();
        let mut open = vec![];
        for &t in targets {
            match left.iter().position(|&p| p == t) {
                Some(i) => {
                    left.remove(i);
                }
                None => open.push(t),
            }
        }
        for (p, t) in left.into_iter().zip(open) {
            self.move_pair(p, t)?;
        }
        Ok(())
    }

    pub fn schedule(&self, initial: &[VertexId]) -> OfflineSchedule {
        debug_assert_eq!(initial, &self.initial_offline[..]);
        label_schedule(&TreeCost::full(self.t), initial, &self.requests, &self.offline_from, None)
    }
}
