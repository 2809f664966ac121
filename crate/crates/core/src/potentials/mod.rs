//! Closed-form tables, the two potential functions and the per-step
//! inequality checker.

mod check;
mod psi;
mod tables;

pub use check::{check_step_inequalities, non_crossing, Potential, PotentialReport, StepKind, StepViolation};
pub use psi::{psi_kserver, psi_ktaxi_hst, HstLayerHeights};
pub use tables::{band_ratio, bands, c_kd, c_kd_i64, c_kd_recurrence, BandTable, TableError};

use thiserror::Error;

use crate::offline::min_cost_assignment;
use crate::tree::{SubdividedTree, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("online has {0} servers, offline has {1}")]
pub struct SizeMismatch(pub usize, pub usize);

/// Minimum-cost perfect matching between two configurations under tree
/// distance.
pub fn matching_potential(t: &SubdividedTree, online: &[VertexId], offline: &[VertexId]) -> Result<i64, SizeMismatch> {
    if online.len() != offline.len() {
        return Err(SizeMismatch(online.len(), offline.len()));
    }
    let m: Vec<Vec<i64>> = online.iter().map(|&a| offline.iter().map(|&b| t.distance(a, b)).collect()).collect();
    Ok(min_cost_assignment(&m).0)
}
