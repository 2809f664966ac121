use serde::Serialize;

use super::DualEvaluation;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeakDualityReport {
    pub d: i64,
    pub opt: i64,
    /// The dual is feasible after dividing by `scale`.
    pub scale: i64,
    pub holds: bool,
}

/// `D <= scale * opt`. Monotone certificates use scale 1 against the
/// upward-only optimum; banded ones use `M_d` against the full optimum.
pub fn weak_duality_check(eval: &DualEvaluation, opt: i64, scale: i64) -> WeakDualityReport {
    let holds = i128::from(eval.total) <= i128::from(scale) * i128::from(opt);
    WeakDualityReport { d: eval.total, opt, scale, holds }
}
