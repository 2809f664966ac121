//! Seeded instance generation, experiment grids and their reports.

mod instance;
mod trials;

pub use instance::{
    line_metric, random_instance, random_instance_with, random_metric, random_requests, TreeFamily,
    DEFAULT_RELOCATION_RATE,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::offline::DEFAULT_BUDGET;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Random HST k-taxi instances through the monotone certificate and the
    /// HST potential.
    UpperBoundSweep,
    /// Generated lower-bound instances against their predicted costs.
    LowerBoundRepro,
    /// Random weighted trees through the banded certificate and the flow
    /// oracle. With no relocations the k-server potential is checked too.
    DualityAudit,
    EmbeddingStudy,
    ForwardImpossibility,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub k: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<i64>,
}

impl GridPoint {
    pub fn new(k: usize, d: usize) -> Self {
        GridPoint { k, d, alpha: None }
    }

    pub fn with_alpha(k: usize, d: usize, alpha: i64) -> Self {
        GridPoint { k, d, alpha: Some(alpha) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub grid: Vec<GridPoint>,
    /// Per grid point. Lower-bound instances are deterministic and run once.
    pub trials: usize,
    pub seed: u64,
    /// Requests per instance, or gadget rounds for the forward adversary.
    pub length: usize,
    pub relocation_rate: f64,
    /// Metric size for embedding studies.
    pub points: usize,
    pub max_weight: i64,
    /// State budget of the configuration DP.
    pub budget: u64,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, grid: Vec<GridPoint>) -> Self {
        ExperimentSpec {
            kind,
            grid,
            trials: 1,
            seed: 0,
            length: 30,
            relocation_rate: DEFAULT_RELOCATION_RATE,
            points: 12,
            max_weight: 5,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.grid.is_empty() {
            return Err(HarnessError::EmptyGrid);
        }
        if self.trials == 0 || self.budget == 0 {
            return Err(HarnessError::Budget);
        }
        if !(0.0..=1.0).contains(&self.relocation_rate) {
            return Err(HarnessError::Invalid(format!("relocation rate {}", self.relocation_rate)));
        }
        if self.max_weight < 1 || (self.kind == ExperimentKind::EmbeddingStudy && self.points < 2) {
            return Err(HarnessError::Invalid("max weight or point count".into()));
        }
        if let Some(p) = self.grid.iter().find(|p| p.k == 0 || p.d == 0 || p.alpha.is_some_and(|a| a < 1)) {
            return Err(HarnessError::Invalid(format!("grid point {p:?}")));
        }
        Ok(())
    }

    fn trials_per_point(&self) -> usize {
        match self.kind {
            ExperimentKind::LowerBoundRepro => 1,
            _ => self.trials,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("trial counts and budgets must be positive")]
    Budget,
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
}

fn checks_as_text<S: Serializer>(checks: &[Check], s: S) -> Result<S::Ok, S::Error> {
    let text: Vec<String> =
        checks.iter().map(|c| format!("{}={}", c.name, if c.passed { "pass" } else { "FAIL" })).collect();
    s.serialize_str(&text.join(";"))
}

/// Costs are in the instance's integer units. Embedding rows report the
/// HST cost as `dc_cost_total` and the replayed cost as `metric_cost`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub trial: usize,
    pub instance: String,
    pub seed: u64,
    pub scenario_hash: String,
    pub k: usize,
    pub d: usize,
    pub alpha: Option<i64>,
    pub dc_cost_total: Option<i64>,
    pub dc_cost_up: Option<i64>,
    pub dc_cost_down: Option<i64>,
    pub opt: Option<i64>,
    pub opt_fixed_final: Option<i64>,
    pub opt_up_fixed: Option<i64>,
    pub dual: Option<i64>,
    pub c: Option<i64>,
    pub metric_cost: Option<i64>,
    pub stretch_mean: Option<f64>,
    #[serde(serialize_with = "checks_as_text")]
    pub checks: Vec<Check>,
    pub budget_exhausted: bool,
    pub passed: bool,
    pub note: String,
}

impl ReportRow {
    fn new(trial: usize, instance: String, seed: u64, p: &GridPoint) -> Self {
        ReportRow {
            trial,
            instance,
            seed,
            scenario_hash: String::new(),
            k: p.k,
            d: p.d,
            alpha: p.alpha,
            dc_cost_total: None,
            dc_cost_up: None,
            dc_cost_down: None,
            opt: None,
            opt_fixed_final: None,
            opt_up_fixed: None,
            dual: None,
            c: None,
            metric_cost: None,
            stretch_mean: None,
            checks: vec![],
            budget_exhausted: false,
            passed: true,
            note: String::new(),
        }
    }

    fn check(&mut self, name: &'static str, passed: bool) {
        self.checks.push(Check { name, passed });
        self.passed &= passed;
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub budget_exhausted: usize,
    pub checks: Vec<CheckSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        for r in &self.rows {
            w.serialize(r).expect("rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn summarize(rows: &[ReportRow]) -> Summary {
    let mut checks: Vec<CheckSummary> = vec![];
    for c in rows.iter().flat_map(|r| &r.checks) {
        let i = match checks.iter().position(|s| s.name == c.name) {
            Some(i) => i,
            None => {
                checks.push(CheckSummary { name: c.name, passed: 0, failed: 0 });
                checks.len() - 1
            }
        };
        if c.passed {
            checks[i].passed += 1;
        } else {
            checks[i].failed += 1;
        }
    }
    Summary {
        trials: rows.len(),
        passed: rows.iter().filter(|r| r.passed).count(),
        failed: rows.iter().filter(|r| !r.passed).count(),
        budget_exhausted: rows.iter().filter(|r| r.budget_exhausted).count(),
        checks,
    }
}

fn trial_seed(base: u64, point: usize, trial: usize) -> u64 {
    base.wrapping_add((point as u64) << 32).wrapping_add(trial as u64)
}

/// Runs every (grid point, trial) pair in parallel. Rows come back in grid
/// order, then trial order, whatever order the workers finish in.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report, HarnessError> {
    spec.validate()?;
    let per = spec.trials_per_point();
    let jobs: Vec<(usize, usize)> = (0..spec.grid.len()).flat_map(|g| (0..per).map(move |t| (g, t))).collect();
    let rows: Vec<ReportRow> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, &(g, t))| {
            let p = &spec.grid[g];
            let seed = trial_seed(spec.seed, g, t);
            let instance = format!("{}-k{}-d{}-{}", g, p.k, p.d, t);
            let mut row = ReportRow::new(i, instance, seed, p);
            if let Err(e) = trials::run(spec, p, seed, &mut row) {
                row.passed = false;
                row.note = e;
            }
            row
        })
        .collect();
    let summary = summarize(&rows);
    Ok(Report { spec: spec.clone(), rows, summary })
}
