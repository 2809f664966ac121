use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::instance::{random_instance_with, random_metric, random_requests, TreeFamily};
use super::{ExperimentKind, ExperimentSpec, GridPoint, ReportRow};
use crate::dual::{
    build_certificate_hst, build_certificate_weighted, check_guarantees, evaluate_dual, forward_adversary,
    transform_to_lambda_b, verify_feasibility, weak_duality_check, AltitudeCertificate, DualEvaluation, RandomStrategy,
};
use crate::embedding::run_on_metric;
use crate::io::{content_hash, Scenario};
use crate::lowerbound::{gen_hst_lowerbound, gen_tree_lowerbound};
use crate::offline::{optimal_cost_dp, optimal_cost_flow, MatrixCost, OfflineError, TreeCost};
use crate::potentials::{bands, c_kd_i64, check_step_inequalities, HstLayerHeights, Potential};
use crate::sim::{run_double_coverage, verify_trace, Trace};
use crate::tree::{HstSpec, MetricDescription, TreeDescription};

type TrialResult = Result<(), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub(super) fn run(spec: &ExperimentSpec, p: &GridPoint, seed: u64, row: &mut ReportRow) -> TrialResult {
    match spec.kind {
        ExperimentKind::UpperBoundSweep => upper_bound(spec, p, seed, row),
        ExperimentKind::LowerBoundRepro => lower_bound(p, row),
        ExperimentKind::DualityAudit => duality_audit(spec, p, seed, row),
        ExperimentKind::EmbeddingStudy => embedding(spec, p, seed, row),
        ExperimentKind::ForwardImpossibility => forward(spec, seed, row),
    }
}

fn record_costs(row: &mut ReportRow, tr: &Trace) {
    row.dc_cost_total = Some(tr.total_cost());
    row.dc_cost_up = Some(tr.cost_up);
    row.dc_cost_down = Some(tr.cost_down);
    row.check("trace", verify_trace(tr).is_clean());
}

/// Checks shared by both certificate modes.
fn certificate_checks(row: &mut ReportRow, cert: &AltitudeCertificate, tr: &Trace) -> Result<DualEvaluation, String> {
    let ev = evaluate_dual(cert, tr).map_err(err)?;
    row.dual = Some(ev.total);
    row.check("guarantees", check_guarantees(cert, tr, &ev).is_clean());
    row.check("feasibility", verify_feasibility(cert, &tr.tree).is_clean());
    row.check("lambda_b", transform_to_lambda_b(cert, tr).is_ok_and(|lb| lb.objective == ev.total));
    Ok(ev)
}

fn upper_bound(spec: &ExperimentSpec, p: &GridPoint, seed: u64, row: &mut ReportRow) -> TrialResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = p.alpha.unwrap_or_else(|| rng.gen_range(1..=3));
    let hst = HstSpec::geometric(alpha, p.d, rng.gen_range(2..=3)).map_err(err)?;
    let family = TreeFamily::Hst { spec: hst.clone() };
    let sc = random_instance_with(p.k, &family, spec.length, spec.relocation_rate, rng.gen());
    row.scenario_hash = sc.hash();
    let l = sc.load().map_err(err)?;
    let tr = run_double_coverage(&l.tree, &l.initial, &l.requests).map_err(err)?;
    record_costs(row, &tr);
    let cert = build_certificate_hst(&tr).map_err(err)?;
    let ev = certificate_checks(row, &cert, &tr)?;
    let c = c_kd_i64(p.k as u32, p.d as u32).ok_or("c_kd overflows")?;
    row.c = Some(c);
    let layers = HstLayerHeights::from_level_lengths(&hst.level_lengths);
    let pr = check_step_inequalities(&tr, &Potential::KTaxiHst(layers), c).map_err(err)?;
    row.check("step_inequalities", pr.is_clean());
    row.check("amortized", pr.cost_up + pr.psi_final() - pr.psi_initial() <= c * ev.total);
    let full = TreeCost::full(&l.tree);
    row.opt = Some(optimal_cost_flow(&full, &l.initial, &l.requests, None).map_err(err)?.total_cost);
    row.opt_fixed_final =
        Some(optimal_cost_flow(&full, &l.initial, &l.requests, Some(&tr.final_config)).map_err(err)?.total_cost);
    match optimal_cost_dp(&TreeCost::upward(&l.tree), &l.initial, &l.requests, Some(&tr.final_config), spec.budget) {
        Ok(o) => {
            row.opt_up_fixed = Some(o.total_cost);
            row.check("weak_duality", weak_duality_check(&ev, o.total_cost, 1).holds);
        }
        Err(OfflineError::Budget { budget }) => {
            row.budget_exhausted = true;
            row.note = format!("upward DP exceeded {budget} states; weak duality not checked");
        }
        Err(e) => return Err(err(e)),
    }
    Ok(())
}

fn duality_audit(spec: &ExperimentSpec, p: &GridPoint, seed: u64, row: &mut ReportRow) -> TrialResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = TreeFamily::RandomWeighted { depth: p.d, max_weight: spec.max_weight, vertices: rng.gen_range(2..=12) };
    let sc = random_instance_with(p.k, &family, spec.length, spec.relocation_rate, rng.gen());
    row.scenario_hash = sc.hash();
    let l = sc.load().map_err(err)?;
    let tr = run_double_coverage(&l.tree, &l.initial, &l.requests).map_err(err)?;
    record_costs(row, &tr);
    let cert = build_certificate_weighted(&tr, p.d as u32).map_err(err)?;
    let ev = certificate_checks(row, &cert, &tr)?;
    let scale = bands(p.k.max(2) as u32, p.d as u32).map_err(err)?.c_i64();
    row.c = Some(scale);
    let full = TreeCost::full(&l.tree);
    let opt = optimal_cost_flow(&full, &l.initial, &l.requests, None).map_err(err)?.total_cost;
    let fixed = optimal_cost_flow(&full, &l.initial, &l.requests, Some(&tr.final_config)).map_err(err)?.total_cost;
    row.opt = Some(opt);
    row.opt_fixed_final = Some(fixed);
    row.check("weak_duality", weak_duality_check(&ev, fixed, scale).holds);
    if !l.requests.iter().any(|r| r.is_relocation()) {
        let k = p.k as i64;
        let pr = check_step_inequalities(&tr, &Potential::KServer, k).map_err(err)?;
        row.check("kserver_potential", pr.is_clean());
        let spread: i64 = l
            .initial
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| l.initial[i + 1..].iter().map(move |&b| (a, b)))
            .map(|(a, b)| l.tree.distance(a, b))
            .sum();
        row.check("kserver_bound", tr.total_cost() <= k * opt + spread);
    }
    Ok(())
}

fn lower_bound(p: &GridPoint, row: &mut ReportRow) -> TrialResult {
    let inst = match p.alpha {
        None => gen_tree_lowerbound(p.k, p.d),
        Some(a) => gen_hst_lowerbound(p.k, p.d, a),
    }
    .map_err(err)?;
    let sc = Scenario::new(TreeDescription::from(inst.tree.base()), inst.initial.clone(), inst.requests.clone());
    row.scenario_hash = sc.hash();
    let tr = run_double_coverage(&inst.tree, &inst.initial, &inst.requests).map_err(err)?;
    record_costs(row, &tr);
    let full = TreeCost::full(&inst.tree);
    let opt = optimal_cost_flow(&full, &inst.initial, &inst.requests, None).map_err(err)?.total_cost;
    row.opt = Some(opt);
    let pred = &inst.prediction;
    if let Some(c) = pred.dc_cost {
        row.check("dc_cost_formula", tr.total_cost() == c);
    }
    if let Some(o) = pred.opt_cost {
        row.check("opt", opt == o);
    }
    if let Some(lb) = pred.dc_up_lb {
        row.c = c_kd_i64(p.k as u32, p.d as u32);
        row.check("dc_up_bound", tr.cost_up >= lb);
    }
    if let Some(ub) = pred.opt_up_ub {
        let up = inst.offline_schedule.upward_cost(&inst.tree, &inst.initial, &inst.requests);
        row.check("offline_up_bound", up <= ub);
    }
    Ok(())
}

fn embedding(spec: &ExperimentSpec, p: &GridPoint, seed: u64, row: &mut ReportRow) -> TrialResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_metric(spec.points, 4 * spec.max_weight, rng.gen());
    let points: Vec<usize> = (0..m.len()).collect();
    let (init, seq) = random_requests(&points, p.k, spec.length, spec.relocation_rate, &mut rng);
    row.scenario_hash = content_hash(&(MetricDescription::from(&m), &init, &seq));
    let run = run_on_metric(&m, &init, &seq, p.d, seed).map_err(err)?;
    let e = &run.embedding;
    let stretches: Vec<f64> =
        points.iter().flat_map(|&x| points[x + 1..].iter().map(move |&y| (x, y))).filter_map(|(x, y)| e.stretch(x, y)).collect();
    row.check("non_contraction", stretches.iter().all(|&s| s >= 1.0));
    row.stretch_mean = Some(stretches.iter().sum::<f64>() / stretches.len().max(1) as f64);
    row.alpha = Some(e.alpha);
    row.dc_cost_total = Some(run.hst_cost);
    row.dc_cost_up = Some(run.trace.cost_up);
    row.dc_cost_down = Some(run.trace.cost_down);
    row.metric_cost = Some(run.metric_cost);
    row.check("move_replay", run.move_violations == 0);
    row.check("metric_le_hst", run.metric_cost <= run.hst_cost);
    let opt = optimal_cost_flow(&MatrixCost(e.scaled.clone()), &init, &seq, None).map_err(err)?;
    row.opt = Some(opt.total_cost);
    Ok(())
}

fn forward(spec: &ExperimentSpec, seed: u64, row: &mut ReportRow) -> TrialResult {
    let t = forward_adversary(&mut RandomStrategy::new(seed), spec.length);
    row.scenario_hash = content_hash(&t.requests);
    row.dual = Some(t.total_d);
    row.opt = Some(t.opt);
    row.check("no_fault", t.fault.is_none());
    row.check("cumulative_nonpositive", t.max_cumulative() <= 0);
    row.check("opt_half", 2 * t.opt >= spec.length as i64);
    Ok(())
}
