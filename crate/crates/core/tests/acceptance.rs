//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ktaxi_core::embedding::distortion_stats;
use ktaxi_core::harness::{
    random_instance_with, random_metric, run_experiment, ExperimentKind, ExperimentSpec, GridPoint, Report, TreeFamily,
};
use ktaxi_core::lowerbound::{gen_hst_lowerbound, gen_tree_lowerbound};
use ktaxi_core::offline::{optimal_cost_dp, optimal_cost_flow, TreeCost, DEFAULT_BUDGET};
use ktaxi_core::potentials::{bands, c_kd, c_kd_recurrence, matching_potential};
use ktaxi_core::{run_double_coverage, HstSpec, MetricSpace, Request, SubdividedTree};

// Tolerances and sizes. Integer criteria are exact.
const TREE_LB_LIMIT: Duration = Duration::from_secs(10);
const HST_LB_LIMIT: Duration = Duration::from_secs(30);
const TABLE_LIMIT: Duration = Duration::from_secs(1);
const EMBED_LIMIT: Duration = Duration::from_secs(120);
const HST_SUITE_MIN: usize = 500;
const WEIGHTED_SUITE_MIN: usize = 300;
const KSERVER_SUITE_MIN: usize = 300;
const ORACLE_PAIRS_MIN: usize = 200;
const FORWARD_STRATEGIES: usize = 50;
const FORWARD_ROUNDS: usize = 100;
const EMBED_SEEDS: u64 = 1000;
const EMBED_POINTS: usize = 16;
/// Per-seed mean stretch may exceed the median over seeds by at most this.
const STABILITY_FACTOR: f64 = 4.0;
const DELTA_GRID: [i64; 4] = [4, 64, 1024, 16384];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn failures(r: &Report, names: &[&str]) -> usize {
    r.rows
        .iter()
        .filter(|row| {
            let errored = !row.passed && row.failed_checks().is_empty();
            errored || row.checks.iter().any(|c| names.contains(&c.name) && !c.passed)
        })
        .count()
}

fn check_count(r: &Report, name: &str) -> usize {
    r.summary.checks.iter().find(|c| c.name == name).map_or(0, |c| c.passed + c.failed)
}

fn tree_lower_bounds() -> Outcome {
    // 4 sum_{h<d} C(k+h-2, h) + 2 C(k+d-2, d) + 1, written out
    let expected = [((2, 1), 3), ((2, 2), 7), ((2, 3), 11), ((3, 1), 5), ((3, 2), 15), ((4, 2), 25)];
    let mut bad = vec![];
    let mut slowest = Duration::ZERO;
    for ((k, d), want) in expected {
        let start = Instant::now();
        let inst = gen_tree_lowerbound(k, d).expect("generator");
        let tr = run_double_coverage(&inst.tree, &inst.initial, &inst.requests).expect("valid sequence");
        let opt = optimal_cost_flow(&TreeCost::full(&inst.tree), &inst.initial, &inst.requests, None)
            .expect("flow")
            .total_cost;
        let took = start.elapsed();
        slowest = slowest.max(took);
        if tr.total_cost() != want || opt != 1 || took > TREE_LB_LIMIT {
            bad.push(format!("(k={k},d={d}) dc={} opt={opt} {took:?}", tr.total_cost()));
        }
    }
    outcome(bad.is_empty(), format!("6 instances, slowest {slowest:.1?}; mismatches: {bad:?}"))
}

fn hst_lower_bounds() -> Outcome {
    let mut bad = vec![];
    let mut parts = vec![];
    for (k, d, alpha) in [(2usize, 2usize, 3i64), (3, 2, 2), (2, 3, 2)] {
        let start = Instant::now();
        let inst = gen_hst_lowerbound(k, d, alpha).expect("generator");
        let tr = run_double_coverage(&inst.tree, &inst.initial, &inst.requests).expect("valid sequence");
        let up_lb = BigUint::from((alpha - 1) as u64).pow(d as u32 - 1) * c_kd(k as u32, d as u32);
        let w = (alpha.pow(d as u32) - 1) / (alpha - 1);
        let off_up = inst.offline_schedule.upward_cost(&inst.tree, &inst.initial, &inst.requests);
        let took = start.elapsed();
        parts.push(format!("({k},{d},{alpha}) up {}>={up_lb} off {off_up}<={w}", tr.cost_up));
        if BigUint::from(tr.cost_up as u64) < up_lb || off_up > w || took > HST_LB_LIMIT {
            bad.push((k, d, alpha));
        }
    }
    outcome(bad.is_empty(), parts.join("; "))
}

fn hst_certificates() -> Outcome {
    let grid: Vec<GridPoint> = (1..=4).flat_map(|k| (1..=3).map(move |d| GridPoint::new(k, d))).collect();
    let mut spec = ExperimentSpec::new(ExperimentKind::UpperBoundSweep, grid);
    spec.trials = HST_SUITE_MIN.div_ceil(spec.grid.len());
    spec.length = 60;
    spec.seed = 3;
    let r = run_experiment(&spec).expect("valid spec");
    let bad = failures(&r, &["trace", "guarantees", "step_inequalities", "amortized"]);
    let n = r.rows.len();
    outcome(
        n >= HST_SUITE_MIN && bad == 0,
        format!(
            "{n} instances, {bad} failing; weak duality checked on {} (all passing: {})",
            check_count(&r, "weak_duality"),
            r.all_passed()
        ),
    )
}

fn weighted_certificates() -> Outcome {
    let grid: Vec<GridPoint> = (1..=4).flat_map(|k| (1..=3).map(move |d| GridPoint::new(k, d))).collect();
    let mut spec = ExperimentSpec::new(ExperimentKind::DualityAudit, grid);
    spec.trials = WEIGHTED_SUITE_MIN.div_ceil(spec.grid.len());
    spec.length = 30;
    spec.max_weight = 5;
    spec.seed = 4;
    let r = run_experiment(&spec).expect("valid spec");
    let bad = failures(&r, &["trace", "guarantees", "feasibility", "weak_duality"]);
    // weak duality for the certificate divided by M_d, i.e. D <= M_d * OPT
    let unscaled = r.rows.iter().filter(|x| x.dual.unwrap_or(0) > x.opt_fixed_final.unwrap_or(i64::MAX)).count();
    let n = r.rows.len();
    outcome(
        n >= WEIGHTED_SUITE_MIN && bad == 0,
        format!("{n} instances, {bad} failing; D above unscaled OPT_fixed on {unscaled}"),
    )
}

fn kserver_potential() -> Outcome {
    let grid: Vec<GridPoint> = (1..=4).flat_map(|k| [2, 4, 6].map(move |d| GridPoint::new(k, d))).collect();
    let mut spec = ExperimentSpec::new(ExperimentKind::DualityAudit, grid);
    spec.trials = KSERVER_SUITE_MIN.div_ceil(spec.grid.len());
    spec.length = 25;
    spec.relocation_rate = 0.0;
    spec.seed = 5;
    let r = run_experiment(&spec).expect("valid spec");
    let bad = failures(&r, &["trace", "kserver_potential", "kserver_bound"]);
    let plain = r.rows.iter().filter(|x| x.dc_cost_total.unwrap() > x.k as i64 * x.opt.unwrap()).count();
    let n = r.rows.len();
    outcome(
        n >= KSERVER_SUITE_MIN && bad == 0 && check_count(&r, "kserver_bound") == n,
        format!("{n} instances, {bad} failing; additive term needed on {plain}"),
    )
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut pairs, mut bad) = (0, 0);
    for i in 0..ORACLE_PAIRS_MIN as u64 {
        let family = TreeFamily::RandomWeighted { depth: 7, max_weight: 5, vertices: rng.gen_range(2..=8) };
        let k = rng.gen_range(1..=3);
        let sc = random_instance_with(k, &family, rng.gen_range(0..=8), 0.3, 1000 + i);
        let l = sc.load().expect("valid scenario");
        let n = l.tree.original_count();
        let fixed: Vec<_> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        for cost in [TreeCost::full(&l.tree), TreeCost::upward(&l.tree)] {
            for f in [None, Some(fixed.as_slice())] {
                let dp = optimal_cost_dp(&cost, &l.initial, &l.requests, f, DEFAULT_BUDGET).expect("tiny");
                let flow = optimal_cost_flow(&cost, &l.initial, &l.requests, f).expect("flow");
                pairs += 1;
                bad += (dp.total_cost != flow.total_cost) as usize;
            }
        }
    }
    outcome(bad == 0, format!("{ORACLE_PAIRS_MIN} instances, {pairs} comparisons, {bad} mismatches"))
}

fn forward_impossibility() -> Outcome {
    let mut spec = ExperimentSpec::new(ExperimentKind::ForwardImpossibility, vec![GridPoint::new(1, 1)]);
    spec.trials = FORWARD_STRATEGIES;
    spec.length = FORWARD_ROUNDS;
    spec.seed = 7;
    let r = run_experiment(&spec).expect("valid spec");
    let min_opt = r.rows.iter().filter_map(|x| x.opt).min().unwrap_or(0);
    let max_d = r.rows.iter().filter_map(|x| x.dual).max().unwrap_or(0);
    outcome(
        r.rows.len() == FORWARD_STRATEGIES && r.all_passed(),
        format!("{} strategies, max final D {max_d}, min OPT {min_opt}", r.rows.len()),
    )
}

fn matching_counterexample() -> Outcome {
    let h = HstSpec::new(vec![1], 4).unwrap().build().unwrap();
    let t = Arc::new(SubdividedTree::new(h.tree));
    let [a, b, c, d] = [h.leaves[0], h.leaves[1], h.leaves[2], h.leaves[3]];
    let (online, offline) = ([a, b, c], [b, c, d]);
    let before = matching_potential(&t, &online, &offline).unwrap();
    let req = [Request::Simple { s: d }];
    let tr = run_double_coverage(&t, &online, &req).unwrap();
    let after = matching_potential(&t, &tr.final_config, &offline).unwrap();
    let off = optimal_cost_dp(&TreeCost::full(&t), &offline, &req, None, DEFAULT_BUDGET).unwrap().total_cost;
    outcome(
        before == 2 && after == 2 && tr.total_cost() == 4 && off == 0,
        format!("matching {before} -> {after}, DC cost {}, offline cost {off}", tr.total_cost()),
    )
}

fn table_identities() -> Outcome {
    let start = Instant::now();
    let mut bad = vec![];
    for k in 0..=20u32 {
        for d in 0..=12u32 {
            if c_kd(k, d) != c_kd_recurrence(k, d) {
                bad.push(format!("recurrence k={k} d={d}"));
            }
            if d >= k && c_kd(k, d) != (BigUint::one() << k) - 1u32 {
                bad.push(format!("saturation k={k} d={d}"));
            }
        }
    }
    for k in 2..=10u32 {
        for d in 1..=8u32 {
            let (m, big_m) = band_values(k, d);
            let t = bands(k, d).expect("bands");
            if t.m != m || t.big_m != big_m {
                bad.push(format!("table k={k} d={d}"));
            }
            let du = d as usize;
            let a = m.windows(2).all(|w| w[0] < w[1])
                && m[du - 1] == BigInt::from(-1)
                && m[du - 1] < big_m[0]
                && big_m.windows(2).all(|w| w[0] < w[1]);
            let b = (0..du).all(|i| &big_m[i] - &m[i] == &big_m[0] - &m[0]);
            let c = (1..=k as i64).all(|j| &big_m[0] + (j - 1) * &m[0] >= BigInt::from(j));
            let dd = (1..=k as i64).all(|j| (0..du - 1).all(|i| (j - 1) * &m[i + 1] - &m[i] >= BigInt::from(j)));
            for (name, ok) in [("a", a), ("b", b), ("c", c), ("d", dd)] {
                if !ok {
                    bad.push(format!("({name}) k={k} d={d}"));
                }
            }
        }
    }
    let took = start.elapsed();
    outcome(bad.is_empty() && took < TABLE_LIMIT, format!("{took:.1?}; failures: {bad:?}"))
}

/// Band values straight from their closed forms.
fn band_values(k: u32, d: u32) -> (Vec<BigInt>, Vec<BigInt>) {
    let (kk, q) = (BigInt::from(k), BigInt::from(k as i64 - 1));
    (1..=d)
        .map(|i| {
            if k == 2 {
                (BigInt::from(-2 * (d as i64 - i as i64) - 1), BigInt::from(2 * (d as i64 + i as i64) - 1))
            } else {
                let den = BigInt::from(k - 2);
                let lo = (-BigInt::from(2) * q.pow(d - i + 1) + &kk) / &den;
                let hi = (BigInt::from(2) * &kk * q.pow(d) - BigInt::from(2) * q.pow(d - i + 1) - &kk) / &den;
                (lo, hi)
            }
        })
        .unzip()
}

/// Sixteen-ish points on a line at `floor(delta^(j/(n-1))) + j - 1`: gaps
/// grow geometrically, the span is `delta + n - 2`.
fn geometric_line(n: usize, delta: i64) -> MetricSpace {
    let p: Vec<i64> =
        (0..n).map(|j| (delta as f64).powf(j as f64 / (n - 1) as f64).floor() as i64 + j as i64 - 1).collect();
    let d: Vec<Vec<i64>> = p.iter().map(|a| p.iter().map(|b| (a - b).abs()).collect()).collect();
    MetricSpace::from_integers(&d).expect("distinct points on a line")
}

fn embedding_stability() -> Outcome {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..EMBED_SEEDS).collect();
    let mut parts = vec![];
    let mut ok = true;
    for (i, d) in [1usize, 2, 3].into_iter().enumerate() {
        let m = random_metric(EMBED_POINTS, 100, 40 + i as u64);
        let s = distortion_stats(&m, d, &seeds).expect("embeds");
        let med = s.median_seed_mean();
        let worst = s.per_seed_mean.iter().copied().fold(0.0, f64::max);
        ok &= s.min >= 1.0 && worst <= STABILITY_FACTOR * med;
        parts.push(format!("d={d} min {:.2} median {med:.2} worst seed {worst:.2}", s.min));
    }
    let (mut trend, mut aspect) = (vec![], vec![]);
    for delta in DELTA_GRID {
        let m = geometric_line(EMBED_POINTS, delta);
        let s = distortion_stats(&m, 2, &seeds).expect("embeds");
        ok &= s.min >= 1.0;
        trend.push(s.mean);
        aspect.push(m.aspect_ratio());
    }
    let monotone = trend.windows(2).all(|w| w[0] < w[1]) && aspect.windows(2).all(|w| w[0] < w[1]);
    let took = start.elapsed();
    let aspect: Vec<String> = aspect.iter().map(|a| a.to_string()).collect();
    parts.push(format!("d=2 geometric line, aspect {aspect:?}, mean stretch {trend:.2?}"));
    outcome(ok && monotone && took < EMBED_LIMIT, format!("{}; {took:.1?}", parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 tree lower bound exact reproduction", tree_lower_bounds),
        ("2 HST lower bound", hst_lower_bounds),
        ("3 HST certificate suite", hst_certificates),
        ("4 weighted-tree certificate suite", weighted_certificates),
        ("5 k-server potential", kserver_potential),
        ("6 oracle cross-validation", oracle_agreement),
        ("7 forward-time impossibility", forward_impossibility),
        ("8 matching-potential counterexample", matching_counterexample),
        ("9 table identities", table_identities),
        ("10 embedding stability and trend", embedding_stability),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        failed += !o.passed as usize;
        println!(
            "criterion {name}: {} ({:.1?}) {}",
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed(),
            o.detail
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
