use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ktaxi_core::dual::{
    build_certificate_hst, build_certificate_weighted, check_guarantees, evaluate_dual, transform_to_lambda_b,
    verify_feasibility, weak_duality_check, CertMode, CertificateFile,
};
use ktaxi_core::embedding::{distortion_stats, frt_embed, run_on_metric};
use ktaxi_core::harness::{run_experiment, ExperimentKind, ExperimentSpec, GridPoint};
use ktaxi_core::io::{Scenario, TraceFile};
use ktaxi_core::lowerbound::{gen_hst_lowerbound, gen_tree_lowerbound};
use ktaxi_core::offline::{optimal_cost_dp, optimal_cost_flow, MatrixCost, OfflineSchedule, TreeCost};
use ktaxi_core::potentials::{bands, c_kd};
use ktaxi_core::sim::cost_summary;
use ktaxi_core::tree::{MetricDescription, TreeDescription};
use ktaxi_core::{run_double_coverage, MetricSpace, Request, Trace};

#[derive(Parser)]
#[command(name = "ktaxi", version, about = "Double Coverage for k-taxi and k-server on trees")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for embeddings and experiments.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// State budget for the configuration DP.
    #[arg(long, global = true, default_value_t = ktaxi_core::offline::DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run Double Coverage on a scenario/v1 file and emit a trace/v1.
    Simulate { scenario: PathBuf },
    /// Offline optimum of a scenario.
    Offline {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Oracle::Flow)]
        oracle: Oracle,
        /// Charge only movement toward the root.
        #[arg(long)]
        upward: bool,
        /// Prescribed final configuration, comma separated.
        #[arg(long, value_delimiter = ',')]
        fixed_final: Option<Vec<usize>>,
    },
    /// Check a dual certificate against a trace. Without --cert one is built.
    VerifyDual {
        trace: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Monotone)]
        mode: Mode,
        /// Depth bound for the banded certificate (defaults to the tree depth).
        #[arg(long)]
        depth: Option<u32>,
        /// Write the certificate used to this file.
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Generate a lower-bound instance and its predicted costs.
    Lowerbound {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: Option<i64>,
    },
    /// c_kd and the slope band tables.
    Tables {
        #[arg(long, default_value_t = 6)]
        k_max: u32,
        #[arg(long, default_value_t = 4)]
        d_max: u32,
    },
    /// Embed a metric/v1 file into an HST.
    Embed {
        metric: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// With more than one trial, report stretch statistics over seeds.
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// Serve point requests through random HST embeddings.
    RunMetric {
        metric: PathBuf,
        /// JSON {initial_positions, requests} over point indices.
        requests: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// Run an experiment grid; exits non-zero if any check fails.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment spec; other experiment flags are ignored when given.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Grid points as k:d or k:d:alpha, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<String>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 30)]
    length: usize,
    #[arg(long, default_value_t = ktaxi_core::harness::DEFAULT_RELOCATION_RATE)]
    relocation_rate: f64,
    #[arg(long, default_value_t = 12)]
    points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Flow,
    Dp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Monotone,
    Banded,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Tree,
    Hst,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    UpperBoundSweep,
    LowerBoundRepro,
    DualityAudit,
    EmbeddingStudy,
    ForwardImpossibility,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::UpperBoundSweep => ExperimentKind::UpperBoundSweep,
            Kind::LowerBoundRepro => ExperimentKind::LowerBoundRepro,
            Kind::DualityAudit => ExperimentKind::DualityAudit,
            Kind::EmbeddingStudy => ExperimentKind::EmbeddingStudy,
            Kind::ForwardImpossibility => ExperimentKind::ForwardImpossibility,
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            let r = out.write_all(text.as_bytes()).and_then(|_| match text.ends_with('\n') {
                true => Ok(()),
                false => out.write_all(b"\n"),
            });
            match r {
                // a closed pipe (`| head`) is not a failure
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct RequestRow {
    request: usize,
    kind: &'static str,
    s: usize,
    d: usize,
    steps: usize,
    cost_up: i64,
    cost_down: i64,
}

fn simulate(g: &Global, path: &Path) -> Result<()> {
    let l = read_json::<Scenario>(path)?.load()?;
    let tr = run_double_coverage(&l.tree, &l.initial, &l.requests)?;
    match g.format {
        Format::Json => emit(g, &to_json(&TraceFile::from(&tr))),
        Format::Csv => {
            let per = cost_summary(&tr).per_request;
            let rows: Vec<RequestRow> = tr
                .requests
                .iter()
                .zip(&tr.events)
                .enumerate()
                .map(|(t, (r, e))| RequestRow {
                    request: t,
                    kind: if r.is_relocation() { "relocate" } else { "simple" },
                    s: r.source(),
                    d: r.destination(),
                    steps: e.step_count(),
                    cost_up: per[t].0,
                    cost_down: per[t].1,
                })
                .collect();
            emit(g, &to_csv(&rows)?)
        }
    }
}

#[derive(Serialize)]
struct OfflineOut {
    opt_cost: i64,
    schedule: OfflineSchedule,
}

fn offline(g: &Global, path: &Path, oracle: Oracle, upward: bool, fixed: Option<Vec<usize>>) -> Result<()> {
    let l = read_json::<Scenario>(path)?.load()?;
    let cost = if upward { TreeCost::upward(&l.tree) } else { TreeCost::full(&l.tree) };
    let f = fixed.as_deref();
    let schedule = match oracle {
        Oracle::Flow => optimal_cost_flow(&cost, &l.initial, &l.requests, f)?,
        Oracle::Dp => optimal_cost_dp(&cost, &l.initial, &l.requests, f, g.budget)?,
    };
    let out = OfflineOut { opt_cost: schedule.total_cost, schedule };
    match g.format {
        Format::Json => emit(g, &to_json(&out)),
        Format::Csv => emit(g, &to_csv(&out.schedule.served)?),
    }
}

#[derive(Serialize)]
struct DualReport {
    mode: &'static str,
    ticks: usize,
    d: i64,
    scale: i64,
    guarantees_clean: bool,
    guarantee_violations: usize,
    feasible: bool,
    feasibility_issues: usize,
    lambda_b_objective: Option<i64>,
    opt_fixed_final: Option<i64>,
    weak_duality: Option<bool>,
    passed: bool,
}

fn verify_dual(
    g: &Global,
    path: &Path,
    cert_path: Option<&Path>,
    mode: Mode,
    depth: Option<u32>,
    cert_out: Option<&Path>,
) -> Result<bool> {
    let tr: Trace = read_json::<TraceFile>(path)?.load()?;
    let cert = match cert_path {
        Some(p) => read_json::<CertificateFile>(p)?.build()?,
        None => match mode {
            Mode::Monotone => build_certificate_hst(&tr)?,
            Mode::Banded => {
                let d = depth.unwrap_or(tr.tree.base().depth().max(1) as u32);
                build_certificate_weighted(&tr, d)?
            }
        },
    };
    if let Some(p) = cert_out {
        fs::write(p, to_json(&CertificateFile::from(&cert)))?;
    }
    let ev = evaluate_dual(&cert, &tr)?;
    let gr = check_guarantees(&cert, &tr, &ev);
    let fr = verify_feasibility(&cert, &tr.tree);
    let lb = transform_to_lambda_b(&cert, &tr).ok().map(|x| x.objective);
    // the monotone dual bounds upward movement only; the banded one bounds
    // all movement after dividing by M_d
    let (scale, opt) = match &cert.mode {
        CertMode::Monotone => (1, optimal_cost_dp(&TreeCost::upward(&tr.tree), &tr.initial, &tr.requests, Some(&tr.final_config), g.budget).ok()),
        CertMode::Banded(b) => (b.c_i64(), optimal_cost_flow(&TreeCost::full(&tr.tree), &tr.initial, &tr.requests, Some(&tr.final_config)).ok()),
    };
    let opt = opt.map(|s| s.total_cost);
    let weak = opt.map(|o| weak_duality_check(&ev, o, scale).holds);
    let passed = gr.is_clean() && fr.is_clean() && lb == Some(ev.total) && weak != Some(false);
    let rep = DualReport {
        mode: cert.mode.name(),
        ticks: cert.ticks,
        d: ev.total,
        scale,
        guarantees_clean: gr.is_clean(),
        guarantee_violations: gr.violations.len(),
        feasible: fr.is_clean(),
        feasibility_issues: fr.issue_count,
        lambda_b_objective: lb,
        opt_fixed_final: opt,
        weak_duality: weak,
        passed,
    };
    match g.format {
        Format::Json => emit(g, &to_json(&rep))?,
        Format::Csv => emit(g, &to_csv(&[rep])?)?,
    }
    Ok(passed)
}

fn lowerbound(g: &Global, family: Family, k: usize, d: usize, alpha: Option<i64>) -> Result<()> {
    let inst = match (family, alpha) {
        (Family::Tree, None) => gen_tree_lowerbound(k, d)?,
        (Family::Tree, Some(_)) => bail!("--alpha applies to the hst family only"),
        (Family::Hst, a) => gen_hst_lowerbound(k, d, a.unwrap_or(2))?,
    };
    let scenario = Scenario::new(TreeDescription::from(inst.tree.base()), inst.initial.clone(), inst.requests.clone());
    match &g.out {
        Some(p) => {
            fs::write(p, to_json(&scenario))?;
            fs::write(p.with_extension("prediction.json"), to_json(&inst.prediction))?;
            Ok(())
        }
        None => emit(g, &to_json(&serde_json::json!({ "scenario": scenario, "prediction": inst.prediction }))),
    }
}

#[derive(Serialize)]
struct TableRow {
    k: u32,
    d: u32,
    c_kd: String,
    depth: Option<u32>,
    m: Option<String>,
    big_m: Option<String>,
}

fn tables(g: &Global, k_max: u32, d_max: u32) -> Result<()> {
    let mut rows = vec![];
    for k in 1..=k_max {
        for d in 1..=d_max {
            rows.push(TableRow { k, d, c_kd: c_kd(k, d).to_string(), depth: None, m: None, big_m: None });
            if let Ok(b) = bands(k, d) {
                for i in 0..d as usize {
                    rows.push(TableRow {
                        k,
                        d,
                        c_kd: c_kd(k, d).to_string(),
                        depth: Some(i as u32 + 1),
                        m: Some(b.m[i].to_string()),
                        big_m: Some(b.big_m[i].to_string()),
                    });
                }
            }
        }
    }
    match g.format {
        Format::Csv => emit(g, &to_csv(&rows)?),
        Format::Json => emit(g, &to_json(&rows)),
    }
}

fn load_metric(path: &Path) -> Result<MetricSpace> {
    Ok(read_json::<MetricDescription>(path)?.build()?)
}

#[derive(Serialize)]
struct EmbedOut {
    seed: u64,
    alpha: i64,
    depth: usize,
    /// Tree distances are in metric units times this factor.
    scale: String,
    tree: TreeDescription,
    leaf_of: Vec<usize>,
    max_stretch: f64,
}

fn embed(g: &Global, path: &Path, depth: usize, trials: u64) -> Result<()> {
    let m = load_metric(path)?;
    if trials > 1 {
        let seeds: Vec<u64> = (g.seed..g.seed + trials).collect();
        let s = distortion_stats(&m, depth, &seeds)?;
        return match g.format {
            Format::Json => emit(g, &to_json(&s)),
            Format::Csv => {
                let rows: Vec<(usize, usize, f64)> = s.per_pair_mean.iter().map(|&((x, y), v)| (x, y, v)).collect();
                emit(g, &to_csv(&rows)?)
            }
        };
    }
    let e = frt_embed(&m, depth, g.seed)?;
    let n = m.len();
    let max_stretch =
        (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).filter_map(|(x, y)| e.stretch(x, y)).fold(1.0, f64::max);
    let out = EmbedOut {
        seed: e.seed,
        alpha: e.alpha,
        depth: e.d,
        scale: e.scale.to_string(),
        tree: TreeDescription::from(&e.hst),
        leaf_of: e.leaf_of.clone(),
        max_stretch,
    };
    match g.format {
        Format::Json => emit(g, &to_json(&out)),
        Format::Csv => emit(g, &to_csv(&out.leaf_of.iter().enumerate().collect::<Vec<_>>())?),
    }
}

#[derive(Deserialize)]
struct PointRequests {
    initial_positions: Vec<usize>,
    requests: Vec<Request>,
}

#[derive(Serialize)]
struct MetricRow {
    seed: u64,
    alpha: i64,
    hst_cost: i64,
    metric_cost: i64,
    opt: i64,
    move_violations: usize,
}

fn run_metric(g: &Global, metric: &Path, reqs: &Path, depth: usize, trials: u64) -> Result<bool> {
    let m = load_metric(metric)?;
    let pr: PointRequests = read_json(reqs)?;
    let mut rows = vec![];
    for seed in g.seed..g.seed + trials.max(1) {
        let r = run_on_metric(&m, &pr.initial_positions, &pr.requests, depth, seed)?;
        let opt = optimal_cost_flow(&MatrixCost(r.embedding.scaled.clone()), &pr.initial_positions, &pr.requests, None)?;
        rows.push(MetricRow {
            seed,
            alpha: r.embedding.alpha,
            hst_cost: r.hst_cost,
            metric_cost: r.metric_cost,
            opt: opt.total_cost,
            move_violations: r.move_violations,
        });
    }
    let ok = rows.iter().all(|r| r.move_violations == 0 && r.metric_cost <= r.hst_cost);
    match g.format {
        Format::Csv => emit(g, &to_csv(&rows)?)?,
        Format::Json => emit(g, &to_json(&rows))?,
    }
    Ok(ok)
}

fn parse_grid(items: &[String]) -> Result<Vec<GridPoint>> {
    items
        .iter()
        .map(|s| {
            let parts: Vec<&str> = s.split(':').collect();
            let num = |i: usize| -> Result<i64> { Ok(parts[i].trim().parse::<i64>().with_context(|| format!("grid point {s:?}"))?) };
            match parts.len() {
                2 => Ok(GridPoint::new(num(0)? as usize, num(1)? as usize)),
                3 => Ok(GridPoint::with_alpha(num(0)? as usize, num(1)? as usize, num(2)?)),
                _ => bail!("grid point {s:?} is not k:d or k:d:alpha"),
            }
        })
        .collect()
}

fn experiment(g: &Global, a: &ExperimentArgs) -> Result<bool> {
    let spec = match &a.spec {
        Some(p) => read_json::<ExperimentSpec>(p)?,
        None => {
            let Some(kind) = a.kind else { bail!("either --spec or --kind is required") };
            let mut s = ExperimentSpec::new(kind.into(), parse_grid(&a.grid)?);
            s.trials = a.trials;
            s.length = a.length;
            s.relocation_rate = a.relocation_rate;
            s.points = a.points;
            s.seed = g.seed;
            s.budget = g.budget;
            s
        }
    };
    let r = run_experiment(&spec)?;
    match g.format {
        Format::Csv => emit(g, &r.to_csv())?,
        Format::Json => emit(g, &r.to_json())?,
    }
    let s = &r.summary;
    eprintln!("{} trials: {} passed, {} failed, {} over budget", s.trials, s.passed, s.failed, s.budget_exhausted);
    Ok(r.all_passed())
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate { scenario } => simulate(g, scenario).map(|_| true),
        Command::Offline { scenario, oracle, upward, fixed_final } => {
            offline(g, scenario, *oracle, *upward, fixed_final.clone()).map(|_| true)
        }
        Command::VerifyDual { trace, cert, mode, depth, cert_out } => {
            verify_dual(g, trace, cert.as_deref(), *mode, *depth, cert_out.as_deref())
        }
        Command::Lowerbound { family, k, d, alpha } => lowerbound(g, *family, *k, *d, *alpha).map(|_| true),
        Command::Tables { k_max, d_max } => tables(g, *k_max, *d_max).map(|_| true),
        Command::Embed { metric, depth, trials } => embed(g, metric, *depth, *trials).map(|_| true),
        Command::RunMetric { metric, requests, depth, trials } => run_metric(g, metric, requests, *depth, *trials),
        Command::Experiment(a) => experiment(g, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
