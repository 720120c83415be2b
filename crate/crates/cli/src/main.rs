//! Command-line front end: simulation runs, efficiency analysis, stability
//! verdicts, equilibrium certification, and dataset statistics. All outputs
//! are deterministic given the manifest; exit codes are 0 (success),
//! 2 (configuration or argument error), 3 (size-limit), 1 (internal).

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{parse_file, PayoffSpec, TypesSpec};
use netform_core::baseline::{myopic_run, summarize, MyopicConfig};
use netform_core::efficiency::{
    brute_force_efficient, core_stable_conditions, efficient_core_periphery, efficient_two_type,
    is_core_stable, EfficiencyError, EfficientResult, Stability, TwoTypeSpec,
};
use netform_core::equilibrium::{
    bound_components, deviation_gain_at, min_k, bound_certifies_no_deviation, threshold_gamma,
    EquilibriumError, ThresholdOutcome,
};
use netform_core::game::{run as run_sim, GameError};
use netform_core::graph::{stats, Network};
use netform_core::payoff::{
    one_period_payoff, PayoffModel, PayoffTable, TypeVector,
};
use output::{
    ensure_dir, print_json, sig6, sim_summary, trace_csv, write_edge_list, write_json,
    write_manifest, NetworkStatsReport, RunManifest,
};
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    SizeLimit(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::SizeLimit(_) => 3,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::SizeLimit(m) | CliError::Internal(m) => m,
        }
    }
}

fn from_efficiency(e: EfficiencyError) -> CliError {
    match e {
        EfficiencyError::SizeLimit { .. } => CliError::SizeLimit(e.to_string()),
        EfficiencyError::Internal(_) => CliError::Internal(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn from_equilibrium(e: EquilibriumError) -> CliError {
    match e {
        EquilibriumError::SizeLimit { .. } => CliError::SizeLimit(e.to_string()),
        EquilibriumError::Numerical(_) => CliError::Internal(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn from_game(e: GameError) -> CliError {
    match e {
        GameError::SizeLimit { .. } => CliError::SizeLimit(e.to_string()),
        GameError::Consistency(_) => CliError::Internal(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

#[derive(Parser)]
#[command(name = "netform", version, about = "Dynamic network formation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the formation game (foresighted automata) or the myopic baseline.
    Simulate(SimulateArgs),
    /// Construct the strongly efficient network and its statistics.
    Efficient(EfficientArgs),
    /// Core-stability verdict for the two-type efficient network.
    Stability(StabilityArgs),
    /// Exact one-shot-deviation certification and threshold search.
    Equilibrium(EquilibriumArgs),
    /// Descriptive statistics of an edge-list file.
    Stats(StatsArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// "foresighted" or "myopic"
    #[arg(long)]
    mode: String,
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Inclusive seed range "a..b"; runs fan out in parallel.
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory for traces, summaries, and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip per-period trace recording.
    #[arg(long)]
    no_trace: bool,
}

#[derive(Args)]
struct EfficientArgs {
    /// Use the closed-form two-type characterization.
    #[arg(long, requires_all = ["f_alpha", "f_beta", "na", "nb", "c", "delta"])]
    two_type: bool,
    #[arg(long)]
    f_alpha: Option<f64>,
    #[arg(long)]
    f_beta: Option<f64>,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Multi-type input: JSON file with `types` and `payoff` sections.
    #[arg(long, conflicts_with = "two_type")]
    config: Option<PathBuf>,
    /// Also report the brute-force maximizer set (populations up to six).
    #[arg(long)]
    brute: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    f_alpha: f64,
    #[arg(long)]
    f_beta: f64,
    #[arg(long)]
    na: usize,
    #[arg(long)]
    nb: usize,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    delta: f64,
    /// Run the exhaustive blocking search too (populations up to five).
    #[arg(long)]
    brute: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquilibriumArgs {
    /// Built-in three-agent symmetric-table demo with a clique target.
    #[arg(long)]
    example1: bool,
    /// Per-agent pair payoff scale for the demo table.
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    /// Connections-model input: JSON with `agents`, `types`, `payoff`, `target`.
    #[arg(long, conflicts_with = "example1")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    /// Punishment length.
    #[arg(long = "K", default_value_t = 10)]
    k: usize,
    /// Search the patience cutoff by bisection.
    #[arg(long)]
    threshold: bool,
    /// Search the smallest sufficient punishment length at the given gamma.
    #[arg(long)]
    min_k: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Edge-list file: one "i j" pair per line, '#' comments.
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    if let Ok(threads) = std::env::var("NETFORM_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args, started),
        Command::Efficient(args) => cmd_efficient(args, started),
        Command::Stability(args) => cmd_stability(args, started),
        Command::Equilibrium(args) => cmd_equilibrium(args, started),
        Command::Stats(args) => cmd_stats(args, started),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

fn parse_seed_range(text: &str) -> Result<Vec<u64>, CliError> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| CliError::Config(format!("seed range {text:?} must look like a..b")))?;
    let a: u64 = a.trim().parse().map_err(|_| CliError::Config("bad seed range start".into()))?;
    let b: u64 = b.trim().parse().map_err(|_| CliError::Config("bad seed range end".into()))?;
    if b < a {
        return Err(CliError::Config("seed range end below start".into()));
    }
    Ok((a..=b).collect())
}

#[derive(Serialize)]
struct MyopicSummary {
    manifest: RunManifest,
    seed: u64,
    periods: usize,
    formed: usize,
    severed: usize,
    final_link_count: usize,
    stats: NetworkStatsReport,
}

#[derive(Serialize)]
struct BatchFile<T: Serialize> {
    manifest: RunManifest,
    seeds: Vec<u64>,
    runs: Vec<T>,
}

fn cmd_simulate(args: SimulateArgs, started: Instant) -> Result<(), CliError> {
    let (file, snapshot) = parse_file(&args.config)?;
    let seeds: Vec<u64> = match (&args.seeds, args.seed) {
        (Some(range), _) => parse_seed_range(range)?,
        (None, Some(s)) => vec![s],
        (None, None) => vec![file.seed()?],
    };
    let out_dir = args.out.as_deref();
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
    }
    match args.mode.as_str() {
        "foresighted" => {
            let runs: Vec<(u64, netform_core::game::SimTrace)> = seeds
                .par_iter()
                .map(|&seed| {
                    let mut cfg = file.foresighted(seed)?;
                    if args.no_trace {
                        cfg.record_trace = false;
                    }
                    let trace = run_sim(cfg).map_err(from_game)?;
                    Ok((seed, trace))
                })
                .collect::<Result<_, CliError>>()?;
            let mut summaries = Vec::new();
            for (seed, trace) in &runs {
                let manifest = RunManifest::new(Some(*seed), snapshot.clone());
                let summary = sim_summary(manifest, *seed, trace);
                if let Some(dir) = out_dir {
                    if !trace.records.is_empty() {
                        std::fs::write(
                            dir.join(format!("trace_seed{seed}.csv")),
                            trace_csv(&trace.records),
                        )
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                    }
                    write_json(&dir.join(format!("summary_seed{seed}.json")), &summary)?;
                }
                summaries.push(summary);
            }
            if let Some(dir) = out_dir {
                if summaries.len() > 1 {
                    let manifest = RunManifest::new(None, snapshot.clone());
                    write_json(
                        &dir.join("batch_summary.json"),
                        &BatchFile { manifest, seeds: seeds.clone(), runs: summaries },
                    )?;
                } else if let Some(s) = summaries.first() {
                    print_json(s)?;
                }
                let manifest = RunManifest::new(seeds.first().copied(), snapshot);
                write_manifest(dir, &manifest, started.elapsed().as_millis())?;
            } else if summaries.len() == 1 {
                print_json(&summaries[0])?;
            } else {
                print_json(&summaries)?;
            }
            Ok(())
        }
        "myopic" => {
            let outcomes: Vec<netform_core::baseline::MyopicOutcome> = seeds
                .par_iter()
                .map(|&seed| {
                    let cfg: MyopicConfig = file.myopic(seed)?;
                    myopic_run(&cfg).map_err(|e| CliError::Config(e.to_string()))
                })
                .collect::<Result<_, CliError>>()?;
            let mut summaries = Vec::new();
            for out in &outcomes {
                let manifest = RunManifest::new(Some(out.seed), snapshot.clone());
                let summary = MyopicSummary {
                    manifest,
                    seed: out.seed,
                    periods: out.periods,
                    formed: out.formed,
                    severed: out.severed,
                    final_link_count: out.network.link_count(),
                    stats: NetworkStatsReport::from(&out.stats),
                };
                if let Some(dir) = out_dir {
                    write_json(&dir.join(format!("summary_seed{}.json", out.seed)), &summary)?;
                    write_edge_list(
                        &dir.join(format!("final_seed{}.edges", out.seed)),
                        &out.network,
                    )?;
                }
                summaries.push(summary);
            }
            #[derive(Serialize)]
            struct MyopicBatch {
                manifest: RunManifest,
                seeds: Vec<u64>,
                batch: netform_core::baseline::BatchSummary,
                runs: Vec<MyopicSummary>,
            }
            if summaries.len() > 1 {
                let batch = summarize(&outcomes);
                let file_out = MyopicBatch {
                    manifest: RunManifest::new(None, snapshot.clone()),
                    seeds: seeds.clone(),
                    batch,
                    runs: summaries,
                };
                if let Some(dir) = out_dir {
                    write_json(&dir.join("batch_summary.json"), &file_out)?;
                    let manifest = RunManifest::new(None, snapshot);
                    write_manifest(dir, &manifest, started.elapsed().as_millis())?;
                } else {
                    print_json(&file_out)?;
                }
            } else {
                if let Some(dir) = out_dir {
                    let manifest = RunManifest::new(seeds.first().copied(), snapshot);
                    write_manifest(dir, &manifest, started.elapsed().as_millis())?;
                }
                print_json(&summaries[0])?;
            }
            Ok(())
        }
        other => Err(CliError::Config(format!("unknown mode {other:?}"))),
    }
}

#[derive(Serialize)]
struct PartitionReport {
    core: Vec<usize>,
    periphery_one: Vec<usize>,
    periphery_two: Vec<usize>,
    singletons: Vec<usize>,
}

#[derive(Serialize)]
struct EfficientReport {
    manifest: RunManifest,
    n: usize,
    case: String,
    welfare: f64,
    links: usize,
    partition: PartitionReport,
    stats: NetworkStatsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    brute_force: Option<BruteReport>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct BruteReport {
    max_welfare: f64,
    maximizer_count: usize,
    closed_form_is_maximizer: bool,
}

fn efficient_report(
    manifest: RunManifest,
    result: &EfficientResult,
    brute: Option<BruteReport>,
) -> EfficientReport {
    EfficientReport {
        manifest,
        n: result.network.n(),
        case: result.case.label(),
        welfare: sig6(result.welfare),
        links: result.network.link_count(),
        partition: PartitionReport {
            core: result.partition.core.clone(),
            periphery_one: result.partition.periphery_one.clone(),
            periphery_two: result.partition.periphery_two.clone(),
            singletons: result.partition.singletons.clone(),
        },
        stats: NetworkStatsReport::from(&stats(&result.network)),
        brute_force: brute,
        edges: result.network.links(),
    }
}

fn cmd_efficient(args: EfficientArgs, started: Instant) -> Result<(), CliError> {
    let (result, tv, model, config_snapshot) = if args.two_type {
        let spec = TwoTypeSpec {
            f_alpha: args.f_alpha.unwrap(),
            f_beta: args.f_beta.unwrap(),
            n_alpha: args.na.unwrap(),
            n_beta: args.nb.unwrap(),
            cost: args.c.unwrap(),
            delta: args.delta.unwrap(),
        };
        let result = efficient_two_type(&spec).map_err(from_efficiency)?;
        let tv = spec.type_vector();
        let model = spec.model().map_err(from_efficiency)?;
        let snapshot = serde_json::to_value(&spec).map_err(|e| CliError::Internal(e.to_string()))?;
        (result, tv, model, snapshot)
    } else if let Some(path) = &args.config {
        let (file, snapshot) = parse_file(path)?;
        let types: &TypesSpec = file
            .types
            .as_ref()
            .ok_or_else(|| CliError::Config("efficient needs a `types` section".into()))?;
        let payoff: &PayoffSpec = file
            .payoff
            .as_ref()
            .ok_or_else(|| CliError::Config("efficient needs a `payoff` section".into()))?;
        let tv = types.type_vector()?;
        let params = payoff.params(&types.benefits)?;
        let result = efficient_core_periphery(&tv, &params).map_err(from_efficiency)?;
        let model = PayoffModel::connections(params);
        (result, tv, model, snapshot)
    } else {
        return Err(CliError::Config("pass --two-type with its flags, or --config".into()));
    };
    let brute = if args.brute {
        let bf = brute_force_efficient(&tv, &model).map_err(from_efficiency)?;
        Some(BruteReport {
            max_welfare: sig6(bf.max_welfare),
            maximizer_count: bf.maximizers.len(),
            closed_form_is_maximizer: bf.contains(&result.network, &tv),
        })
    } else {
        None
    };
    let manifest = RunManifest::new(None, config_snapshot);
    let report = efficient_report(manifest, &result, brute);
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_json(&dir.join("efficient.json"), &report)?;
        write_edge_list(&output::edge_list_path(dir, "efficient"), &result.network)?;
        let manifest = RunManifest::new(None, serde_json::Value::Null);
        write_manifest(dir, &manifest, started.elapsed().as_millis())?;
    }
    print_json(&report)
}

fn cmd_stability(args: StabilityArgs, started: Instant) -> Result<(), CliError> {
    let spec = TwoTypeSpec {
        f_alpha: args.f_alpha,
        f_beta: args.f_beta,
        n_alpha: args.na,
        n_beta: args.nb,
        cost: args.c,
        delta: args.delta,
    };
    let result = efficient_two_type(&spec).map_err(from_efficiency)?;
    let closed = core_stable_conditions(&spec).map_err(from_efficiency)?;
    #[derive(Serialize)]
    struct BruteStability {
        stable: bool,
        blocking_group: Option<Vec<usize>>,
        blocking_links: Option<Vec<(usize, usize)>>,
    }
    let brute = if args.brute {
        let verdict = is_core_stable(
            &result.network,
            &spec.type_vector(),
            &spec.model().map_err(from_efficiency)?,
        )
        .map_err(from_efficiency)?;
        Some(match verdict {
            Stability::Stable => {
                BruteStability { stable: true, blocking_group: None, blocking_links: None }
            }
            Stability::Blocked { group, network } => BruteStability {
                stable: false,
                blocking_group: Some(group),
                blocking_links: Some(network.links()),
            },
        })
    } else {
        None
    };
    #[derive(Serialize)]
    struct StabilityReport {
        manifest: RunManifest,
        case: String,
        closed_form_stable: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        brute_force: Option<BruteStability>,
    }
    let snapshot = serde_json::to_value(&spec).map_err(|e| CliError::Internal(e.to_string()))?;
    let report = StabilityReport {
        manifest: RunManifest::new(None, snapshot),
        case: result.case.label(),
        closed_form_stable: closed,
        brute_force: brute,
    };
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_json(&dir.join("stability.json"), &report)?;
        let manifest = RunManifest::new(None, serde_json::Value::Null);
        write_manifest(dir, &manifest, started.elapsed().as_millis())?;
    }
    print_json(&report)
}

fn cmd_equilibrium(args: EquilibriumArgs, started: Instant) -> Result<(), CliError> {
    let (target, tv, model, snapshot) = if args.example1 {
        let tv = TypeVector::uniform(3);
        let model = PayoffModel::Table(PayoffTable::symmetric_triangle(args.v));
        let snapshot = serde_json::json!({"example1": true, "v": args.v});
        (Network::clique(3), tv, model, snapshot)
    } else if let Some(path) = &args.config {
        let (file, snapshot) = parse_file(path)?;
        let types = file
            .types
            .as_ref()
            .ok_or_else(|| CliError::Config("equilibrium needs a `types` section".into()))?;
        let payoff = file
            .payoff
            .as_ref()
            .ok_or_else(|| CliError::Config("equilibrium needs a `payoff` section".into()))?;
        let tv = types.type_vector()?;
        let params = payoff.params(&types.benefits)?;
        let n = tv.n();
        let target = match &file.strategy {
            Some(config::StrategySpec::Complete { target }) => target.build(n)?,
            _ => {
                return Err(CliError::Config(
                    "equilibrium config needs a complete-information `strategy` with a target".into(),
                ))
            }
        };
        (target, tv, PayoffModel::connections(params), snapshot)
    } else {
        return Err(CliError::Config("pass --example1 or --config".into()));
    };

    let gain = deviation_gain_at(&target, &tv, &model, args.k, args.gamma)
        .map_err(from_equilibrium)?;
    let comps = bound_components(&tv, &model).map_err(from_equilibrium)?;
    let target_payoffs: Vec<f64> = (0..tv.n())
        .map(|i| one_period_payoff(&model, &tv, &target, i))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let bound_certifies = bound_certifies_no_deviation(&comps, &target_payoffs, args.gamma, args.k);

    #[derive(Serialize)]
    struct ThresholdReport {
        kind: String,
        gamma_bar: Option<f64>,
        bracket: Option<(f64, f64)>,
        verified: Option<bool>,
    }
    let threshold = if args.threshold {
        Some(match threshold_gamma(&target, &tv, &model, args.k).map_err(from_equilibrium)? {
            ThresholdOutcome::Interior { gamma_bar, bracket, verified } => ThresholdReport {
                kind: "interior".into(),
                gamma_bar: Some(sig6(gamma_bar)),
                bracket: Some((sig6(bracket.0), sig6(bracket.1))),
                verified: Some(verified),
            },
            ThresholdOutcome::AlwaysEquilibrium { probe } => ThresholdReport {
                kind: "always".into(),
                gamma_bar: Some(sig6(probe)),
                bracket: None,
                verified: None,
            },
            ThresholdOutcome::NeverEquilibrium { probe } => ThresholdReport {
                kind: "never".into(),
                gamma_bar: Some(sig6(probe)),
                bracket: None,
                verified: None,
            },
        })
    } else {
        None
    };
    let minimal_k = if args.min_k {
        min_k(&target, &tv, &model, args.gamma, 4096).map_err(from_equilibrium)?
    } else {
        None
    };

    #[derive(Serialize)]
    struct EquilibriumReport {
        manifest: RunManifest,
        gamma: f64,
        punishment_k: usize,
        max_gain: f64,
        equilibrium: bool,
        bound_certifies: bool,
        bound_v_bar: f64,
        bound_w_min: f64,
        bound_gap: f64,
        bound_t_star: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        threshold: Option<ThresholdReport>,
        #[serde(skip_serializing_if = "Option::is_none")]
        min_k: Option<usize>,
    }
    let report = EquilibriumReport {
        manifest: RunManifest::new(None, snapshot),
        gamma: args.gamma,
        punishment_k: args.k,
        max_gain: sig6(gain.max_gain),
        equilibrium: gain.is_equilibrium(),
        bound_certifies,
        bound_v_bar: sig6(comps.v_bar),
        bound_w_min: sig6(comps.w_min),
        bound_gap: sig6(comps.gap_a),
        bound_t_star: comps.t_star,
        threshold,
        min_k: minimal_k,
    };
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_json(&dir.join("equilibrium.json"), &report)?;
        let manifest = RunManifest::new(None, serde_json::Value::Null);
        write_manifest(dir, &manifest, started.elapsed().as_millis())?;
    }
    print_json(&report)
}

fn cmd_stats(args: StatsArgs, started: Instant) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.file.display())))?;
    let g = Network::parse_edge_list(&text, 0).map_err(|e| CliError::Config(e.to_string()))?;
    #[derive(Serialize)]
    struct StatsReport {
        manifest: RunManifest,
        n: usize,
        links: usize,
        stats: NetworkStatsReport,
    }
    let report = StatsReport {
        manifest: RunManifest::new(
            None,
            serde_json::json!({"file": args.file.display().to_string()}),
        ),
        n: g.n(),
        links: g.link_count(),
        stats: NetworkStatsReport::from(&stats(&g)),
    };
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_json(&dir.join("stats.json"), &report)?;
        let manifest = RunManifest::new(None, serde_json::Value::Null);
        write_manifest(dir, &manifest, started.elapsed().as_millis())?;
    }
    print_json(&report)
}
