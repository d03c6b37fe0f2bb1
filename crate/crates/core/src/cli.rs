//! Command-line front end.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cache::{trim_float, write_events_jsonl, Capacity, Minutes};
use crate::harness::{
    build_cache, cell_workload, load_ranking, run_experiment, simulate, CellSettings, ExperimentSpec, HarnessError,
};
use crate::metrics::{aggregate, compute_report, write_reports_csv, write_stats_csv, GroupKey, ReportConfig, SimulationReport};
use crate::policies::{PolicyKind, RecencyVictim};
use crate::workload::{
    generate_trace, read_trace_jsonl, write_trace_jsonl, QuerySelection, WorkloadConfig, ROAD_WORK_SEED,
};

#[derive(Debug, Parser)]
#[command(name = "cclab", version, about = "Context freshness caching experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank attributes from a pairwise judgment file.
    Rank {
        #[arg(long)]
        judgments: Option<PathBuf>,
        /// Print the ranking as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run one policy on one generated trace.
    Simulate(SimulateArgs),
    /// Run every cell of an experiment spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, env = "CCLAB_OUT")]
        out: Option<PathBuf>,
        /// Overrides the spec's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one policy on a previously exported trace.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        cache: CacheArgs,
        #[arg(long, env = "CCLAB_OUT")]
        out: Option<PathBuf>,
        /// Also write the event log.
        #[arg(long)]
        events: bool,
    },
    /// Aggregate cell reports from files or directories.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "policy,threshold,queries,capacity")]
        group_by: Vec<GroupKey>,
    },
}

#[derive(Debug, Args)]
struct CacheArgs {
    #[arg(long, default_value = "pfpa")]
    policy: PolicyKind,
    /// Freshness threshold in minutes.
    #[arg(long, default_value_t = 20.0)]
    threshold: Minutes,
    /// Entries ("5") or a share of the attributes ("20%", "0.2").
    #[arg(long, default_value = "100%")]
    capacity: Capacity,
    #[arg(long)]
    judgments: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    window_size: usize,
    #[arg(long, default_value_t = 4)]
    top_k: usize,
    /// Evict the most recent entry under `ru`.
    #[arg(long)]
    mru: bool,
    #[arg(long)]
    count_expired_as_hit: bool,
}

impl CacheArgs {
    fn settings(&self) -> CellSettings {
        CellSettings {
            window_size: self.window_size,
            top_k: self.top_k,
            recency_victim: if self.mru { RecencyVictim::MostRecent } else { RecencyVictim::LeastRecent },
            count_expired_as_hit: self.count_expired_as_hit,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    cache: CacheArgs,
    #[arg(long, default_value_t = 500)]
    queries: usize,
    #[arg(long, default_value_t = ROAD_WORK_SEED)]
    seed: u64,
    /// Workload JSON; the road-work scenario when absent.
    #[arg(long)]
    workload: Option<PathBuf>,
    #[arg(long, value_parser = parse_selection)]
    selection: Option<QuerySelection>,
    #[arg(long)]
    attributes_per_query: Option<usize>,
    #[arg(long, env = "CCLAB_OUT")]
    out: Option<PathBuf>,
    /// Also write the event log.
    #[arg(long)]
    events: bool,
    /// Also write the generated trace.
    #[arg(long)]
    trace: bool,
}

fn parse_selection(s: &str) -> Result<QuerySelection, String> {
    match s {
        "top_ranked" | "top" => Ok(QuerySelection::TopRanked),
        "weighted" => Ok(QuerySelection::Weighted),
        other => Err(format!("unknown selection `{other}` (top_ranked, weighted)")),
    }
}

/// Parse `argv` (program name first) and run; returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            e.exit_code()
        }
    }
}

fn one_line(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |e| HarnessError::io(path, e)
}

fn write_stdout(bytes: &[u8]) -> Result<(), HarnessError> {
    io::stdout().write_all(bytes).map_err(io_err(Path::new("<stdout>")))
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Rank { judgments, json } => rank(judgments.as_deref(), json),
        Command::Simulate(args) => simulate_cmd(args),
        Command::Sweep { spec, out, seed, workers } => sweep(&spec, out, seed, workers),
        Command::Replay { trace, cache, out, events } => replay(&trace, &cache, out, events),
        Command::Report { inputs, group_by } => report(&inputs, &group_by),
    }
}

fn rank(judgments: Option<&Path>, json: bool) -> Result<(), HarnessError> {
    let ranking = load_ranking(judgments)?;
    let mut text = String::new();
    if json {
        text = serde_json::to_string_pretty(&ranking).expect("ranking serialises");
        text.push('\n');
    } else {
        text.push_str("rank,attribute,weight,stability\n");
        for a in ranking.by_rank() {
            text.push_str(&format!("{},{},{:.6},{:.3}\n", a.rank, a.id, a.weight, a.stability));
        }
        let d = &ranking.diagnostics;
        text.push_str(&format!(
            "# lambda_max={:.6} ci={:.6} cr={:.6} consistent={}\n",
            d.lambda_max, d.ci, d.cr, d.consistent
        ));
    }
    write_stdout(text.as_bytes())
}

fn write_outputs(
    out: &Path,
    stem: &str,
    report: &SimulationReport,
    csv_bytes: &[u8],
    events: Option<&[crate::cache::CacheEvent]>,
) -> Result<(), HarnessError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join(format!("{stem}.csv"));
    fs::write(&path, csv_bytes).map_err(io_err(&path))?;
    let path = out.join(format!("{stem}.json"));
    let mut json = serde_json::to_vec_pretty(report).expect("report serialises");
    json.push(b'\n');
    fs::write(&path, json).map_err(io_err(&path))?;
    if let Some(events) = events {
        let path = out.join(format!("{stem}.jsonl"));
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        write_events_jsonl(io::BufWriter::new(file), events).map_err(io_err(&path))?;
    }
    Ok(())
}

fn run_single(
    trace: &[crate::workload::TraceEvent],
    cache: &CacheArgs,
    queries: usize,
    seed: Option<u64>,
) -> Result<(SimulationReport, Vec<crate::cache::CacheEvent>, Vec<u8>), HarnessError> {
    let ranking = load_ranking(cache.judgments.as_deref())?;
    let (mut instance, entries) = build_cache(cache.policy, cache.threshold, cache.capacity, &ranking, &cache.settings())?;
    let events = simulate(trace, instance.as_mut())?;
    let config = ReportConfig {
        policy: cache.policy,
        threshold_t: cache.threshold,
        num_queries: queries,
        capacity: cache.capacity,
        count_expired_as_hit: cache.count_expired_as_hit,
    };
    let mut report = compute_report(&events, &config)?;
    report.capacity_entries = Some(entries);
    report.seed = seed;
    let mut csv_bytes = Vec::new();
    write_reports_csv(&mut csv_bytes, std::slice::from_ref(&report)).map_err(|e| HarnessError::io("<csv>", e.into()))?;
    Ok((report, events, csv_bytes))
}

fn simulate_cmd(args: SimulateArgs) -> Result<(), HarnessError> {
    let base = match &args.workload {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            serde_json::from_str::<WorkloadConfig>(&text)
                .map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", path.display())))?
        }
        None => crate::workload::scenario_road_work(),
    };
    let mut workload = cell_workload(&base, args.queries, args.seed);
    if let Some(selection) = args.selection {
        workload.selection = selection;
    }
    if let Some(k) = args.attributes_per_query {
        workload.attributes_per_query = k;
    }
    if (args.events || args.trace) && args.out.is_none() {
        return Err(HarnessError::ConfigInvalid("--events and --trace need --out or CCLAB_OUT".into()));
    }
    let ranking = load_ranking(args.cache.judgments.as_deref())?;
    let trace = generate_trace(&workload, &ranking)?;
    let (report, events, csv_bytes) = run_single(&trace, &args.cache, args.queries, Some(args.seed))?;
    if let Some(out) = &args.out {
        let c = &args.cache;
        let stem = format!(
            "simulate_{}_{}_{}_{}_{}",
            c.policy,
            trim_float(c.threshold),
            args.queries,
            c.capacity.label(),
            args.seed
        );
        write_outputs(out, &stem, &report, &csv_bytes, args.events.then_some(events.as_slice()))?;
        if args.trace {
            let path = out.join(format!("trace_{}_{}.jsonl", args.queries, args.seed));
            let file = fs::File::create(&path).map_err(io_err(&path))?;
            write_trace_jsonl(io::BufWriter::new(file), &trace).map_err(io_err(&path))?;
        }
    }
    write_stdout(&csv_bytes)
}

fn replay(trace_path: &Path, cache: &CacheArgs, out: Option<PathBuf>, events: bool) -> Result<(), HarnessError> {
    let file = fs::File::open(trace_path).map_err(io_err(trace_path))?;
    let trace = read_trace_jsonl(BufReader::new(file)).map_err(io_err(trace_path))?;
    let queries = trace.iter().filter(|e| e.is_query()).count();
    let (report, log, csv_bytes) = run_single(&trace, cache, queries, None)?;
    if let Some(out) = &out {
        let stem = format!(
            "replay_{}_{}_{}_{}",
            cache.policy,
            trim_float(cache.threshold),
            queries,
            cache.capacity.label()
        );
        write_outputs(out, &stem, &report, &csv_bytes, events.then_some(log.as_slice()))?;
    } else if events {
        return Err(HarnessError::ConfigInvalid("--events needs --out or CCLAB_OUT".into()));
    }
    write_stdout(&csv_bytes)
}

fn sweep(spec_path: &Path, out: Option<PathBuf>, seed: Option<u64>, workers: Option<usize>) -> Result<(), HarnessError> {
    let mut spec = ExperimentSpec::load(spec_path)?;
    if seed.is_some() {
        spec.seed = seed;
    }
    let base_dir = spec_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out_dir = out
        .or_else(|| spec.output_dir.as_ref().map(|d| base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let workers = workers.or(spec.workers).unwrap_or(0);
    let outcome = run_experiment(&spec, &base_dir, &out_dir, workers)?;
    let path = out_dir.join(format!("sweep_{}.csv", spec.name));
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    write_stdout(&bytes)?;
    eprintln!("{} cells written to {}", outcome.reports.len(), out_dir.display());
    Ok(())
}

fn collect_reports(inputs: &[PathBuf]) -> Result<Vec<SimulationReport>, HarnessError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(io_err(input))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| {
                    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                    name.starts_with("cell_") && name.ends_with(".json")
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    files
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            serde_json::from_str(&text).map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", path.display())))
        })
        .collect()
}

fn report(inputs: &[PathBuf], group_by: &[GroupKey]) -> Result<(), HarnessError> {
    let reports = collect_reports(inputs)?;
    if reports.is_empty() {
        return Err(HarnessError::ConfigInvalid("no cell reports found".into()));
    }
    let rows = aggregate(&reports, group_by);
    let mut bytes = Vec::new();
    write_stats_csv(&mut bytes, group_by, &rows).map_err(|e| HarnessError::io("<csv>", e.into()))?;
    write_stdout(&bytes)
}
