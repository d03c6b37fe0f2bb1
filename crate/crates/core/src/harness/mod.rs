//! Experiment runner: ranking, trace generation, simulation and reporting
//! over the cartesian product of a sweep.

mod spec;

use std::collections::HashMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ahp::{AhpError, AttributeRanking, DsaOptions, JudgmentFile};
use crate::cache::{trim_float, write_events_jsonl, CacheError, CacheEvent, Capacity, ContextCache, Minutes};
use crate::freshness_cache::{FreshnessCache, FreshnessConfig};
use crate::metrics::{
    aggregate, compute_report, write_summary_csv, GroupKey, MetricsError, ReportConfig, SimulationReport, SummaryRow,
};
use crate::policies::{BaselineCache, PolicyKind};
use crate::workload::{generate_trace, TraceEvent, TraceKind, WorkloadConfig, WorkloadError, ROAD_WORK_JUDGMENTS};

pub use spec::{CellSettings, ExperimentSpec};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Ahp(#[from] AhpError),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cell {cell} failed: {source}")]
    CellFailed {
        cell: String,
        #[source]
        source: Box<HarnessError>,
    },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Ahp(AhpError::InconsistentJudgments(_)) => 3,
            HarnessError::Ahp(_) | HarnessError::ConfigInvalid(_) | HarnessError::Workload(_) => 4,
            HarnessError::Cache(CacheError::ConfigInvalid(_)) => 4,
            HarnessError::Cache(_) | HarnessError::Metrics(_) => 5,
            HarnessError::Io { .. } => 6,
            HarnessError::CellFailed { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// The built-in road-work ranking.
pub fn road_work_ranking() -> Result<AttributeRanking> {
    let file = JudgmentFile::from_json(ROAD_WORK_JUDGMENTS)
        .map_err(|e| HarnessError::ConfigInvalid(format!("built-in judgments: {e}")))?;
    Ok(file.rank(&DsaOptions::default())?)
}

/// Load a judgment file and rank it, or fall back to the built-in set.
pub fn load_ranking(path: Option<&Path>) -> Result<AttributeRanking> {
    match path {
        None => road_work_ranking(),
        Some(path) => {
            let file = JudgmentFile::load(path).map_err(|e| HarnessError::io(path, e))?;
            Ok(file.rank(&DsaOptions::default())?)
        }
    }
}

/// Coordinates of one simulation in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub index: usize,
    pub policy: PolicyKind,
    pub threshold_t: Minutes,
    pub queries: usize,
    pub capacity: Capacity,
    pub repetition: usize,
    pub seed: u64,
}

impl Cell {
    pub fn coordinates(&self) -> String {
        format!(
            "policy={} threshold={} queries={} capacity={} repetition={}",
            self.policy,
            trim_float(self.threshold_t),
            self.queries,
            self.capacity,
            self.repetition
        )
    }

    pub fn file_stem(&self) -> String {
        format!(
            "cell_{}_{}_{}_{}_{}",
            self.policy,
            trim_float(self.threshold_t),
            self.queries,
            self.capacity.label(),
            self.repetition
        )
    }
}

pub struct CellResult {
    pub cell: Cell,
    pub report: SimulationReport,
    pub events: Vec<CacheEvent>,
}

/// Build the cache a cell asks for.
pub fn build_cache(
    policy: PolicyKind,
    threshold_t: Minutes,
    capacity: Capacity,
    ranking: &AttributeRanking,
    settings: &CellSettings,
) -> Result<(Box<dyn ContextCache + Send>, usize)> {
    if policy == PolicyKind::Pfpa {
        let config = FreshnessConfig {
            threshold_t,
            window_size: settings.window_size,
            capacity,
            top_k: settings.top_k,
        };
        let cache = FreshnessCache::new(config, ranking)?;
        let entries = cache.capacity();
        Ok((Box::new(cache), entries))
    } else {
        let entries = capacity.resolve(ranking.len())?;
        let cache = BaselineCache::new(policy, entries, threshold_t)?.with_recency_victim(settings.recency_victim);
        Ok((Box::new(cache), entries))
    }
}

/// Drive a cache with a trace: observations are ingested, every attribute
/// of a query is looked up at the query time.
pub fn simulate(trace: &[TraceEvent], cache: &mut dyn ContextCache) -> Result<Vec<CacheEvent>, CacheError> {
    let mut log = Vec::new();
    for event in trace {
        match &event.kind {
            TraceKind::Observation { .. } => {
                let observation = event.observation().expect("observation event");
                log.extend(cache.ingest(&observation, event.time)?);
            }
            TraceKind::Query { attributes } => {
                for attribute in attributes {
                    log.extend(cache.lookup(attribute, event.time).events);
                }
            }
        }
    }
    Ok(log)
}

pub fn run_cell(
    cell: &Cell,
    ranking: &AttributeRanking,
    trace: &[TraceEvent],
    settings: &CellSettings,
) -> Result<CellResult> {
    let (mut cache, entries) = build_cache(cell.policy, cell.threshold_t, cell.capacity, ranking, settings)?;
    let events = simulate(trace, cache.as_mut())?;
    let config = ReportConfig {
        policy: cell.policy,
        threshold_t: cell.threshold_t,
        num_queries: cell.queries,
        capacity: cell.capacity,
        count_expired_as_hit: settings.count_expired_as_hit,
    };
    let mut report = compute_report(&events, &config)?;
    report.capacity_entries = Some(entries);
    report.seed = Some(cell.seed);
    report.repetition = Some(cell.repetition);
    Ok(CellResult { cell: *cell, report, events })
}

/// Workload for a given volume and seed, derived from the sweep's base.
pub fn cell_workload(base: &WorkloadConfig, queries: usize, seed: u64) -> WorkloadConfig {
    WorkloadConfig { num_queries: queries, seed, ..base.clone() }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary<'a> {
    pub name: &'a str,
    pub ranking: &'a AttributeRanking,
    pub cells: Vec<&'a SimulationReport>,
    pub summary: &'a [SummaryRow],
}

pub struct ExperimentOutcome {
    pub reports: Vec<SimulationReport>,
    pub summary: Vec<SummaryRow>,
    pub ranking: AttributeRanking,
    pub out_dir: PathBuf,
}

pub const SUMMARY_KEYS: [GroupKey; 4] = [GroupKey::Policy, GroupKey::Threshold, GroupKey::Queries, GroupKey::Capacity];

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serialises");
    bytes.push(b'\n');
    bytes
}

/// Run every cell of `spec`, writing artifacts to `out_dir`.
///
/// `base_dir` resolves a relative judgment path. Cells run on `workers`
/// threads (0 picks the rayon default); output bytes do not depend on it.
pub fn run_experiment(spec: &ExperimentSpec, base_dir: &Path, out_dir: &Path, workers: usize) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let judgments = spec.judgments.as_ref().map(|p| base_dir.join(p));
    let ranking = load_ranking(judgments.as_deref())?;
    let base = spec.workload_config();
    let cells = spec.cells();
    let settings = spec.settings();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::ConfigInvalid(format!("worker pool: {e}")))?;

    let results: Vec<Result<CellResult>> = pool.install(|| {
        let mut keys: Vec<(usize, u64)> = cells.iter().map(|c| (c.queries, c.seed)).collect();
        keys.sort_unstable();
        keys.dedup();
        let traces: HashMap<(usize, u64), Result<Vec<TraceEvent>, WorkloadError>> = keys
            .par_iter()
            .map(|&(q, seed)| ((q, seed), generate_trace(&cell_workload(&base, q, seed), &ranking)))
            .collect();
        cells
            .par_iter()
            .map(|cell| {
                let outcome = match &traces[&(cell.queries, cell.seed)] {
                    Ok(trace) => run_cell(cell, &ranking, trace, &settings),
                    Err(e) => Err(e.clone().into()),
                };
                outcome.map_err(|e| HarnessError::CellFailed { cell: cell.coordinates(), source: Box::new(e) })
            })
            .collect()
    });

    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let marker = out_dir.join(format!("sweep_{}.INCOMPLETE", spec.name));
    let mut reports = Vec::with_capacity(results.len());
    let mut failure = None;
    for result in results {
        match result {
            Ok(done) => {
                let stem = done.cell.file_stem();
                write_file(&out_dir.join(format!("{stem}.json")), &to_json(&done.report))?;
                if spec.emit_events {
                    let path = out_dir.join(format!("{stem}.jsonl"));
                    let file = fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
                    write_events_jsonl(BufWriter::new(file), &done.events).map_err(|e| HarnessError::io(&path, e))?;
                }
                reports.push(done.report);
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
            }
        }
    }
    if let Some(e) = failure {
        let note = format!(
            "sweep `{}` is incomplete: {} of {} cells finished\n{}\n",
            spec.name,
            reports.len(),
            cells.len(),
            e
        );
        write_file(&marker, note.as_bytes())?;
        return Err(e);
    }
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| HarnessError::io(&marker, e))?;
    }

    let summary = aggregate(&reports, &SUMMARY_KEYS);
    let csv_path = out_dir.join(format!("sweep_{}.csv", spec.name));
    let mut csv_bytes = Vec::new();
    write_summary_csv(&mut csv_bytes, &summary).map_err(|e| HarnessError::io(&csv_path, e.into()))?;
    write_file(&csv_path, &csv_bytes)?;
    let mirror = SweepSummary { name: &spec.name, ranking: &ranking, cells: reports.iter().collect(), summary: &summary };
    write_file(&out_dir.join(format!("sweep_{}.json", spec.name)), &to_json(&mirror))?;

    Ok(ExperimentOutcome { reports, summary, ranking, out_dir: out_dir.to_path_buf() })
}
