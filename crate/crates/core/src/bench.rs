//! Benchmark harness over random-game cells, fanned out on a rayon pool.

use crate::error::{Error, Result};
use crate::game::{generate_random, GeneratorKind, GeneratorParams};
use crate::homotopy::Method;
use crate::solve::{solve, SolveOptions};
use crate::tracer::TraceStatus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const THREADS_ENV: &str = "PROPERPATH_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub kind: GeneratorKind,
    pub players: usize,
    pub depth: usize,
    pub actions: usize,
}

impl BenchCell {
    pub fn new(kind: GeneratorKind, players: usize, depth: usize, actions: usize) -> Self {
        BenchCell { kind, players, depth, actions }
    }

    pub fn label(&self) -> String {
        let t = match self.kind {
            GeneratorKind::Type1 => 1,
            GeneratorKind::Type2 => 2,
        };
        format!("type{t}({},{},{})", self.players, self.depth, self.actions)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub cells: Vec<BenchCell>,
    pub methods: Vec<Method>,
    pub runs: usize,
    pub base_seed: u64,
    pub max_iterations: usize,
    pub max_time_s: f64,
    /// Worker count; falls back to the environment variable, then to all cores.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            cells: vec![
                BenchCell::new(GeneratorKind::Type1, 2, 2, 2),
                BenchCell::new(GeneratorKind::Type1, 2, 3, 2),
                BenchCell::new(GeneratorKind::Type2, 2, 2, 2),
            ],
            methods: Method::ALL.to_vec(),
            runs: 20,
            base_seed: 0,
            max_iterations: 5000,
            max_time_s: 120.0,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub cell: String,
    pub method: Method,
    pub seed: u64,
    pub status: String,
    pub iterations: usize,
    pub time_s: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub max: f64,
    pub min: f64,
    pub median: f64,
}

impl Stats {
    fn of(mut v: Vec<f64>) -> Stats {
        if v.is_empty() {
            return Stats { max: f64::NAN, min: f64::NAN, median: f64::NAN };
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Stats { max: v[n - 1], min: v[0], median }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: String,
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    /// Over converged runs.
    pub iterations: Stats,
    pub time_s: Stats,
    pub fail_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub threads: usize,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<CellSummary>,
}

pub fn thread_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// One run: game `seed` of the cell, random start and α from the same seed.
pub fn run_one(cell: &BenchCell, method: Method, seed: u64, cfg: &BenchConfig) -> RunRecord {
    let mut opts = SolveOptions::seeded(method, seed);
    opts.tracer.max_iterations = cfg.max_iterations;
    opts.tracer.max_time_s = cfg.max_time_s;
    opts.certify = false;
    let start = std::time::Instant::now();
    let outcome = generate_random(&GeneratorParams::new(cell.kind, cell.players, cell.depth, cell.actions, seed))
        .and_then(|g| solve(&g, &opts));
    let time_s = start.elapsed().as_secs_f64();
    let (status, iterations, converged) = match outcome {
        Ok(r) => (r.status.name().to_string(), r.iterations, r.status == TraceStatus::Converged),
        Err(e) => (format!("error: {e}"), 0, false),
    };
    RunRecord { cell: cell.label(), method, seed, status, iterations, time_s, converged }
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.runs == 0 || cfg.cells.is_empty() || cfg.methods.is_empty() {
        return Err(Error::InvalidParameter("bench needs at least one cell, method and run".into()));
    }
    let threads = thread_count(cfg.threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let jobs: Vec<(BenchCell, Method, u64)> = cfg
        .cells
        .iter()
        .flat_map(|c| cfg.methods.iter().flat_map(move |&m| (0..cfg.runs as u64).map(move |r| (*c, m, r))))
        .collect();
    let records: Vec<RunRecord> =
        pool.install(|| jobs.par_iter().map(|(c, m, r)| run_one(c, *m, cfg.base_seed + r, cfg)).collect());
    let mut summaries = Vec::new();
    for c in &cfg.cells {
        for &m in &cfg.methods {
            let label = c.label();
            let rs: Vec<&RunRecord> = records.iter().filter(|r| r.cell == label && r.method == m).collect();
            let ok: Vec<&&RunRecord> = rs.iter().filter(|r| r.converged).collect();
            let failures = rs.len() - ok.len();
            summaries.push(CellSummary {
                cell: label,
                method: m,
                runs: rs.len(),
                failures,
                iterations: Stats::of(ok.iter().map(|r| r.iterations as f64).collect()),
                time_s: Stats::of(ok.iter().map(|r| r.time_s).collect()),
                fail_rate: failures as f64 / rs.len() as f64,
            });
        }
    }
    Ok(BenchReport { config: cfg.clone(), threads, records, summaries })
}

/// Table with columns cell,method,stat,iters,time_s,fail_rate; one row per statistic.
pub fn write_csv<W: Write>(summaries: &[CellSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cell", "method", "stat", "iters", "time_s", "fail_rate"]).map_err(csv_err)?;
    for s in summaries {
        for (stat, it, tm) in [
            ("max", s.iterations.max, s.time_s.max),
            ("min", s.iterations.min, s.time_s.min),
            ("median", s.iterations.median, s.time_s.median),
        ] {
            w.write_record([
                s.cell.clone(),
                s.method.to_string(),
                stat.to_string(),
                format!("{it}"),
                format!("{tm:.6}"),
                format!("{}", s.fail_rate),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cell_csv_schema() {
        let cfg = BenchConfig {
            cells: vec![BenchCell::new(GeneratorKind::Type1, 2, 2, 2)],
            runs: 3,
            threads: Some(2),
            ..Default::default()
        };
        let rep = run_bench(&cfg).unwrap();
        assert_eq!(rep.records.len(), 6);
        assert_eq!(rep.summaries.len(), 2);
        let mut buf = Vec::new();
        write_csv(&rep.summaries, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("cell,method,stat,iters,time_s,fail_rate\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 3);
        assert!(text.contains("\"type1(2,2,2)\",lgpr,median"));
    }

    #[test]
    fn stats_and_threads() {
        let s = Stats::of(vec![3.0, 1.0, 2.0, 10.0]);
        assert_eq!((s.min, s.max, s.median), (1.0, 10.0, 2.5));
        assert!(Stats::of(vec![]).median.is_nan());
        assert_eq!(thread_count(Some(3)), 3);
        assert!(run_bench(&BenchConfig { runs: 0, ..Default::default() }).is_err());
    }
}
