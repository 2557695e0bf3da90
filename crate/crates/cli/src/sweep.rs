//! Parameter sweeps: one design run per (axis value, seed), emitted as CSV.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use seqforge_core::solver::Termination;

use crate::cli::{Axis, SweepArgs};
use crate::commands::design;
use crate::config::{parse_threshold, DesignConfig, Settings};
use crate::error::{CliError, Result};

pub const CSV_TAG: &str = "# seqforge-sweep v1";
pub const CSV_COLUMNS: &str =
    "kind,axis,value,seed,outcome,papr_threshold,L,N,mu_min,max_papr,welch_bound,iterations,termination,wall_time_s";

/// Environment variable consulted when `--jobs` is not given.
pub const JOBS_ENV: &str = "SEQFORGE_JOBS";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub seeds_per_point: usize,
}

impl SweepSpec {
    pub fn new(axis: Axis, values: Vec<f64>, seeds_per_point: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(CliError::validation("values", "at least one value is required"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::validation("values", "must be strictly increasing"));
        }
        if axis != Axis::PaprThreshold
            && values.iter().any(|v| !v.is_finite() || v.fract() != 0.0 || *v < 1.0)
        {
            return Err(CliError::validation("values", format!("{} values must be positive integers", axis.name())));
        }
        if seeds_per_point == 0 {
            return Err(CliError::validation("seeds", "must be at least 1"));
        }
        Ok(Self { axis, values, seeds_per_point })
    }

    pub fn parse(axis: Axis, raw: &str, seeds_per_point: usize) -> Result<Self> {
        let values = raw
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(|v| match axis {
                Axis::PaprThreshold => parse_threshold(v),
                _ => v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::validation("values", format!("cannot parse `{}`", v.trim()))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axis, values, seeds_per_point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Run,
    /// Best seed of a point: lowest `mu_min`, ties to the lower seed.
    Best,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kind: RowKind,
    pub value: f64,
    pub seed: u64,
    pub papr_threshold: f64,
    pub len: usize,
    pub count: usize,
    /// `None` when no feasible set was found.
    pub mu_min: Option<f64>,
    pub max_papr: Option<f64>,
    pub welch_bound: Option<f64>,
    pub iterations: usize,
    pub termination: Termination,
    pub wall_time_seconds: f64,
}

impl SweepRow {
    pub fn feasible(&self) -> bool {
        self.mu_min.is_some()
    }
}

/// Resolves every (value, seed) point up front so a bad value aborts the sweep
/// before any run starts.
pub fn point_configs(spec: &SweepSpec, base: &Settings) -> Result<Vec<(f64, DesignConfig)>> {
    if base.get("init").is_some() {
        return Err(CliError::validation("init", "warm starts are not supported in sweeps"));
    }
    let first_seed: u64 = match base.get("seed") {
        Some(raw) => raw.parse().map_err(|_| CliError::validation("seed", format!("cannot parse `{raw}`")))?,
        None => 1,
    };
    let key = match spec.axis {
        Axis::PaprThreshold => "papr_threshold",
        Axis::SequenceLength => "L",
        Axis::SequenceCount => "N",
    };
    let mut out = Vec::with_capacity(spec.values.len() * spec.seeds_per_point);
    for &value in &spec.values {
        for k in 0..spec.seeds_per_point as u64 {
            let mut settings = base.clone();
            settings.set(key, value.to_string())?;
            settings.set("seed", (first_seed + k).to_string())?;
            out.push((value, settings.resolve()?));
        }
    }
    Ok(out)
}

pub fn default_jobs() -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs all points on a pool of `jobs` threads. Rows come back in
/// (value, seed) order with each point's best row after its runs.
pub fn run_sweep(spec: &SweepSpec, base: &Settings, jobs: usize, quiet: bool) -> Result<Vec<SweepRow>> {
    let points = point_configs(spec, base)?;
    let total = points.len();
    let done = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::validation("jobs", e.to_string()))?;

    let runs: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|(value, config)| {
                let result = design(config, true)?;
                let report = &result.report;
                let metrics = report.final_metrics.as_ref();
                let row = SweepRow {
                    kind: RowKind::Run,
                    value: *value,
                    seed: config.solver.seed,
                    papr_threshold: config.solver.papr_threshold,
                    len: config.solver.len(),
                    count: config.solver.count,
                    mu_min: metrics.map(|m| m.coherence),
                    max_papr: metrics.map(|m| m.max_papr),
                    welch_bound: report.welch_bound,
                    iterations: report.iterations,
                    termination: report.termination,
                    wall_time_seconds: report.wall_time_seconds,
                };
                if !quiet {
                    let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                    eprintln!(
                        "[{k}/{total}] {}={} seed={} mu_min={} ({})",
                        spec.axis.name(),
                        value,
                        row.seed,
                        row.mu_min.map_or("n/a".to_string(), |m| format!("{m:.6}")),
                        row.termination,
                    );
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::with_capacity(runs.len() + spec.values.len());
    for chunk in runs.chunks(spec.seeds_per_point) {
        rows.extend_from_slice(chunk);
        let best = chunk
            .iter()
            .filter(|r| r.feasible())
            .min_by(|a, b| a.mu_min.partial_cmp(&b.mu_min).unwrap().then(a.seed.cmp(&b.seed)))
            .unwrap_or(&chunk[0]);
        rows.push(SweepRow { kind: RowKind::Best, ..best.clone() });
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(axis: Axis, rows: &[SweepRow], timing: bool) -> String {
    let mut out = format!("{CSV_TAG}\n{CSV_COLUMNS}\n");
    for r in rows {
        let kind = match r.kind {
            RowKind::Run => "run",
            RowKind::Best => "best",
        };
        let outcome = if r.feasible() { "feasible" } else { "no_feasible_solution" };
        let wall = if timing { format!("{:.3}", r.wall_time_seconds) } else { String::new() };
        out.push_str(&format!(
            "{kind},{},{},{},{outcome},{},{},{},{},{},{},{},{},{wall}\n",
            axis.name(),
            r.value,
            r.seed,
            r.papr_threshold,
            r.len,
            r.count,
            opt(r.mu_min),
            opt(r.max_papr),
            opt(r.welch_bound),
            r.iterations,
            r.termination,
        ));
    }
    out
}

pub fn sweep(args: &SweepArgs) -> Result<String> {
    let spec = SweepSpec::parse(args.axis, &args.values, args.seeds)?;
    let base = args.design.settings()?;
    let jobs = args.jobs.unwrap_or_else(default_jobs);
    let rows = run_sweep(&spec, &base, jobs, args.quiet)?;
    let csv = to_csv(args.axis, &rows, !args.no_timing);
    match &args.out {
        Some(path) => std::fs::write(path, &csv).map_err(|e| CliError::io(path, e))?,
        None => print!("{csv}"),
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::parse(Axis::PaprThreshold, "", 1).is_err());
        assert!(SweepSpec::parse(Axis::PaprThreshold, "2,1.5", 1).is_err());
        assert!(SweepSpec::parse(Axis::PaprThreshold, "2,2", 1).is_err());
        assert!(SweepSpec::parse(Axis::SequenceLength, "36.5", 1).is_err());
        assert!(SweepSpec::parse(Axis::SequenceCount, "40", 0).is_err());
        let s = SweepSpec::parse(Axis::PaprThreshold, "1.5,2,4,inf", 3).unwrap();
        assert_eq!(s.values, vec![1.5, 2.0, 4.0, f64::INFINITY]);
    }

    #[test]
    fn points_are_ordered_by_value_then_seed() {
        let base = Settings::parse("L=8\nN=12\nseed=7").unwrap();
        let spec = SweepSpec::parse(Axis::SequenceCount, "12,16", 2).unwrap();
        let points = point_configs(&spec, &base).unwrap();
        let got: Vec<(f64, u64, usize)> =
            points.iter().map(|(v, c)| (*v, c.solver.seed, c.solver.count)).collect();
        assert_eq!(got, vec![(12.0, 7, 12), (12.0, 8, 12), (16.0, 7, 16), (16.0, 8, 16)]);
    }

    #[test]
    fn length_axis_reapplies_pattern() {
        let base = Settings::parse("N=50\nsubcarriers=stride=2\nN_C=256").unwrap();
        let spec = SweepSpec::parse(Axis::SequenceLength, "8,12", 1).unwrap();
        let points = point_configs(&spec, &base).unwrap();
        assert_eq!(points[1].1.solver.assignment.indices().last(), Some(&24));
    }

    #[test]
    fn sequence_length_rows_carry_welch_bound() {
        let base = Settings::parse("N=30\nN_S=64\nmax_iterations=5").unwrap();
        let spec = SweepSpec::parse(Axis::SequenceLength, "8,12", 1).unwrap();
        let rows = run_sweep(&spec, &base, 2, true).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.welch_bound, Some(seqforge_core::welch_bound(r.len, 30).unwrap()));
        }
        let csv = to_csv(Axis::SequenceLength, &rows, false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_TAG);
        assert_eq!(lines[1], CSV_COLUMNS);
        assert!(lines[2].starts_with("run,sequence_length,8,1,feasible,inf,8,30,"));
        assert!(lines[3].starts_with("best,sequence_length,8,1,"));
        assert!(lines[2].ends_with(','));
    }

    #[test]
    fn infeasible_point_does_not_abort() {
        let base = Settings::parse("L=4\nN=6\nN_S=16\nmax_iterations=3\npapr_inner_cap=5").unwrap();
        let spec = SweepSpec::parse(Axis::PaprThreshold, "1.000001,inf", 1).unwrap();
        let rows = run_sweep(&spec, &base, 1, true).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(!rows[0].feasible());
        assert_eq!(rows[0].termination, Termination::NoFeasibleSolution);
        assert!(!rows[1].feasible());
        assert!(rows[2].feasible());
        let csv = to_csv(Axis::PaprThreshold, &rows, true);
        assert!(csv.lines().nth(2).unwrap().contains(",no_feasible_solution,"));
    }

    #[test]
    fn sweep_rejects_warm_start() {
        let base = Settings::parse("L=4\nN=6\ninit=foo.txt").unwrap();
        let spec = SweepSpec::parse(Axis::PaprThreshold, "2", 1).unwrap();
        assert!(matches!(point_configs(&spec, &base), Err(CliError::Validation { .. })));
    }
}
