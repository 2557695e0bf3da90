use std::fs;
use std::path::{Path, PathBuf};

use seqforge_core::baselines::{self, ZcFamilySpec};
use seqforge_core::io::{self, Format};
use seqforge_core::solver::Solver;
use seqforge_core::{evaluate, Metrics, PaprProbeSet, Progress, RunResult, SequenceSet, SubcarrierAssignment};
use serde::Serialize;

use crate::cli::{BaselineArgs, BaselineKind, EvaluateArgs, GenerateArgs, GridArgs, WelchArgs};
use crate::config::{parse_threshold, DesignConfig, SubcarrierPattern};
use crate::error::{CliError, Result};

const PROGRESS_EVERY: usize = 100;

pub fn default_report_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".report.json");
    out.with_file_name(name)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

fn read_set(path: &Path) -> Result<SequenceSet> {
    io::read(path).map_err(|e| CliError::core(path.display().to_string(), e))
}

fn write_set(path: &Path, set: &SequenceSet) -> Result<()> {
    io::write(path, set, Format::from_path(path)).map_err(|e| CliError::core(path.display().to_string(), e))
}

pub fn papr_stage_note(config: &DesignConfig) -> &'static str {
    if config.solver.papr_is_vacuous() {
        "skipped: threshold >= L, constraint is vacuous"
    } else {
        "active"
    }
}

/// Runs the designer for a resolved config, optionally printing a status line
/// to stderr every 100 iterations.
pub fn design(config: &DesignConfig, quiet: bool) -> Result<RunResult> {
    let solver = match &config.init {
        Some(path) => Solver::with_initial(config.solver.clone(), read_set(path)?)?,
        None => Solver::new(config.solver.clone())?,
    };
    let mut status = |p: &Progress| {
        if p.iteration.is_multiple_of(PROGRESS_EVERY) {
            eprintln!(
                "iter {:>6}  mu {:.6}  mu_min {:.6}  R_seq {:.6}  tau_seq {:.5}  tau_papr {:.5}",
                p.iteration, p.mu_current, p.mu_min, p.r_seq, p.tau_seq, p.tau_papr
            );
        }
    };
    let sink: Option<&mut dyn FnMut(&Progress)> = if quiet { None } else { Some(&mut status) };
    Ok(solver.run(sink)?)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    tool: &'static str,
    version: &'static str,
    config: std::collections::BTreeMap<&'static str, String>,
    papr_stage: &'static str,
    run: &'a seqforge_core::RunReport,
}

pub fn generate(args: &GenerateArgs) -> Result<RunResult> {
    let config = args.design.settings()?.resolve()?;
    let result = design(&config, args.quiet)?;

    let report_path = args.report.clone().unwrap_or_else(|| default_report_path(&args.out));
    let report = ReportFile {
        tool: "seqforge",
        version: env!("CARGO_PKG_VERSION"),
        config: config.echo(),
        papr_stage: papr_stage_note(&config),
        run: &result.report,
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&report_path, &(body + "\n"))?;

    let Some(best) = &result.best else {
        return Err(CliError::NoFeasibleSolution);
    };
    write_set(&args.out, best)?;
    if !args.quiet {
        let m = result.report.final_metrics.as_ref().expect("feasible run has metrics");
        eprintln!(
            "{}: N={} L={} coherence {:.6} max PAPR {:.4} ({} iterations, {})",
            args.out.display(),
            best.count(),
            best.len(),
            m.coherence,
            m.max_papr,
            result.report.iterations,
            result.report.termination,
        );
    }
    Ok(result)
}

/// Applies `--n-subcarriers/--n-samples/--subcarriers` on top of an existing
/// assignment of length `len`.
fn override_assignment(base: Option<&SubcarrierAssignment>, len: usize, grid: &GridArgs) -> Result<SubcarrierAssignment> {
    let indices = match (&grid.subcarriers, base) {
        (Some(raw), _) => raw.parse::<SubcarrierPattern>()?.indices(len)?,
        (None, Some(a)) => a.indices().to_vec(),
        (None, None) => SubcarrierPattern::Contiguous.indices(len)?,
    };
    let (nc, ns) = match base {
        Some(a) => (
            grid.n_subcarriers.unwrap_or(a.n_subcarriers()),
            grid.n_samples.unwrap_or(a.n_samples()),
        ),
        None => {
            let a = SubcarrierPattern::Contiguous.assignment(len, grid.n_subcarriers, grid.n_samples)?;
            (a.n_subcarriers(), a.n_samples())
        }
    };
    Ok(SubcarrierAssignment::new(indices, nc, ns)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub file: String,
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub n_subcarriers: usize,
    pub n_samples: usize,
    pub metrics: Metrics,
    pub papr_min: f64,
    pub papr_median: f64,
    pub papr_max: f64,
    /// Present when a threshold was given; `true` means every sequence passes.
    pub papr_threshold: Option<String>,
    pub papr_pass: Option<bool>,
}

pub fn evaluate_file(args: &EvaluateArgs) -> Result<Evaluation> {
    let set = read_set(&args.file)?;
    let assignment = override_assignment(Some(set.assignment()), set.len(), &args.grid)?;
    let set = set.with_assignment(assignment)?;
    let probes = PaprProbeSet::new(set.assignment());
    let metrics = evaluate(&set, &probes)?;

    let mut sorted = metrics.papr_per_sequence.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 { 0.5 * (sorted[mid - 1] + sorted[mid]) } else { sorted[mid] };

    let threshold = args.papr_threshold.as_deref().map(parse_threshold).transpose()?;
    let pass = threshold.map(|t| metrics.max_papr <= t);

    let eval = Evaluation {
        file: args.file.display().to_string(),
        len: set.len(),
        count: set.count(),
        n_subcarriers: set.assignment().n_subcarriers(),
        n_samples: set.assignment().n_samples(),
        papr_min: sorted[0],
        papr_median: median,
        papr_max: metrics.max_papr,
        metrics,
        papr_threshold: threshold.map(|t| t.to_string()),
        papr_pass: pass,
    };

    println!("file          {}", eval.file);
    println!("L, N          {}, {}", eval.len, eval.count);
    println!("N_C, N_S      {}, {}", eval.n_subcarriers, eval.n_samples);
    println!("coherence     {:.17}", eval.metrics.coherence);
    match eval.metrics.welch_bound {
        Some(w) => println!("welch_bound   {w:.17}"),
        None => println!("welch_bound   n/a (N <= L)"),
    }
    println!(
        "papr          min {:.6}  median {:.6}  max {:.17}",
        eval.papr_min, eval.papr_median, eval.papr_max
    );
    if let (Some(t), Some(p)) = (threshold, pass) {
        println!("threshold     {t}  {}", if p { "PASS" } else { "FAIL" });
    }

    if let Some(path) = &args.json {
        let body = serde_json::to_string_pretty(&eval).expect("metrics serialize");
        write_file(path, &(body + "\n"))?;
    }
    if let (Some(t), Some(false)) = (threshold, pass) {
        return Err(CliError::ThresholdExceeded { max_papr: eval.papr_max, threshold: t });
    }
    Ok(eval)
}

fn parse_roots(raw: &str, len: usize, shifts: usize) -> Result<ZcFamilySpec> {
    if raw.trim().eq_ignore_ascii_case("all") {
        return Ok(ZcFamilySpec::all_roots(len, shifts)?);
    }
    let roots = raw
        .split(',')
        .map(|r| r.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| CliError::validation("roots", format!("cannot parse `{raw}`")))?;
    Ok(ZcFamilySpec::new(len, roots, shifts)?)
}

fn finish_baseline(set: SequenceSet, select: Option<usize>, out: &Path) -> Result<SequenceSet> {
    let set = match select {
        Some(n) => baselines::select_lowest_coherence_subset(&set, n)
            .map_err(|e| CliError::validation("select", e.to_string()))?,
        None => set,
    };
    write_set(out, &set)?;
    Ok(set)
}

pub fn baseline(args: &BaselineArgs) -> Result<SequenceSet> {
    match &args.kind {
        BaselineKind::Zc(zc) => {
            let len = match (zc.length, zc.pad_to) {
                (Some(len), _) => len,
                (None, Some(target)) => baselines::largest_prime_at_most(target).ok_or_else(|| {
                    CliError::validation("pad_to", format!("no odd prime <= {target}"))
                })?,
                (None, None) => return Err(CliError::validation("length", "give --length or --pad-to")),
            };
            let target = zc.pad_to.unwrap_or(len);
            let spec = parse_roots(&zc.roots, len, zc.shifts)?;
            let assignment = override_assignment(None, target, &zc.grid)?;
            let set = baselines::zc_generate(&spec, assignment)?;
            finish_baseline(set, zc.select, &zc.out)
        }
        BaselineKind::Gaussian(g) => {
            let assignment = override_assignment(None, g.len, &g.grid)?;
            let set = baselines::random_gaussian_set(assignment, g.count, g.seed)?;
            finish_baseline(set, g.select, &g.out)
        }
    }
}

pub fn welch(args: &WelchArgs) -> Result<f64> {
    seqforge_core::welch_bound(args.len, args.count)
        .map_err(|e| CliError::validation("N", e.to_string()))
}
