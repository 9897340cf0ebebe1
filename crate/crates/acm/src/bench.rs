//! Paired plain-versus-ACM sweeps.
//!
//! Each `(sweep value, trial)` cell draws one instance from its own random
//! substream and hands the same instance to every requested method, so
//! per-row comparisons of cardinality and time are paired. Cells run on a
//! rayon pool whose size is taken from `ACM_THREADS` when set; results are
//! re-ordered by key afterwards so output does not depend on scheduling.

use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use acm_core::engine::{self, Cube, EngineError, SolveOptions, SolveReport, TracePoint};
use acm_core::interval::angle_domain;
use acm_core::geom::{norm, sub, Vec3};
use acm_core::planar::{build_planar, solve_acm1, solve_plain2d, PlanarDomain};
use acm_core::registration::{
    build_ri_pairs, solve_acm_corr, solve_acm_corrless, solve_plain_corr, solve_plain_corrless, PairCombine,
    TranslationBox,
};
use acm_core::resection::{build_tims, solve_acm0_report, PlainYawBounder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{
    angle_diff, crop_and_transform, gen_planar, gen_reg3d_corr, gen_reg3d_corrless, gen_resection, SceneConfig,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Resection1d,
    Planar2d,
    Reg3dCorr,
    Reg3dCorrless,
}

impl Problem {
    pub fn default_eps(self) -> f64 {
        match self {
            Problem::Resection1d => 0.2,
            Problem::Planar2d => 0.02,
            Problem::Reg3dCorr | Problem::Reg3dCorrless => 0.001,
        }
    }

    /// Outlier ratios, or overlap ratios for the correspondence-less case.
    pub fn default_sweep(self) -> &'static str {
        match self {
            Problem::Reg3dCorrless => "0.1:0.7:0.1,0.81:0.9:0.01",
            _ => "0.1:0.9:0.1,0.91:0.95:0.01",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Resection1d => "resection1d",
            Problem::Planar2d => "planar2d",
            Problem::Reg3dCorr => "reg3d-corr",
            Problem::Reg3dCorrless => "reg3d-corrless",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Plain,
    Acm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Plain => "plain",
            Method::Acm => "acm",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("empty sweep specification")]
    Empty,
    #[error("cannot parse '{0}' as a number")]
    Number(String),
    #[error("range '{0}' must be start:stop:step with step > 0 and start <= stop")]
    Range(String),
}

/// Parse `a:b:s` ranges (inclusive) and single values separated by commas.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, SweepError> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| SweepError::Number(s.trim().to_string()));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields[..] {
            [v] => out.push(num(v)?),
            [a, b, s] => {
                let (a, b, s) = (num(a)?, num(b)?, num(s)?);
                if s.is_nan() || s <= 0.0 || a > b {
                    return Err(SweepError::Range(part.to_string()));
                }
                let steps = ((b - a) / s + 1e-9).floor() as usize;
                // rounding keeps 0.1 + 2 * 0.1 printing as 0.3
                out.extend((0..=steps).map(|i| ((a + i as f64 * s) * 1e9).round() / 1e9));
            }
            _ => return Err(SweepError::Range(part.to_string())),
        }
    }
    if out.is_empty() {
        return Err(SweepError::Empty);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub problem: Problem,
    pub methods: Vec<Method>,
    pub sweep: Vec<f64>,
    pub trials: usize,
    pub points: usize,
    pub eps: f64,
    pub max_depth: u32,
    pub seed: u64,
    /// RI-pair length tolerance as a fraction of `eps`.
    pub tau_frac: f64,
    /// Longest segments kept per set when forming RI pairs.
    pub keep: usize,
    pub combine: PairCombine,
    /// Reference cloud for the correspondence-less problem; synthetic when
    /// absent.
    pub cloud: Option<Arc<Vec<Vec3>>>,
    /// Record the bound trace of trial 0 at the last sweep value.
    pub trace: bool,
}

impl BenchConfig {
    pub fn new(problem: Problem) -> Self {
        Self {
            problem,
            methods: vec![Method::Plain, Method::Acm],
            sweep: parse_sweep(problem.default_sweep()).expect("built-in sweep parses"),
            trials: 100,
            points: if problem == Problem::Reg3dCorrless { 100 } else { 200 },
            eps: problem.default_eps(),
            max_depth: 10,
            seed: 7,
            tau_frac: 0.1,
            keep: 1000,
            combine: PairCombine::Intersection,
            cloud: None,
            trace: false,
        }
    }

    /// Instance generator settings for one cell of the sweep.
    pub fn scene(&self, sweep_index: usize, trial: usize) -> SceneConfig {
        let base = match self.problem {
            Problem::Resection1d => SceneConfig::resection(),
            Problem::Planar2d => SceneConfig::planar(),
            Problem::Reg3dCorr | Problem::Reg3dCorrless => SceneConfig::reg3d(),
        };
        let ratio = self.sweep[sweep_index];
        SceneConfig {
            n_points: self.points,
            outlier_ratio: if self.problem == Problem::Reg3dCorrless { 0.0 } else { ratio },
            seed: self.seed,
            stream: ((sweep_index as u64) << 32) | trial as u64,
            ..base
        }
    }
}

/// One solver run. CSV column order follows field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: Problem,
    pub method: Method,
    pub sweep_value: f64,
    pub trial: usize,
    /// Search time only.
    pub time_s: f64,
    /// Constraint construction time, shared by all methods of the cell.
    pub build_time_s: f64,
    pub iterations: u64,
    pub cardinality: usize,
    /// Degrees for the angular problems, relative translation error for
    /// registration.
    pub err_primary: Option<f64>,
    pub err_secondary: Option<f64>,
    pub error: Option<String>,
}

pub const RECORD_COLUMNS: [&str; 11] = [
    "problem",
    "method",
    "sweep_value",
    "trial",
    "time_s",
    "build_time_s",
    "iterations",
    "cardinality",
    "err_primary",
    "err_secondary",
    "error",
];

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub records: Vec<RunRecord>,
    pub traces: Vec<(Method, Vec<TracePoint>)>,
}

/// Worker count from `ACM_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("ACM_THREADS").ok()?.trim().parse().ok().filter(|n: &usize| *n > 0)
}

pub fn run_sweep(cfg: &BenchConfig) -> SweepOutput {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = env_threads() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().expect("thread pool");
    let cells: Vec<(usize, usize)> =
        (0..cfg.sweep.len()).flat_map(|s| (0..cfg.trials).map(move |t| (s, t))).collect();
    let traced = cfg.trace.then(|| (cfg.sweep.len().saturating_sub(1), 0));
    let mut results: Vec<((usize, usize), CellOutput)> =
        pool.install(|| cells.par_iter().map(|&c| (c, run_cell(cfg, c.0, c.1, traced == Some(c)))).collect());
    results.sort_by_key(|(c, _)| *c);
    let mut out = SweepOutput::default();
    for (_, cell) in results {
        out.records.extend(cell.records);
        out.traces.extend(cell.traces);
    }
    out
}

#[derive(Default)]
struct CellOutput {
    records: Vec<RunRecord>,
    traces: Vec<(Method, Vec<TracePoint>)>,
}

/// Problem-specific solver plus error metric for one built instance.
type Solver<'a> = Box<dyn Fn(Method, &SolveOptions) -> Result<SolveReport, EngineError> + 'a>;
type Scorer<'a> = Box<dyn Fn(&[f64]) -> (f64, Option<f64>) + 'a>;

fn run_cell(cfg: &BenchConfig, sweep_index: usize, trial: usize, trace: bool) -> CellOutput {
    let scene = cfg.scene(sweep_index, trial);
    let eps = cfg.eps;
    let opts = SolveOptions { record_trace: trace, ..SolveOptions::with_depth(cfg.max_depth) };
    let started = Instant::now();
    let (solver, scorer): (Solver, Scorer) = match cfg.problem {
        Problem::Resection1d => {
            let inst = gen_resection(&scene);
            let tims: Vec<_> = build_tims(&inst.corrs, &inst.prior).into_iter().map(|p| p.constraint).collect();
            let yaw = inst.truth.params[0];
            (
                Box::new(move |m, o| match m {
                    Method::Acm => Ok(solve_acm0_report(&tims, eps)),
                    Method::Plain => engine::solve(&PlainYawBounder::new(&tims, eps), Cube::from_sides(&[angle_domain()]), o),
                }),
                Box::new(move |x| (angle_diff(x[0], yaw).abs().to_degrees(), None)),
            )
        }
        Problem::Planar2d => {
            let inst = gen_planar(&scene);
            let cons: Vec<_> = inst.corrs.iter().map(build_planar).collect();
            let [theta, phi, _] = inst.truth.params[..] else { unreachable!("planar truth has three params") };
            let domain = PlanarDomain::default();
            (
                Box::new(move |m, o| match m {
                    Method::Plain => solve_plain2d(&cons, eps, &domain, o),
                    Method::Acm => solve_acm1(&cons, eps, &domain, o),
                }),
                Box::new(move |x| {
                    let (t_hat, p_hat) = (x[0] + x[1], x[1]);
                    // the translation direction is only defined up to sign
                    let dp = angle_diff(p_hat, phi).abs().min(angle_diff(p_hat, phi + std::f64::consts::PI).abs());
                    (angle_diff(t_hat, theta).abs().to_degrees(), Some(dp.to_degrees()))
                }),
            )
        }
        Problem::Reg3dCorr => {
            let inst = gen_reg3d_corr(&scene);
            let t = inst.truth.translation;
            let corrs = inst.corrs;
            let bx = TranslationBox::default();
            (
                Box::new(move |m, o| match m {
                    Method::Plain => solve_plain_corr(&corrs, eps, &bx, o),
                    Method::Acm => solve_acm_corr(&corrs, eps, &bx, o),
                }),
                Box::new(move |x| (rel_err(x, t), None)),
            )
        }
        Problem::Reg3dCorrless => {
            let overlap = cfg.sweep[sweep_index];
            let inst = match &cfg.cloud {
                Some(cloud) => crop_and_transform(cloud.as_ref().clone(), overlap, 0, &scene),
                None => gen_reg3d_corrless(&scene, overlap),
            };
            let pairs = build_ri_pairs(&inst.p, &inst.q, cfg.tau_frac * eps, cfg.keep);
            let t = inst.truth.translation;
            let bx = TranslationBox::default();
            let combine = cfg.combine;
            (
                Box::new(move |m, o| match m {
                    Method::Plain => solve_plain_corrless(&pairs, eps, &bx, o),
                    Method::Acm => solve_acm_corrless(&pairs, eps, &bx, combine, o),
                }),
                Box::new(move |x| (rel_err(x, t), None)),
            )
        }
    };
    let build_time_s = started.elapsed().as_secs_f64();

    let mut out = CellOutput::default();
    for &method in &cfg.methods {
        let base = RunRecord {
            problem: cfg.problem,
            method,
            sweep_value: cfg.sweep[sweep_index],
            trial,
            time_s: 0.0,
            build_time_s,
            iterations: 0,
            cardinality: 0,
            err_primary: None,
            err_secondary: None,
            error: None,
        };
        let record = match solver(method, &opts) {
            Ok(report) => {
                let (e1, e2) = scorer(&report.best_param);
                if let Some(tr) = report.bound_trace {
                    out.traces.push((method, tr));
                }
                RunRecord {
                    time_s: report.wall_time,
                    iterations: report.iterations,
                    cardinality: report.best_count,
                    err_primary: Some(e1),
                    err_secondary: e2,
                    ..base
                }
            }
            Err(e) => RunRecord { error: Some(e.to_string()), ..base },
        };
        out.records.push(record);
    }
    out
}

fn rel_err(x: &[f64], t: Vec3) -> f64 {
    norm(sub([x[0], x[1], x[2]], t)) / norm(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    pub mean_time_s: f64,
    pub median_time_s: f64,
    pub mean_iterations: f64,
    pub mean_cardinality: f64,
    pub mean_err_primary: Option<f64>,
    pub mean_err_secondary: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub methods: Vec<MethodStats>,
    /// Mean plain time over mean ACM time.
    pub speedup: Option<f64>,
    pub iteration_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub problem: Option<Problem>,
    pub rows: Vec<SummaryRow>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Aggregate per sweep value and method. Input order does not matter.
pub fn summarize(records: &[RunRecord]) -> Summary {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.method.cmp(&b.method))
            .then(a.trial.cmp(&b.trial))
            .then(a.problem.cmp(&b.problem))
    });
    let problem = sorted.first().map(|r| r.problem);
    let mut rows: Vec<SummaryRow> = Vec::new();
    for group in sorted.chunk_by(|a, b| a.sweep_value.total_cmp(&b.sweep_value).is_eq()) {
        let methods: Vec<MethodStats> = group
            .chunk_by(|a, b| a.method == b.method)
            .map(|g| {
                let ok: Vec<&&RunRecord> = g.iter().filter(|r| r.error.is_none()).collect();
                MethodStats {
                    method: g[0].method,
                    runs: ok.len(),
                    failures: g.len() - ok.len(),
                    mean_time_s: mean(ok.iter().map(|r| r.time_s)).unwrap_or(f64::NAN),
                    median_time_s: median(ok.iter().map(|r| r.time_s).collect()),
                    mean_iterations: mean(ok.iter().map(|r| r.iterations as f64)).unwrap_or(f64::NAN),
                    mean_cardinality: mean(ok.iter().map(|r| r.cardinality as f64)).unwrap_or(f64::NAN),
                    mean_err_primary: mean(ok.iter().filter_map(|r| r.err_primary)),
                    mean_err_secondary: mean(ok.iter().filter_map(|r| r.err_secondary)),
                }
            })
            .collect();
        let find = |m: Method| methods.iter().find(|s| s.method == m && s.runs > 0);
        let (speedup, iteration_ratio) = match (find(Method::Plain), find(Method::Acm)) {
            (Some(p), Some(a)) => (Some(p.mean_time_s / a.mean_time_s), Some(p.mean_iterations / a.mean_iterations)),
            _ => (None, None),
        };
        rows.push(SummaryRow { sweep_value: group[0].sweep_value, methods, speedup, iteration_ratio });
    }
    Summary { schema_version: SCHEMA_VERSION, problem, rows }
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{}: {source}", path.display())]
    Csv { path: std::path::PathBuf, source: csv::Error },
    #[error("{}: {source}", path.display())]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: std::path::PathBuf, source: serde_json::Error },
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, OutputError> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|source| OutputError::Csv { path: path.to_path_buf(), source })
}

/// Records as CSV, columns as in [`RECORD_COLUMNS`].
pub fn write_csv(records: &[RunRecord], path: &Path) -> Result<(), OutputError> {
    let err = |source| OutputError::Csv { path: path.to_path_buf(), source };
    let mut w = csv_writer(path)?;
    w.write_record(RECORD_COLUMNS).map_err(err)?;
    for r in records {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

/// Flattened summary: one row per sweep value and method.
pub fn write_summary_csv(summary: &Summary, path: &Path) -> Result<(), OutputError> {
    let err = |source| OutputError::Csv { path: path.to_path_buf(), source };
    let mut w = csv_writer(path)?;
    w.write_record([
        "sweep_value",
        "method",
        "runs",
        "failures",
        "mean_time_s",
        "median_time_s",
        "mean_iterations",
        "mean_cardinality",
        "mean_err_primary",
        "mean_err_secondary",
        "speedup",
        "iteration_ratio",
    ])
    .map_err(err)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for row in &summary.rows {
        for m in &row.methods {
            w.write_record([
                row.sweep_value.to_string(),
                m.method.to_string(),
                m.runs.to_string(),
                m.failures.to_string(),
                m.mean_time_s.to_string(),
                m.median_time_s.to_string(),
                m.mean_iterations.to_string(),
                m.mean_cardinality.to_string(),
                opt(m.mean_err_primary),
                opt(m.mean_err_secondary),
                opt(row.speedup),
                opt(row.iteration_ratio),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

pub fn write_json(summary: &Summary, path: &Path) -> Result<(), OutputError> {
    let file = std::fs::File::create(path).map_err(|source| OutputError::Io { path: path.to_path_buf(), source })?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), summary)
        .map_err(|source| OutputError::Json { path: path.to_path_buf(), source })
}
