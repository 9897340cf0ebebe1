use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use acm::bench::{
    parse_sweep, run_sweep, summarize, write_csv, write_json, BenchConfig, Method, Problem, Summary,
};
use acm::io::{downsample, load_points, write_trace_csv};
use acm_core::registration::PairCombine;
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Plain,
    Acm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CombineArg {
    Intersection,
    Union,
}

/// Sweep outlier (or overlap) ratios and time plain BnB against ACM.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Args {
    problem: Problem,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    /// Comma-separated values or inclusive start:stop:step ranges.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Correspondences per instance, or points per set for reg3d-corrless.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 10)]
    max_depth: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Reference cloud (.ply or x,y,z .csv) for reg3d-corrless.
    #[arg(long)]
    ply: Option<PathBuf>,
    /// Voxel size for downsampling the reference cloud; 0 keeps every point.
    #[arg(long, default_value_t = 0.0)]
    voxel: f64,
    #[arg(long, default_value_t = 0.1)]
    tau_frac: f64,
    #[arg(long, default_value_t = 1000)]
    keep: usize,
    #[arg(long, value_enum, default_value = "intersection")]
    combine: CombineArg,
    /// Bound trace of trial 0 at the last sweep value.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = BenchConfig::new(args.problem);
    cfg.methods = match args.method {
        MethodArg::Plain => vec![Method::Plain],
        MethodArg::Acm => vec![Method::Acm],
        MethodArg::Both => vec![Method::Plain, Method::Acm],
    };
    if let Some(s) = &args.sweep {
        cfg.sweep = parse_sweep(s)?;
    }
    cfg.trials = args.trials;
    if let Some(n) = args.points {
        cfg.points = n;
    }
    if let Some(e) = args.eps {
        if e.is_nan() || e <= 0.0 {
            return Err(format!("--eps must be positive, got {e}").into());
        }
        cfg.eps = e;
    }
    cfg.max_depth = args.max_depth;
    cfg.seed = args.seed;
    cfg.tau_frac = args.tau_frac;
    cfg.keep = args.keep;
    cfg.combine = match args.combine {
        CombineArg::Intersection => PairCombine::Intersection,
        CombineArg::Union => PairCombine::Union,
    };
    cfg.trace = args.trace.is_some();
    if let Some(path) = &args.ply {
        if args.problem != Problem::Reg3dCorrless {
            return Err("--ply only applies to reg3d-corrless".into());
        }
        let cloud = downsample(&load_points(path)?, args.voxel);
        eprintln!("loaded {} points from {}", cloud.len(), path.display());
        cfg.cloud = Some(Arc::new(cloud));
    }

    let out = run_sweep(&cfg);
    write_csv(&out.records, &args.out)?;
    let summary = summarize(&out.records);
    if let Some(path) = &args.summary {
        write_json(&summary, path)?;
    }
    if let Some(path) = &args.trace {
        let both = out.traces.len() > 1;
        for (method, trace) in &out.traces {
            let p = if both { suffixed(path, &method.to_string()) } else { path.clone() };
            write_trace_csv(&p, trace)?;
        }
    }
    print_summary(&summary);
    Ok(())
}

/// `trace.csv` becomes `trace.plain.csv`.
fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn print_summary(summary: &Summary) {
    println!("{:>8} {:>6} {:>12} {:>12} {:>10} {:>9}", "sweep", "method", "mean_time_s", "mean_iters", "mean_card", "speedup");
    for row in &summary.rows {
        for m in &row.methods {
            let speedup = match (m.method, row.speedup) {
                (Method::Acm, Some(s)) => format!("{s:.1}x"),
                _ => String::new(),
            };
            println!(
                "{:>8} {:>6} {:>12.3e} {:>12.1} {:>10.1} {:>9}",
                row.sweep_value, m.method, m.mean_time_s, m.mean_iterations, m.mean_cardinality, speedup
            );
        }
    }
}
