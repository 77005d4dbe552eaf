//! `mimo-ising` command-line interface.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mimo_ising::detection::{Detector, DetectorOptions};
use mimo_ising::harness::config::{parse_beta_grid, parse_detectors, parse_list, parse_modulation, PlanFile};
use mimo_ising::harness::report::summary_table;
use mimo_ising::harness::{
    beta_sweep, ensure_writable, fit_scaling_law, format_csv, log_grid, plan_experiment, run_ber_sweep_with_threads,
    write_run, BetaMinimum, BetaSweepConfig, ExperimentPlan, RunManifest, REFERENCE_TOTAL_BITS,
};
use mimo_ising::solvers::{default_parameters, Paradigm};

#[derive(Parser)]
#[command(name = "mimo-ising", version, about = "Ising-machine MIMO detection benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one BER experiment and write CSV + manifest.
    Run(PlanArgs),
    /// Run a grid of experiments over every (N, modulation) combination.
    Sweep(PlanArgs),
    /// Calibrate beta_max: energy-vs-beta curves, their minima and a power-law fit.
    FitBeta(FitArgs),
    /// Re-render a CSV from a run manifest (optionally recomputing it).
    Report(ReportArgs),
}

#[derive(Args, Default)]
struct PlanArgs {
    /// Experiment-plan file (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// System size N (N x N); comma list for `sweep`.
    #[arg(long)]
    n: Option<String>,
    /// Modulation: bpsk, 4qam, 16qam, ...; comma list for `sweep`.
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// Eb/N0 values in dB, comma separated.
    #[arg(long)]
    ebn0: Option<String>,
    /// Bits per BER point.
    #[arg(long)]
    bits: Option<u64>,
    /// Detectors: zf, mmse, ml (or sd), bpim, dpim, oim; comma separated.
    #[arg(long)]
    detectors: Option<String>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Override the schedule peak (beta_max, or T_max for oim).
    #[arg(long)]
    beta_max: Option<f64>,
    /// Node budget of the sphere decoder.
    #[arg(long)]
    ml_budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Transmit without noise.
    #[arg(long)]
    noiseless: bool,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// System sizes, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Modulations, comma separated.
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// bpim or dpim.
    #[arg(long, default_value = "bpim")]
    paradigm: String,
    /// `lo:hi:count` (log-spaced) or a comma list; default spans 1/30..30x the default beta_max.
    #[arg(long)]
    beta_grid: Option<String>,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Manifest written by `run` or `sweep`.
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory (default: the manifest's directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recompute the plan instead of re-rendering the stored results.
    #[arg(long)]
    rerun: bool,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, false),
        Command::Sweep(a) => cmd_run(a, true),
        Command::FitBeta(a) => cmd_fit_beta(a),
        Command::Report(a) => cmd_report(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn load_file(path: &Option<PathBuf>) -> Result<PlanFile> {
    match path {
        Some(p) => Ok(PlanFile::load(p)?),
        None => Ok(PlanFile::default()),
    }
}

fn list_or<T: std::str::FromStr + Clone>(
    flag: &Option<String>,
    file: Option<Vec<T>>,
    what: &str,
) -> Result<Option<Vec<T>>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(s) => {
            let v = parse_list::<T>(s).with_context(|| format!("--{what}"))?;
            if v.is_empty() {
                bail!("--{what} is empty");
            }
            Ok(Some(v))
        }
        None => Ok(file),
    }
}

fn modulations(flag: &Option<String>, file: &PlanFile) -> Result<Vec<usize>> {
    let names: Vec<String> = match flag {
        Some(s) => s.split(',').map(|t| t.trim().to_string()).collect(),
        None => file
            .modulation
            .as_ref()
            .map(|m| m.to_vec())
            .unwrap_or_else(|| vec!["bpsk".to_string()]),
    };
    names
        .iter()
        .map(|n| parse_modulation(n).map_err(anyhow::Error::from))
        .collect()
}

fn build_plans(a: &PlanArgs, file: &PlanFile, grid: bool) -> Result<Vec<ExperimentPlan>> {
    let sizes =
        list_or::<usize>(&a.n, file.n.as_ref().map(|v| v.to_vec()), "n")?.ok_or_else(|| anyhow!("missing --n"))?;
    let orders = modulations(&a.modulation, file)?;
    if !grid && (sizes.len() != 1 || orders.len() != 1) {
        bail!("`run` takes a single --n and --mod; use `sweep` for grids");
    }
    let ebn0 = list_or::<f64>(&a.ebn0, file.ebn0.clone(), "ebn0")?.unwrap_or_else(|| vec![0.0, 4.0, 8.0, 12.0]);
    let bits = a.bits.or(file.bits).unwrap_or(REFERENCE_TOTAL_BITS);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let detectors: Option<Vec<Detector>> = match (&a.detectors, &file.detectors) {
        (Some(s), _) => Some(parse_detectors(
            &s.split(',').map(|t| t.trim().to_string()).collect::<Vec<_>>(),
        )?),
        (None, Some(v)) => Some(parse_detectors(v)?),
        (None, None) => None,
    };
    let mut options = DetectorOptions {
        replicas: a.replicas.or(file.replicas),
        iterations: a.iters.or(file.iters),
        schedule_peak: a.beta_max.or(file.beta_max),
        ..Default::default()
    };
    if let Some(b) = a.ml_budget.or(file.ml_budget) {
        options.ml_budget = b;
    }
    let noiseless = a.noiseless || file.noiseless.unwrap_or(false);

    let mut plans = Vec::new();
    for &n in &sizes {
        for &order in &orders {
            let mut plan =
                plan_experiment(n, order, &ebn0, bits, seed).with_context(|| format!("planning N={n}, M={order}"))?;
            if let Some(d) = &detectors {
                // in a grid, silently skip detectors that cannot handle this modulation
                let usable: Vec<Detector> = d.iter().copied().filter(|x| !grid || x.supports(order)).collect();
                plan = plan.with_detectors(&usable)?;
            }
            plan = plan.with_options(options)?;
            plan.noiseless = noiseless;
            plans.push(plan);
        }
    }
    Ok(plans)
}

fn cmd_run(a: PlanArgs, grid: bool) -> Result<()> {
    let file = load_file(&a.config)?;
    let out = a
        .out
        .clone()
        .or(file.out.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let threads = a.threads.or(file.threads).unwrap_or(0);
    let plans = build_plans(&a, &file, grid)?;
    ensure_writable(&out)?;
    for plan in &plans {
        eprintln!(
            "N={} M={}: {} channels x {} messages x {} bits, detectors {:?}",
            plan.n,
            plan.order,
            plan.n_channels,
            plan.messages_per_channel,
            plan.bits_per_message,
            plan.detectors.iter().map(|d| d.name()).collect::<Vec<_>>()
        );
        let output = run_ber_sweep_with_threads(plan, threads)?;
        let (csv, manifest) = write_run(&out, plan, &output)?;
        print!("{}", summary_table(&output.points));
        if output.ml_violations > 0 {
            eprintln!("warning: {} solves beat the ML residual", output.ml_violations);
        }
        eprintln!("wrote {} and {}", csv.display(), manifest.display());
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let manifest = RunManifest::load(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let out = match a.out {
        Some(d) => d,
        None => a.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let out = if out.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        out
    };
    ensure_writable(&out)?;
    let points = if a.rerun {
        let output = run_ber_sweep_with_threads(&manifest.plan, a.threads.unwrap_or(0))?;
        if output.points != manifest.points {
            eprintln!("warning: recomputed results differ from the manifest");
        }
        output.points
    } else {
        manifest.points.clone()
    };
    let csv = out.join(&manifest.csv);
    fs::write(&csv, format_csv(&points))?;
    print!("{}", summary_table(&points));
    eprintln!("wrote {}", csv.display());
    Ok(())
}

fn cmd_fit_beta(a: FitArgs) -> Result<()> {
    let file = load_file(&a.config)?;
    let paradigm = match a.paradigm.to_ascii_lowercase().as_str() {
        "bpim" => Paradigm::Bpim,
        "dpim" => Paradigm::Dpim,
        other => bail!("--paradigm must be bpim or dpim, not '{other}'"),
    };
    let sizes =
        list_or::<usize>(&a.n, file.n.as_ref().map(|v| v.to_vec()), "n")?.ok_or_else(|| anyhow!("missing --n"))?;
    let orders = modulations(&a.modulation, &file)?;
    let grid_spec = a.beta_grid.clone();
    let file_grid = file.beta_grid.clone();
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let iters = a.iters.or(file.iters);
    let out = a
        .out
        .clone()
        .or(file.out.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let threads = a.threads.or(file.threads).unwrap_or(0);
    ensure_writable(&out)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;

    let mut curves_csv = String::from("paradigm,N,M,beta_max,mean_energy,std_error\n");
    let mut minima_csv = String::from("paradigm,N,M,beta_grid_min,beta_refined,default_beta_max\n");
    let mut minima = Vec::new();
    for &n in &sizes {
        for &order in &orders {
            let reference = default_parameters(paradigm, n, order)?.schedule.peak;
            let grid = match (&grid_spec, &file_grid) {
                (Some(s), _) => parse_beta_grid(s)?,
                (None, Some(g)) => g.clone(),
                (None, None) => log_grid(reference / 30.0, reference * 30.0, 21),
            };
            let mut cfg = BetaSweepConfig::new(n, order, paradigm, grid, seed);
            cfg.instances_per_ebn0 = a.instances;
            cfg.trials = a.trials;
            if let Some(it) = iters {
                cfg.iterations = it;
            }
            let curve = pool.install(|| beta_sweep(&cfg))?;
            let tag = format!("{paradigm:?}").to_lowercase();
            for k in 0..curve.betas.len() {
                let _ = writeln!(
                    curves_csv,
                    "{tag},{n},{order},{},{},{}",
                    curve.betas[k], curve.mean_energy[k], curve.std_error[k]
                );
            }
            let _ = writeln!(
                minima_csv,
                "{tag},{n},{order},{},{},{reference}",
                curve.beta_min, curve.beta_refined
            );
            println!(
                "N={n:<4} M={order:<4} beta_0 = {:.4e} (grid {:.4e}), default {:.4e}, ratio {:.3}",
                curve.beta_refined,
                curve.beta_min,
                reference,
                curve.beta_refined / reference
            );
            minima.push(BetaMinimum {
                n,
                order,
                beta0: curve.beta_refined,
            });
        }
    }
    let stem = format!("beta_{}", format!("{paradigm:?}").to_lowercase());
    fs::write(out.join(format!("{stem}_curves.csv")), curves_csv)?;
    fs::write(out.join(format!("{stem}_minima.csv")), minima_csv)?;
    match fit_scaling_law(&minima) {
        Ok(fits) => {
            for f in fits {
                println!(
                    "{:?} family: beta_0 = {:.4} x^{:.4} (x = {}), rms residual {:.3e}",
                    f.family,
                    f.constant,
                    f.exponent,
                    if matches!(f.family, mimo_ising::harness::ScalingFamily::Bpsk) {
                        "N"
                    } else {
                        "N sqrt(M)"
                    },
                    (f.residuals.iter().map(|r| r * r).sum::<f64>() / f.residuals.len() as f64).sqrt()
                );
            }
        }
        Err(e) => eprintln!("no scaling fit: {e}"),
    }
    eprintln!("wrote {}/{stem}_curves.csv and {stem}_minima.csv", out.display());
    Ok(())
}
