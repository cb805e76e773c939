//! `cohcert`: moments, certification, threshold tables, experiment presets and
//! self-checks from the command line.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 when a check fails.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use coherence_core::experiments::{purity_curve, purity_curve_csv, r_statistics, r_statistics_csv, run_detection};
use coherence_core::moments::{generalized_moment, mc_oracle, MomentRequest, WrappedNormalSpec};
use coherence_core::pattern::{find_pattern_max, PhaseVector};
use coherence_core::qstate::{read_state_json, DensityMatrix};
use coherence_core::report::{fmt_sig, Cell, Csv};
use coherence_core::thresholds::{certify, threshold, threshold_ladder, ThresholdTable};
use coherence_core::verify;
use serde::Serialize;
use serde_json::json;

use config::{ConfigFile, Overrides, Preset, RunConfig};

#[derive(Parser)]
#[command(name = "cohcert", version, about = "Coherence certification from interference-pattern moments")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate Q_n for a state file.
    Moment(MomentArgs),
    /// Locate the pattern maximum, center the distribution there and certify.
    Certify(CertifyArgs),
    /// Threshold coefficients, or threshold values with --sigma.
    Thresholds(ThresholdArgs),
    /// Run an experiment preset and write CSV files plus a manifest.
    Experiment(ExperimentArgs),
    /// Run the built-in checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long)]
    state: PathBuf,
    /// Distribution centers, comma-separated (default: all zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu: Option<Vec<f64>>,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    n: u32,
    /// Cross-check against a Monte-Carlo estimate.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    n: Vec<u32>,
    /// Largest k.
    #[arg(long, default_value_t = 10)]
    k: u64,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Flat TOML config (`version = 1`); flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    d: Option<usize>,
    /// Target coherence numbers.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[arg(long = "sigma-g", value_delimiter = ',')]
    sigma_g: Option<Vec<f64>>,
    /// Deviation draws per grid point.
    #[arg(long = "n-delta")]
    n_delta: Option<usize>,
    /// Ensemble size for random populations.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optimizer restarts for the purity curve.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    scope: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    CheckFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Moment(a) => cmd_moment(&a),
        Command::Certify(a) => cmd_certify(&a),
        Command::Thresholds(a) => cmd_thresholds(&a),
        Command::Experiment(a) => cmd_experiment(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_state(path: &Path) -> Result<DensityMatrix<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_state_json(&text).with_context(|| format!("state file {}", path.display()))
}

fn cmd_moment(a: &MomentArgs) -> Result<Status> {
    let rho = load_state(&a.state)?;
    let mu = a.mu.clone().unwrap_or_else(|| vec![0.0; rho.dim()]);
    let req = MomentRequest::new(a.n, WrappedNormalSpec::new(PhaseVector::new(mu)?, a.sigma)?)?;
    let q = generalized_moment(&rho, &req)?;
    println!("Q_{}: {}", a.n, fmt_sig(q));
    if !a.oracle {
        return Ok(Status::Ok);
    }
    let mc = mc_oracle(&rho, &req, a.samples, a.seed)?;
    let dev = mc.deviation_in_stderr(q);
    let pass = dev <= 4.0;
    println!("mc_estimate: {}", fmt_sig(mc.estimate));
    println!("mc_stderr: {}", fmt_sig(mc.stderr));
    println!("mc_samples: {}", mc.samples);
    println!("deviation_stderr: {}", fmt_sig(dev));
    println!("oracle: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { Status::Ok } else { Status::CheckFailed })
}

fn cmd_certify(a: &CertifyArgs) -> Result<Status> {
    let rho = load_state(&a.state)?;
    let d = rho.dim();
    let best = find_pattern_max(&rho, a.restarts, a.seed)?;
    let req = MomentRequest::new(a.n, WrappedNormalSpec::new(best.argmax.clone(), a.sigma)?)?;
    let q = generalized_moment(&rho, &req)?;
    let v = certify(q, a.n, a.sigma, d)?;
    let opt = |x: Option<f64>| x.map_or("none".to_string(), fmt_sig);
    println!("phi_max: {}", best.argmax.angles().iter().map(|&x| fmt_sig(x)).collect::<Vec<_>>().join(","));
    println!("pattern_max: {}", fmt_sig(best.value));
    println!("Q_{}: {}", a.n, fmt_sig(q));
    println!("certified_k: {}", v.certified_k);
    println!("margin: {}", opt(v.margin));
    println!("shortfall: {}", opt(v.shortfall));
    let mut ladder = Csv::new(["k", "threshold", "exceeded"]);
    for (k, t) in threshold_ladder(a.n, a.sigma, d)? {
        ladder.row([k.into(), t.into(), Cell::from(if k < d && q > t { "yes" } else { "no" })]);
    }
    print!("{}", ladder.render());
    Ok(Status::Ok)
}

fn cmd_thresholds(a: &ThresholdArgs) -> Result<Status> {
    let csv = match a.sigma {
        Some(sigma) => {
            let mut csv = Csv::new(["n", "k", "sigma", "threshold"]);
            for &n in &a.n {
                for k in 1..=a.k {
                    csv.row([n.into(), k.into(), sigma.into(), threshold(n, k, sigma)?.into()]);
                }
            }
            csv
        }
        None => {
            let mut csv = Csv::new(["n", "k", "l", "v"]);
            for &n in &a.n {
                for (n, k, l, v) in ThresholdTable::new(n, a.k)?.rows() {
                    csv.row([n.into(), k.into(), l.into(), v.into()]);
                }
            }
            csv
        }
    };
    match &a.out {
        Some(p) => fs::write(p, csv.render()).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", csv.render()),
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'static str,
    config_path: Option<String>,
    config: &'a RunConfig,
    config_hash: &'a str,
    seed: u64,
    outputs: Vec<String>,
    version: &'static str,
    timestamp_unix: u64,
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<Status> {
    let file = match &a.config {
        Some(p) => Some(ConfigFile::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?),
        None => None,
    };
    let overrides = Overrides {
        d: a.d,
        targets: a.k.clone(),
        orders: a.n.clone(),
        sigmas: a.sigma.clone(),
        sigma_gs: a.sigma_g.clone(),
        n_delta: a.n_delta,
        size: a.size,
        restarts: a.restarts,
        seed: a.seed,
        budget: a.budget,
    };
    let cfg = RunConfig::resolve(a.preset, file.as_ref(), &overrides)?;
    let hash = cfg.hash();
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let name = cfg.preset.name();
    let stamp = |csv: &mut Csv| {
        csv.meta("preset", name).meta("config_hash", &hash).meta("seed", cfg.seed);
    };
    let mut files: Vec<(String, String)> = Vec::new();
    let envelope = match cfg.preset {
        Preset::Fig5 => {
            let rows = purity_curve(cfg.d, &cfg.targets, cfg.sigmas[0], &cfg.purities, cfg.budget, cfg.seed)?;
            let mut csv = purity_curve_csv(&rows);
            stamp(&mut csv);
            files.push((format!("{name}.csv"), csv.render()));
            json!({ "config": cfg, "config_hash": hash, "seed": cfg.seed, "rows": rows })
        }
        _ => {
            let mut report = run_detection::<f64>(&cfg.experiment()?)?;
            report.config_hash = Some(hash.clone());
            let mut csv = report.to_csv();
            csv.meta("preset", name);
            files.push((format!("{name}.csv"), csv.render()));
            let stats = if cfg.preset == Preset::Table3 || cfg.orders.contains(&1) && cfg.orders.len() > 1 {
                let stats = r_statistics(&report, &report)?;
                let mut csv = r_statistics_csv(&stats);
                stamp(&mut csv);
                files.push((format!("{name}_r.csv"), csv.render()));
                Some(stats)
            } else {
                None
            };
            json!({ "config": cfg, "config_hash": hash, "seed": cfg.seed, "report": report, "r_statistics": stats })
        }
    };
    files.push((format!("{name}.json"), serde_json::to_string_pretty(&envelope)? + "\n"));
    for (f, body) in &files {
        let p = a.out.join(f);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    let manifest = RunManifest {
        command: "experiment",
        config_path: a.config.as_ref().map(|p| p.display().to_string()),
        config: &cfg,
        config_hash: &hash,
        seed: cfg.seed,
        outputs: files.iter().map(|(f, _)| f.clone()).collect(),
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    fs::write(a.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    for (f, _) in &files {
        println!("wrote {}", a.out.join(f).display());
    }
    println!("config_hash: {hash}");
    Ok(Status::Ok)
}

fn cmd_verify(a: &VerifyArgs) -> Result<Status> {
    let scope: verify::Scope = a.scope.parse()?;
    let checks = verify::run(scope, a.seed)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed > 0 { Status::CheckFailed } else { Status::Ok })
}
