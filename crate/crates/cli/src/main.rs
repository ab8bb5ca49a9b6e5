use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use srivc::estim::{
    estimate, normal_matrix_diagnostics, EstimationResult, EstimatorConfig, InstrumentSpec,
};
use srivc::experiments::{
    emit_report, log_spaced, run_bias_vs_snr, run_consistency_sweep, run_table1_with, table1_scenario, BiasSpec,
    Report, SweepSpec,
};
use srivc::sim::{simulate, SampledRecord, Setting};
use srivc::{Error, ErrorClass, Result, ThetaVector};

mod config;

use config::{FileConfig, CONFIG_KEYS};

fn key_help() -> String {
    let width = CONFIG_KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from(
        "Config file keys (TOML, or JSON by .json extension); a flag overrides the file, the file overrides the default:\n",
    );
    for (k, d) in CONFIG_KEYS {
        s.push_str(&format!("  {k:<width$}  {d}\n"));
    }
    s
}

#[derive(Parser, Debug)]
#[command(name = "srivc", version, about = "Closed-loop continuous-time identification with refined instrumental variables")]
#[command(after_help = key_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for Monte Carlo runs (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML or JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario preset (paper-setting1, paper-setting2, paper-bias).
    #[arg(long)]
    preset: Option<String>,
    /// Simulation seed or sweep master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of output samples.
    #[arg(long = "n-samples")]
    n_samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct EstimatorArgs {
    /// srivc or clsrivc.
    #[arg(long)]
    method: Option<String>,
    /// Use the fast input track (-os variant).
    #[arg(long)]
    os: bool,
    /// Denominator order.
    #[arg(long)]
    n: Option<usize>,
    /// Numerator order.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one closed-loop record.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate a model from a record directory.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        est: EstimatorArgs,
        /// Record directory written by `simulate`.
        #[arg(long)]
        record: PathBuf,
        /// Write the per-iteration trace (trace.csv) next to the estimate.
        #[arg(long)]
        trace: bool,
    },
    /// Check the modified normal matrix condition for a record.
    Diagnose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long)]
        record: PathBuf,
        /// Parameter vector `a1,..,an,b0,..,bm`; estimated first when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
    },
    /// Monte Carlo sweep over the sample size.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
        /// Comma-separated ascending sample sizes.
        #[arg(long = "sample-sizes", value_delimiter = ',')]
        sample_sizes: Option<Vec<usize>>,
    },
    /// Sample means of SRIVC and CLSRIVC in the continuous loop at h = 0.02.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Normalized bias of the averaged SRIVC model versus SNR.
    BiasSnr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long = "snr-points")]
        snr_points: Option<usize>,
    },
}

/// Flags as a config layer, so they can be merged over the file.
fn flag_layer(common: &Common, est: Option<&EstimatorArgs>, runs: Option<usize>, jobs: Option<usize>) -> FileConfig {
    let mut f = FileConfig {
        preset: common.preset.clone(),
        seed: common.seed,
        n_samples: common.n_samples,
        runs,
        jobs,
        ..Default::default()
    };
    if let Some(e) = est {
        f.method = e.method.clone();
        f.oversampled = e.os.then_some(true);
        f.n = e.n;
        f.m = e.m;
        f.max_iter = e.max_iter;
    }
    f
}

fn resolve(common: &Common, flags: FileConfig) -> Result<FileConfig> {
    let file = match &common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    Ok(flags.over(file))
}

fn outdir(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn write_manifest(dir: &Path, command: &str, cfg: &FileConfig, seeds: serde_json::Value, artifacts: &[PathBuf]) -> Result<()> {
    let names: Vec<String> = artifacts
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = json!({
        "tool": "srivc-cli",
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": srivc::VERSION,
        "command": command,
        "config": cfg,
        "seeds": seeds,
        "artifacts": names,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::parse(&path, e))?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn ensure_distinct(out: &Path, input: &Path) -> Result<()> {
    let canon = |p: &Path| std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    if canon(out) == canon(input) {
        return Err(Error::Config("output directory must differ from the input record directory".into()));
    }
    Ok(())
}

fn load_for_estimation(record: &Path, cfg: &FileConfig) -> Result<(SampledRecord, EstimatorConfig, InstrumentSpec)> {
    let rec = SampledRecord::load(record)?;
    let (n, m) = match rec.meta.true_theta.as_ref() {
        Some(t) => (t.n(), t.m()),
        None => (
            cfg.n.ok_or_else(|| Error::Config("record has no true model; pass --n and --m".into()))?,
            cfg.m.ok_or_else(|| Error::Config("record has no true model; pass --n and --m".into()))?,
        ),
    };
    let est = cfg.estimator((n, m))?;
    let spec = match &rec.meta.scenario {
        Some(sc) => InstrumentSpec::for_method(est.method, sc),
        None if est.method == srivc::estim::Method::Srivc => InstrumentSpec::open_loop(),
        None => {
            return Err(Error::Config(
                "CLSRIVC needs the controller, but the record does not carry its scenario".into(),
            ))
        }
    };
    Ok((rec, est, spec))
}

fn print_theta(res: &EstimationResult) {
    println!(
        "{}: theta = {} ({} iterations, {:?})",
        res.method, res.theta, res.iterations, res.stop_reason
    );
}

fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
    }
    let jobs_flag = cli.jobs;
    let init_pool = |cfg: &FileConfig| -> Result<()> {
        if let Some(j) = cfg.jobs {
            rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        }
        Ok(())
    };
    match cli.command {
        Command::Simulate { common } => {
            let cfg = resolve(&common, flag_layer(&common, None, None, jobs_flag))?;
            let sc = cfg.scenario()?;
            let dir = outdir(&common, "record");
            let rec = simulate(&sc)?;
            rec.save(&dir)?;
            println!("simulated {} samples (seed {}) into {}", rec.len(), sc.seed, dir.display());
            let mut artifacts = vec![dir.join("config.json"), dir.join("signals.csv")];
            if rec.u_fast.is_some() {
                artifacts.push(dir.join("u_fast.csv"));
            }
            write_manifest(&dir, "simulate", &cfg, json!({ "seed": sc.seed }), &artifacts)
        }
        Command::Estimate {
            common,
            est,
            record,
            trace,
        } => {
            let cfg = resolve(&common, flag_layer(&common, Some(&est), None, jobs_flag))?;
            let (rec, ecfg, spec) = load_for_estimation(&record, &cfg)?;
            let res = estimate(&rec, &ecfg, &spec)?;
            print_theta(&res);
            if let Some(dir) = &common.out {
                ensure_distinct(dir, &record)?;
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                let path = dir.join("estimate.json");
                std::fs::write(&path, res.to_json()).map_err(|e| Error::io(&path, e))?;
                let mut artifacts = vec![path];
                if trace {
                    let t = dir.join("trace.csv");
                    res.write_trace(&t)?;
                    artifacts.push(t);
                }
                write_manifest(dir, "estimate", &cfg, json!({}), &artifacts)?;
            } else if trace {
                return Err(Error::Config("--trace needs --out".into()));
            }
            Ok(())
        }
        Command::Diagnose {
            common,
            est,
            record,
            theta,
        } => {
            let cfg = resolve(&common, flag_layer(&common, Some(&est), None, jobs_flag))?;
            let (rec, ecfg, spec) = load_for_estimation(&record, &cfg)?;
            let th = match theta {
                Some(v) => ThetaVector::from_slice(&v, ecfg.n, ecfg.m)?,
                None => {
                    let res = estimate(&rec, &ecfg, &spec)?;
                    print_theta(&res);
                    res.theta
                }
            };
            let d = normal_matrix_diagnostics(&rec, &th, &ecfg, &spec)?;
            println!(
                "sigma_min(main) = {:.4e} +- {:.1e}, ||perturbation|| = {:.4e} +- {:.1e}, condition {}",
                d.sigma_min_main,
                d.sigma_min_main_se,
                d.norm_perturbation,
                d.norm_perturbation_se,
                if d.condition_ok { "holds" } else { "fails" }
            );
            if let Some(dir) = &common.out {
                ensure_distinct(dir, &record)?;
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                let path = dir.join("diagnostics.json");
                let text = serde_json::to_string_pretty(&json!({ "theta": th.to_vec(), "diagnostics": d }))
                    .map_err(|e| Error::parse(&path, e))?;
                std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
                write_manifest(dir, "diagnose", &cfg, json!({}), &[path])?;
            }
            Ok(())
        }
        Command::Sweep {
            common,
            runs,
            sample_sizes,
        } => {
            let mut flags = flag_layer(&common, None, runs, jobs_flag);
            flags.sample_sizes = sample_sizes;
            let cfg = resolve(&common, flags)?;
            init_pool(&cfg)?;
            let sc = cfg.scenario()?;
            let mut spec = SweepSpec::standard(sc.clone());
            spec.runs_per_point = cfg.runs();
            spec.master_seed = cfg.seed();
            if let Some(s) = &cfg.sample_sizes {
                spec.sample_sizes = s.clone();
            }
            if let (Some(n), Some(m)) = (cfg.n, cfg.m) {
                spec.orders = Some((n, m));
            }
            if let Some(v) = cfg.max_iter {
                spec.max_iter = v;
            }
            if let Some(v) = cfg.rel_tol {
                spec.rel_tol = v;
            }
            let rep = run_consistency_sweep(&spec)?;
            let dir = outdir(&common, "sweep");
            let (figure, variance) = match sc.setting {
                Setting::Continuous => ("fig2", None),
                Setting::Hybrid => ("fig4", Some("fig5")),
            };
            let files = emit_report(
                &Report::Sweep {
                    report: &rep,
                    figure,
                    variance_figure: variance,
                },
                &dir,
            )?;
            for p in &rep.points {
                let flag = if p.invalid { "  [invalid]" } else { "" };
                println!("{:<11} N={:<7} mean={:?}{flag}", p.method, p.n_samples, p.mean);
            }
            write_manifest(&dir, "sweep", &cfg, json!({ "master_seed": spec.master_seed }), &files)
        }
        Command::Table1 { common, runs } => {
            let cfg = resolve(&common, flag_layer(&common, None, runs, jobs_flag))?;
            init_pool(&cfg)?;
            let mut sc = table1_scenario();
            if let Some(n) = cfg.n_samples {
                sc.n_samples = n;
            }
            let t = run_table1_with(&sc, cfg.runs(), cfg.seed())?;
            let dir = outdir(&common, "table1");
            let files = emit_report(&Report::Table1(&t), &dir)?;
            for r in &t.rows {
                println!("{:<8} {:?}", r.method, r.mean);
            }
            write_manifest(&dir, "table1", &cfg, json!({ "master_seed": cfg.seed() }), &files)
        }
        Command::BiasSnr {
            common,
            runs,
            snr_points,
        } => {
            let mut flags = flag_layer(&common, None, runs, jobs_flag);
            flags.snr_points = snr_points;
            let cfg = resolve(&common, flags)?;
            init_pool(&cfg)?;
            let defaults = BiasSpec::default();
            let spec = BiasSpec {
                snr_grid: log_spaced(1e-3, 1e3, cfg.snr_points.unwrap_or(40)),
                runs_per_point: cfg.runs(),
                n_samples: cfg.n_samples.unwrap_or(defaults.n_samples),
                master_seed: cfg.seed(),
                method: cfg.method()?,
            };
            let rep = run_bias_vs_snr(&spec)?;
            let dir = outdir(&common, "bias");
            let files = emit_report(
                &Report::BiasCurve {
                    report: &rep,
                    figure: "fig6",
                },
                &dir,
            )?;
            for p in &rep.points {
                println!("SNR {:>9.3e}  normalized bias {:.4}", p.snr, p.metric);
            }
            write_manifest(&dir, "bias-snr", &cfg, json!({ "master_seed": spec.master_seed }), &files)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("ERROR config: {}", e.to_string().trim_start_matches("error: ").trim_end());
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR {}: {e}", e.code());
            match e.class() {
                ErrorClass::Config => ExitCode::from(1),
                ErrorClass::Numerical => ExitCode::from(2),
            }
        }
    }
}
