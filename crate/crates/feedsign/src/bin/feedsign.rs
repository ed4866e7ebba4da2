//! Experiment runner: train runs from JSON configs, replay orbits, run the
//! measurement utilities, and inspect partitions. Every behavior here is a
//! thin shell over the library; outputs are CSV and the binary formats
//! documented in the library. Set `FEEDSIGN_LOG=debug` (or any `env_logger`
//! filter) for progress on stderr.

use clap::{Parser, Subcommand, ValueEnum};
use feedsign::aggregation::dp_plus_probability;
use feedsign::analysis::{
    estimate_sign_reversing_prob, fit_error_floor_points, half_normal_check, half_normal_exact,
};
use feedsign::config::{parse_config, parse_config_set, ExperimentConfig};
use feedsign::error::{Error, Result};
use feedsign::federation::{format_float, run_training, write_history_csv, ClientRole};
use feedsign::models::{read_params, write_params};
use feedsign::orbit::{replay, Orbit};
use feedsign::prng::{derive_seed, make_stream, Seed};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

#[derive(Parser)]
#[command(
    name = "feedsign",
    about = "Deterministic simulator for sign-vote federated zeroth-order optimization",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment(s) in a config file; writes history.csv,
    /// final.params, and run.orbit per run
    Train {
        /// JSON experiment config: one object, or an array for a matrix of
        /// independent runs
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's out_dir, else "."). A
        /// matrix entry without its own out_dir writes to run-NNN/ inside
        /// this
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads for a config matrix; each run stays fully
        /// deterministic regardless of this value
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Rebuild parameters from an orbit file and an initial-parameter file
    Replay {
        #[arg(long)]
        orbit: PathBuf,
        /// Initial parameters (raw little-endian 64-bit floats)
        #[arg(long)]
        init: PathBuf,
        /// Where to write the reconstructed parameters
        #[arg(long)]
        out: PathBuf,
        /// If given, first verify the orbit describes this config
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Measurement utilities; results go to --out or stdout as CSV
    Analyze {
        #[arg(long)]
        mode: AnalyzeMode,
        /// history.csv from a training run (floor_fit)
        #[arg(long)]
        history: Option<PathBuf>,
        /// Optimal loss to measure the gap against (floor_fit); omit to
        /// compute it from --config on the quadratic family
        #[arg(long)]
        loss_star: Option<f64>,
        /// Experiment config (floor_fit without --loss-star, sign_prob)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Rows per batch (sign_prob)
        #[arg(long)]
        batch_size: Option<usize>,
        /// Batches to draw (sign_prob)
        #[arg(long, default_value_t = 200)]
        batches: usize,
        /// Seed of the probed direction (sign_prob)
        #[arg(long, default_value_t = 0)]
        direction_seed: u64,
        /// Vector dimension (half_normal)
        #[arg(long, default_value_t = 10)]
        dim: usize,
        /// Monte Carlo samples (half_normal)
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Sampler seed (sign_prob, half_normal)
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of clients (dp_check)
        #[arg(long, default_value_t = 5)]
        clients: usize,
        /// Privacy budget (dp_check)
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe the client partition a config produces
    PartitionStats {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeMode {
    /// Fit loss history to geometric decay toward a floor
    #[value(name = "floor_fit")]
    FloorFit,
    /// Batch sign-reversal probability along one direction
    #[value(name = "sign_prob")]
    SignProb,
    /// Monte Carlo check of the half-normal projection mean
    #[value(name = "half_normal")]
    HalfNormal,
    /// Closed-form neighboring-vote probability ratios of the private
    /// aggregator
    #[value(name = "dp_check")]
    DpCheck,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("FEEDSIGN_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Train { config, out_dir, jobs } => cmd_train(&config, out_dir.as_deref(), jobs),
        Cmd::Replay { orbit, init, out, config } => {
            cmd_replay(&orbit, &init, &out, config.as_deref())
        }
        Cmd::Analyze {
            mode,
            history,
            loss_star,
            config,
            batch_size,
            batches,
            direction_seed,
            dim,
            samples,
            seed,
            clients,
            epsilon,
            out,
        } => cmd_analyze(AnalyzeArgs {
            mode,
            history,
            loss_star,
            config,
            batch_size,
            batches,
            direction_seed,
            dim,
            samples,
            seed,
            clients,
            epsilon,
            out,
        }),
        Cmd::PartitionStats { config, out } => cmd_partition_stats(&config, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut shown = e.to_string();
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let text = s.to_string();
                if !shown.contains(&text) {
                    eprintln!("  caused by: {text}");
                    shown = text;
                }
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::File { action: "read", path: path.into(), source: e })
}

fn run_one(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::File { action: "create", path: dir.into(), source: e })?;
    let state = cfg.build_state()?;
    let run = run_training(state, cfg.steps, cfg.eval_every)?;
    let mut csv = Vec::new();
    write_history_csv(&mut csv, &run.history)?;
    write_atomic(&dir.join("history.csv"), &csv)?;
    write_params(&dir.join("final.params"), run.final_params())?;
    run.orbit.write_file(&dir.join("run.orbit"))?;
    log::info!(
        "{}: {} steps of {} done, outputs in {}",
        cfg.rule.name(),
        cfg.steps,
        cfg.clients,
        dir.display()
    );
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes)
        .map_err(|e| Error::File { action: "write", path: path.into(), source: e })
}

fn cmd_train(config_path: &Path, out_flag: Option<&Path>, jobs: usize) -> Result<()> {
    let bytes = read_file(config_path)?;
    let text: serde_json::Value = serde_json::from_slice(&bytes)?;
    let matrix = text.is_array();
    let configs = parse_config_set(&bytes)?;
    let base = out_flag.map(Path::to_path_buf);
    if !matrix {
        let cfg = &configs[0];
        let dir = base
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        return run_one(cfg, &dir);
    }
    let jobs = jobs.max(1).min(configs.len());
    let dirs: Vec<PathBuf> = configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            cfg.out_dir.clone().unwrap_or_else(|| {
                base.clone().unwrap_or_else(|| PathBuf::from(".")).join(format!("run-{i:03}"))
            })
        })
        .collect();
    let next = Mutex::new(0usize);
    let failures = Mutex::new(Vec::<(usize, Error)>::new());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = {
                    let mut n = next.lock().unwrap();
                    let i = *n;
                    *n += 1;
                    i
                };
                if i >= configs.len() {
                    break;
                }
                if let Err(e) = run_one(&configs[i], &dirs[i]) {
                    failures.lock().unwrap().push((i, e));
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    if failures.is_empty() {
        return Ok(());
    }
    failures.sort_by_key(|(i, _)| *i);
    for (i, e) in &failures {
        eprintln!("run {i:03} failed: {e}");
    }
    let (i, first) = failures.swap_remove(0);
    Err(Error::InvalidArgument(format!(
        "{} of {} matrix runs failed (first: run {i:03}: {first})",
        failures.len() + 1,
        configs.len()
    )))
}

fn cmd_replay(
    orbit_path: &Path,
    init_path: &Path,
    out_path: &Path,
    config_path: Option<&Path>,
) -> Result<()> {
    let orbit = Orbit::read_file(orbit_path)?;
    if let Some(cfg_path) = config_path {
        let cfg = parse_config(&read_file(cfg_path)?)?;
        verify_orbit_matches_config(&orbit, &cfg)?;
    }
    let init = read_params(init_path)?;
    let params = replay(&init, &orbit)?;
    write_params(out_path, &params)?;
    log::info!(
        "replayed {} steps onto {} parameters, wrote {}",
        orbit.header.steps,
        params.len(),
        out_path.display()
    );
    Ok(())
}

fn verify_orbit_matches_config(orbit: &Orbit, cfg: &ExperimentConfig) -> Result<()> {
    let h = &orbit.header;
    let mismatch = |what: &str| -> Error {
        Error::Replay(format!("orbit does not match the config: {what} differs"))
    };
    if h.spec_digest != cfg.spec.digest() {
        return Err(mismatch("model spec digest"));
    }
    if h.rule.name() != cfg.rule.name() {
        return Err(mismatch("aggregation rule"));
    }
    if h.clients != cfg.clients {
        return Err(mismatch("client count"));
    }
    if h.eta.to_bits() != cfg.eta.to_bits() || h.mu.to_bits() != cfg.mu.to_bits() {
        return Err(mismatch("step size or perturbation scale"));
    }
    if h.run_seed != cfg.run_seed {
        return Err(mismatch("run seed"));
    }
    Ok(())
}

struct AnalyzeArgs {
    mode: AnalyzeMode,
    history: Option<PathBuf>,
    loss_star: Option<f64>,
    config: Option<PathBuf>,
    batch_size: Option<usize>,
    batches: usize,
    direction_seed: u64,
    dim: usize,
    samples: usize,
    seed: u64,
    clients: usize,
    epsilon: f64,
    out: Option<PathBuf>,
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let csv = match args.mode {
        AnalyzeMode::FloorFit => analyze_floor_fit(&args)?,
        AnalyzeMode::SignProb => analyze_sign_prob(&args)?,
        AnalyzeMode::HalfNormal => analyze_half_normal(&args)?,
        AnalyzeMode::DpCheck => analyze_dp_check(&args)?,
    };
    match &args.out {
        Some(path) => write_atomic(path, csv.as_bytes()),
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
            Ok(())
        }
    }
}

/// Pull `(step, loss)` pairs out of a history.csv, skipping unevaluated rows.
fn read_history_losses(path: &Path) -> Result<Vec<(u64, f64)>> {
    let text = String::from_utf8(read_file(path)?)
        .map_err(|e| Error::Dataset(format!("{}: not UTF-8: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let columns: Vec<&str> = header.split(',').collect();
    let step_col = columns.iter().position(|c| *c == "step");
    let loss_col = columns.iter().position(|c| *c == "loss");
    let (Some(step_col), Some(loss_col)) = (step_col, loss_col) else {
        return Err(Error::Dataset(format!(
            "{}: header {header:?} lacks step/loss columns",
            path.display()
        )));
    };
    let mut points = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let parse_err =
            |what: &str| Error::Dataset(format!("{} line {}: bad {what}", path.display(), n + 2));
        let step: u64 =
            cells.get(step_col).and_then(|c| c.parse().ok()).ok_or_else(|| parse_err("step"))?;
        let Some(cell) = cells.get(loss_col) else { continue };
        if cell.is_empty() {
            continue;
        }
        let loss: f64 = cell.parse().map_err(|_| parse_err("loss"))?;
        points.push((step, loss));
    }
    Ok(points)
}

fn analyze_floor_fit(args: &AnalyzeArgs) -> Result<String> {
    let history = args
        .history
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("floor_fit needs --history".into()))?;
    let loss_star = match (args.loss_star, &args.config) {
        (Some(l), _) => l,
        (None, Some(cfg_path)) => {
            let cfg = parse_config(&read_file(cfg_path)?)?;
            let state = cfg.build_state()?;
            state
                .analytic_optimum()
                .ok_or_else(|| {
                    Error::InvalidArgument(
                        "this model family has no analytic optimum; pass --loss-star".into(),
                    )
                })?
                .1
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "floor_fit needs --loss-star or --config to determine the optimum".into(),
            ))
        }
    };
    let points = read_history_losses(history)?;
    let fit = fit_error_floor_points(&points, loss_star)?;
    Ok(format!(
        "rate,floor,residual,points,loss_star\n{},{},{},{},{}\n",
        format_float(fit.rate),
        format_float(fit.floor),
        format_float(fit.residual),
        fit.points,
        format_float(loss_star),
    ))
}

fn analyze_sign_prob(args: &AnalyzeArgs) -> Result<String> {
    let cfg_path = args
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("sign_prob needs --config".into()))?;
    let batch_size = args
        .batch_size
        .ok_or_else(|| Error::InvalidArgument("sign_prob needs --batch-size".into()))?;
    let cfg = parse_config(&read_file(cfg_path)?)?;
    let dataset = cfg.build_dataset()?;
    let params = cfg.initial_params();
    let est = estimate_sign_reversing_prob(
        &cfg.spec,
        &params,
        Seed(args.direction_seed),
        &dataset,
        batch_size,
        args.batches,
        cfg.mu,
        Seed(args.seed),
    )?;
    Ok(format!(
        "direction_seed,true_projection,p_hat,batches,batch_size\n{},{},{},{},{}\n",
        est.seed.0,
        format_float(est.true_projection),
        format_float(est.p_hat),
        est.batches,
        est.batch_size,
    ))
}

fn analyze_half_normal(args: &AnalyzeArgs) -> Result<String> {
    let g = make_stream(derive_seed(Seed(args.seed), &[0])).gaussian_direction(args.dim);
    let measured = half_normal_check(&g, args.samples, derive_seed(Seed(args.seed), &[1]))?;
    let exact = half_normal_exact(&g);
    Ok(format!(
        "dim,samples,measured,exact,relative_error\n{},{},{},{},{}\n",
        args.dim,
        args.samples,
        format_float(measured),
        format_float(exact),
        format_float((measured - exact).abs() / exact),
    ))
}

fn analyze_dp_check(args: &AnalyzeArgs) -> Result<String> {
    let k = args.clients;
    if k == 0 {
        return Err(Error::InvalidArgument("dp_check needs at least one client".into()));
    }
    let eps = args.epsilon;
    let mut max_ratio: f64 = 0.0;
    for plus in 0..k {
        let p_a = dp_plus_probability(plus, k - plus, eps)?;
        let p_b = dp_plus_probability(plus + 1, k - plus - 1, eps)?;
        for (a, b) in [(p_a, p_b), (1.0 - p_a, 1.0 - p_b)] {
            max_ratio = max_ratio.max(a / b).max(b / a);
        }
    }
    let bound = eps.exp();
    Ok(format!(
        "clients,epsilon,max_ratio,bound,within\n{},{},{},{},{}\n",
        k,
        format_float(eps),
        format_float(max_ratio),
        format_float(bound),
        max_ratio <= bound,
    ))
}

fn cmd_partition_stats(config_path: &Path, out: Option<&Path>) -> Result<()> {
    let cfg = parse_config(&read_file(config_path)?)?;
    let dataset = cfg.build_dataset()?;
    let shards = cfg.build_shards(&dataset)?;
    let classes = dataset.classes();
    let mut csv = String::from("client,rows,role");
    for c in 0..classes {
        csv.push_str(&format!(",class_{c}"));
    }
    csv.push('\n');
    for shard in &shards {
        let role = match shard.role {
            ClientRole::Honest => "honest",
            ClientRole::ByzantineReverse => "byzantine_reverse",
            ClientRole::ByzantineRandom => "byzantine_random",
        };
        csv.push_str(&format!("{},{},{role}", shard.client, shard.indices.len()));
        for c in 0..classes {
            let count = shard.indices.iter().filter(|&&i| dataset.label(i) == c as u32).count();
            csv.push_str(&format!(",{count}"));
        }
        csv.push('\n');
    }
    match out {
        Some(path) => write_atomic(path, csv.as_bytes()),
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
            Ok(())
        }
    }
}
