//! `topk`: fit, evaluate and sample models of top-k partial orders.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use topk::assignment::{self, Market};
use topk::augmented::SampleOptions;
use topk::estimation::{self, FitConfig, L2Mode};
use topk::eval::{self, EvalOptions, GroupMapping};
use topk::io::{self, Provenance};
use topk::{Dataset, Error, Model, ModelKind, Universe};

const LONG_ABOUT: &str = "\
Fit, evaluate and sample composite (c-i, c-ci, c-ld) and augmented (a, a-pd, a-s)
models of top-k partial orders.

File formats
  ballots      preflib strict-incomplete-order file, legacy or 2021 layout
               (\"# NUMBER ALTERNATIVES: m\" header, then \"count: a,b,c\" lines)
  covariates   CSV with header agent_id,item_id,f1,...,fd (1-based ids); agent
               i is the i-th ballot record after count expansion
  capacities   CSV lines program_id,capacity (optional header)
  groups       CSV lines item_id,group_label (optional header)
  checkpoint   JSON, format_version 1

Exit codes: 0 success, 2 input error, 3 numeric failure.";

#[derive(Parser)]
#[command(name = "topk", version, about = "Models of top-k partial orders", long_about = LONG_ABOUT)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dataset summary: n, m, mean length and length histogram.
    Stats(StatsArgs),
    /// Fit a model; writes checkpoint.json and trace.csv (epoch,objective,grad_norm).
    Fit(FitArgs),
    /// Held-out NLL plus length and demand statistics of synthetic replicates.
    ///
    /// Writes report.json, nll_by_model.csv, length_stats_by_model.csv and
    /// demand_by_alternative.csv into --out.
    Eval(EvalArgs),
    /// Draw synthetic replicates, one ballot file per replicate.
    Sample(SampleArgs),
    /// K-fold cross-validation over a (K, lambda_laplacian) grid.
    ///
    /// Prints the table K,lambda_laplacian,mean_nll,fold_nll and the argmin.
    Cv(CvArgs),
    /// Deferred acceptance on true and synthetic preferences.
    ///
    /// Prints source,replicate,top1,top3,any rows.
    Assign(AssignArgs),
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    data: PathBuf,
    /// Also write the block to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum L2Arg {
    Objective,
    WeightDecay,
}

/// Optimizer and regularization flags; one per FitConfig field.
#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long = "lr", default_value_t = 0.001)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.9)]
    beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-5)]
    lambda_l2: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda_laplacian: f64,
    /// Number of strata for c-ld and a-s.
    #[arg(long = "K", default_value_t = 1)]
    strata: usize,
    #[arg(long, default_value_t = 2000)]
    max_epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Mini-batch size; full batch when omitted.
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "objective")]
    l2_mode: L2Arg,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl ConfigArgs {
    fn to_config(&self, use_covariates: bool) -> FitConfig {
        FitConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            lambda_l2: self.lambda_l2,
            lambda_laplacian: self.lambda_laplacian,
            strata: self.strata,
            max_epochs: self.max_epochs,
            tol: self.tol,
            batch_size: self.batch_size,
            seed: self.seed,
            use_covariates,
            l2_mode: match self.l2_mode {
                L2Arg::Objective => L2Mode::Objective,
                L2Arg::WeightDecay => L2Mode::WeightDecay,
            },
            workers: self.workers,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// c-i, c-ci, c-ld, a, a-pd or a-s.
    #[arg(long)]
    model: ModelKind,
    /// Covariate table; required for c-ci, enables covariate utilities otherwise.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// One or more checkpoints; each becomes one row of the outputs.
    #[arg(long = "model-ckpt", required = true, num_args = 1..)]
    checkpoints: Vec<PathBuf>,
    /// Held-out ballots; also the reference for length and demand statistics.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    covariates: Option<PathBuf>,
    /// Replicates per model.
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Orders per replicate; defaults to the size of --data.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Score augmented models conditioned on a non-empty list.
    #[arg(long)]
    condition_nonempty: bool,
    /// Redraw empty lists when sampling augmented models.
    #[arg(long)]
    no_empty: bool,
    /// Alternative-to-group mapping for demand output.
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long = "model-ckpt")]
    checkpoint: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_empty: bool,
    /// Covariate table (agents reused cyclically) for covariate models.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: ModelKind,
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Grid as "K=1,5,10;lapl=0,0.001"; the Cartesian product is searched.
    #[arg(long, default_value = "K=1;lapl=0")]
    grid: String,
    #[arg(long)]
    condition_nonempty: bool,
    #[command(flatten)]
    config: ConfigArgs,
    /// Also write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AssignArgs {
    /// Student ballots over programs.
    #[arg(long)]
    preferences: PathBuf,
    #[arg(long)]
    capacities: PathBuf,
    /// Seed of the random program priorities.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also match synthetic preferences sampled from this checkpoint.
    #[arg(long)]
    synthetic_from: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Seed of the synthetic replicates.
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats(a) => cmd_stats(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Assign(a) => cmd_assign(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Diverged { .. } | Error::NonFinite(_) | Error::ImpossibleRecord { .. }) => 3,
        _ => 2,
    }
}

fn load_data(path: &Path, covariates: Option<&Path>) -> anyhow::Result<Dataset> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (data, report) = io::parse_preflib_str(&text, path)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match covariates {
        Some(c) => {
            let (tensor, report) = io::load_covariates(c, data.len(), data.m())?;
            if report.missing > 0 {
                eprintln!(
                    "warning: {}: {} (agent, item) pairs missing, filled with zeros",
                    c.display(),
                    report.missing
                );
            }
            Ok(data.with_covariates(tensor)?)
        }
        None => Ok(data),
    }
}

fn write(path: &Path, body: &str) -> anyhow::Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn cmd_stats(a: StatsArgs) -> anyhow::Result<()> {
    let data = load_data(&a.data, None)?;
    let text = io::summary_stats(&data).to_text();
    print!("{text}");
    if let Some(out) = a.out {
        write(&out, &text)?;
    }
    Ok(())
}

fn cmd_fit(a: FitArgs) -> anyhow::Result<()> {
    if a.model.requires_covariates() && a.covariates.is_none() {
        bail!(Error::Config(format!(
            "--model {} requires --covariates",
            a.model
        )));
    }
    let cfg = a.config.to_config(a.covariates.is_some());
    cfg.validate()?;
    let data = load_data(&a.data, a.covariates.as_deref())?;
    let hash = io::sha256_hex(&fs::read(&a.data)?);
    let result = estimation::fit(a.model, &data, &cfg)?;
    fs::create_dir_all(&a.out)?;
    let provenance = Provenance {
        data_hash: Some(hash),
        seed: Some(cfg.seed),
        timestamp: None,
    };
    io::save_checkpoint(
        &result.model,
        Some(&cfg),
        provenance,
        &a.out.join("checkpoint.json"),
    )?;
    write(&a.out.join("trace.csv"), &result.trace_csv())?;
    println!(
        "model: {}\nepochs: {}\nconverged: {}\nobjective: {:.16e}",
        a.model, result.epochs_run, result.converged, result.objective
    );
    Ok(())
}

fn load_model(path: &Path) -> anyhow::Result<Model> {
    Ok(io::load_checkpoint(path)
        .with_context(|| format!("loading {}", path.display()))?
        .0)
}

fn cmd_eval(a: EvalArgs) -> anyhow::Result<()> {
    let data = load_data(&a.data, a.covariates.as_deref())?;
    let groups = match &a.groups {
        Some(p) => Some(GroupMapping::parse(&fs::read_to_string(p)?, data.m())?),
        None => None,
    };
    let n = a.n.unwrap_or(data.len());
    let mut reports = Vec::new();
    for ck in &a.checkpoints {
        let model = load_model(ck)?;
        let nll = eval::test_nll(
            &model,
            &data,
            EvalOptions {
                condition_nonempty: a.condition_nonempty,
            },
        )?;
        let reps = eval::replicate_sample(
            &model,
            n,
            a.reps,
            a.seed,
            data.covariates(),
            SampleOptions {
                no_empty: a.no_empty,
            },
            a.workers,
        )?;
        let label = ck
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .filter(|s| s != "checkpoint")
            .unwrap_or_else(|| model.kind().tag().to_string());
        reports.push(eval::build_report(&label, Some(nll), &data, &reps)?);
    }
    fs::create_dir_all(&a.out)?;
    eval::emit_plot_data(&reports, &a.out, groups.as_ref())?;
    write(
        &a.out.join("report.json"),
        &(serde_json::to_string_pretty(&reports)? + "\n"),
    )?;
    for r in &reports {
        let t = r.test_nll.expect("set above");
        println!(
            "{}: test_nll {:.6} (impossible {}), synthetic mean length {:.4} vs true {:.4}, tv_length {:.4}",
            r.model, t.mean, t.impossible, r.length.mean_of_means, r.length.truth.mean, r.tv_length
        );
    }
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> anyhow::Result<()> {
    let model = load_model(&a.checkpoint)?;
    let covariates = match &a.covariates {
        Some(p) => Some(io::load_covariates(p, a.n, model.m())?.0),
        None => None,
    };
    let reps = eval::replicate_sample(
        &model,
        a.n,
        a.reps,
        a.seed,
        covariates.as_ref(),
        SampleOptions {
            no_empty: a.no_empty,
        },
        a.workers,
    )?;
    fs::create_dir_all(&a.out)?;
    let width = a.reps.saturating_sub(1).to_string().len().max(3);
    for (r, orders) in reps.into_iter().enumerate() {
        let data = Dataset::new_allowing_empty(Universe::new(model.m())?, orders)?;
        let path = a.out.join(format!("replicate_{r:0width$}.soi"));
        write(&path, &io::dataset_to_string(&data))?;
    }
    println!(
        "wrote {} replicates of {} orders to {}",
        a.reps,
        a.n,
        a.out.display()
    );
    Ok(())
}

/// Parses "K=1,5;lapl=0,0.001" into the Cartesian product of pairs.
fn parse_grid(spec: &str) -> anyhow::Result<Vec<(usize, f64)>> {
    let mut ks: Option<Vec<usize>> = None;
    let mut lapl: Option<Vec<f64>> = None;
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((key, values)) = part.split_once('=') else {
            bail!(Error::Config(format!("malformed grid entry {part:?}")));
        };
        let values: Vec<&str> = values.split(',').map(str::trim).collect();
        match key.trim() {
            "K" => {
                let parsed = values
                    .iter()
                    .map(|v| v.parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| Error::Config(format!("malformed K values in {part:?}")))?;
                ks = Some(parsed);
            }
            "lapl" => {
                let parsed = values
                    .iter()
                    .map(|v| v.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| Error::Config(format!("malformed lapl values in {part:?}")))?;
                lapl = Some(parsed);
            }
            other => bail!(Error::Config(format!("unknown grid key {other:?}"))),
        }
    }
    let (Some(ks), Some(lapl)) = (ks, lapl) else {
        bail!(Error::Config("grid needs both K=… and lapl=…".into()));
    };
    Ok(ks
        .iter()
        .flat_map(|&k| lapl.iter().map(move |&l| (k, l)))
        .collect())
}

fn cmd_cv(a: CvArgs) -> anyhow::Result<()> {
    let grid = parse_grid(&a.grid)?;
    if a.model.requires_covariates() && a.covariates.is_none() {
        bail!(Error::Config(format!(
            "--model {} requires --covariates",
            a.model
        )));
    }
    let cfg = a.config.to_config(a.covariates.is_some());
    cfg.validate()?;
    let data = load_data(&a.data, a.covariates.as_deref())?;
    let result = estimation::grid_search(
        a.model,
        &data,
        &grid,
        &cfg,
        a.folds,
        cfg.seed,
        EvalOptions {
            condition_nonempty: a.condition_nonempty,
        },
    )?;
    let (k, l) = result.best_pair();
    let text = format!("{}best: K={k} lambda_laplacian={l}\n", result.to_csv());
    print!("{text}");
    if let Some(out) = a.out {
        write(&out, &text)?;
    }
    Ok(())
}

fn cmd_assign(a: AssignArgs) -> anyhow::Result<()> {
    let prefs = load_data(&a.preferences, None)?;
    let caps = assignment::parse_capacities(&fs::read_to_string(&a.capacities)?, prefs.m())?;
    let mut markets = vec![Market::with_random_priorities(
        prefs.orders().to_vec(),
        caps.clone(),
        a.seed,
    )?];
    if let Some(ck) = &a.synthetic_from {
        let model = load_model(ck)?;
        if model.m() != prefs.m() {
            bail!(Error::Shape(format!(
                "checkpoint has m={}, preferences have m={}",
                model.m(),
                prefs.m()
            )));
        }
        let covariates = match &a.covariates {
            Some(p) => Some(io::load_covariates(p, prefs.len(), prefs.m())?.0),
            None => None,
        };
        let reps = eval::replicate_sample(
            &model,
            prefs.len(),
            a.reps,
            a.sample_seed,
            covariates.as_ref(),
            SampleOptions::default(),
            a.workers,
        )?;
        for orders in reps {
            markets.push(Market::with_random_priorities(
                orders,
                caps.clone(),
                a.seed,
            )?);
        }
    }
    let matchings = assignment::match_all(&markets, a.workers);
    let mut text = String::from("source,replicate,top1,top3,any\n");
    for (i, (market, matching)) in markets.iter().zip(&matchings).enumerate() {
        let s = assignment::outcome_stats(matching, market.preferences());
        let (source, rep) = if i == 0 {
            ("true", String::new())
        } else {
            ("synthetic", (i - 1).to_string())
        };
        let _ = writeln!(
            text,
            "{source},{rep},{:.16e},{:.16e},{:.16e}",
            s.top1, s.top3, s.any
        );
    }
    print!("{text}");
    if let Some(out) = a.out {
        write(&out, &text)?;
    }
    Ok(())
}
