//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
//! failures while running. `SUPERHEDGE_THREADS` sets the worker count.

pub mod config;
pub mod manifest;
pub mod plot;
pub mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baseline::delta_hedge_simulate;
use crate::consumption::{price_process, train_consumption};
use crate::error::{Error, Result};
use crate::hedger::{sweep_lambda, train_t0, EvalReport};
use crate::market::simulate;
use crate::oracle::{quantile_curve, superhedge_price_tree};

use config::{ExperimentConfig, Mode};
use manifest::Manifest;
use plot::{plot, PlotData, PlotKind};
use table::{column, read_csv, write_csv, write_table};

pub const THREADS_ENV: &str = "SUPERHEDGE_THREADS";
/// Trajectories exported by `train-consumption`.
const EXPORTED_TRAJECTORIES: usize = 200;

#[derive(Parser, Debug)]
#[command(name = "superhedge", version, about = "Superhedging prices by exact trees and neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate price paths.
    Simulate(RunArgs),
    /// Exact superhedging price on the trinomial tree.
    PriceOracle(RunArgs),
    /// Exact quantile-hedging prices over a grid of success levels (T <= 2).
    QuantileCurve(RunArgs),
    /// Train a time-0 hedging policy for one penalty weight.
    TrainT0(RunArgs),
    /// Train one policy per penalty weight and tabulate price against success ratio.
    SweepLambda(RunArgs),
    /// Train a base policy, then the consumption process and price process.
    TrainConsumption(RunArgs),
    /// Black-Scholes delta hedge of a call.
    BaselineDelta(RunArgs),
    /// Redraw the charts of an output directory from its CSV files.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` of the configuration.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

/// Parse arguments (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(()) => 0,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Loaded configuration plus bookkeeping for the output directory.
struct Run {
    cfg: ExperimentConfig,
    dir: PathBuf,
    manifest: Manifest,
}

impl Run {
    fn start(args: &RunArgs, command: &str, mode: Mode) -> Result<Self> {
        let text = std::fs::read_to_string(&args.config)
            .map_err(|e| Error::config(format!("cannot read configuration {}: {e}", args.config.display())))?;
        let cfg = ExperimentConfig::parse(&text)?;
        cfg.require_mode(mode)?;
        let dir = args.output_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
        std::fs::create_dir_all(&dir)?;
        Ok(Run { cfg, dir, manifest: Manifest::new(command, &text) })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.outputs.push(name.to_string());
        self.dir.join(name)
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(p, text)?;
        Ok(())
    }

    fn finish(self) -> Result<()> {
        self.manifest.write(&self.dir)
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::PriceOracle(a) => cmd_price_oracle(&a),
        Command::QuantileCurve(a) => cmd_quantile_curve(&a),
        Command::TrainT0(a) => cmd_train_t0(&a),
        Command::SweepLambda(a) => cmd_sweep_lambda(&a),
        Command::TrainConsumption(a) => cmd_train_consumption(&a),
        Command::BaselineDelta(a) => cmd_baseline_delta(&a),
        Command::Report { dir } => cmd_report(&dir),
    }
}

fn cmd_simulate(args: &RunArgs) -> Result<()> {
    let mut run = Run::start(args, "simulate", Mode::Simulate)?;
    let (n, seed) = (run.cfg.n_paths, run.cfg.seed);
    let batch = simulate(&run.cfg.market, n, seed)?;
    let rows = (0..n).flat_map(|i| {
        let path = batch.path_vec(i);
        path.into_iter().enumerate().map(move |(t, x)| vec![i as f64, t as f64, x])
    });
    write_csv(&run.path("paths.csv"), &["path_id", "t", "price"], rows)?;
    run.manifest.seeds.push(("paths".into(), seed));
    println!("simulated {n} paths");
    run.finish()
}

fn cmd_price_oracle(args: &RunArgs) -> Result<()> {
    let mut run = Run::start(args, "price-oracle", Mode::Oracle)?;
    let sol = superhedge_price_tree(&run.cfg.market, &run.cfg.claim)?;
    let row = vec![run.cfg.market.horizon as f64, sol.price, sol.strategy(&[])];
    write_csv(&run.path("oracle.csv"), &["horizon", "superhedge_price", "strategy_t0"], [row])?;
    println!("superhedge_price={}", sol.price);
    run.finish()
}

fn cmd_quantile_curve(args: &RunArgs) -> Result<()> {
    let mut run = Run::start(args, "quantile-curve", Mode::Oracle)?;
    let curve = quantile_curve(&run.cfg.market, &run.cfg.claim, &run.cfg.alphas)?;
    let rows = curve.alphas.iter().zip(&curve.prices).map(|(&a, &p)| vec![a, p]);
    write_csv(&run.path("quantile_curve.csv"), &["alpha", "price"], rows)?;
    for (a, p) in curve.alphas.iter().zip(&curve.prices) {
        println!("alpha={a} price={p}");
    }
    println!("superhedge_price={}", curve.superhedge_price);
    run.finish()
}

fn require_lambda(cfg: &ExperimentConfig, command: &str) -> Result<f64> {
    cfg.lambda.ok_or_else(|| Error::config(format!("{command} needs `lambda` in the configuration")))
}

fn write_loss_outputs(run: &mut Run, report: &EvalReport, stem: &str) -> Result<()> {
    let rows = report.loss_samples.iter().map(|&l| vec![l]);
    write_csv(&run.path(&format!("{stem}.csv")), &["loss"], rows)?;
    let svg = plot(PlotKind::LossHistogram, &PlotData::Samples(report.loss_samples.clone()))?;
    run.write_text(&format!("{stem}_histogram.svg"), &svg)
}

fn cmd_train_t0(args: &RunArgs) -> Result<()> {
    let mut run = Run::start(args, "train-t0", Mode::TrainT0)?;
    let lambda = require_lambda(&run.cfg, "train-t0")?;
    let cfg = run.cfg.clone();
    let init = cfg.policy.build(&cfg.market, &cfg.claim, lambda, cfg.train.seed)?;
    let (policy, report) = train_t0(&cfg.market, &cfg.claim, init, &cfg.train)?;
    run.write_text("report.csv", &format!("{}\n{}\n", EvalReport::CSV_HEADER, report.csv_row()))?;
    write_table(std::slice::from_ref(&report), &run.path("table.csv"))?;
    write_loss_outputs(&mut run, &report, "loss_samples")?;
    policy.save(&run.path("policy.ckpt"))?;
    run.manifest.seeds.push(("train".into(), cfg.train.seed));
    println!("lambda={lambda} price={} alpha_hat={}", report.price, report.alpha_hat);
    run.finish()
}

fn cmd_sweep_lambda(args: &RunArgs) -> Result<()> {
    let mut run = Run::start(args, "sweep-lambda", Mode::SweepLambda)?;
    let cfg = run.cfg.clone();
    if cfg.lambdas.is_empty() {
        return Err(Error::config("sweep-lambda needs a non-empty `lambdas` list"));
    }
    let results = sweep_lambda(&cfg.market, &cfg.claim, &cfg.lambdas, &cfg.policy, &cfg.train)?;
    let reports: Vec<EvalReport> = results.into_iter().map(|(_, r)| r).collect();
    write_table(&reports, &run.path("table.csv"))?;
    let data = PlotData::Lambda {
        lambdas: reports.iter().map(|r| r.lambda).collect(),
        prices: reports.iter().map(|r| r.price).collect(),
        alphas: reports.iter().map(|r| r.alpha_hat).collect(),
    };
    run.write_text("lambda_curves.svg", &plot(PlotKind::LambdaCurves, &data)?)?;
    run.manifest.seeds.push(("train".into(), cfg.train.seed));
    for r in &reports {
        println!("lambda={} price={} alpha_hat={}", r.lambda, r.price, r.alpha_hat);
    }
    run.finish()
}

fn cmd_train_consumption(args: &RunArgs) -> Result<()> {
    let mut run = Run::start(args, "train-consumption", Mode::Consumption)?;
    let cfg = run.cfg.clone();
    let ccfg = cfg
        .consumption
        .clone()
        .ok_or_else(|| Error::config("train-consumption needs a [consumption] table with `beta`"))?;
    let lambda = require_lambda(&cfg, "train-consumption")?;
    let init = cfg.policy.build(&cfg.market, &cfg.claim, lambda, cfg.train.seed)?;
    let (policy, base_report) = train_t0(&cfg.market, &cfg.claim, init, &cfg.train)?;
    let (nets, report) = train_consumption(&cfg.market, &cfg.claim, &policy, &ccfg, &cfg.train)?;

    let summary = vec![
        report.beta,
        report.feasibility_rate,
        report.mean_terminal_consumption,
        report.n_test as f64,
        base_report.price,
        base_report.alpha_hat,
    ];
    write_csv(
        &run.path("consumption.csv"),
        &["beta", "feasibility_rate", "mean_terminal_consumption", "n_test", "price", "alpha_hat"],
        [summary],
    )?;

    let n = EXPORTED_TRAJECTORIES.min(cfg.train.n_test());
    let test = simulate(&cfg.market, n, cfg.train.test_seed())?;
    let pp = price_process(&policy, &nets, &test)?;
    let horizon = cfg.market.horizon;
    let rows = (0..n).flat_map(|i| {
        let pp = &pp;
        (0..=horizon).map(move |t| vec![i as f64, t as f64, pp.u[[i, t]], pp.b[[i, t]], pp.gains[[i, t]]])
    });
    write_csv(&run.path("trajectories.csv"), &["path_id", "t", "U", "B", "G"], rows)?;
    let paths: Vec<Vec<f64>> = pp.u.rows().into_iter().map(|r| r.to_vec()).collect();
    run.write_text("price_process.svg", &plot(PlotKind::PriceProcess, &PlotData::Paths(paths))?)?;
    policy.save(&run.path("policy.ckpt"))?;
    nets.save(&run.path("consumption.ckpt"))?;
    run.manifest.seeds.push(("train".into(), cfg.train.seed));
    println!(
        "beta={} feasibility_rate={} mean_terminal_consumption={}",
        report.beta, report.feasibility_rate, report.mean_terminal_consumption
    );
    run.finish()
}

fn cmd_baseline_delta(args: &RunArgs) -> Result<()> {
    let mut run = Run::start(args, "baseline-delta", Mode::Baseline)?;
    let (n, seed) = (run.cfg.n_paths, run.cfg.seed);
    let r = delta_hedge_simulate(&run.cfg.market, &run.cfg.claim, n, seed)?;
    write_csv(
        &run.path("baseline.csv"),
        &["initial_cost", "alpha_hat", "n_paths", "seed"],
        [vec![r.initial_cost, r.alpha_hat, n as f64, seed as f64]],
    )?;
    run.write_text("pnl_histogram.svg", &plot(PlotKind::LossHistogram, &PlotData::Samples(r.pnl.clone()))?)?;
    run.manifest.seeds.push(("paths".into(), seed));
    println!("initial_cost={} alpha_hat={}", r.initial_cost, r.alpha_hat);
    run.finish()
}

/// Redraw every chart whose source CSV is present in `dir`.
fn cmd_report(dir: &Path) -> Result<()> {
    if !dir.is_dir() {
        return Err(Error::config(format!("{} is not a directory", dir.display())));
    }
    let mut drawn = Vec::new();
    let table = dir.join("table.csv");
    if table.exists() {
        let (h, rows) = read_csv(&table)?;
        let data = PlotData::Lambda {
            lambdas: column(&h, &rows, "lambda")?,
            prices: column(&h, &rows, "price")?,
            alphas: column(&h, &rows, "alpha")?,
        };
        std::fs::write(dir.join("lambda_curves.svg"), plot(PlotKind::LambdaCurves, &data)?)?;
        drawn.push("lambda_curves.svg");
    }
    let losses = dir.join("loss_samples.csv");
    if losses.exists() {
        let (h, rows) = read_csv(&losses)?;
        let svg = plot(PlotKind::LossHistogram, &PlotData::Samples(column(&h, &rows, "loss")?))?;
        std::fs::write(dir.join("loss_samples_histogram.svg"), svg)?;
        drawn.push("loss_samples_histogram.svg");
    }
    let traj = dir.join("trajectories.csv");
    if traj.exists() {
        let (h, rows) = read_csv(&traj)?;
        let ids = column(&h, &rows, "path_id")?;
        let u = column(&h, &rows, "U")?;
        let mut paths: Vec<Vec<f64>> = Vec::new();
        for (id, v) in ids.into_iter().zip(u) {
            let id = id as usize;
            if paths.len() <= id {
                paths.resize(id + 1, Vec::new());
            }
            paths[id].push(v);
        }
        paths.retain(|p| !p.is_empty());
        std::fs::write(dir.join("price_process.svg"), plot(PlotKind::PriceProcess, &PlotData::Paths(paths))?)?;
        drawn.push("price_process.svg");
    }
    if drawn.is_empty() {
        return Err(Error::Domain(format!("no table.csv, loss_samples.csv or trajectories.csv in {}", dir.display())));
    }
    for d in drawn {
        println!("wrote {}", dir.join(d).display());
    }
    Ok(())
}
