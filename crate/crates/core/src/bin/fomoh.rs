use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fomoh::harness::{
    self, emit_outputs, load_mnist_idx, run_experiment, run_rosenbrock_suite, single_step_rows, single_step_study,
    traces_to_runs, ExperimentConfig, RosenbrockConfig, SINGLE_STEP_POINT,
};
use fomoh::models::Precision;
use fomoh::Result;

#[derive(Parser)]
#[command(name = "fomoh", version, about = "Forward-mode second-order optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rosenbrock benchmark from shared random starts.
    Rosenbrock(RosenbrockArgs),
    /// Train a classifier on MNIST.
    Train(TrainArgs),
    /// Sampled single steps from one 2D Rosenbrock point.
    SingleStep(SingleStepArgs),
    /// Run the built-in oracle checks.
    Check,
}

#[derive(Args)]
struct RosenbrockArgs {
    /// TOML suite description; overrides the standard method set.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    /// Learning rate of FGD in the standard set.
    #[arg(long, default_value_t = 1e-4)]
    fgd_eta: f64,
    /// Seed of the starting-point stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out/rosenbrock")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds, overriding the config.
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the 10k/2k desk-scale subset.
    #[arg(long)]
    subset: bool,
    #[arg(long)]
    precision: Option<Precision>,
    /// MNIST directory; falls back to the config, then FOMOH_DATA.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct SingleStepArgs {
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-4)]
    fgd_eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out/single-step")]
    out: PathBuf,
}

fn rosenbrock(args: RosenbrockArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => RosenbrockConfig::from_toml(
            &std::fs::read_to_string(p).map_err(|e| fomoh::Error::Config(format!("{}: {e}", p.display())))?,
        )?,
        None => RosenbrockConfig::standard(args.dim, args.iterations, args.fgd_eta),
    };
    if args.config.is_none() {
        cfg.start_seed = args.seed;
    }
    let suite = run_rosenbrock_suite(&cfg)?;
    for traces in &suite {
        let finals: Vec<f64> = traces.iter().map(|t| *t.values.last().unwrap()).collect();
        println!("{:<12} median final f = {:.3e}", traces[0].label, harness::median(finals));
    }
    report(emit_outputs(&traces_to_runs(suite), &args.out)?);
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seeds) = args.seed {
        cfg.seeds = seeds;
    }
    if args.subset {
        cfg.subset = true;
    }
    if let Some(p) = args.precision {
        cfg.precision = p;
    }
    if args.data.is_some() {
        cfg.data = args.data;
    }
    cfg.validate()?;
    let dir = harness::data_dir(cfg.data.as_deref())?;
    let (train, val) = load_mnist_idx(&dir, cfg.subset)?;
    eprintln!("loaded {} training and {} validation images from {}", train.len(), val.len(), dir.display());
    let runs = run_experiment(&cfg, &train, &val)?;
    for run in &runs {
        for r in run.finals() {
            println!(
                "{:<12} seed {:>3}  train loss {:.4}  val loss {:.4}  val acc {:.4}",
                run.label, r.seed, r.train_loss, r.val_loss, r.val_acc
            );
        }
        for (seed, why) in &run.aborted {
            println!("{:<12} seed {:>3}  aborted: {why}", run.label, seed);
        }
    }
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("out/train"));
    report(emit_outputs(&runs, &out)?);
    Ok(())
}

fn single_step(args: SingleStepArgs) -> Result<()> {
    let study = single_step_study(SINGLE_STEP_POINT, args.samples, args.fgd_eta, args.seed)?;
    std::fs::create_dir_all(&args.out)?;
    let mut csv = String::from("method,sample,dx,dy\n");
    for (m, i, dx, dy) in single_step_rows(&study) {
        csv.push_str(&format!("{m},{i},{},{}\n", harness::fmt_float(dx), harness::fmt_float(dy)));
    }
    let path = args.out.join("single_step.csv");
    std::fs::write(&path, csv)?;
    println!("gradient {:?}, newton step {:?}", study.gradient, study.newton);
    for (label, _) in &study.samples {
        println!("{label:<10} mean step {:?}", study.mean(label).unwrap());
    }
    report(vec![path]);
    Ok(())
}

fn check() -> Result<bool> {
    let mut ok = true;
    for c in harness::run_checks()? {
        println!("{} {:<20} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    Ok(ok)
}

fn report(paths: Vec<PathBuf>) {
    for p in paths {
        eprintln!("wrote {}", Path::new(&p).display());
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Rosenbrock(a) => rosenbrock(a).map(|_| true),
        Command::Train(a) => train(a).map(|_| true),
        Command::SingleStep(a) => single_step(a).map(|_| true),
        Command::Check => check(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
