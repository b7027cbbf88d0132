use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coopcast::num::Policy;
use coopcast_cli::criteria::{evaluate_all, stale_files, Dir};
use coopcast_cli::recipes::{self, NumSweep, Output, Recipe, RunOptions};
use coopcast_cli::scenario::Scenario;
use coopcast_cli::{exit, CliError};

#[derive(Parser)]
#[command(name = "coopcast", version, about = "Cooperative download experiments: NUM solver, protocol simulator, codec benchmark")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// First seed; multi-seed runs use consecutive seeds from here.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of seeds (or trials) per sweep point.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Directory for CSV output.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the NUM solver over uniform topologies.
    NumSim(NumSimArgs),
    /// Run a protocol scenario file.
    ProtoSim { scenario: PathBuf },
    /// Measure codec throughput per generation size.
    BenchCodec {
        #[arg(long, value_delimiter = ',', default_value = "16,25,32,64")]
        m: Vec<usize>,
        #[arg(long, default_value_t = 900)]
        n: usize,
        /// Wall-clock budget per direction per generation size.
        #[arg(long, default_value_t = 1.0)]
        seconds: f64,
    },
    /// Run named recipes (or `all`).
    Recipe {
        #[arg(required = true)]
        names: Vec<String>,
        /// Wall-clock budget for the codec benchmark recipe.
        #[arg(long, default_value_t = 1.0)]
        bench_seconds: f64,
    },
    /// Run a recipe by name or a scenario file by path.
    Run { target: String },
    /// Evaluate the acceptance criteria against a results directory.
    Check { dir: Option<PathBuf> },
    /// List recipes.
    List,
}

#[derive(Args)]
struct NumSimArgs {
    #[arg(long, value_delimiter = ',')]
    policy: Vec<Policy>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    n_devices: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    p_local: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    cellular_capacity: f64,
    #[arg(long, default_value_t = 0.0)]
    cellular_loss: f64,
    #[arg(long, default_value_t = 2.0)]
    local_capacity: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 0.02)]
    step_size: f64,
    #[arg(long, default_value = "num-sim")]
    name: String,
}

fn seed_list(g: &Global, default: usize) -> Vec<u64> {
    let first = g.seed.unwrap_or(1);
    (0..g.seeds.unwrap_or(default) as u64).map(|k| first + k).collect()
}

fn report(out: &Output, dir: &Path) -> Result<(), CliError> {
    let (raw, agg) = out.write(dir)?;
    println!("{}: {} rows -> {} , {}", out.name, out.raw.rows.len(), raw.display(), agg.display());
    Ok(())
}

fn run_recipe(r: Recipe, g: &Global, bench_seconds: f64) -> Result<(), CliError> {
    let opts = RunOptions { seed: g.seed.unwrap_or(1), seeds: g.seeds, bench_seconds };
    report(&recipes::run(r, &opts)?, &g.out)
}

fn run_scenario(path: &Path, g: &Global) -> Result<(), CliError> {
    let mut s = Scenario::load(path)?;
    s.override_seeds(g.seed, g.seeds);
    report(&s.run()?, &g.out)
}

fn check(dir: &Path) -> Result<i32, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Config(format!("results directory {} not found", dir.display())));
    }
    if let Some(built) = std::env::current_exe().ok().and_then(|p| std::fs::metadata(p).ok()).and_then(|m| m.modified().ok()) {
        for p in stale_files(dir, built) {
            eprintln!("warning: {} is older than this binary; results may have drifted", p.display());
        }
    }
    let verdicts = evaluate_all(&Dir(dir.to_path_buf()));
    for v in &verdicts {
        println!("{v}");
    }
    let passed = verdicts.iter().filter(|v| v.passed()).count();
    println!("{passed}/{} criteria passed", verdicts.len());
    Ok(if passed == verdicts.len() { exit::OK } else { exit::ACCEPTANCE_FAILED })
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let g = &cli.global;
    match cli.command {
        Command::NumSim(a) => {
            let sweep = NumSweep {
                policies: if a.policy.is_empty() { Policy::ALL.to_vec() } else { a.policy },
                n_devices: a.n_devices,
                p_local: a.p_local,
                cellular_capacity: a.cellular_capacity,
                cellular_loss: a.cellular_loss,
                local_capacity: a.local_capacity,
                gamma: a.gamma,
                iterations: a.iterations,
                step_size: a.step_size,
            };
            let mut out = sweep.run(&seed_list(g, 10))?;
            out.name = a.name;
            report(&out, &g.out)?;
        }
        Command::ProtoSim { scenario } => run_scenario(&scenario, g)?,
        Command::BenchCodec { m, n, seconds } => {
            let mut out = recipes::fig7b(&m, n, seconds, g.seed.unwrap_or(1))?;
            out.name = "bench-codec".into();
            for row in &out.raw.rows {
                println!("m={:>3} n={} encode {:>9} Mbit/s  decode {:>9} Mbit/s", row[0], row[1], row[2], row[3]);
            }
            report(&out, &g.out)?;
        }
        Command::Recipe { names, bench_seconds } => {
            let list: Vec<Recipe> = if names.iter().any(|n| n == "all") {
                Recipe::ALL.to_vec()
            } else {
                names.iter().map(|n| n.parse().map_err(CliError::Config)).collect::<Result<_, _>>()?
            };
            for r in list {
                run_recipe(r, g, bench_seconds)?;
            }
        }
        Command::Run { target } => match target.parse::<Recipe>() {
            Ok(r) => run_recipe(r, g, 1.0)?,
            Err(_) if Path::new(&target).exists() => run_scenario(Path::new(&target), g)?,
            Err(e) => return Err(CliError::Config(format!("{e}; no scenario file at that path either"))),
        },
        Command::Check { dir } => return check(dir.as_deref().unwrap_or(&g.out)),
        Command::List => {
            for r in Recipe::ALL {
                println!("{:<18} {}", r.name(), r.description());
            }
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::CONFIG as u8)
        }
    }
}
