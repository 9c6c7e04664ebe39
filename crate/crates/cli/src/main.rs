use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use geeopt::gen::generate;
use geeopt::sweep::{run_sweep, threads_from_env, write_csv};
use geeopt::{maximize_gee, validate, GenConfig, QosMode, Scenario, SolverOptions, SweepConfig};

/// Energy-efficient power allocation for multi-carrier interference networks.
#[derive(Parser)]
#[command(name = "geeopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random scenario from a generator config.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one scenario and print a summary.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Qos::None)]
        qos: Qos,
        /// Barrier weight (barrier mode only).
        #[arg(long)]
        rho: Option<f64>,
        /// Minimum rate in bit/s/Hz applied to every user.
        #[arg(long)]
        rmin: Option<f64>,
        /// Solver options as JSON; the QoS flags above take precedence.
        #[arg(long)]
        solver: Option<PathBuf>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a Monte Carlo sweep and write the aggregated CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in oracle and invariant checks.
    Validate {
        /// Fewer cases per check.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Qos {
    None,
    Barrier,
    Generalized,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_gen(config: &Path, out: &Path) -> Result<()> {
    let cfg = GenConfig::from_json(&read(config)?).with_context(|| format!("in {}", config.display()))?;
    let s = generate(&cfg)?;
    s.save(out).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "wrote {} ({} users, {} subcarriers, seed {})",
        out.display(),
        s.user_count,
        s.subcarrier_count,
        cfg.seed
    );
    Ok(())
}

fn solver_mode(qos: Qos, rho: Option<f64>) -> Result<QosMode> {
    Ok(match (qos, rho) {
        (Qos::None, None) => QosMode::None,
        (Qos::Barrier, rho) => QosMode::Barrier {
            rho: rho.unwrap_or(QosMode::DEFAULT_RHO),
            c: QosMode::DEFAULT_C,
        },
        (Qos::Generalized, None) => QosMode::generalized(),
        (_, Some(_)) => bail!("--rho only applies to --qos barrier"),
    })
}

fn cmd_run(
    scenario: &Path,
    qos: Qos,
    rho: Option<f64>,
    rmin: Option<f64>,
    solver: Option<&Path>,
    json: bool,
) -> Result<()> {
    let mut s = Scenario::load(scenario).with_context(|| format!("loading {}", scenario.display()))?;
    if let Some(r) = rmin {
        if !(r >= 0.0) {
            bail!("--rmin must be non-negative");
        }
        s.r_min = vec![r; s.user_count];
    }
    let mut opts = match solver {
        Some(path) => serde_json::from_str::<SolverOptions>(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => SolverOptions::default(),
    };
    opts.qos = solver_mode(qos, rho)?;
    let r = maximize_gee(&s, &opts)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&r)?);
        return Ok(());
    }
    println!("mode            {}", r.qos.name());
    println!("GEE             {:.6e} bit/J", r.gee);
    println!("sum rate        {:.6} bit/s/Hz", r.sum_rate);
    println!("satisfied       {:.3}", r.satisfied_ratio);
    println!("stop            {:?}", r.stop);
    println!(
        "iterations      I_D {}  mean I_B {:.2}  mean I_L {:.2}",
        r.dinkelbach_iterations, r.mean_brd_rounds, r.mean_learning_iterations
    );
    if !r.relaxed_users.is_empty() {
        println!("relaxed users   {:?}", r.relaxed_users);
    }
    for (k, rate) in r.user_rates.iter().enumerate() {
        let row: Vec<String> = r.allocation.user(k).iter().map(|p| format!("{p:.4e}")).collect();
        println!("user {k:>3}  rate {rate:>9.5}  powers [{}]", row.join(", "));
    }
    Ok(())
}

fn cmd_sweep(config: &Path, out: &Path) -> Result<()> {
    let cfg = SweepConfig::from_json(&read(config)?).with_context(|| format!("in {}", config.display()))?;
    let rows = run_sweep(&cfg, threads_from_env())?;
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&rows, std::io::BufWriter::new(file))?;
    let flagged: usize = rows.iter().map(|r| r.nonconverged_count).sum();
    eprintln!("wrote {} rows to {}", rows.len(), out.display());
    if flagged > 0 {
        eprintln!("{flagged} cells did not converge (see nonconverged_count)");
    }
    Ok(())
}

fn cmd_validate(quick: bool) -> bool {
    let mut ok = true;
    for check in validate::run_suite(quick) {
        println!("{check}");
        ok &= check.passed;
    }
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { config, out } => cmd_gen(&config, &out),
        Command::Run {
            scenario,
            qos,
            rho,
            rmin,
            solver,
            json,
        } => cmd_run(&scenario, qos, rho, rmin, solver.as_deref(), json),
        Command::Sweep { config, out } => cmd_sweep(&config, &out),
        Command::Validate { quick } => {
            return if cmd_validate(quick) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
