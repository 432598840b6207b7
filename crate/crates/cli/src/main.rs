use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbsde_cli::commands::{run, Command, Exit, Overrides};
use rbsde_cli::config::{ScenarioConfig, ValidationError};
use rbsde_cli::output::write_atomic;

/// Reflected BSDEs with two time-dependent barriers on a binary random-walk tree.
///
/// Exit status: 0 ok, 1 io error, 2 invalid config or usage, 3 no convergence,
/// 4 check failed, 5 no convergence and contraction condition violated.
#[derive(Parser)]
#[command(name = "rbsde", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Cross-check the three reflection routes on random zigzag paths.
    EsmCheck(Common),
    /// Run the Picard iteration and write the solution and its residuals.
    Solve(Common),
    /// Continuous dependence on the terminal value.
    Depend(Common),
    /// Local-time reconstruction of the regulator on reflected random walks.
    LocalTime(Common),
    /// Picard solution against backward induction over several meshes.
    Converge(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `outputs`, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Comma-separated perturbation sizes.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Comma-separated step counts.
    #[arg(long, value_delimiter = ',')]
    mesh: Option<Vec<usize>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Sub::EsmCheck(a) => (Command::EsmCheck, a),
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Depend(a) => (Command::Depend, a),
        Sub::LocalTime(a) => (Command::LocalTime, a),
        Sub::Converge(a) => (Command::Converge, a),
    };
    ExitCode::from(execute(cmd, args) as u8)
}

fn execute(cmd: Command, args: Common) -> Exit {
    let cfg = match ScenarioConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return if e.is::<ValidationError>() { Exit::Usage } else { Exit::Io };
        }
    };
    let overrides = Overrides { seed: args.seed, paths: args.paths, eps: args.eps, mesh: args.mesh };
    let out = match run(cmd, &cfg, &overrides) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit();
        }
    };
    let dir = args.out.or(cfg.outputs.clone()).unwrap_or_else(|| PathBuf::from("."));
    for (name, bytes) in &out.files {
        if let Err(e) = write_atomic(&dir, name, bytes) {
            eprintln!("error: writing {}: {e}", dir.join(name).display());
            return Exit::Io;
        }
    }
    println!("{}", out.summary);
    if out.exit != Exit::Ok {
        eprintln!("exit status {} ({:?})", out.exit as i32, out.exit);
    }
    out.exit
}
