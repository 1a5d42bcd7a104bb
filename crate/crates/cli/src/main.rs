use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bergcomp_cli::output::write_schema;
use bergcomp_cli::{load, run, Command, Overrides, Status};
use clap::Parser;
use rayon::prelude::*;

/// Numerical criteria for weighted composition-differentiation operators.
#[derive(Debug, Parser)]
#[command(name = "bergcomp", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (TOML); repeat to run a batch.
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    /// Output directory; each experiment writes to `<out>/<name>/`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads shared by the whole batch.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long = "quad.rings")]
    quad_rings: Option<u32>,
    #[arg(long = "quad.relerr")]
    quad_relerr: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match drive(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Undecided) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn drive(cli: &Cli) -> Result<Status> {
    if let Some(n) = cli.workers {
        anyhow::ensure!(n > 0, "--workers must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let overrides = Overrides {
        rings: cli.quad_rings,
        relerr: cli.quad_relerr,
    };
    let loaded = cli
        .configs
        .iter()
        .map(|p| load(p, &overrides))
        .collect::<Result<Vec<_>>>()?;
    let mut names: Vec<&str> = loaded.iter().map(|l| l.config.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        anyhow::bail!("two configs share the experiment name `{}`", w[0]);
    }
    write_schema(&cli.out)?;
    let results: Vec<Result<Status>> = loaded.par_iter().map(|l| run(cli.command, l, &cli.out)).collect();
    let mut status = Status::Ok;
    let mut failed = None;
    for (l, r) in loaded.iter().zip(results) {
        match r {
            Ok(Status::Undecided) => {
                eprintln!("{}: undecided", l.config.name);
                status = Status::Undecided;
            }
            Ok(Status::Ok) => eprintln!("{}: ok", l.config.name),
            Err(e) => {
                eprintln!("{}: error: {e:#}", l.config.name);
                failed.get_or_insert(e);
            }
        }
    }
    match failed {
        Some(e) => Err(e),
        None => Ok(status),
    }
}
