use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use d2d_rica::config::{load_config, ExperimentConfig};
use d2d_rica::experiment::{monte_carlo, parse_sweep_arg};
use d2d_rica::output::write_outputs;

/// Monte Carlo evaluation of auction-based spectrum sharing between
/// cellular users and D2D pairs.
#[derive(Debug, Parser)]
#[command(name = "d2d-rica", version)]
struct Cli {
    /// TOML experiment file; missing keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the full auction's price trace for every drop.
    #[arg(long)]
    trace: bool,
    /// Drops per sweep point.
    #[arg(long)]
    drops: Option<usize>,
    /// Sweep as `var=lo..hi`, var being num_d2d_pairs or num_resource_units.
    #[arg(long)]
    sweep: Option<String>,
    /// Largest package a resource unit may bid on; 0 means no cap.
    #[arg(long)]
    max_package_size: Option<usize>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    let mut values = None;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if cli.trace {
        cfg.trace = true;
    }
    if let Some(drops) = cli.drops {
        cfg.drops = drops;
    }
    if let Some(n) = cli.max_package_size {
        cfg.max_package_size = n;
    }
    if let Some(arg) = &cli.sweep {
        let (variable, vals) = parse_sweep_arg(arg)
            .map_err(anyhow::Error::msg)
            .context("--sweep")?;
        cfg.sweep_variable = variable;
        cfg.sweep_from = vals[0];
        cfg.sweep_to = *vals.last().expect("parsed ranges are non-empty");
        values = Some(vals);
    }
    let cfg = cfg.finalize()?;
    if cli.dump_config {
        print!("{}", cfg.to_toml());
        return Ok(ExitCode::SUCCESS);
    }

    let mut spec = cfg.sweep();
    if let Some(vals) = values {
        spec.values = vals;
    }
    let result = monte_carlo(&spec, &cfg.drop_config())?;
    let paths = write_outputs(&result, &cfg.output_dir, cfg.trace)?;
    print!("{}", d2d_rica::output::summary_text(&result));
    eprintln!("wrote {}", paths.results.display());
    if let Some(t) = &paths.trace {
        eprintln!("wrote {}", t.display());
    }
    eprintln!("wrote {}", paths.summary.display());

    let violations = result.violation_count();
    if violations > 0 {
        eprintln!("error: {violations} invariant violations");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
