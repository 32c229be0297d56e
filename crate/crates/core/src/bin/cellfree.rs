use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cellfree::cli::figures::{FigureOptions, DEFAULT_BUDGET_SECS};
use cellfree::cli::{emit_results, parse_config, preflight, reproduce_figure, Figure, Scale};
use cellfree::engine::{run_sweep, SweepAxis};
use cellfree::Result;

/// Uplink cell-free massive MIMO Monte Carlo simulator.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set Q=15`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Run a figure preset instead of the configured sweep.
    #[arg(long)]
    figure: Option<Figure>,
    /// Preset scale.
    #[arg(long, default_value = "desk")]
    scale: Scale,
    /// Run even when the estimated runtime exceeds the budget.
    #[arg(long)]
    force: bool,
    /// Runtime budget in seconds for figure presets.
    #[arg(long, default_value_t = DEFAULT_BUDGET_SECS)]
    budget: f64,
}

fn run(args: Args) -> Result<()> {
    let contents = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| cellfree::Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => String::new(),
    };
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }

    if let Some(figure) = args.figure {
        let out = args
            .out
            .unwrap_or_else(|| PathBuf::from("results").join(format!("{figure}-{}", args.scale)));
        let opts = FigureOptions {
            seed: None,
            overrides,
            budget_secs: args.budget,
            force: args.force,
        };
        let report = reproduce_figure(figure, args.scale, &out, &opts)?;
        for c in &report.claims {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.detail);
        }
        println!("wrote {} files to {}", report.files.len(), out.display());
        return Ok(());
    }

    let mut config = parse_config(&contents, &overrides)?;
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    preflight(&config.output_dir)?;
    let (axis, values) = config
        .sweep
        .clone()
        .unwrap_or((SweepAxis::PilotDim, vec![config.params.pilot_dim as f64]));
    let result = run_sweep(&config.params, axis, &values, &config.variants())?;
    for p in &result.points {
        for s in &p.variants {
            println!("{} = {}  {:<16} mean sum SE {:.3}", axis, p.value, s.variant.to_string(), s.mean_sum_se);
        }
    }
    let files = emit_results(&result, &config, &config.output_dir)?;
    println!("wrote {} files to {}", files.len(), config.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
