//! Runs a figure preset and prints its manifest checks.
//!
//! ```text
//! cargo run --release --example reproduce_figure -- fig5 [out_dir] [key=value ...]
//! ```
//!
//! Overrides such as `num_layouts=2 num_fading_draws=5` shrink the run.

use std::path::PathBuf;

use cellfree::cli::figures::FigureOptions;
use cellfree::cli::{reproduce_figure, Figure, Scale};

fn main() -> cellfree::Result<()> {
    let mut args = std::env::args().skip(1);
    let figure: Figure = args.next().as_deref().unwrap_or("fig5").parse()?;
    let out = args
        .next()
        .map_or_else(|| std::env::temp_dir().join(format!("cellfree-{figure}")), PathBuf::from);
    let opts = FigureOptions {
        overrides: args.collect(),
        ..FigureOptions::default()
    };

    let report = reproduce_figure(figure, Scale::Desk, &out, &opts)?;
    for (label, result) in &report.results {
        println!("{label}: {} over {:?}", result.axis, result.values);
    }
    for c in &report.claims {
        println!("[{}] {}  ({})", if c.passed { "pass" } else { "FAIL" }, c.description, c.detail);
    }
    println!("{} files in {}", report.files.len(), out.display());
    Ok(())
}
