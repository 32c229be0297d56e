//! Sweep of the maximum cluster size with paired layouts, written as
//! `summary.json`, `point_<i>.csv` and `sum_se.csv`.
//!
//! ```text
//! cargo run --release --example parameter_sweep [out_dir]
//! ```

use std::path::PathBuf;

use cellfree::cli::{emit_results, RunConfig};
use cellfree::engine::{run_sweep, SweepAxis};
use cellfree::{CsiMode, ReceiverScheme, SystemParams};

fn main() -> cellfree::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("cellfree-q-sweep"), PathBuf::from);
    let values = vec![1.0, 2.0, 5.0, 10.0];
    let config = RunConfig {
        params: SystemParams {
            num_rrh: 20,
            num_ue: 60,
            num_layouts: 2,
            num_fading_draws: 5,
            ..SystemParams::default()
        },
        schemes: vec![ReceiverScheme::GZF, ReceiverScheme::MRC_OPT],
        csi_modes: vec![CsiMode::Sp],
        sweep: Some((SweepAxis::MaxClusterSize, values.clone())),
        output_dir: out.clone(),
        ..RunConfig::default()
    };
    config.validate()?;

    let result = run_sweep(&config.params, SweepAxis::MaxClusterSize, &values, &config.variants())?;
    for v in config.variants() {
        let curve: Vec<String> = result.curve(v).iter().map(|x| format!("{x:.2}")).collect();
        println!("{v:<12} Q = {values:?} -> sum SE {}", curve.join(", "));
    }
    for path in emit_results(&result, &config, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
