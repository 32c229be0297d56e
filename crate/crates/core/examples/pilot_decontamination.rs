//! Pilot matching vs subspace projection: normalized estimation error on
//! every edge of one layout, split by whether the co-pilot supports at the
//! RRH overlap the desired support.
//!
//! ```text
//! cargo run --release --example pilot_decontamination
//! ```

use std::f64::consts::PI;

use cellfree::channel::{channel_block, draw_realization};
use cellfree::engine::LayoutState;
use cellfree::estimation::{CsiMode, EstimateSet};
use cellfree::geometry::SystemParams;
use cellfree::rng::SeedTree;

fn main() -> cellfree::Result<()> {
    for spread in [PI / 16.0, PI / 2.0] {
        let params = SystemParams {
            num_rrh: 20,
            num_ue: 60,
            angular_spread: spread,
            ..SystemParams::default()
        };
        let state = LayoutState::new(&params, &SeedTree::new(5))?;
        let m = params.antennas_per_rrh;
        let draw = SeedTree::new(6);
        let (h, _) = draw_realization(&state.subspaces, &state.lsfc, &draw.named("fading"));
        let pm = EstimateSet::from_pilots(CsiMode::Pm, &h, &state.graph, &state.subspaces, state.snr, &draw);
        let sp = EstimateSet::from_pilots(CsiMode::Sp, &h, &state.graph, &state.subspaces, state.snr, &draw);

        // (error PM, error SP, channel energy) for disjoint and overlapping edges
        let mut acc = [[0.0; 3]; 2];
        for l in 0..params.num_rrh {
            for &k in state.graph.served(l) {
                let truth = channel_block(&h, m, l, k);
                let own = state.subspaces.support(l, k);
                let overlap = state
                    .graph
                    .copilot_ues(k)
                    .iter()
                    .any(|&j| !own.is_disjoint(state.subspaces.support(l, j)));
                let a = &mut acc[overlap as usize];
                a[0] += (pm.edge(l, k).unwrap() - &truth).norm_squared();
                a[1] += (sp.edge(l, k).unwrap() - &truth).norm_squared();
                a[2] += truth.norm_squared();
            }
        }
        println!("angular spread {spread:.3} rad, {} edges", state.graph.num_edges());
        for (name, a) in ["disjoint", "overlapping"].iter().zip(acc) {
            if a[2] > 0.0 {
                println!(
                    "  {name:<12} NMSE  PM {:8.2} dB   SP {:8.2} dB",
                    10.0 * (a[0] / a[2]).log10(),
                    10.0 * (a[1] / a[2]).log10()
                );
            }
        }
    }
    Ok(())
}
