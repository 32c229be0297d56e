//! Leader election, pilot assignment and cluster formation for one layout,
//! comparing the two cluster enrollment orders.
//!
//! ```text
//! cargo run --release --example clustering
//! ```

use cellfree::association::associate;
use cellfree::geometry::{compute_lsfc_matrix, generate_layout, ClusterOrder, SystemParams};
use cellfree::rng::SeedTree;

fn histogram(sizes: &[usize], max: usize) -> String {
    let mut counts = vec![0usize; max + 1];
    for &s in sizes {
        counts[s] += 1;
    }
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, c)| format!("{s}:{c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> cellfree::Result<()> {
    let seeds = SeedTree::new(3);
    for order in [ClusterOrder::GlobalLsfc, ClusterOrder::PerUe] {
        let params = SystemParams {
            cluster_order: order,
            ..SystemParams::default()
        };
        let layout = generate_layout(&params, &seeds.named("geometry"));
        let beta = compute_lsfc_matrix(&layout, &params)?;
        let graph = associate(&beta, &params, &seeds.named("order"))?;
        graph.check_invariants(&beta, &params)?;

        let sizes: Vec<usize> = (0..params.num_ue).map(|k| graph.cluster(k).len()).collect();
        let loads: Vec<usize> = (0..params.num_rrh).map(|l| graph.served(l).len()).collect();
        println!("{order:?}:");
        println!("  edges {}, outage {}", graph.num_edges(), graph.outage().len());
        println!("  cluster size histogram (size:count) {}", histogram(&sizes, params.max_cluster_size));
        println!("  RRH load histogram (|U_l|:count)   {}", histogram(&loads, params.pilot_dim));
        let k = graph.order()[0];
        println!(
            "  first UE {k}: leader {:?}, pilot {:?}, cluster {:?}, co-pilot UEs {:?}",
            graph.leader(k),
            graph.pilot(k),
            graph.cluster(k),
            graph.copilot_ues(k)
        );
    }
    Ok(())
}
