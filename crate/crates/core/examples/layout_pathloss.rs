//! Random layout on the torus, LSFC matrix and calibrated SNR.
//!
//! ```text
//! cargo run --release --example layout_pathloss
//! ```

use cellfree::geometry::{
    calibrate_snr, compute_lsfc_matrix, generate_layout, lsfc, rrh_disk_diameter, torus_distance, SystemParams,
};
use cellfree::rng::SeedTree;

fn main() -> cellfree::Result<()> {
    let params = SystemParams::default();
    let layout = generate_layout(&params, &SeedTree::new(params.master_seed));

    println!("pathloss model (dB gain):");
    for d in [1.0, 10.0, 50.0, 100.0, 300.0] {
        println!("  d = {d:>5} m  beta = {:8.2} dB", 10.0 * lsfc(d).log10());
    }

    let d_l = rrh_disk_diameter(&params);
    let snr = calibrate_snr(&params);
    println!("RRH disk diameter d_L = {d_l:.1} m");
    println!("calibrated SNR = {:.1} dB (beta(3 d_L) M SNR = 1)", 10.0 * snr.log10());

    let beta = compute_lsfc_matrix(&layout, &params)?;
    let ue = 0;
    let mut links: Vec<(usize, f64, f64)> = (0..params.num_rrh)
        .map(|l| {
            let d = torus_distance(layout.rrh_positions[l], layout.ue_positions[ue], params.area_side).unwrap();
            (l, d, beta.get(l, ue))
        })
        .collect();
    links.sort_by(|a, b| b.2.total_cmp(&a.2));
    let threshold = params.qos_gain_threshold();
    println!("strongest RRHs of UE {ue} (QoS threshold {:.1} dB):", 10.0 * threshold.log10());
    for (l, d, b) in links.iter().take(5) {
        println!(
            "  RRH {l:>2}  {d:6.1} m  {:7.2} dB  {}",
            10.0 * b.log10(),
            if *b >= threshold { "eligible" } else { "below threshold" }
        );
    }
    let eligible = links.iter().filter(|x| x.2 >= threshold).count();
    println!("{eligible} of {} RRHs pass the threshold", params.num_rrh);
    Ok(())
}
