//! Mean sum SE of every receiver scheme and CSI mode on a small scenario.
//!
//! ```text
//! cargo run --release --example receiver_comparison [layouts] [draws]
//! ```

use cellfree::engine::{run_point, Variant};
use cellfree::{CsiMode, ReceiverScheme, SystemParams};

fn main() -> cellfree::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let params = SystemParams {
        num_rrh: 20,
        num_ue: 60,
        num_layouts: args.next().unwrap_or(2),
        num_fading_draws: args.next().unwrap_or(10),
        ..SystemParams::default()
    };
    let variants = Variant::grid(&ReceiverScheme::ALL, &CsiMode::ALL);
    let stats = run_point(&params, &variants)?;

    print!("{:<12}", "scheme");
    for csi in CsiMode::ALL {
        print!("{:>10}", csi.name());
    }
    println!();
    for scheme in ReceiverScheme::ALL {
        print!("{:<12}", scheme.name());
        for csi in CsiMode::ALL {
            let s = stats.iter().find(|s| s.variant == Variant::new(scheme, csi)).unwrap();
            print!("{:>10.2}", s.mean_sum_se);
        }
        println!();
    }
    println!("(mean sum SE in bit/s/Hz over {} layouts x {} draws)", params.num_layouts, params.num_fading_draws);
    Ok(())
}
