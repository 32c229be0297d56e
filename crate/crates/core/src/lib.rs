//! Monte Carlo simulator for the uplink of user-centric cell-free massive
//! MIMO networks with subspace-projection pilot decontamination.
//!
//! Pipeline: [`geometry`] places RRHs and UEs and computes LSFCs,
//! [`association`] forms clusters and assigns pilots, [`channel`] draws
//! angular-support channels, [`estimation`] builds PM/SP estimates,
//! [`receivers`] computes GZF and local LMMSE/MRC receivers, and [`engine`]
//! aggregates SINR, rate and SE over layouts and draws. [`cli`] holds the
//! configuration, figure presets and result files.

pub mod association;
pub mod channel;
pub mod cli;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod receivers;
pub mod rng;

pub use engine::{run_layout, run_point, run_sweep, SweepAxis, SweepResult, TrialResult, Variant};
pub use error::{Error, Result};
pub use estimation::CsiMode;
pub use geometry::SystemParams;
pub use receivers::ReceiverScheme;
