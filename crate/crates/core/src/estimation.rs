//! Uplink pilot phase: pilot-matching (PM) and subspace-projection (SP)
//! channel estimates.
//!
//! RRH `l` observes `Y_l = sum_i h_{l,i} phi_{t_i}^H + Z_l` where the sum runs
//! over every transmitting UE, served or not. Correlating with `phi_t` gives
//! the PM estimate `h + sum_{co-pilot} h_i + noise`. SP projects the PM estimate
//! onto the known DFT subspace of the edge, which removes every co-pilot
//! component lying in an orthogonal subspace.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::association::AssociationGraph;
use crate::channel::{channel_block, complex_normal, SubspaceBasis, SubspaceMap};
use crate::error::Error;
use crate::geometry::LsfcMatrix;
use crate::rng::SeedTree;

/// Source of the channel knowledge used by the receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    /// Genie-aided partial CSI: exact channels on every edge.
    Ideal,
    Pm,
    Sp,
}

impl CsiMode {
    pub const ALL: [CsiMode; 3] = [CsiMode::Ideal, CsiMode::Pm, CsiMode::Sp];

    pub fn name(self) -> &'static str {
        match self {
            CsiMode::Ideal => "ideal",
            CsiMode::Pm => "pm",
            CsiMode::Sp => "sp",
        }
    }
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" | "full" => Ok(CsiMode::Ideal),
            "pm" => Ok(CsiMode::Pm),
            "sp" => Ok(CsiMode::Sp),
            _ => Err(Error::InvalidArgument(format!("unknown CSI mode `{s}`"))),
        }
    }
}

/// Orthogonal pilot codebook, column `t` is `phi_t`, scaled so that
/// `phi_i^H phi_j = tau_p SNR delta_ij`.
#[derive(Debug, Clone)]
pub struct PilotBook {
    pilots: DMatrix<Complex64>,
    snr: f64,
}

impl PilotBook {
    /// Scaled identity book `phi_t = sqrt(tau_p SNR) e_t`.
    pub fn new(pilot_dim: usize, snr: f64) -> Self {
        let scale = (pilot_dim as f64 * snr).sqrt();
        PilotBook {
            pilots: DMatrix::identity(pilot_dim, pilot_dim) * Complex64::from(scale),
            snr,
        }
    }

    pub fn pilot_dim(&self) -> usize {
        self.pilots.ncols()
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn pilot(&self, t: usize) -> DVector<Complex64> {
        self.pilots.column(t).into_owned()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.pilots
    }
}

/// Noise-free part of the pilot field at RRH `rrh` plus the given noise matrix.
pub fn pilot_field(
    h: &DMatrix<Complex64>,
    antennas: usize,
    graph: &AssociationGraph,
    book: &PilotBook,
    rrh: usize,
    noise: DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let mut y = noise;
    for i in graph.active_ues() {
        let t = graph.pilot(i).expect("active UE has a pilot");
        let hi = channel_block(h, antennas, rrh, i);
        y += hi * book.pilots.column(t).adjoint();
    }
    y
}

/// Pilot field with i.i.d. `CN(0, 1)` noise.
pub fn received_pilot_field<R: Rng + ?Sized>(
    h: &DMatrix<Complex64>,
    antennas: usize,
    graph: &AssociationGraph,
    book: &PilotBook,
    rrh: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let noise = DMatrix::from_fn(antennas, book.pilot_dim(), |_, _| complex_normal(rng));
    pilot_field(h, antennas, graph, book, rrh, noise)
}

/// `Y phi / (tau_p SNR)`.
pub fn pm_estimate(y: &DMatrix<Complex64>, phi: &DVector<Complex64>, snr: f64, pilot_dim: usize) -> DVector<Complex64> {
    (y * phi) / Complex64::from(pilot_dim as f64 * snr)
}

/// `F F^H h_pm`.
pub fn sp_estimate(h_pm: &DVector<Complex64>, basis: &SubspaceBasis) -> DVector<Complex64> {
    basis.project(h_pm)
}

/// Covariance of the co-pilot contamination left after subspace projection
/// on edge `(rrh, ue)`:
/// `sum_{i co-pilot} (beta_i M / |S_i|) P_k P_i P_k` with `P = F F^H`.
pub fn contamination_covariance(
    graph: &AssociationGraph,
    lsfc: &LsfcMatrix,
    subspaces: &SubspaceMap,
    rrh: usize,
    ue: usize,
) -> DMatrix<Complex64> {
    let m = subspaces.antennas();
    let fk = subspaces.basis(rrh, ue).matrix();
    let mut sigma = DMatrix::zeros(m, m);
    for i in graph.copilot_ues(ue) {
        let fi = subspaces.basis(rrh, i).matrix();
        let scale = lsfc.get(rrh, i) * m as f64 / fi.ncols() as f64;
        // F_k (F_k^H F_i)(F_i^H F_k) F_k^H
        let cross = fk.ad_mul(fi);
        let inner = &cross * cross.adjoint();
        sigma += (fk * inner * fk.adjoint()) * Complex64::from(scale);
    }
    sigma
}

/// Per-edge channel knowledge `{h_hat_{l,k} : (l, k) in E}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    mode: CsiMode,
    antennas: usize,
    num_ue: usize,
    edges: Vec<Option<DVector<Complex64>>>,
}

impl EstimateSet {
    pub fn mode(&self) -> CsiMode {
        self.mode
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Estimate on edge `(rrh, ue)`, `None` off the graph.
    #[inline]
    pub fn edge(&self, rrh: usize, ue: usize) -> Option<&DVector<Complex64>> {
        self.edges[rrh * self.num_ue + ue].as_ref()
    }

    /// Exact channels on every edge.
    pub fn ideal(h: &DMatrix<Complex64>, antennas: usize, graph: &AssociationGraph) -> Self {
        let (l_count, k_count) = (graph.num_rrh(), graph.num_ue());
        let edges = (0..l_count * k_count)
            .map(|idx| {
                let (l, k) = (idx / k_count, idx % k_count);
                graph.has_edge(l, k).then(|| channel_block(h, antennas, l, k))
            })
            .collect();
        EstimateSet {
            mode: CsiMode::Ideal,
            antennas,
            num_ue: k_count,
            edges,
        }
    }

    /// Pilot-based estimates. The pilot noise at RRH `l` is drawn from
    /// `seeds / l`, so PM and SP built from the same seeds see the same field.
    pub fn from_pilots(
        mode: CsiMode,
        h: &DMatrix<Complex64>,
        graph: &AssociationGraph,
        subspaces: &SubspaceMap,
        snr: f64,
        seeds: &SeedTree,
    ) -> Self {
        if mode == CsiMode::Ideal {
            return Self::ideal(h, subspaces.antennas(), graph);
        }
        let m = subspaces.antennas();
        let (l_count, k_count) = (graph.num_rrh(), graph.num_ue());
        let book = PilotBook::new(graph.pilot_dim(), snr);
        let mut edges = vec![None; l_count * k_count];
        for l in 0..l_count {
            if graph.served(l).is_empty() {
                continue;
            }
            let mut rng = seeds.index(l as u64).rng();
            let y = received_pilot_field(h, m, graph, &book, l, &mut rng);
            for &k in graph.served(l) {
                let t = graph.pilot(k).expect("served UE has a pilot");
                let pm = pm_estimate(&y, &book.pilot(t), snr, book.pilot_dim());
                edges[l * k_count + k] = Some(match mode {
                    CsiMode::Sp => sp_estimate(&pm, subspaces.basis(l, k)),
                    _ => pm,
                });
            }
        }
        EstimateSet {
            mode,
            antennas: m,
            num_ue: k_count,
            edges,
        }
    }
}
