//! Per-UE receive vectors.
//!
//! Three detector families are supported:
//!
//! * **GZF**: cluster-wide zero forcing. The known in-cluster interference
//!   columns are orthonormalized through an SVD and the desired channel is
//!   projected onto their orthogonal complement.
//! * **Local MRC / LMMSE**: every RRH of the cluster computes its own receive
//!   vector from locally known channels; out-of-cluster interference is
//!   modelled as white noise of variance `sigma_l^2`.
//!
//! Local outputs are fused with either equal gains (EGC) or the weights
//! `Gamma^-1 a` that maximize the nominal post-combining SINR.
//!
//! Receivers are always built from the CSI in an [`EstimateSet`]; performance
//! is evaluated elsewhere against the true channels.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::association::{partial_csi_view, AssociationGraph, ClusterView};
use crate::error::{Error, Result};
use crate::estimation::EstimateSet;
use crate::geometry::LsfcMatrix;

/// Relative singular-value cutoff for the interference span.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Smallest `|R_ii| / max |R_ii|` for which QR is trusted as a span basis.
const QR_FULL_RANK_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    Gzf,
    LocalMrc,
    LocalLmmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Combiner {
    Egc,
    Optimal,
}

/// Detector plus combining rule. The combiner is ignored for GZF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReceiverScheme {
    pub detector: Detector,
    pub combiner: Combiner,
}

impl ReceiverScheme {
    pub const GZF: ReceiverScheme = ReceiverScheme {
        detector: Detector::Gzf,
        combiner: Combiner::Optimal,
    };
    pub const LMMSE_OPT: ReceiverScheme = ReceiverScheme {
        detector: Detector::LocalLmmse,
        combiner: Combiner::Optimal,
    };
    pub const LMMSE_EGC: ReceiverScheme = ReceiverScheme {
        detector: Detector::LocalLmmse,
        combiner: Combiner::Egc,
    };
    pub const MRC_OPT: ReceiverScheme = ReceiverScheme {
        detector: Detector::LocalMrc,
        combiner: Combiner::Optimal,
    };
    pub const MRC_EGC: ReceiverScheme = ReceiverScheme {
        detector: Detector::LocalMrc,
        combiner: Combiner::Egc,
    };

    pub const ALL: [ReceiverScheme; 5] = [
        Self::GZF,
        Self::LMMSE_OPT,
        Self::LMMSE_EGC,
        Self::MRC_OPT,
        Self::MRC_EGC,
    ];

    pub fn name(self) -> &'static str {
        match (self.detector, self.combiner) {
            (Detector::Gzf, _) => "gzf",
            (Detector::LocalLmmse, Combiner::Optimal) => "lmmse-opt",
            (Detector::LocalLmmse, Combiner::Egc) => "lmmse-egc",
            (Detector::LocalMrc, Combiner::Optimal) => "mrc-opt",
            (Detector::LocalMrc, Combiner::Egc) => "mrc-egc",
        }
    }
}

impl fmt::Display for ReceiverScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReceiverScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == lower)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown receiver scheme `{s}`")))
    }
}

impl Serialize for ReceiverScheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ReceiverScheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Unit-norm receive vector, nonzero only on the blocks of its cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalReceiver {
    antennas: usize,
    rrhs: Vec<usize>,
    /// Cluster blocks stacked in the order of `rrhs`.
    stacked: DVector<Complex64>,
}

impl GlobalReceiver {
    pub fn rrhs(&self) -> &[usize] {
        &self.rrhs
    }

    pub fn stacked(&self) -> &DVector<Complex64> {
        &self.stacked
    }

    pub fn block(&self, i: usize) -> &[Complex64] {
        &self.stacked.as_slice()[i * self.antennas..(i + 1) * self.antennas]
    }

    /// Expands to the full `LM x 1` vector with zero blocks outside the cluster.
    pub fn to_dense(&self, num_rrh: usize) -> DVector<Complex64> {
        let m = self.antennas;
        let mut v = DVector::zeros(num_rrh * m);
        for (i, &l) in self.rrhs.iter().enumerate() {
            v.rows_mut(l * m, m).copy_from_slice(self.block(i));
        }
        v
    }

    /// `v^H h_j` against column `ue` of an `LM x K` channel matrix.
    #[inline]
    pub fn inner(&self, h: &DMatrix<Complex64>, ue: usize) -> Complex64 {
        let m = self.antennas;
        let col = h.column(ue);
        let col = col.as_slice();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &l) in self.rrhs.iter().enumerate() {
            for (v, x) in self.block(i).iter().zip(&col[l * m..(l + 1) * m]) {
                acc += v.conj() * x;
            }
        }
        acc
    }
}

/// Number of singular values above `tol_rel` times the largest one.
pub fn rank_truncation(singular_values: &[f64], tol_rel: f64) -> usize {
    let max = singular_values.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > tol_rel * max).count()
}

/// Orthonormal basis of the column span of `m`, with rank decided by
/// [`rank_truncation`].
///
/// Clearly full-rank inputs take a Householder QR shortcut; anything close to
/// rank deficiency goes through the SVD.
pub fn column_span(m: &DMatrix<Complex64>, tol_rel: f64) -> DMatrix<Complex64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    if m.ncols() <= m.nrows() {
        let qr = m.clone().qr();
        let r = qr.r();
        let diag: Vec<f64> = (0..m.ncols()).map(|i| r[(i, i)].norm()).collect();
        let max = diag.iter().copied().fold(0.0, f64::max);
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if max > 0.0 && min > QR_FULL_RANK_RATIO * max {
            return qr.q();
        }
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).expect("finite singular values"));
    let rank = rank_truncation(&sv, tol_rel);
    let cols: Vec<_> = idx[..rank].iter().map(|&i| u.column(i)).collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// GZF receiver for the target UE of a cluster view.
pub fn gzf_receiver(view: &ClusterView, tol_rel: f64) -> Result<GlobalReceiver> {
    let antennas = view.matrix.nrows() / view.rrhs.len().max(1);
    let h = view.desired();
    let span = column_span(&view.interference(), tol_rel);
    let projected = if span.ncols() == 0 {
        h.clone()
    } else {
        &h - &span * span.ad_mul(&h)
    };
    let norm = projected.norm();
    if !(norm > 1e-10 * h.norm()) {
        return Err(Error::DegenerateReceiver {
            ue: view.ues[view.target],
        });
    }
    Ok(GlobalReceiver {
        antennas,
        rrhs: view.rrhs.clone(),
        stacked: projected / Complex64::from(norm),
    })
}

/// GZF from the block-sparse cluster matrix through its Gram matrix.
///
/// Returns `None` whenever the result cannot be certified (ill-conditioned
/// Gram matrix, residual interference above `1e-10` relative, or a vanishing
/// projection); callers then use [`gzf_receiver`].
pub fn gzf_sparse(graph: &AssociationGraph, csi: &EstimateSet, ue: usize) -> Option<GlobalReceiver> {
    let rrhs = graph.cluster(ue);
    let m = csi.antennas();
    let desired: Vec<&DVector<Complex64>> = rrhs.iter().map(|&l| csi.edge(l, ue)).collect::<Option<_>>()?;
    let cols: Vec<Vec<(usize, &DVector<Complex64>)>> = graph
        .cluster_users(ue)
        .into_iter()
        .filter(|&j| j != ue)
        .map(|j| {
            rrhs.iter()
                .enumerate()
                .filter_map(|(i, &l)| csi.edge(l, j).map(|h| (i, h)))
                .collect()
        })
        .collect();
    let r = cols.len();
    let block_dot = |a: &[(usize, &DVector<Complex64>)], b: &[(usize, &DVector<Complex64>)]| {
        let mut acc = Complex64::new(0.0, 0.0);
        let (mut p, mut q) = (0, 0);
        while p < a.len() && q < b.len() {
            match a[p].0.cmp(&b[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[p].1.dotc(b[q].1);
                    p += 1;
                    q += 1;
                }
            }
        }
        acc
    };
    let h_blocks: Vec<(usize, &DVector<Complex64>)> = desired.iter().copied().enumerate().collect();
    let mut v: Vec<DVector<Complex64>> = desired.iter().map(|h| (*h).clone()).collect();
    let h_norm = desired.iter().map(|h| h.norm_squared()).sum::<f64>().sqrt();
    if r > 0 {
        let mut gram = DMatrix::zeros(r, r);
        for a in 0..r {
            for b in a..r {
                let g = block_dot(&cols[a], &cols[b]);
                gram[(a, b)] = g;
                gram[(b, a)] = g.conj();
            }
        }
        let rhs = DVector::from_fn(r, |a, _| block_dot(&cols[a], &h_blocks));
        let chol = Cholesky::new(gram)?;
        let diag: Vec<f64> = (0..r).map(|i| chol.l_dirty()[(i, i)].re).collect();
        let max = diag.iter().copied().fold(0.0, f64::max);
        if diag.iter().any(|&d| !(d > 1e-5 * max)) {
            return None;
        }
        let x = chol.solve(&rhs);
        for (a, col) in cols.iter().enumerate() {
            for &(i, hj) in col {
                v[i].axpy(-x[a], hj, Complex64::new(1.0, 0.0));
            }
        }
    }
    let norm = v.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
    if !(norm > 1e-10 * h_norm) {
        return None;
    }
    let v_blocks: Vec<(usize, &DVector<Complex64>)> = v.iter().enumerate().collect();
    for col in &cols {
        let c_norm = col.iter().map(|(_, h)| h.norm_squared()).sum::<f64>().sqrt();
        if block_dot(col, &v_blocks).norm() > 1e-10 * c_norm * norm {
            return None;
        }
    }
    let mut stacked = DVector::zeros(rrhs.len() * m);
    for (i, b) in v.iter().enumerate() {
        stacked.rows_mut(i * m, m).copy_from(&(b / Complex64::from(norm)));
    }
    Some(GlobalReceiver {
        antennas: m,
        rrhs: rrhs.to_vec(),
        stacked,
    })
}

/// `sigma_l^2 = 1 + SNR * sum of beta_{l,j}` over transmitting UEs `j` not served by `l`.
pub fn unknown_interference_variance(beta_row: &[f64], served: &[usize], outage: &[usize], snr: f64) -> f64 {
    let unknown: f64 = beta_row
        .iter()
        .enumerate()
        .filter(|(j, _)| !served.contains(j) && !outage.contains(j))
        .map(|(_, b)| b)
        .sum();
    1.0 + snr * unknown
}

/// `sigma_l^2` for every RRH, always from the true LSFCs.
pub fn interference_variances(graph: &AssociationGraph, lsfc: &LsfcMatrix, snr: f64) -> Vec<f64> {
    (0..graph.num_rrh())
        .map(|l| unknown_interference_variance(lsfc.row(l), graph.served(l), graph.outage(), snr))
        .collect()
}

pub fn mrc_local(h_hat: &DVector<Complex64>) -> DVector<Complex64> {
    h_hat.clone()
}

fn lmmse_matrix(known: &[&DVector<Complex64>], sigma_sq: f64, snr: f64) -> DMatrix<Complex64> {
    let m = known.first().map_or(0, |h| h.len());
    let mut a = DMatrix::<Complex64>::identity(m, m) * Complex64::from(sigma_sq);
    for h in known {
        a.ger(Complex64::from(snr), h, &h.conjugate(), Complex64::from(1.0));
    }
    a
}

/// `(sigma^2 I + SNR sum_j h_j h_j^H)^-1 h_target` over the locally known channels.
pub fn lmmse_local(known: &[&DVector<Complex64>], target: usize, sigma_sq: f64, snr: f64) -> DVector<Complex64> {
    lmmse_local_all(known, sigma_sq, snr).swap_remove(target)
}

/// LMMSE vectors for every locally known UE, sharing one factorization.
pub fn lmmse_local_all(known: &[&DVector<Complex64>], sigma_sq: f64, snr: f64) -> Vec<DVector<Complex64>> {
    if known.is_empty() {
        return Vec::new();
    }
    let chol = Cholesky::new(lmmse_matrix(known, sigma_sq, snr)).expect("sigma^2 I + PSD is positive definite");
    known.iter().map(|h| chol.solve(*h)).collect()
}

/// Local receive vectors `v_{l,k}` on every edge.
#[derive(Debug, Clone)]
pub struct LocalReceivers {
    num_ue: usize,
    vectors: Vec<Option<DVector<Complex64>>>,
}

impl LocalReceivers {
    pub fn compute(
        detector: Detector,
        graph: &AssociationGraph,
        csi: &EstimateSet,
        sigma_sq: &[f64],
        snr: f64,
    ) -> Result<Self> {
        let (l_count, k_count) = (graph.num_rrh(), graph.num_ue());
        let mut vectors = vec![None; l_count * k_count];
        for l in 0..l_count {
            let served = graph.served(l);
            let known: Vec<&DVector<Complex64>> = served
                .iter()
                .map(|&k| {
                    csi.edge(l, k)
                        .ok_or_else(|| Error::InvalidState(format!("no CSI on edge ({l},{k})")))
                })
                .collect::<Result<_>>()?;
            let local = match detector {
                Detector::LocalMrc => known.iter().map(|h| mrc_local(h)).collect(),
                Detector::LocalLmmse => lmmse_local_all(&known, sigma_sq[l], snr),
                Detector::Gzf => {
                    return Err(Error::InvalidArgument("GZF has no local receivers".into()));
                }
            };
            for (&k, v) in served.iter().zip(local) {
                vectors[l * k_count + k] = Some(v);
            }
        }
        Ok(LocalReceivers {
            num_ue: k_count,
            vectors,
        })
    }

    pub fn get(&self, rrh: usize, ue: usize) -> Option<&DVector<Complex64>> {
        self.vectors[rrh * self.num_ue + ue].as_ref()
    }
}

/// Effective cluster model for one UE after local detection.
#[derive(Debug, Clone)]
pub struct CombinerState {
    /// `g_{l,k,k}` for `l` in `C_k`.
    pub a: DVector<Complex64>,
    /// `g_{l,k,j}` for known interferers `j` in `U(C_k) \ {k}`; zero off the graph.
    pub g: DMatrix<Complex64>,
    /// Diagonal of `D_k`: `sigma_l^2 ||v_{l,k}||^2`.
    pub d: DVector<f64>,
    /// `D_k + SNR G_k G_k^H`.
    pub gamma: DMatrix<Complex64>,
    pub sigma_sq: Vec<f64>,
    pub interferers: Vec<usize>,
}

pub fn combiner_state(
    graph: &AssociationGraph,
    csi: &EstimateSet,
    local: &LocalReceivers,
    sigma_sq: &[f64],
    snr: f64,
    ue: usize,
) -> Result<CombinerState> {
    if graph.is_outage(ue) {
        return Err(Error::InvalidArgument(format!("UE {ue} is in outage")));
    }
    let rrhs = graph.cluster(ue);
    let interferers: Vec<usize> = graph.cluster_users(ue).into_iter().filter(|&j| j != ue).collect();
    let n = rrhs.len();
    let mut a = DVector::zeros(n);
    let mut g = DMatrix::zeros(n, interferers.len());
    let mut d = DVector::zeros(n);
    let mut sig = Vec::with_capacity(n);
    for (i, &l) in rrhs.iter().enumerate() {
        let v = local
            .get(l, ue)
            .ok_or_else(|| Error::InvalidState(format!("no local receiver on edge ({l},{ue})")))?;
        let own = csi.edge(l, ue).expect("edge has CSI");
        a[i] = v.dotc(own);
        for (c, &j) in interferers.iter().enumerate() {
            if let Some(hj) = csi.edge(l, j) {
                g[(i, c)] = v.dotc(hj);
            }
        }
        d[i] = sigma_sq[l] * v.norm_squared();
        sig.push(sigma_sq[l]);
    }
    let mut gamma = &g * g.adjoint() * Complex64::from(snr);
    for i in 0..n {
        gamma[(i, i)] += Complex64::from(d[i]);
    }
    Ok(CombinerState {
        a,
        g,
        d,
        gamma,
        sigma_sq: sig,
        interferers,
    })
}

/// `SNR |w^H a|^2 / (w^H Gamma w)`.
pub fn nominal_sinr(w: &DVector<Complex64>, a: &DVector<Complex64>, gamma: &DMatrix<Complex64>, snr: f64) -> f64 {
    let num = w.dotc(a).norm_sqr();
    let den = w.dotc(&(gamma * w)).re;
    snr * num / den
}

pub fn egc_weights(n: usize) -> DVector<Complex64> {
    DVector::from_element(n, Complex64::new(1.0, 0.0))
}

/// `w = Gamma^-1 a`, the maximizer of the nominal SINR. Rows with a zero
/// diagonal (a vanished local receiver) are dropped and get weight 0.
pub fn optimal_weights(a: &DVector<Complex64>, gamma: &DMatrix<Complex64>) -> DVector<Complex64> {
    let n = a.len();
    let keep: Vec<usize> = (0..n).filter(|&i| gamma[(i, i)].re > 0.0).collect();
    let mut w = DVector::zeros(n);
    if keep.is_empty() {
        return w;
    }
    let sub = DMatrix::from_fn(keep.len(), keep.len(), |r, c| gamma[(keep[r], keep[c])]);
    let rhs = DVector::from_fn(keep.len(), |r, _| a[keep[r]]);
    let sol = match Cholesky::new(sub.clone()) {
        Some(ch) => ch.solve(&rhs),
        None => sub.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(keep.len())),
    };
    for (r, &i) in keep.iter().enumerate() {
        w[i] = sol[r];
    }
    w
}

/// Stacks `w_l v_l` over the cluster and normalizes to unit norm.
pub fn assemble_global(
    blocks: &[&DVector<Complex64>],
    w: &DVector<Complex64>,
    rrhs: &[usize],
    antennas: usize,
    ue: usize,
) -> Result<GlobalReceiver> {
    let mut stacked = DVector::zeros(rrhs.len() * antennas);
    for (i, v) in blocks.iter().enumerate() {
        stacked.rows_mut(i * antennas, antennas).copy_from(&(*v * w[i]));
    }
    let norm = stacked.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateReceiver { ue });
    }
    Ok(GlobalReceiver {
        antennas,
        rrhs: rrhs.to_vec(),
        stacked: stacked / Complex64::from(norm),
    })
}

/// Receive vectors of every UE for one scheme. Outage UEs and UEs whose
/// receiver degenerated have no vector.
#[derive(Debug, Clone)]
pub struct ReceiverBank {
    pub scheme: ReceiverScheme,
    pub vectors: Vec<Option<GlobalReceiver>>,
    pub degenerate: Vec<usize>,
}

impl ReceiverBank {
    pub fn gzf(graph: &AssociationGraph, csi: &EstimateSet, tol_rel: f64) -> Result<Self> {
        let mut vectors = Vec::with_capacity(graph.num_ue());
        let mut degenerate = Vec::new();
        for k in 0..graph.num_ue() {
            if graph.is_outage(k) {
                vectors.push(None);
                continue;
            }
            if let Some(v) = gzf_sparse(graph, csi, k) {
                vectors.push(Some(v));
                continue;
            }
            match gzf_receiver(&partial_csi_view(graph, csi, k)?, tol_rel) {
                Ok(v) => vectors.push(Some(v)),
                Err(Error::DegenerateReceiver { .. }) => {
                    degenerate.push(k);
                    vectors.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(ReceiverBank {
            scheme: ReceiverScheme::GZF,
            vectors,
            degenerate,
        })
    }

    pub fn combined(
        combiner: Combiner,
        local: &LocalReceivers,
        detector: Detector,
        graph: &AssociationGraph,
        csi: &EstimateSet,
        sigma_sq: &[f64],
        snr: f64,
    ) -> Result<Self> {
        let mut vectors = Vec::with_capacity(graph.num_ue());
        let mut degenerate = Vec::new();
        for k in 0..graph.num_ue() {
            if graph.is_outage(k) {
                vectors.push(None);
                continue;
            }
            let rrhs = graph.cluster(k);
            let blocks: Vec<&DVector<Complex64>> = rrhs
                .iter()
                .map(|&l| local.get(l, k).expect("edge has a local receiver"))
                .collect();
            let w = match combiner {
                Combiner::Egc => egc_weights(rrhs.len()),
                Combiner::Optimal => {
                    let st = combiner_state(graph, csi, local, sigma_sq, snr, k)?;
                    optimal_weights(&st.a, &st.gamma)
                }
            };
            match assemble_global(&blocks, &w, rrhs, csi.antennas(), k) {
                Ok(v) => vectors.push(Some(v)),
                Err(Error::DegenerateReceiver { .. }) => {
                    degenerate.push(k);
                    vectors.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(ReceiverBank {
            scheme: ReceiverScheme { detector, combiner },
            vectors,
            degenerate,
        })
    }

    /// Computes the bank for any scheme from scratch.
    pub fn compute(
        scheme: ReceiverScheme,
        graph: &AssociationGraph,
        csi: &EstimateSet,
        sigma_sq: &[f64],
        snr: f64,
    ) -> Result<Self> {
        match scheme.detector {
            Detector::Gzf => Self::gzf(graph, csi, DEFAULT_RANK_TOL),
            det => {
                let local = LocalReceivers::compute(det, graph, csi, sigma_sq, snr)?;
                Self::combined(scheme.combiner, &local, det, graph, csi, sigma_sq, snr)
            }
        }
    }
}
