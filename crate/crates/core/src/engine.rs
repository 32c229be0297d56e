//! Monte Carlo orchestration.
//!
//! One layout runs geometry, LSFCs, association, then a sequence of
//! independent fading draws. Each draw produces channels, pilot fields and
//! estimates for every requested CSI mode, receivers for every requested
//! scheme, and the exact SINR of each admitted UE against the true channels.
//! All variants of a layout share the same draws, so scheme and CSI
//! comparisons are paired.
//!
//! Seeds are derived per layout and per draw from the master seed, and
//! parallel results are collected by index, so output does not depend on
//! thread scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{associate, AssociationGraph};
use crate::channel::{draw_realization, SubspaceMap};
use crate::error::{Error, Result};
use crate::estimation::{CsiMode, EstimateSet};
use crate::geometry::{compute_lsfc_matrix, generate_layout, LsfcMatrix, RateUnit, SystemParams};
use crate::receivers::{
    interference_variances, Detector, GlobalReceiver, LocalReceivers, ReceiverBank, ReceiverScheme, DEFAULT_RANK_TOL,
};
use crate::rng::SeedTree;

/// A receiver scheme paired with the CSI it is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variant {
    pub scheme: ReceiverScheme,
    pub csi: CsiMode,
}

impl Variant {
    pub fn new(scheme: ReceiverScheme, csi: CsiMode) -> Self {
        Variant { scheme, csi }
    }

    /// Cartesian product, schemes outermost.
    pub fn grid(schemes: &[ReceiverScheme], csi: &[CsiMode]) -> Vec<Variant> {
        schemes
            .iter()
            .flat_map(|&s| csi.iter().map(move |&c| Variant::new(s, c)))
            .collect()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.scheme, self.csi)
    }
}

/// `|v^H h_k|^2 / (1/SNR + sum_{j != k} |v^H h_j|^2)` with the sum over
/// transmitting UEs only. Dense reference implementation.
pub fn sinr(v: &DVector<Complex64>, h: &DMatrix<Complex64>, snr: f64, ue: usize, transmitting: &[bool]) -> f64 {
    let gain = |j: usize| v.dotc(&h.column(j)).norm_sqr();
    let interference: f64 = (0..h.ncols())
        .filter(|&j| j != ue && transmitting[j])
        .map(gain)
        .sum();
    gain(ue) / (1.0 / snr + interference)
}

/// Same as [`sinr`] but touching only the cluster blocks of `v`.
pub fn sinr_sparse(v: &GlobalReceiver, h: &DMatrix<Complex64>, snr: f64, ue: usize, transmitting: &[bool]) -> f64 {
    let interference: f64 = (0..h.ncols())
        .filter(|&j| j != ue && transmitting[j])
        .map(|j| v.inner(h, j).norm_sqr())
        .sum();
    v.inner(h, ue).norm_sqr() / (1.0 / snr + interference)
}

pub fn ergodic_rate(sinr_samples: &[f64], unit: RateUnit) -> f64 {
    assert!(!sinr_samples.is_empty(), "ergodic rate needs at least one sample");
    let sum: f64 = sinr_samples
        .iter()
        .map(|&s| match unit {
            RateUnit::Bits => (1.0 + s).log2(),
            RateUnit::Nats => (1.0 + s).ln(),
        })
        .sum();
    sum / sinr_samples.len() as f64
}

/// `(1 - tau_p / T) R`.
pub fn spectral_efficiency(rate: f64, pilot_dim: usize, coherence_block: usize) -> f64 {
    assert!(pilot_dim <= coherence_block, "pilot dimension exceeds coherence block");
    (1.0 - pilot_dim as f64 / coherence_block as f64) * rate
}

/// Outcome of one variant on one layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub variant: Variant,
    /// `sinr[k][d]`: linear SINR of UE `k` on draw `d`; empty for outage UEs.
    pub sinr: Vec<Vec<f64>>,
    pub rate: Vec<f64>,
    pub se: Vec<f64>,
    pub sum_se: f64,
    pub outage: Vec<usize>,
    /// Draws on which some UE's receiver degenerated (recorded as zero rate).
    pub degenerate_draws: usize,
}

impl TrialResult {
    pub fn outage_count(&self) -> usize {
        self.outage.len()
    }
}

/// Deterministic geometry and association of one layout.
#[derive(Debug, Clone)]
pub struct LayoutState {
    pub params: SystemParams,
    pub snr: f64,
    pub lsfc: LsfcMatrix,
    pub graph: AssociationGraph,
    pub subspaces: SubspaceMap,
    pub sigma_sq: Vec<f64>,
}

impl LayoutState {
    pub fn new(params: &SystemParams, seeds: &SeedTree) -> Result<Self> {
        params.validate()?;
        let layout = generate_layout(params, &seeds.named("geometry"));
        let mut lsfc = compute_lsfc_matrix(&layout, params)?;
        if params.shadowing_std_db > 0.0 {
            lsfc.apply_shadowing(params.shadowing_std_db, &mut seeds.named("shadowing").rng());
        }
        let snr = params.effective_snr();
        let graph = associate(&lsfc, params, &seeds.named("order"))?;
        let subspaces = SubspaceMap::new(&layout, params);
        let sigma_sq = interference_variances(&graph, &lsfc, snr);
        Ok(LayoutState {
            params: params.clone(),
            snr,
            lsfc,
            graph,
            subspaces,
            sigma_sq,
        })
    }

    fn transmitting(&self) -> Vec<bool> {
        (0..self.graph.num_ue()).map(|k| !self.graph.is_outage(k)).collect()
    }

    /// Per-UE SINR of every variant on one fading draw (0 for outage or
    /// degenerate receivers, plus a degenerate flag per variant).
    pub fn run_draw(&self, variants: &[Variant], seeds: &SeedTree) -> Result<Vec<(Vec<f64>, bool)>> {
        let m = self.params.antennas_per_rrh;
        let (h, _) = draw_realization(&self.subspaces, &self.lsfc, &seeds.named("fading"));
        let transmitting = self.transmitting();
        let mut estimates: BTreeMap<CsiMode, EstimateSet> = BTreeMap::new();
        let mut locals: BTreeMap<(CsiMode, Detector), LocalReceivers> = BTreeMap::new();
        let mut out = Vec::with_capacity(variants.len());
        for v in variants {
            if !estimates.contains_key(&v.csi) {
                let est = match v.csi {
                    CsiMode::Ideal => EstimateSet::ideal(&h, m, &self.graph),
                    mode => EstimateSet::from_pilots(mode, &h, &self.graph, &self.subspaces, self.snr, &seeds.named("pilot")),
                };
                estimates.insert(v.csi, est);
            }
            let csi = &estimates[&v.csi];
            let bank = match v.scheme.detector {
                Detector::Gzf => ReceiverBank::gzf(&self.graph, csi, DEFAULT_RANK_TOL)?,
                det => {
                    if !locals.contains_key(&(v.csi, det)) {
                        let local = LocalReceivers::compute(det, &self.graph, csi, &self.sigma_sq, self.snr)?;
                        locals.insert((v.csi, det), local);
                    }
                    ReceiverBank::combined(
                        v.scheme.combiner,
                        &locals[&(v.csi, det)],
                        det,
                        &self.graph,
                        csi,
                        &self.sigma_sq,
                        self.snr,
                    )?
                }
            };
            let sinrs = bank
                .vectors
                .iter()
                .enumerate()
                .map(|(k, rx)| rx.as_ref().map_or(0.0, |rx| sinr_sparse(rx, &h, self.snr, k, &transmitting)))
                .collect();
            out.push((sinrs, !bank.degenerate.is_empty()));
        }
        Ok(out)
    }
}

/// Runs every variant on one layout over `num_fading_draws` shared draws.
pub fn run_layout(params: &SystemParams, variants: &[Variant], seeds: &SeedTree) -> Result<Vec<TrialResult>> {
    let state = LayoutState::new(params, seeds)?;
    let draws = params.num_fading_draws;
    let draw_seeds = seeds.named("draw");
    let per_draw: Vec<Vec<(Vec<f64>, bool)>> = (0..draws)
        .into_par_iter()
        .map(|d| state.run_draw(variants, &draw_seeds.index(d as u64)))
        .collect::<Result<_>>()?;

    let k_count = params.num_ue;
    let outage = state.graph.outage().to_vec();
    variants
        .iter()
        .enumerate()
        .map(|(vi, &variant)| {
            let mut sinr = vec![Vec::with_capacity(draws); k_count];
            let mut degenerate_draws = 0;
            for draw in &per_draw {
                let (vals, degenerate) = &draw[vi];
                degenerate_draws += usize::from(*degenerate);
                for k in state.graph.active_ues() {
                    sinr[k].push(vals[k]);
                }
            }
            let rate: Vec<f64> = (0..k_count)
                .map(|k| {
                    if state.graph.is_outage(k) {
                        0.0
                    } else {
                        ergodic_rate(&sinr[k], params.rate_unit)
                    }
                })
                .collect();
            let se: Vec<f64> = rate
                .iter()
                .map(|&r| spectral_efficiency(r, params.pilot_dim, params.coherence_block))
                .collect();
            let sum_se = se.iter().sum::<f64>();
            if !sum_se.is_finite() || sinr.iter().flatten().any(|s| !s.is_finite() || *s < 0.0) {
                return Err(Error::Internal(format!("non-finite aggregate for {variant}")));
            }
            Ok(TrialResult {
                variant,
                sinr,
                rate,
                se,
                sum_se,
                outage: outage.clone(),
                degenerate_draws,
            })
        })
        .collect()
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PilotDim,
    MaxClusterSize,
    AngularSpread,
    NumUe,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::PilotDim => "pilot_dim",
            SweepAxis::MaxClusterSize => "max_cluster_size",
            SweepAxis::AngularSpread => "angular_spread",
            SweepAxis::NumUe => "num_ue",
        }
    }

    /// Copy of `base` with the axis set to `value`, validated.
    pub fn apply(self, base: &SystemParams, value: f64) -> Result<SystemParams> {
        let mut p = base.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidArgument(format!("{} must be a non-negative integer, got {v}", self.name())))
            }
        };
        match self {
            SweepAxis::PilotDim => p.pilot_dim = as_count(value)?,
            SweepAxis::MaxClusterSize => p.max_cluster_size = as_count(value)?,
            SweepAxis::AngularSpread => p.angular_spread = value,
            SweepAxis::NumUe => p.num_ue = as_count(value)?,
        }
        p.validate()
            .map_err(|e| Error::InvalidArgument(format!("{} = {value}: {e}", self.name())))?;
        Ok(p)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pilot_dim" | "tau_p" => Ok(SweepAxis::PilotDim),
            "max_cluster_size" | "Q" | "q" => Ok(SweepAxis::MaxClusterSize),
            "angular_spread" | "delta" => Ok(SweepAxis::AngularSpread),
            "num_ue" | "K" | "k" => Ok(SweepAxis::NumUe),
            _ => Err(Error::InvalidArgument(format!("unknown sweep axis `{s}`"))),
        }
    }
}

/// Per-layout result of one variant, without the raw SINR samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutSummary {
    pub sum_se: f64,
    pub se: Vec<f64>,
    pub outage: Vec<usize>,
    pub degenerate_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantStats {
    pub variant: Variant,
    pub mean_sum_se: f64,
    pub layouts: Vec<LayoutSummary>,
}

impl VariantStats {
    /// Per-UE SE of admitted UEs pooled over layouts, as `(ue_id, se)` with
    /// `ue_id = layout * K + k`.
    pub fn pooled_se(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (li, lay) in self.layouts.iter().enumerate() {
            let k_count = lay.se.len();
            for (k, &se) in lay.se.iter().enumerate() {
                if !lay.outage.contains(&k) {
                    out.push((li * k_count + k, se));
                }
            }
        }
        out
    }

    pub fn outage_count(&self) -> usize {
        self.layouts.iter().map(|l| l.outage.len()).sum()
    }

    pub fn num_samples(&self) -> usize {
        self.layouts.iter().map(|l| l.se.len() - l.outage.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub params: SystemParams,
    pub variants: Vec<VariantStats>,
}

impl SweepPoint {
    pub fn stats(&self, variant: Variant) -> Option<&VariantStats> {
        self.variants.iter().find(|s| s.variant == variant)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Mean sum SE of `variant` at every sweep point.
    pub fn curve(&self, variant: Variant) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.stats(variant).map_or(f64::NAN, |s| s.mean_sum_se))
            .collect()
    }
}

/// Aggregates the layouts of one parameter point.
pub fn run_point(params: &SystemParams, variants: &[Variant]) -> Result<Vec<VariantStats>> {
    let root = SeedTree::new(params.master_seed).named("layout");
    let trials: Vec<Vec<TrialResult>> = (0..params.num_layouts)
        .into_par_iter()
        .map(|i| run_layout(params, variants, &root.index(i as u64)))
        .collect::<Result<_>>()?;
    let stats: Vec<VariantStats> = variants
        .iter()
        .enumerate()
        .map(|(vi, &variant)| {
            let layouts: Vec<LayoutSummary> = trials
                .iter()
                .map(|t| {
                    let r = &t[vi];
                    LayoutSummary {
                        sum_se: r.sum_se,
                        se: r.se.clone(),
                        outage: r.outage.clone(),
                        degenerate_draws: r.degenerate_draws,
                    }
                })
                .collect();
            let mean_sum_se = layouts.iter().map(|l| l.sum_se).sum::<f64>() / layouts.len() as f64;
            VariantStats {
                variant,
                mean_sum_se,
                layouts,
            }
        })
        .collect();
    if stats.iter().any(|s| !s.mean_sum_se.is_finite()) {
        return Err(Error::Internal("non-finite mean sum SE".into()));
    }
    Ok(stats)
}

/// Runs `num_layouts` layouts per axis value. Layout seeds do not depend on
/// the value, so points are paired. Every value is validated before any run.
pub fn run_sweep(params: &SystemParams, axis: SweepAxis, values: &[f64], variants: &[Variant]) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one value".into()));
    }
    if variants.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one variant".into()));
    }
    let point_params: Vec<SystemParams> = values.iter().map(|&v| axis.apply(params, v)).collect::<Result<_>>()?;
    let points = values
        .iter()
        .zip(point_params)
        .map(|(&value, p)| {
            let variants = run_point(&p, variants)?;
            Ok(SweepPoint {
                value,
                params: p,
                variants,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        axis,
        values: values.to_vec(),
        points,
    })
}
