//! Scenario parameters, torus layouts and large-scale fading.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeedTree;

/// Logarithm base used when turning SINR into rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    #[default]
    Bits,
    Nats,
}

/// Order in which cluster enrollment visits `(RRH, UE)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterOrder {
    /// All pairs sorted by decreasing LSFC across UEs.
    #[default]
    GlobalLsfc,
    /// One UE at a time in the processing order, its RRHs by decreasing LSFC.
    PerUe,
}

/// Log-distance pathloss `PL_dB(d) = intercept - slope * log10(d / 1 m)` with a
/// minimum-distance clamp.
///
/// The default is the usual urban-microcell NLOS fit, `-30.5 - 36.7 log10(d)`,
/// clamped at 10 m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pathloss {
    pub intercept_db: f64,
    pub slope_db: f64,
    pub min_distance: f64,
}

impl Default for Pathloss {
    fn default() -> Self {
        Pathloss {
            intercept_db: -30.5,
            slope_db: 36.7,
            min_distance: 10.0,
        }
    }
}

impl Pathloss {
    pub fn loss_db(&self, distance: f64) -> f64 {
        let d = distance.max(self.min_distance);
        self.intercept_db - self.slope_db * d.log10()
    }

    /// Linear large-scale fading coefficient at `distance` meters.
    pub fn gain(&self, distance: f64) -> f64 {
        10f64.powf(self.loss_db(distance) / 10.0)
    }
}

/// Large-scale fading coefficient under the default pathloss model.
pub fn lsfc(distance: f64) -> f64 {
    Pathloss::default().gain(distance)
}

/// All scenario constants of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Side of the square (torus) coverage area in meters.
    pub area_side: f64,
    pub num_rrh: usize,
    pub num_ue: usize,
    pub antennas_per_rrh: usize,
    pub pilot_dim: usize,
    /// Coherence block length in symbols.
    pub coherence_block: usize,
    /// Angular spread in radians.
    pub angular_spread: f64,
    pub qos_threshold: f64,
    pub max_cluster_size: usize,
    pub cluster_order: ClusterOrder,
    /// Fixed linear SNR; `None` means calibrated from the geometry.
    pub snr: Option<f64>,
    pub num_layouts: usize,
    pub num_fading_draws: usize,
    pub master_seed: u64,
    pub pathloss: Pathloss,
    /// Log-normal shadowing standard deviation in dB (0 disables it).
    pub shadowing_std_db: f64,
    pub rate_unit: RateUnit,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            area_side: 500.0,
            num_rrh: 50,
            num_ue: 100,
            antennas_per_rrh: 64,
            pilot_dim: 20,
            coherence_block: 200,
            angular_spread: PI / 16.0,
            qos_threshold: 1.0,
            max_cluster_size: 30,
            cluster_order: ClusterOrder::default(),
            snr: None,
            num_layouts: 48,
            num_fading_draws: 100,
            master_seed: 1,
            pathloss: Pathloss::default(),
            shadowing_std_db: 0.0,
            rate_unit: RateUnit::Bits,
        }
    }
}

impl SystemParams {
    pub fn area(&self) -> f64 {
        self.area_side * self.area_side
    }

    /// Checks every parameter invariant. Errors carry the offending key.
    pub fn validate(&self) -> Result<()> {
        let positive_count = |key: &str, v: usize| {
            if v == 0 {
                Err(Error::config(key, "must be at least 1"))
            } else {
                Ok(())
            }
        };
        if !(self.area_side.is_finite() && self.area_side > 0.0) {
            return Err(Error::config("area_side", "must be positive and finite"));
        }
        positive_count("num_rrh", self.num_rrh)?;
        positive_count("num_ue", self.num_ue)?;
        positive_count("antennas_per_rrh", self.antennas_per_rrh)?;
        positive_count("pilot_dim", self.pilot_dim)?;
        positive_count("coherence_block", self.coherence_block)?;
        positive_count("max_cluster_size", self.max_cluster_size)?;
        positive_count("num_layouts", self.num_layouts)?;
        positive_count("num_fading_draws", self.num_fading_draws)?;
        if self.pilot_dim > self.coherence_block {
            return Err(Error::config(
                "pilot_dim",
                format!(
                    "pilot dimension {} exceeds coherence block {}",
                    self.pilot_dim, self.coherence_block
                ),
            ));
        }
        if !(self.angular_spread > 0.0 && self.angular_spread <= TAU) {
            return Err(Error::config("angular_spread", "must lie in (0, 2*pi]"));
        }
        if !(self.qos_threshold.is_finite() && self.qos_threshold >= 0.0) {
            return Err(Error::config("qos_threshold", "must be finite and >= 0"));
        }
        if let Some(snr) = self.snr {
            if !(snr.is_finite() && snr > 0.0) {
                return Err(Error::config("snr", "must be positive and finite"));
            }
        }
        let pl = &self.pathloss;
        if !pl.intercept_db.is_finite() {
            return Err(Error::config("pathloss_intercept_db", "must be finite"));
        }
        if !(pl.slope_db.is_finite() && pl.slope_db >= 0.0) {
            return Err(Error::config("pathloss_slope_db", "must be finite and >= 0"));
        }
        if !(pl.min_distance.is_finite() && pl.min_distance > 0.0) {
            return Err(Error::config("pathloss_min_distance", "must be positive"));
        }
        if !(self.shadowing_std_db.is_finite() && self.shadowing_std_db >= 0.0) {
            return Err(Error::config("shadowing_std_db", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Effective system SNR: the fixed value if configured, else the calibrated one.
    pub fn effective_snr(&self) -> f64 {
        self.snr.unwrap_or_else(|| calibrate_snr(self))
    }

    /// Minimum LSFC an edge must reach, `eta / (M * SNR)`.
    pub fn qos_gain_threshold(&self) -> f64 {
        self.qos_threshold / (self.antennas_per_rrh as f64 * self.effective_snr())
    }
}

/// Diameter of a disk with area `A / L`.
pub fn rrh_disk_diameter(params: &SystemParams) -> f64 {
    2.0 * (params.area() / (PI * params.num_rrh as f64)).sqrt()
}

/// SNR such that a link at three RRH-disk diameters sees 0 dB after full
/// array gain: `lsfc(3 d_L) * M * SNR = 1`.
pub fn calibrate_snr(params: &SystemParams) -> f64 {
    let d = 3.0 * rrh_disk_diameter(params);
    1.0 / (params.antennas_per_rrh as f64 * params.pathloss.gain(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Signed shortest-wrap offset of `b - a` on a circle of circumference `side`,
/// in `[-side/2, side/2)`.
fn wrap_offset(a: f64, b: f64, side: f64) -> f64 {
    let d = (b - a).rem_euclid(side);
    if d >= side / 2.0 {
        d - side
    } else {
        d
    }
}

/// Distance between two points on the `side x side` torus.
pub fn torus_distance(p: Point, q: Point, side: f64) -> Result<f64> {
    if !(p.is_finite() && q.is_finite() && side.is_finite() && side > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "non-finite torus distance input: {p:?}, {q:?}, side {side}"
        )));
    }
    let dx = (q.x - p.x).abs().rem_euclid(side);
    let dy = (q.y - p.y).abs().rem_euclid(side);
    let dx = dx.min(side - dx);
    let dy = dy.min(side - dy);
    Ok(dx.hypot(dy))
}

/// Direction of the shortest-wrap displacement between two torus points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bearing {
    /// Angle in `[0, 2 pi)`.
    pub radians: f64,
    /// Set when the points coincide; the angle is then 0.
    pub degenerate: bool,
}

pub fn torus_direction(from: Point, to: Point, side: f64) -> Bearing {
    let dx = wrap_offset(from.x, to.x, side);
    let dy = wrap_offset(from.y, to.y, side);
    if dx == 0.0 && dy == 0.0 {
        return Bearing {
            radians: 0.0,
            degenerate: true,
        };
    }
    let mut a = dy.atan2(dx);
    if a < 0.0 {
        a += TAU;
    }
    if a >= TAU {
        a = 0.0;
    }
    Bearing {
        radians: a,
        degenerate: false,
    }
}

/// RRH and UE positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub side: f64,
    pub rrh_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
}

fn uniform_points<R: Rng>(n: usize, side: f64, rng: &mut R) -> Vec<Point> {
    let u = Uniform::new(0.0, side).expect("side validated positive");
    (0..n)
        .map(|_| Point::new(u.sample(rng), u.sample(rng)))
        .collect()
}

/// Uniform i.i.d. placement of `L` RRHs and `K` UEs.
///
/// RRHs and UEs are drawn from separate child streams, so the RRH positions
/// of a layout do not depend on `K` and the first `K` UEs are shared between
/// runs that differ only in the number of UEs.
pub fn generate_layout(params: &SystemParams, seeds: &SeedTree) -> Layout {
    let side = params.area_side;
    Layout {
        side,
        rrh_positions: uniform_points(params.num_rrh, side, &mut seeds.named("rrh").rng()),
        ue_positions: uniform_points(params.num_ue, side, &mut seeds.named("ue").rng()),
    }
}

/// `L x K` matrix of linear LSFCs, stored row-major (one row per RRH).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsfcMatrix {
    num_rrh: usize,
    num_ue: usize,
    beta: Vec<f64>,
}

impl LsfcMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_rrh = rows.len();
        let num_ue = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_ue) {
            return Err(Error::InvalidArgument("ragged LSFC rows".into()));
        }
        let beta: Vec<f64> = rows.into_iter().flatten().collect();
        if beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::InvalidArgument(
                "LSFC entries must be positive and finite".into(),
            ));
        }
        Ok(LsfcMatrix {
            num_rrh,
            num_ue,
            beta,
        })
    }

    pub fn num_rrh(&self) -> usize {
        self.num_rrh
    }

    pub fn num_ue(&self) -> usize {
        self.num_ue
    }

    #[inline]
    pub fn get(&self, rrh: usize, ue: usize) -> f64 {
        self.beta[rrh * self.num_ue + ue]
    }

    pub fn row(&self, rrh: usize) -> &[f64] {
        &self.beta[rrh * self.num_ue..(rrh + 1) * self.num_ue]
    }

    /// Multiplies every entry by an independent log-normal factor.
    pub fn apply_shadowing<R: Rng>(&mut self, std_db: f64, rng: &mut R) {
        if std_db <= 0.0 {
            return;
        }
        let n = Normal::new(0.0, std_db).expect("finite std");
        for b in &mut self.beta {
            *b *= 10f64.powf(n.sample(rng) / 10.0);
        }
    }
}

pub fn compute_lsfc_matrix(layout: &Layout, params: &SystemParams) -> Result<LsfcMatrix> {
    let rows = layout
        .rrh_positions
        .iter()
        .map(|&r| {
            layout
                .ue_positions
                .iter()
                .map(|&u| Ok(params.pathloss.gain(torus_distance(r, u, layout.side)?)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    LsfcMatrix::from_rows(rows)
}
