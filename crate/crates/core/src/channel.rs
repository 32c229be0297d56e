//! Directional block-fading channels.
//!
//! Each UE-RRH channel lives in the span of a few columns of the unitary
//! `M`-point DFT matrix, selected by the angular support around the UE-RRH
//! direction:
//!
//! `h = sqrt(beta M / |S|) F_S nu`, with `nu ~ CN(0, I_|S|)`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{torus_direction, Layout, LsfcMatrix, SystemParams};
use crate::rng::SeedTree;

/// Sorted set of DFT indices (angles `2 pi m / M`) an edge's energy occupies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngularSupport {
    indices: Vec<usize>,
}

impl AngularSupport {
    pub fn new(mut indices: Vec<usize>, m: usize) -> Option<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() || indices.iter().any(|&i| i >= m) {
            return None;
        }
        Some(AngularSupport { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_disjoint(&self, other: &AngularSupport) -> bool {
        self.indices.iter().all(|i| other.indices.binary_search(i).is_err())
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// DFT-quantized angles within `spread / 2` of `direction` (closed interval).
/// Falls back to the nearest grid angle when none qualifies.
pub fn angular_support(direction: f64, spread: f64, m: usize) -> AngularSupport {
    assert!(m >= 1);
    const TIE_TOL: f64 = 1e-12;
    let half = spread / 2.0;
    let dist = |i: usize| circular_distance(TAU * i as f64 / m as f64, direction);
    let mut indices: Vec<usize> = (0..m).filter(|&i| dist(i) <= half + TIE_TOL).collect();
    if indices.is_empty() {
        let nearest = (0..m)
            .min_by(|&a, &b| dist(a).partial_cmp(&dist(b)).unwrap().then(a.cmp(&b)))
            .unwrap();
        indices.push(nearest);
    }
    AngularSupport { indices }
}

/// `M x |S|` submatrix of the unitary DFT matrix, `F[m, n] = exp(-j 2 pi m n / M) / sqrt(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: DMatrix<Complex64>,
}

impl SubspaceBasis {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection `F F^H x`.
    pub fn project(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        &self.basis * self.basis.ad_mul(x)
    }

    /// Projector `F F^H`.
    pub fn projector(&self) -> DMatrix<Complex64> {
        self.basis.clone() * self.basis.adjoint()
    }
}

pub fn dft_submatrix(support: &AngularSupport, m: usize) -> SubspaceBasis {
    let scale = 1.0 / (m as f64).sqrt();
    let cols = support.indices();
    let basis = DMatrix::from_fn(m, cols.len(), |row, c| {
        let phase = -TAU * ((row * cols[c]) % m) as f64 / m as f64;
        Complex64::from_polar(scale, phase)
    });
    SubspaceBasis { basis }
}

/// One `CN(0, 1)` sample: two independent real normals scaled by `1/sqrt(2)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_normal_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| complex_normal(rng))
}

/// `sqrt(beta M / |S|) F nu` for a given coefficient vector.
pub fn channel_from_coefficients(
    beta: f64,
    basis: &SubspaceBasis,
    nu: &DVector<Complex64>,
) -> DVector<Complex64> {
    let m = basis.basis.nrows() as f64;
    let scale = (beta * m / basis.dim() as f64).sqrt();
    (&basis.basis * nu) * Complex64::from(scale)
}

pub fn draw_channel<R: Rng + ?Sized>(
    beta: f64,
    basis: &SubspaceBasis,
    rng: &mut R,
) -> DVector<Complex64> {
    let nu = complex_normal_vector(basis.dim(), rng);
    channel_from_coefficients(beta, basis, &nu)
}

/// Per-edge angular supports and DFT bases for a layout. Depends only on
/// geometry, so it is built once per layout and reused across fading draws.
#[derive(Debug, Clone)]
pub struct SubspaceMap {
    num_rrh: usize,
    num_ue: usize,
    antennas: usize,
    supports: Vec<AngularSupport>,
    bases: Vec<SubspaceBasis>,
    degenerate_pairs: usize,
}

impl SubspaceMap {
    /// Supports are centred on the direction from each RRH towards each UE.
    pub fn new(layout: &Layout, params: &SystemParams) -> Self {
        let m = params.antennas_per_rrh;
        let mut supports = Vec::with_capacity(layout.rrh_positions.len() * layout.ue_positions.len());
        let mut degenerate_pairs = 0;
        for &r in &layout.rrh_positions {
            for &u in &layout.ue_positions {
                let bearing = torus_direction(r, u, layout.side);
                degenerate_pairs += usize::from(bearing.degenerate);
                supports.push(angular_support(bearing.radians, params.angular_spread, m));
            }
        }
        Self::from_supports(layout.rrh_positions.len(), layout.ue_positions.len(), m, supports, degenerate_pairs)
    }

    /// Builds the map from explicit supports (row-major, one row per RRH).
    pub fn from_supports(
        num_rrh: usize,
        num_ue: usize,
        antennas: usize,
        supports: Vec<AngularSupport>,
        degenerate_pairs: usize,
    ) -> Self {
        assert_eq!(supports.len(), num_rrh * num_ue);
        let bases = supports.iter().map(|s| dft_submatrix(s, antennas)).collect();
        SubspaceMap {
            num_rrh,
            num_ue,
            antennas,
            supports,
            bases,
            degenerate_pairs,
        }
    }

    pub fn num_rrh(&self) -> usize {
        self.num_rrh
    }

    pub fn num_ue(&self) -> usize {
        self.num_ue
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn support(&self, rrh: usize, ue: usize) -> &AngularSupport {
        &self.supports[rrh * self.num_ue + ue]
    }

    pub fn basis(&self, rrh: usize, ue: usize) -> &SubspaceBasis {
        &self.bases[rrh * self.num_ue + ue]
    }

    /// Number of coincident UE/RRH pairs whose direction defaulted to 0.
    pub fn degenerate_pairs(&self) -> usize {
        self.degenerate_pairs
    }
}

/// One small-scale fading realization together with its subspaces.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub subspaces: SubspaceMap,
    /// `LM x K`; block `(l, k)` is rows `l M .. (l + 1) M` of column `k`.
    pub h: DMatrix<Complex64>,
    /// Coefficients `nu` per edge, row-major over `(l, k)`.
    pub nu: Vec<DVector<Complex64>>,
}

impl ChannelState {
    pub fn block(&self, rrh: usize, ue: usize) -> DVector<Complex64> {
        channel_block(&self.h, self.subspaces.antennas, rrh, ue)
    }
}

/// Copies block `(rrh, ue)` out of an `LM x K` channel matrix.
pub fn channel_block(h: &DMatrix<Complex64>, m: usize, rrh: usize, ue: usize) -> DVector<Complex64> {
    DVector::from_column_slice(&h.column(ue).as_slice()[rrh * m..(rrh + 1) * m])
}

/// Draws the full `LM x K` channel matrix. Edge `(l, k)` uses its own child
/// stream `seeds / (l K + k)`, so the result does not depend on generation order.
pub fn draw_realization(
    subspaces: &SubspaceMap,
    lsfc: &LsfcMatrix,
    seeds: &SeedTree,
) -> (DMatrix<Complex64>, Vec<DVector<Complex64>>) {
    let (l_count, k_count, m) = (subspaces.num_rrh, subspaces.num_ue, subspaces.antennas);
    let mut h = DMatrix::zeros(l_count * m, k_count);
    let mut nus = Vec::with_capacity(l_count * k_count);
    for l in 0..l_count {
        for k in 0..k_count {
            let mut rng = seeds.index((l * k_count + k) as u64).rng();
            let basis = subspaces.basis(l, k);
            let nu = complex_normal_vector(basis.dim(), &mut rng);
            let block = channel_from_coefficients(lsfc.get(l, k), basis, &nu);
            h.column_mut(k).rows_mut(l * m, m).copy_from(&block);
            nus.push(nu);
        }
    }
    (h, nus)
}

pub fn assemble_channel_state(
    layout: &Layout,
    lsfc: &LsfcMatrix,
    params: &SystemParams,
    seeds: &SeedTree,
) -> ChannelState {
    let subspaces = SubspaceMap::new(layout, params);
    let (h, nu) = draw_realization(&subspaces, lsfc, seeds);
    ChannelState { subspaces, h, nu }
}

/// Angle of DFT index `i` on an `m`-point grid.
pub fn grid_angle(i: usize, m: usize) -> f64 {
    2.0 * PI * i as f64 / m as f64
}
