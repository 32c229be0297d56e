//! Greedy leader election, pilot assignment and user-centric cluster formation.
//!
//! UEs are visited in a random order. Each picks as leader the strongest RRH
//! that still has a free pilot and passes the QoS test
//! `beta >= eta / (M SNR)`, taking the lowest pilot index free there (pilots
//! not yet held by any UE first). Clusters
//! are then grown per UE (same order) by walking RRHs in decreasing LSFC and
//! enrolling those where the UE's pilot is still free, the QoS test passes and
//! the cluster is below `Q`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::EstimateSet;
use crate::geometry::{ClusterOrder, LsfcMatrix, SystemParams};
use crate::rng::SeedTree;

/// Bipartite UE-RRH association graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationGraph {
    num_rrh: usize,
    num_ue: usize,
    pilot_dim: usize,
    /// UE processing order used for both election and enrollment.
    order: Vec<usize>,
    leader: Vec<Option<usize>>,
    pilot: Vec<Option<usize>>,
    /// `C_k`, in enrollment order (leader first).
    clusters: Vec<Vec<usize>>,
    /// `U_l`, sorted ascending.
    served: Vec<Vec<usize>>,
    outage: Vec<usize>,
    #[serde(skip)]
    edges: Vec<bool>,
    #[serde(skip)]
    pilot_used: Vec<bool>,
}

impl AssociationGraph {
    fn empty(num_rrh: usize, num_ue: usize, pilot_dim: usize, order: Vec<usize>) -> Self {
        AssociationGraph {
            num_rrh,
            num_ue,
            pilot_dim,
            order,
            leader: vec![None; num_ue],
            pilot: vec![None; num_ue],
            clusters: vec![Vec::new(); num_ue],
            served: vec![Vec::new(); num_rrh],
            outage: Vec::new(),
            edges: vec![false; num_rrh * num_ue],
            pilot_used: vec![false; num_rrh * pilot_dim],
        }
    }

    fn add_edge(&mut self, rrh: usize, ue: usize, pilot: usize) {
        self.edges[rrh * self.num_ue + ue] = true;
        self.pilot_used[rrh * self.pilot_dim + pilot] = true;
        self.clusters[ue].push(rrh);
        let served = &mut self.served[rrh];
        let pos = served.partition_point(|&j| j < ue);
        served.insert(pos, ue);
    }

    fn pilot_free(&self, rrh: usize, pilot: usize) -> bool {
        !self.pilot_used[rrh * self.pilot_dim + pilot]
    }

    /// Pilot free at `rrh` held by the fewest UEs so far, lowest index on ties.
    fn leader_pilot(&self, rrh: usize) -> Option<usize> {
        let mut reuse = vec![0usize; self.pilot_dim];
        for t in self.pilot.iter().flatten() {
            reuse[*t] += 1;
        }
        (0..self.pilot_dim)
            .filter(|&t| self.pilot_free(rrh, t))
            .min_by_key(|&t| (reuse[t], t))
    }

    pub fn num_rrh(&self) -> usize {
        self.num_rrh
    }

    pub fn num_ue(&self) -> usize {
        self.num_ue
    }

    pub fn pilot_dim(&self) -> usize {
        self.pilot_dim
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn leader(&self, ue: usize) -> Option<usize> {
        self.leader[ue]
    }

    pub fn pilot(&self, ue: usize) -> Option<usize> {
        self.pilot[ue]
    }

    pub fn cluster(&self, ue: usize) -> &[usize] {
        &self.clusters[ue]
    }

    pub fn served(&self, rrh: usize) -> &[usize] {
        &self.served[rrh]
    }

    pub fn outage(&self) -> &[usize] {
        &self.outage
    }

    pub fn is_outage(&self, ue: usize) -> bool {
        self.leader[ue].is_none()
    }

    #[inline]
    pub fn has_edge(&self, rrh: usize, ue: usize) -> bool {
        self.edges[rrh * self.num_ue + ue]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// UEs that transmit (everyone not in outage), ascending.
    pub fn active_ues(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_ue).filter(move |&k| !self.is_outage(k))
    }

    /// `U(C_k)`: UEs served by at least one RRH of `C_k`, ascending.
    pub fn cluster_users(&self, ue: usize) -> Vec<usize> {
        let mut mark = vec![false; self.num_ue];
        for &l in &self.clusters[ue] {
            for &j in &self.served[l] {
                mark[j] = true;
            }
        }
        (0..self.num_ue).filter(|&j| mark[j]).collect()
    }

    /// Non-outage UEs other than `ue` sharing its pilot.
    pub fn copilot_ues(&self, ue: usize) -> Vec<usize> {
        match self.pilot[ue] {
            None => Vec::new(),
            Some(t) => (0..self.num_ue)
                .filter(|&i| i != ue && self.pilot[i] == Some(t))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    /// Checks every structural invariant of a formed graph.
    pub fn check_invariants(&self, lsfc: &LsfcMatrix, params: &SystemParams) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidState(msg));
        let threshold = params.qos_gain_threshold();
        for k in 0..self.num_ue {
            let c = &self.clusters[k];
            if c.len() > params.max_cluster_size {
                return fail(format!("cluster of UE {k} has {} > Q RRHs", c.len()));
            }
            match self.leader[k] {
                None => {
                    if !c.is_empty() || self.pilot[k].is_some() {
                        return fail(format!("outage UE {k} has a cluster or pilot"));
                    }
                    if !self.outage.contains(&k) {
                        return fail(format!("UE {k} without leader missing from outage set"));
                    }
                }
                Some(lead) => {
                    if !c.contains(&lead) {
                        return fail(format!("leader of UE {k} not in its cluster"));
                    }
                    if self.pilot[k].is_none_or(|t| t >= self.pilot_dim) {
                        return fail(format!("UE {k} has no valid pilot"));
                    }
                }
            }
            for &l in c {
                if !self.served[l].contains(&k) || !self.has_edge(l, k) {
                    return fail(format!("edge ({l},{k}) missing from served set"));
                }
                if lsfc.get(l, k) < threshold {
                    return fail(format!("edge ({l},{k}) violates QoS threshold"));
                }
            }
        }
        for l in 0..self.num_rrh {
            let u = &self.served[l];
            if u.len() > self.pilot_dim {
                return fail(format!("RRH {l} serves {} > tau_p UEs", u.len()));
            }
            let mut seen = vec![false; self.pilot_dim];
            for &k in u {
                if !self.clusters[k].contains(&l) {
                    return fail(format!("edge ({l},{k}) missing from cluster"));
                }
                let t = self.pilot[k].ok_or_else(|| Error::InvalidState(format!("served UE {k} without pilot")))?;
                if std::mem::replace(&mut seen[t], true) {
                    return fail(format!("pilot {t} reused at RRH {l}"));
                }
            }
        }
        let total: usize = self.clusters.iter().map(Vec::len).sum();
        if total != self.num_edges() {
            return fail("edge count mismatch".into());
        }
        Ok(())
    }
}

/// Random UE processing order.
pub fn processing_order(num_ue: usize, seeds: &SeedTree) -> Vec<usize> {
    let mut order: Vec<usize> = (0..num_ue).collect();
    order.shuffle(&mut seeds.rng());
    order
}

/// RRH indices sorted by decreasing LSFC for a UE; ties go to the lower index.
fn ranked_rrhs(lsfc: &LsfcMatrix, ue: usize) -> Vec<usize> {
    let mut r: Vec<usize> = (0..lsfc.num_rrh()).collect();
    r.sort_by(|&a, &b| {
        lsfc.get(b, ue)
            .partial_cmp(&lsfc.get(a, ue))
            .expect("finite LSFC")
            .then(a.cmp(&b))
    });
    r
}

/// Leader election with a processing order drawn from `seeds`.
pub fn elect_leaders(lsfc: &LsfcMatrix, params: &SystemParams, seeds: &SeedTree) -> AssociationGraph {
    let order = processing_order(lsfc.num_ue(), seeds);
    elect_leaders_in_order(lsfc, params, order)
}

/// Leader election visiting UEs in the given order.
pub fn elect_leaders_in_order(lsfc: &LsfcMatrix, params: &SystemParams, order: Vec<usize>) -> AssociationGraph {
    let threshold = params.qos_gain_threshold();
    let mut g = AssociationGraph::empty(lsfc.num_rrh(), lsfc.num_ue(), params.pilot_dim, order);
    for idx in 0..g.order.len() {
        let k = g.order[idx];
        let choice = ranked_rrhs(lsfc, k)
            .into_iter()
            .take_while(|&l| lsfc.get(l, k) >= threshold)
            .find_map(|l| g.leader_pilot(l).map(|t| (l, t)));
        match choice {
            Some((l, t)) => {
                g.leader[k] = Some(l);
                g.pilot[k] = Some(t);
                g.add_edge(l, k, t);
            }
            None => g.outage.push(k),
        }
    }
    g.outage.sort_unstable();
    g
}

/// Grows every non-outage UE's cluster around its leader.
pub fn form_clusters(mut g: AssociationGraph, lsfc: &LsfcMatrix, params: &SystemParams) -> Result<AssociationGraph> {
    if lsfc.num_rrh() != g.num_rrh || lsfc.num_ue() != g.num_ue || params.pilot_dim != g.pilot_dim {
        return Err(Error::InvalidState("graph dimensions do not match LSFCs/params".into()));
    }
    for k in 0..g.num_ue {
        let ok = match (g.leader[k], g.pilot[k]) {
            (Some(l), Some(t)) => t < g.pilot_dim && g.clusters[k] == [l] && g.has_edge(l, k),
            (None, None) => g.clusters[k].is_empty(),
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidState(format!("UE {k} is not a freshly elected UE")));
        }
    }
    let threshold = params.qos_gain_threshold();
    let q = params.max_cluster_size;
    let candidates: Vec<(usize, usize)> = match params.cluster_order {
        ClusterOrder::PerUe => g
            .order
            .iter()
            .filter(|&&k| g.pilot[k].is_some())
            .flat_map(|&k| ranked_rrhs(lsfc, k).into_iter().map(move |l| (l, k)))
            .collect(),
        ClusterOrder::GlobalLsfc => {
            let mut rank = vec![0; g.num_ue];
            for (i, &k) in g.order.iter().enumerate() {
                rank[k] = i;
            }
            let mut pairs: Vec<(usize, usize)> = (0..g.num_ue)
                .filter(|&k| g.pilot[k].is_some())
                .flat_map(|k| (0..g.num_rrh).map(move |l| (l, k)))
                .collect();
            pairs.sort_by(|&(l1, k1), &(l2, k2)| {
                lsfc.get(l2, k2)
                    .total_cmp(&lsfc.get(l1, k1))
                    .then(l1.cmp(&l2))
                    .then(rank[k1].cmp(&rank[k2]))
            });
            pairs
        }
    };
    for (l, k) in candidates {
        let t = g.pilot[k].expect("candidates are admitted UEs");
        if g.clusters[k].len() >= q || lsfc.get(l, k) < threshold || g.has_edge(l, k) || !g.pilot_free(l, t) {
            continue;
        }
        g.add_edge(l, k, t);
    }
    Ok(g)
}

/// Election followed by cluster formation.
pub fn associate(lsfc: &LsfcMatrix, params: &SystemParams, seeds: &SeedTree) -> Result<AssociationGraph> {
    form_clusters(elect_leaders(lsfc, params, seeds), lsfc, params)
}

/// Channel knowledge of one cluster: the `|C_k| M x |U(C_k)|` matrix keeping
/// the row blocks of `C_k` and the columns of `U(C_k)`, with zero blocks where
/// the UE-RRH pair is not an edge.
#[derive(Debug, Clone)]
pub struct ClusterView {
    pub rrhs: Vec<usize>,
    pub ues: Vec<usize>,
    /// Column of the UE the view was built for.
    pub target: usize,
    pub matrix: DMatrix<Complex64>,
}

impl ClusterView {
    pub fn desired(&self) -> nalgebra::DVector<Complex64> {
        self.matrix.column(self.target).into_owned()
    }

    /// The view without the target column.
    pub fn interference(&self) -> DMatrix<Complex64> {
        self.matrix.clone().remove_column(self.target)
    }
}

pub fn partial_csi_view(graph: &AssociationGraph, csi: &EstimateSet, ue: usize) -> Result<ClusterView> {
    if graph.is_outage(ue) {
        return Err(Error::InvalidArgument(format!("UE {ue} is in outage")));
    }
    let m = csi.antennas();
    let rrhs = graph.cluster(ue).to_vec();
    let ues = graph.cluster_users(ue);
    let target = ues.binary_search(&ue).expect("UE is served by its own cluster");
    let mut matrix = DMatrix::zeros(rrhs.len() * m, ues.len());
    for (bi, &l) in rrhs.iter().enumerate() {
        for (ci, &j) in ues.iter().enumerate() {
            if graph.has_edge(l, j) {
                let h = csi
                    .edge(l, j)
                    .ok_or_else(|| Error::InvalidState(format!("no channel estimate for edge ({l},{j})")))?;
                matrix.column_mut(ci).rows_mut(bi * m, m).copy_from(h);
            }
        }
    }
    Ok(ClusterView {
        rrhs,
        ues,
        target,
        matrix,
    })
}
