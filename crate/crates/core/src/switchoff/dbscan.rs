//! DBSCAN-based beam selection: cluster the bursts served by each beam in
//! `(x, y, w * rsrp)` space and keep the beams with the most core points.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{BeamMask, SolverResult, SwitchOffProblem};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
    /// Scale applied to RSRP before clustering, m/dB.
    pub rsrp_weight: f64,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self {
            eps: 1.0,
            min_pts: 20,
            rsrp_weight: 0.1,
        }
    }
}

impl DbscanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::invalid("dbscan.eps", "must be > 0"));
        }
        if self.min_pts < 1 {
            return Err(Error::invalid("dbscan.min_pts", "must be >= 1"));
        }
        if !(self.rsrp_weight >= 0.0) || !self.rsrp_weight.is_finite() {
            return Err(Error::invalid("dbscan.rsrp_weight", "must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbscanLabels {
    /// Cluster of each point; `None` is noise.
    pub cluster: Vec<Option<usize>>,
    pub core: Vec<bool>,
    pub n_clusters: usize,
}

impl DbscanLabels {
    pub fn core_count(&self) -> usize {
        self.core.iter().filter(|&&c| c).count()
    }
}

type Cell = (i64, i64, i64);

fn cell_of(p: &[f64; 3], eps: f64) -> Cell {
    (
        (p[0] / eps).floor() as i64,
        (p[1] / eps).floor() as i64,
        (p[2] / eps).floor() as i64,
    )
}

/// Plain DBSCAN with Euclidean distance; a point's neighborhood includes
/// itself and is closed at `eps`.
pub fn dbscan(points: &[[f64; 3]], eps: f64, min_pts: usize) -> Result<DbscanLabels> {
    DbscanParams {
        eps,
        min_pts,
        rsrp_weight: 0.0,
    }
    .validate()?;
    let mut buckets: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (k, p) in points.iter().enumerate() {
        buckets.entry(cell_of(p, eps)).or_default().push(k);
    }
    let eps2 = eps * eps;
    let neighbors = |k: usize| -> Vec<usize> {
        let p = &points[k];
        let (cx, cy, cz) = cell_of(p, eps);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(b) = buckets.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &j in b {
                            let q = &points[j];
                            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
                            if d2 <= eps2 {
                                out.push(j);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    };
    let hoods: Vec<Vec<usize>> = (0..points.len()).map(neighbors).collect();
    let core: Vec<bool> = hoods.iter().map(|h| h.len() >= min_pts).collect();
    let mut cluster = vec![None; points.len()];
    let mut n_clusters = 0;
    for start in 0..points.len() {
        if !core[start] || cluster[start].is_some() {
            continue;
        }
        let id = n_clusters;
        n_clusters += 1;
        cluster[start] = Some(id);
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            if !core[k] {
                continue;
            }
            for &j in &hoods[k] {
                if cluster[j].is_none() {
                    cluster[j] = Some(id);
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(DbscanLabels {
        cluster,
        core,
        n_clusters,
    })
}

/// Ranks beams by the number of core points among the bursts where they are
/// strongest and enables the top `xi`. Without any core point the ranking
/// falls back to raw strongest counts and the result is flagged.
pub fn solve_dbscan(problem: &SwitchOffProblem, params: &DbscanParams) -> Result<SolverResult> {
    params.validate()?;
    let n = problem.n_beams();
    let mut groups: Vec<Vec<[f64; 3]>> = vec![Vec::new(); n];
    for b in problem.points() {
        groups[b.strongest].push([b.position.x, b.position.y, params.rsrp_weight * b.rsrp]);
    }
    let mut core = vec![0usize; n];
    let raw: Vec<usize> = groups.iter().map(Vec::len).collect();
    for (beam, pts) in groups.iter_mut().enumerate() {
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        core[beam] = dbscan(pts, params.eps, params.min_pts)?.core_count();
    }
    let fallback = core.iter().all(|&c| c == 0);
    let mut order: Vec<usize> = (0..n).filter(|&b| raw[b] > 0).collect();
    order.sort_by(|&a, &b| (core[b], raw[b]).cmp(&(core[a], raw[a])).then(a.cmp(&b)));
    let mut mask = BeamMask(vec![false; n]);
    for &b in order.iter().take(problem.xi) {
        mask.0[b] = true;
    }
    let enabled: Vec<usize> = mask.enabled().collect();
    Ok(SolverResult {
        objective: problem.eval_enabled(&enabled),
        mask,
        evaluations: 1,
        solver: "dbscan".into(),
        seed: None,
        fallback,
    })
}
