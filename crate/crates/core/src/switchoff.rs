//! Beam switch-off: choose at most `xi` SSB beams to keep on so that the
//! mean per-cell RSRP degradation
//!
//! ```text
//! f(set) = 1/N * sum over cells (RSRP_max[c] - RSRP_set[c])
//! ```
//!
//! is minimal. `RSRP_set[c]` is the cell mean over bursts of the strongest
//! RSRP among enabled beams; a burst where no enabled beam was observed
//! counts at the noise floor.

pub mod dbscan;
pub mod ga;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beams::SsbId;
use crate::layout::{GridSpec, Point2};
use crate::link::{MeasurementTrace, DEFAULT_NOISE_FLOOR_DBM};
use crate::{Error, Result};

pub use dbscan::{dbscan, solve_dbscan, DbscanLabels, DbscanParams};
pub use ga::{solve_ga, GaParams};

/// Upper bound on masks visited by [`solve_exhaustive`].
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Average degradation (dB) reported for the measured factory data by the
/// genetic algorithm at each cardinality bound. Comparison only.
pub const DEGRADATION_REFERENCE: [(usize, f64); 3] = [(3, 3.8), (5, 1.9), (10, 0.7)];

/// One bit per beam of the configuration, in row-major beam order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeamMask(pub Vec<bool>);

impl BeamMask {
    pub fn all_on(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self((0..n).map(|k| bits >> k & 1 == 1).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &on)| if on { acc | 1 << k } else { acc })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn enabled(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k)
    }
}

impl fmt::Display for BeamMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub mask: BeamMask,
    pub objective: f64,
    pub evaluations: u64,
    pub solver: String,
    pub seed: Option<u64>,
    /// DBSCAN found no core points and ranked beams by raw counts.
    pub fallback: bool,
}

/// A burst reduced to what the solvers need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstPoint {
    pub position: Point2,
    pub strongest: usize,
    pub rsrp: f64,
}

#[derive(Debug, Clone)]
pub struct SwitchOffProblem {
    pub grid: GridSpec,
    pub beams: Vec<SsbId>,
    pub xi: usize,
    pub floor_dbm: f64,
    /// Flat grid index of each populated cell.
    cells: Vec<usize>,
    /// Bursts of populated cell `c` are `offsets[c]..offsets[c + 1]`.
    offsets: Vec<usize>,
    /// Per beam, per burst RSRP; `-inf` where the beam was not observed.
    columns: Vec<Vec<f64>>,
    points: Vec<BurstPoint>,
    rsrp_max: Vec<f64>,
}

impl SwitchOffProblem {
    pub fn n_beams(&self) -> usize {
        self.beams.len()
    }

    /// Populated cell count `N`.
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_bursts(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[BurstPoint] {
        &self.points
    }

    /// `(i, j)` of each populated cell, in problem order.
    pub fn cell_indices(&self) -> Vec<(usize, usize)> {
        self.cells
            .iter()
            .map(|&f| (f % self.grid.nx, f / self.grid.nx))
            .collect()
    }

    pub fn rsrp_max(&self) -> &[f64] {
        &self.rsrp_max
    }

    /// Mean RSRP of each beam per populated cell over the bursts where it
    /// was observed.
    pub fn beam_means(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.n_cells())
            .map(|c| {
                let (a, b) = (self.offsets[c], self.offsets[c + 1]);
                self.columns
                    .iter()
                    .map(|col| {
                        let seen: Vec<f64> = col[a..b].iter().copied().filter(|v| v.is_finite()).collect();
                        (!seen.is_empty()).then(|| seen.iter().sum::<f64>() / seen.len() as f64)
                    })
                    .collect()
            })
            .collect()
    }

    fn cell_set_means(&self, enabled: &[usize]) -> Vec<f64> {
        (0..self.n_cells())
            .map(|c| {
                let (a, b) = (self.offsets[c], self.offsets[c + 1]);
                let mut sum = 0.0;
                for k in a..b {
                    let mut m = f64::NEG_INFINITY;
                    for &e in enabled {
                        m = m.max(self.columns[e][k]);
                    }
                    sum += if m == f64::NEG_INFINITY { self.floor_dbm } else { m };
                }
                sum / (b - a) as f64
            })
            .collect()
    }

    pub(crate) fn eval_enabled(&self, enabled: &[usize]) -> f64 {
        let set = self.cell_set_means(enabled);
        let total: f64 = self.rsrp_max.iter().zip(&set).map(|(m, s)| m - s).sum();
        total / self.n_cells() as f64
    }

    pub(crate) fn eval_bits(&self, bits: u64) -> f64 {
        let enabled: Vec<usize> = (0..self.n_beams()).filter(|k| bits >> k & 1 == 1).collect();
        self.eval_enabled(&enabled)
    }

    /// Objective increase caused by switching off each enabled beam of
    /// `bits` on its own. Entries for disabled beams are zero.
    pub(crate) fn contributions(&self, bits: u64) -> Vec<f64> {
        let enabled: Vec<usize> = (0..self.n_beams()).filter(|k| bits >> k & 1 == 1).collect();
        let mut contrib = vec![0.0; self.n_beams()];
        let n = self.n_cells() as f64;
        for c in 0..self.n_cells() {
            let (a, b) = (self.offsets[c], self.offsets[c + 1]);
            let w = 1.0 / ((b - a) as f64 * n);
            for k in a..b {
                let (mut best, mut best_v, mut second_v) = (usize::MAX, f64::NEG_INFINITY, f64::NEG_INFINITY);
                for &e in &enabled {
                    let v = self.columns[e][k];
                    if v > best_v {
                        second_v = best_v;
                        best_v = v;
                        best = e;
                    } else if v > second_v {
                        second_v = v;
                    }
                }
                if best != usize::MAX && best_v.is_finite() {
                    let fallback = if second_v.is_finite() {
                        second_v
                    } else {
                        self.floor_dbm
                    };
                    contrib[best] += (best_v - fallback) * w;
                }
            }
        }
        contrib
    }

    /// Table rows `(i, j, beam, beam mean, rsrp_max, bursts)` for export.
    pub fn table(&self) -> Vec<(usize, usize, SsbId, Option<f64>, f64, usize)> {
        let means = self.beam_means();
        let idx = self.cell_indices();
        let mut out = Vec::new();
        for c in 0..self.n_cells() {
            let count = self.offsets[c + 1] - self.offsets[c];
            for (b, id) in self.beams.iter().enumerate() {
                out.push((idx[c].0, idx[c].1, *id, means[c][b], self.rsrp_max[c], count));
            }
        }
        out
    }
}

/// Groups bursts by grid cell and precomputes the all-on reference.
pub fn build_problem(trace: &MeasurementTrace, grid: &GridSpec, xi: usize) -> Result<SwitchOffProblem> {
    build_problem_with_floor(trace, grid, xi, DEFAULT_NOISE_FLOOR_DBM)
}

pub fn build_problem_with_floor(
    trace: &MeasurementTrace,
    grid: &GridSpec,
    xi: usize,
    floor_dbm: f64,
) -> Result<SwitchOffProblem> {
    if xi < 1 {
        return Err(Error::invalid("xi", "cardinality bound must be >= 1"));
    }
    let config = trace.config;
    let beams: Vec<SsbId> = crate::beams::make_config(config).ids().collect();
    if beams.len() > 64 {
        return Err(Error::invalid("beams", "at most 64 beams supported"));
    }
    let mut per_cell: Vec<Vec<usize>> = vec![Vec::new(); grid.n_cells()];
    for (k, s) in trace.samples.iter().enumerate() {
        if s.entries.is_empty() {
            continue;
        }
        let (i, j) = grid.index(s.position)?;
        per_cell[grid.flat(i, j)].push(k);
    }
    let mut cells = Vec::new();
    let mut offsets = vec![0];
    let mut columns = vec![Vec::new(); beams.len()];
    let mut points = Vec::new();
    for (flat, bursts) in per_cell.iter().enumerate() {
        if bursts.is_empty() {
            continue;
        }
        cells.push(flat);
        for &k in bursts {
            let s = &trace.samples[k];
            for col in columns.iter_mut() {
                col.push(f64::NEG_INFINITY);
            }
            let row = points.len();
            for &(id, r) in &s.entries {
                if id.config != config || !id.is_valid() {
                    return Err(Error::UnknownBeam(id.to_string()));
                }
                columns[id.index()][row] = r;
            }
            let (best, r) = s.strongest().expect("non-empty entries");
            points.push(BurstPoint {
                position: s.position,
                strongest: best.index(),
                rsrp: r,
            });
        }
        offsets.push(points.len());
    }
    if cells.is_empty() {
        return Err(Error::Empty("trace visits no grid cell".into()));
    }
    let mut problem = SwitchOffProblem {
        grid: *grid,
        beams,
        xi,
        floor_dbm,
        cells,
        offsets,
        columns,
        points,
        rsrp_max: Vec::new(),
    };
    let all: Vec<usize> = (0..problem.n_beams()).collect();
    problem.rsrp_max = problem.cell_set_means(&all);
    Ok(problem)
}

/// Mean per-cell degradation of `mask` against all beams on, dB.
pub fn objective(problem: &SwitchOffProblem, mask: &BeamMask) -> Result<f64> {
    if mask.len() != problem.n_beams() {
        return Err(Error::invalid(
            "mask",
            format!("length {} does not match {} beams", mask.len(), problem.n_beams()),
        ));
    }
    if mask.popcount() == 0 {
        return Err(Error::invalid("mask", "no beam enabled"));
    }
    let enabled: Vec<usize> = mask.enabled().collect();
    Ok(problem.eval_enabled(&enabled))
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of non-empty masks with at most `xi` bits over `n` beams.
pub fn feasible_count(n: usize, xi: usize) -> u128 {
    (1..=xi.min(n)).map(|k| binomial(n as u128, k as u128)).sum()
}

/// Visits every non-empty mask with popcount <= xi. Ties resolve to the
/// lexicographically smallest mask.
pub fn solve_exhaustive(problem: &SwitchOffProblem) -> Result<SolverResult> {
    let n = problem.n_beams();
    if problem.xi >= n {
        return Ok(all_on_result(problem, "exhaustive", None));
    }
    let xi = problem.xi;
    let count = feasible_count(n, xi);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::SearchTooLarge(count));
    }
    let mut masks: Vec<u64> = Vec::with_capacity(count as usize);
    for k in 1..=xi {
        // Gosper's hack over k-subsets of n bits
        let mut v: u64 = (1u64 << k) - 1;
        let limit: u64 = if n == 64 { u64::MAX } else { 1u64 << n };
        while v < limit || (n == 64 && v != 0) {
            masks.push(v);
            let c = v & v.wrapping_neg();
            let r = v.wrapping_add(c);
            if r == 0 {
                break;
            }
            v = (((r ^ v) >> 2) / c) | r;
        }
    }
    let scores: Vec<f64> = masks.par_iter().map(|&m| problem.eval_bits(m)).collect();
    let mut best: Option<(f64, BeamMask)> = None;
    for (&m, &f) in masks.iter().zip(&scores) {
        let mask = BeamMask::from_bits(m, n);
        best = match best {
            Some((bf, bm)) if bf < f || (bf == f && bm <= mask) => Some((bf, bm)),
            _ => Some((f, mask)),
        };
    }
    let (objective, mask) = best.ok_or_else(|| Error::Empty("no feasible mask".into()))?;
    Ok(SolverResult {
        mask,
        objective,
        evaluations: masks.len() as u64,
        solver: "exhaustive".into(),
        seed: None,
        fallback: false,
    })
}

pub(crate) fn all_on_result(problem: &SwitchOffProblem, solver: &str, seed: Option<u64>) -> SolverResult {
    let all: Vec<usize> = (0..problem.n_beams()).collect();
    SolverResult {
        mask: BeamMask::all_on(problem.n_beams()),
        objective: problem.eval_enabled(&all),
        evaluations: 1,
        solver: solver.into(),
        seed,
        fallback: false,
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::beams::TxConfig;
    use crate::link::{MeasurementSample, TraceMetadata};

    pub fn id(s: &str) -> SsbId {
        s.parse().unwrap()
    }

    /// Trace with one burst per `(x, y, entries)` tuple, config B.
    pub fn trace(bursts: &[(f64, f64, &[(&str, f64)])]) -> MeasurementTrace {
        MeasurementTrace {
            config: TxConfig::B,
            samples: bursts
                .iter()
                .enumerate()
                .map(|(k, (x, y, e))| MeasurementSample {
                    time: k as f64 * 0.02,
                    position: Point2::new(*x, *y),
                    entries: e.iter().map(|(s, r)| (id(s), *r)).collect(),
                })
                .collect(),
            metadata: TraceMetadata::default(),
        }
    }

    pub fn grid() -> GridSpec {
        GridSpec::new(Point2::new(0.0, 0.0), 1.0, 1.0, 4, 1).unwrap()
    }

    pub fn mask_of(problem: &SwitchOffProblem, ids: &[&str]) -> BeamMask {
        let mut m = BeamMask(vec![false; problem.n_beams()]);
        for s in ids {
            m.0[id(s).index()] = true;
        }
        m
    }
}
