//! Measurement analytics over traces: grid averaging, configuration
//! comparison maps, coverage probability by range, beam recovery gaps,
//! route smoothing and beam dominance maps.

use serde::{Deserialize, Serialize};

use crate::beams::{SsbId, TxConfig};
use crate::layout::{FactoryLayout, GridSpec};
use crate::link::{MeasurementSample, MeasurementTrace};
use crate::{Error, Result};

/// How RSRP values are averaged inside a cell or window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AveragingDomain {
    /// Arithmetic mean of dBm values.
    #[default]
    Db,
    /// Mean in milliwatts, converted back to dBm.
    Linear,
}

impl AveragingDomain {
    fn mean(self, values: impl Iterator<Item = f64>) -> Option<f64> {
        let (mut sum, mut n) = (0.0, 0usize);
        for v in values {
            sum += match self {
                AveragingDomain::Db => v,
                AveragingDomain::Linear => 10f64.powf(v / 10.0),
            };
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let m = sum / n as f64;
        Some(match self {
            AveragingDomain::Db => m,
            AveragingDomain::Linear => 10.0 * m.log10(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStat {
    pub mean: f64,
    pub count: usize,
}

/// Per-cell mean of the per-burst strongest RSRP. Unvisited cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridStat {
    pub grid: GridSpec,
    pub cells: Vec<Option<CellStat>>,
}

impl GridStat {
    pub fn get(&self, i: usize, j: usize) -> Option<CellStat> {
        self.cells[self.grid.flat(i, j)]
    }

    pub fn populated(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn means(&self) -> Vec<Option<f64>> {
        self.cells.iter().map(|c| c.map(|c| c.mean)).collect()
    }
}

/// Bins each burst's strongest RSRP into the grid and averages per cell.
pub fn local_average(trace: &MeasurementTrace, grid: &GridSpec, domain: AveragingDomain) -> Result<GridStat> {
    if trace.is_empty() {
        return Err(Error::Empty("trace has no samples".into()));
    }
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); grid.n_cells()];
    for s in &trace.samples {
        let Some((_, rsrp)) = s.strongest() else {
            continue;
        };
        let (i, j) = grid.index(s.position)?;
        buckets[grid.flat(i, j)].push(rsrp);
    }
    let cells = buckets
        .into_iter()
        .map(|b| {
            let count = b.len();
            domain.mean(b.into_iter()).map(|mean| CellStat { mean, count })
        })
        .collect();
    Ok(GridStat { grid: *grid, cells })
}

/// Per-cell difference `a - b`, defined where both inputs have data.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMap {
    pub grid: GridSpec,
    pub cells: Vec<Option<f64>>,
}

pub fn gamma_map(a: &GridStat, b: &GridStat) -> Result<ComparisonMap> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(
            "comparison maps need identical grid specifications".into(),
        ));
    }
    let cells = a
        .cells
        .iter()
        .zip(&b.cells)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => Some(x.mean - y.mean),
            _ => None,
        })
        .collect();
    Ok(ComparisonMap { grid: a.grid, cells })
}

/// Empirical distribution of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of values strictly below `x`.
    pub fn prob_below(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return f64::NAN;
        }
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }

    /// Quantile at probability `p` in [0, 1], interpolating linearly between
    /// order statistics at positions `p * (n - 1)`.
    pub fn percentile(&self, p: f64) -> Option<f64> {
        if self.sorted.is_empty() || !(0.0..=1.0).contains(&p) {
            return None;
        }
        let h = p * (self.sorted.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        Some(self.sorted[lo] + (h - lo as f64) * (self.sorted[hi] - self.sorted[lo]))
    }

    /// `(value, probability)` step points, probability `k / n` at the k-th
    /// smallest value.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, (k + 1) as f64 / n))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinCoverage {
    pub d_lo: f64,
    pub d_hi: f64,
    pub samples: usize,
    /// `P(RSRP < threshold)`; `None` for an empty bin.
    pub probability: Option<f64>,
    /// Distribution of detected strongest RSRP in the bin.
    pub cdf: EmpiricalCdf,
}

/// Fraction of bursts per 3D range bin whose strongest RSRP is below
/// `threshold`. Bursts with no detected beam count as below threshold.
/// A bin covers `[d_lo, d_hi)`.
pub fn coverage_probability(
    trace: &MeasurementTrace,
    threshold: f64,
    bins: &[(f64, f64)],
    layout: &FactoryLayout,
) -> Result<Vec<BinCoverage>> {
    for (k, &(lo, hi)) in bins.iter().enumerate() {
        if !(lo < hi) {
            return Err(Error::invalid(
                format!("bins[{k}]"),
                format!("[{lo}, {hi}) is empty"),
            ));
        }
    }
    let mut order: Vec<_> = bins.to_vec();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    if order.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(Error::invalid("bins", "bins overlap"));
    }
    let mut below = vec![0usize; bins.len()];
    let mut total = vec![0usize; bins.len()];
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); bins.len()];
    for s in &trace.samples {
        let d = layout.range_3d(s.position);
        let Some(k) = bins.iter().position(|&(lo, hi)| d >= lo && d < hi) else {
            continue;
        };
        total[k] += 1;
        match s.strongest() {
            Some((_, r)) => {
                if r < threshold {
                    below[k] += 1;
                }
                values[k].push(r);
            }
            None => below[k] += 1,
        }
    }
    Ok(bins
        .iter()
        .enumerate()
        .map(|(k, &(d_lo, d_hi))| BinCoverage {
            d_lo,
            d_hi,
            samples: total[k],
            probability: (total[k] > 0).then(|| below[k] as f64 / total[k] as f64),
            cdf: EmpiricalCdf::new(std::mem::take(&mut values[k])),
        })
        .collect())
}

/// Gaps `Δi = RSRP_1st - RSRP_ith` between the strongest and the i-th
/// strongest beam of each burst, for `i = 2..=max_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamDeltaStats {
    pub max_i: usize,
    /// Per burst, gaps for orders 2.. up to the beams it reported.
    pub per_burst: Vec<Vec<f64>>,
    orders: Vec<EmpiricalCdf>,
}

impl BeamDeltaStats {
    /// Pooled distribution of `Δi`, `i >= 2`.
    pub fn cdf(&self, i: usize) -> Option<&EmpiricalCdf> {
        i.checked_sub(2).and_then(|k| self.orders.get(k))
    }

    pub fn percentile(&self, i: usize, p: f64) -> Option<f64> {
        self.cdf(i).and_then(|c| c.percentile(p))
    }

    /// Rows of `(probability, [Δ2, Δ3, ...])`.
    pub fn percentile_table(&self, probs: &[f64]) -> Vec<(f64, Vec<Option<f64>>)> {
        probs
            .iter()
            .map(|&p| (p, (2..=self.max_i).map(|i| self.percentile(i, p)).collect()))
            .collect()
    }
}

pub fn delta_stats(trace: &MeasurementTrace, max_i: usize) -> Result<BeamDeltaStats> {
    if max_i < 2 {
        return Err(Error::invalid("max_i", "must be >= 2"));
    }
    let mut per_burst = Vec::with_capacity(trace.len());
    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); max_i - 1];
    for s in &trace.samples {
        if s.entries.len() < 2 {
            continue;
        }
        let mut r: Vec<f64> = s.entries.iter().map(|e| e.1).collect();
        r.sort_by(|a, b| b.total_cmp(a));
        let gaps: Vec<f64> = r[1..r.len().min(max_i)].iter().map(|x| r[0] - x).collect();
        for (k, g) in gaps.iter().enumerate() {
            pooled[k].push(*g);
        }
        per_burst.push(gaps);
    }
    if per_burst.is_empty() {
        return Err(Error::Empty("no burst reports two or more beams".into()));
    }
    Ok(BeamDeltaStats {
        max_i,
        per_burst,
        orders: pooled.into_iter().map(EmpiricalCdf::new).collect(),
    })
}

/// Published beam-gap percentiles from the factory campaign, kept for
/// report comparison only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaReference {
    pub config: TxConfig,
    pub probability: f64,
    /// Δ2, Δ3, Δ4 in dB.
    pub deltas: [f64; 3],
}

pub const DELTA_REFERENCE: [DeltaReference; 6] = [
    DeltaReference {
        config: TxConfig::A,
        probability: 0.25,
        deltas: [0.3, 1.0, 1.6],
    },
    DeltaReference {
        config: TxConfig::A,
        probability: 0.50,
        deltas: [0.7, 1.7, 2.5],
    },
    DeltaReference {
        config: TxConfig::A,
        probability: 0.75,
        deltas: [1.2, 2.6, 3.9],
    },
    DeltaReference {
        config: TxConfig::B,
        probability: 0.25,
        deltas: [0.7, 1.9, 3.0],
    },
    DeltaReference {
        config: TxConfig::B,
        probability: 0.50,
        deltas: [1.6, 3.2, 4.4],
    },
    DeltaReference {
        config: TxConfig::B,
        probability: 0.75,
        deltas: [3.0, 4.8, 6.2],
    },
];

/// Centered moving average over a distance axis: each output averages the
/// inputs within `window / 2` of its own position. `positions` must be
/// non-decreasing.
pub fn moving_average(positions: &[f64], values: &[f64], window: f64) -> Vec<f64> {
    assert_eq!(positions.len(), values.len());
    let n = values.len();
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + values[k];
    }
    let half = window / 2.0;
    let (mut lo, mut hi) = (0usize, 0usize);
    (0..n)
        .map(|k| {
            while positions[lo] < positions[k] - half {
                lo += 1;
            }
            while hi < n && positions[hi] <= positions[k] + half {
                hi += 1;
            }
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedPoint {
    pub traveled: f64,
    pub azimuth_deg: f64,
    /// Smoothed RSRP per beam, for beams seen inside the window.
    pub beams: Vec<(SsbId, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedRoute {
    pub window_m: f64,
    /// Set when the window exceeds the route; output is then one average.
    pub degenerate: bool,
    pub points: Vec<SmoothedPoint>,
}

impl SmoothedRoute {
    /// Strongest smoothed beam at each point.
    pub fn dominant(&self) -> Vec<Option<SsbId>> {
        self.points
            .iter()
            .map(|p| crate::link::strongest_entry(&p.beams).map(|(id, _)| id))
            .collect()
    }
}

/// Removes small-scale fading along a route by averaging each beam's RSRP
/// (dB) over `window_wavelengths` wavelengths of traveled distance.
pub fn route_smoothing(
    samples: &[MeasurementSample],
    layout: &FactoryLayout,
    window_wavelengths: f64,
    carrier_hz: f64,
) -> Result<SmoothedRoute> {
    if samples.is_empty() {
        return Err(Error::Empty("route has no samples".into()));
    }
    if !(window_wavelengths > 0.0) {
        return Err(Error::invalid("window_wavelengths", "must be > 0"));
    }
    let window_m = window_wavelengths * crate::wavelength(carrier_hz);
    let mut traveled = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    for (k, s) in samples.iter().enumerate() {
        if k > 0 {
            acc += samples[k - 1].position.distance(&s.position);
        }
        traveled.push(acc);
    }
    let mut ids: Vec<SsbId> = samples
        .iter()
        .flat_map(|s| s.entries.iter().map(|e| e.0))
        .collect();
    ids.sort();
    ids.dedup();

    // Per-beam value and presence series; missing entries are skipped.
    let n = samples.len();
    let mut sums = Vec::with_capacity(ids.len());
    let mut counts = Vec::with_capacity(ids.len());
    for id in &ids {
        let mut v = vec![0.0; n];
        let mut c = vec![0.0; n];
        for (k, s) in samples.iter().enumerate() {
            if let Some((_, r)) = s.entries.iter().find(|e| e.0 == *id) {
                v[k] = *r;
                c[k] = 1.0;
            }
        }
        sums.push(v);
        counts.push(c);
    }

    let total = *traveled.last().expect("non-empty");
    let degenerate = window_m > total;
    let point_at = |k: usize, smoothed: &dyn Fn(usize) -> Option<f64>| -> Result<SmoothedPoint> {
        let ang = layout.angles_to_tx(samples[k].position)?;
        let beams = ids
            .iter()
            .enumerate()
            .filter_map(|(b, id)| smoothed(b).map(|v| (*id, v)))
            .collect();
        Ok(SmoothedPoint {
            traveled: traveled[k],
            azimuth_deg: ang.azimuth_deg,
            beams,
        })
    };

    if degenerate {
        let mid = traveled.partition_point(|&t| t < total / 2.0).min(n - 1);
        let whole = |b: usize| {
            let c: f64 = counts[b].iter().sum();
            (c > 0.0).then(|| sums[b].iter().sum::<f64>() / c)
        };
        return Ok(SmoothedRoute {
            window_m,
            degenerate,
            points: vec![point_at(mid, &whole)?],
        });
    }

    let avg_sum: Vec<Vec<f64>> = sums
        .iter()
        .map(|v| moving_average(&traveled, v, window_m))
        .collect();
    let avg_cnt: Vec<Vec<f64>> = counts
        .iter()
        .map(|c| moving_average(&traveled, c, window_m))
        .collect();
    let points = (0..n)
        .map(|k| {
            let smoothed = |b: usize| (avg_cnt[b][k] > 0.0).then(|| avg_sum[b][k] / avg_cnt[b][k]);
            point_at(k, &smoothed)
        })
        .collect::<Result<_>>()?;
    Ok(SmoothedRoute {
        window_m,
        degenerate,
        points,
    })
}

/// Per-cell fraction of bursts whose strongest beam is in the subset.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceMap {
    pub grid: GridSpec,
    pub fractions: Vec<Option<f64>>,
    pub counts: Vec<usize>,
}

/// Default dominance grid cell, meters.
pub const DOMINANCE_CELL: (f64, f64) = (2.7, 2.4);

pub fn dominance_map(trace: &MeasurementTrace, subset: &[SsbId], grid: &GridSpec) -> Result<DominanceMap> {
    if subset.is_empty() {
        return Err(Error::invalid("subset", "must name at least one beam"));
    }
    if let Some(bad) = subset
        .iter()
        .find(|id| id.config != trace.config || !id.is_valid())
    {
        return Err(Error::UnknownBeam(bad.to_string()));
    }
    let mut hits = vec![0usize; grid.n_cells()];
    let mut counts = vec![0usize; grid.n_cells()];
    for s in &trace.samples {
        let Some((id, _)) = s.strongest() else {
            continue;
        };
        let (i, j) = grid.index(s.position)?;
        let c = grid.flat(i, j);
        counts[c] += 1;
        if subset.contains(&id) {
            hits[c] += 1;
        }
    }
    let fractions = hits
        .iter()
        .zip(&counts)
        .map(|(&h, &c)| (c > 0).then(|| h as f64 / c as f64))
        .collect();
    Ok(DominanceMap {
        grid: *grid,
        fractions,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Point2;
    use crate::link::TraceMetadata;

    fn id(s: &str) -> SsbId {
        s.parse().unwrap()
    }

    fn trace(samples: Vec<(f64, f64, Vec<(&str, f64)>)>) -> MeasurementTrace {
        MeasurementTrace {
            config: TxConfig::B,
            samples: samples
                .into_iter()
                .enumerate()
                .map(|(k, (x, y, e))| MeasurementSample {
                    time: k as f64 * 0.02,
                    position: Point2::new(x, y),
                    entries: e.into_iter().map(|(s, r)| (id(s), r)).collect(),
                })
                .collect(),
            metadata: TraceMetadata::default(),
        }
    }

    fn grid() -> GridSpec {
        GridSpec::new(Point2::new(0.0, 0.0), 1.0, 1.0, 3, 2).unwrap()
    }

    #[test]
    fn average_examples() {
        let t = trace(vec![
            (0.5, 0.5, vec![("B-1-1", -70.0), ("B-1-2", -75.0)]),
            (0.6, 0.4, vec![("B-1-1", -80.0)]),
            (2.5, 1.5, vec![("B-1-1", -80.0)]),
        ]);
        let g = local_average(&t, &grid(), AveragingDomain::Db).unwrap();
        assert_eq!(g.get(0, 0).unwrap().mean, -75.0);
        assert_eq!(g.get(0, 0).unwrap().count, 2);
        assert_eq!(g.get(2, 1).unwrap().mean, -80.0);
        assert!(g.get(1, 0).is_none());
        let lin = local_average(&t, &grid(), AveragingDomain::Linear).unwrap();
        assert!((lin.get(0, 0).unwrap().mean - -72.596).abs() < 1e-3);
        let empty = trace(vec![]);
        assert!(local_average(&empty, &grid(), AveragingDomain::Db).is_err());
    }

    #[test]
    fn one_meter_cell_in_wavelengths() {
        let cells = 1.0 / crate::wavelength(26.0e9);
        assert!((cells - 86.7).abs() < 0.1);
        assert!((crate::wavelength(26.0e9) * 1e3 - 11.53).abs() < 0.01);
    }

    #[test]
    fn gamma_rules() {
        let a = trace(vec![
            (0.5, 0.5, vec![("B-1-1", -70.0)]),
            (1.5, 0.5, vec![("B-1-1", -60.0)]),
        ]);
        let b = trace(vec![(0.5, 0.5, vec![("B-1-1", -73.0)])]);
        let ga = local_average(&a, &grid(), AveragingDomain::Db).unwrap();
        let gb = local_average(&b, &grid(), AveragingDomain::Db).unwrap();
        let ab = gamma_map(&ga, &gb).unwrap();
        let ba = gamma_map(&gb, &ga).unwrap();
        assert_eq!(ab.cells[0], Some(3.0));
        assert_eq!(ab.cells[1], None);
        assert_eq!(ba.cells[0], Some(-3.0));
        assert!(gamma_map(&ga, &ga)
            .unwrap()
            .cells
            .iter()
            .flatten()
            .all(|&v| v == 0.0));
        let other = GridStat {
            grid: GridSpec::new(Point2::new(0.0, 0.0), 2.0, 1.0, 3, 2).unwrap(),
            cells: ga.cells.clone(),
        };
        assert!(matches!(gamma_map(&ga, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn cdf_and_percentiles() {
        let c = EmpiricalCdf::new(vec![3.0, 1.0, 2.0, 4.0]);
        assert_eq!(c.percentile(0.5), Some(2.5));
        assert_eq!(c.percentile(0.0), Some(1.0));
        assert_eq!(c.percentile(1.0), Some(4.0));
        assert_eq!(c.prob_below(2.5), 0.5);
        assert_eq!(c.points().last(), Some(&(4.0, 1.0)));
    }

    #[test]
    fn delta_examples() {
        let t = trace(vec![(
            0.5,
            0.5,
            vec![("B-1-1", -63.0), ("B-1-2", -60.0), ("B-1-3", -61.0)],
        )]);
        let d = delta_stats(&t, 4).unwrap();
        assert_eq!(d.per_burst[0], vec![1.0, 3.0]);
        assert_eq!(d.percentile(2, 0.5), Some(1.0));
        assert_eq!(d.cdf(4).unwrap().len(), 0);

        let flat = trace(vec![
            (
                0.5,
                0.5,
                vec![("B-1-1", -70.0), ("B-1-2", -70.0), ("B-1-3", -70.0)],
            ),
            (
                0.5,
                0.5,
                vec![("B-1-1", -80.0), ("B-1-2", -80.0), ("B-1-3", -80.0)],
            ),
        ]);
        let d = delta_stats(&flat, 3).unwrap();
        for row in d.percentile_table(&[0.25, 0.5, 0.75]) {
            assert!(row.1.iter().all(|v| *v == Some(0.0)));
        }

        let single = trace(vec![(0.5, 0.5, vec![("B-1-1", -70.0)])]);
        assert!(matches!(delta_stats(&single, 3), Err(Error::Empty(_))));
        assert!(delta_stats(&flat, 1).is_err());
    }

    #[test]
    fn reference_medians() {
        let med = |c| {
            DELTA_REFERENCE
                .iter()
                .find(|r| r.config == c && r.probability == 0.5)
                .unwrap()
                .deltas[0]
        };
        assert_eq!(med(TxConfig::A), 0.7);
        assert_eq!(med(TxConfig::B), 1.6);
    }

    #[test]
    fn moving_average_constant_and_ripple() {
        let pos: Vec<f64> = (0..400).map(|k| k as f64 * 0.03).collect();
        let flat = vec![-70.0; 400];
        assert!(moving_average(&pos, &flat, 0.461)
            .iter()
            .all(|v| (v - -70.0).abs() < 1e-9));
        let ripple: Vec<f64> = (0..400).map(|k| if k % 2 == 0 { -67.0 } else { -73.0 }).collect();
        let sm = moving_average(&pos, &ripple, 0.461);
        let interior = &sm[20..380];
        let amp = interior.iter().map(|v| (v + 70.0).abs()).fold(0.0, f64::max);
        assert!(amp < 0.3, "residual {amp}");
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        assert!((mean + 70.0).abs() < 0.1);
    }

    #[test]
    fn dominance_basics() {
        let t = trace(vec![
            (0.5, 0.5, vec![("B-1-1", -70.0), ("B-1-2", -75.0)]),
            (0.5, 0.5, vec![("B-1-1", -80.0), ("B-1-2", -75.0)]),
            (1.5, 0.5, vec![("B-1-1", -70.0), ("B-1-2", -70.0)]),
        ]);
        let m = dominance_map(&t, &[id("B-1-1")], &grid()).unwrap();
        assert_eq!(m.fractions[0], Some(0.5));
        // tie goes to the lower column
        assert_eq!(m.fractions[1], Some(1.0));
        assert_eq!(m.fractions[2], None);
        let all = dominance_map(&t, &[id("B-1-1"), id("B-1-2")], &grid()).unwrap();
        assert!(all.fractions.iter().flatten().all(|&f| f == 1.0));
        let a_beam = SsbId {
            config: TxConfig::A,
            row: 1,
            col: 1,
        };
        assert!(matches!(
            dominance_map(&t, &[a_beam], &grid()),
            Err(Error::UnknownBeam(_))
        ));
        assert!(dominance_map(&t, &[], &grid()).is_err());
    }

    #[test]
    fn coverage_rules() {
        use crate::layout::*;
        let r = Rect::new(Point2::new(0.0, -5.0), Point2::new(50.0, 5.0));
        let layout = FactoryLayout::new(
            vec![Hall {
                name: "h".into(),
                rect: r,
                clutter: Clutter::Dense,
            }],
            Transmitter {
                position: Point3::new(0.0, 0.0, 1.5),
                heading_deg: 0.0,
            },
            1.5,
            vec![VisibilityRegion {
                tag: Visibility::Nlos,
                polygon: r.to_polygon(),
            }],
            vec![],
        )
        .unwrap();
        let t = trace(vec![
            (10.5, 0.0, vec![("B-1-1", -90.0)]),
            (10.6, 0.0, vec![("B-1-1", -105.0)]),
            (10.7, 0.0, vec![]),
            (20.5, 0.0, vec![("B-1-1", -95.0)]),
        ]);
        let bins = [(10.0, 11.0), (20.0, 21.0), (30.0, 31.0)];
        let c = coverage_probability(&t, -100.0, &bins, &layout).unwrap();
        assert!((c[0].probability.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(c[1].probability, Some(0.0));
        assert_eq!(c[2].probability, None);
        assert_eq!(c[0].cdf.len(), 2);
        assert!(coverage_probability(&t, -100.0, &[(0.0, 10.0), (5.0, 12.0)], &layout).is_err());
    }
}
