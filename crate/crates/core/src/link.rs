//! Link budget, SSB timing, RSRP synthesis and the measurement campaign
//! runner.
//!
//! RSRP per beam at a location is
//!
//! ```text
//! RSRP = PG(d) + shadowing + P_TX/RE + (G_TX(az, el) - correction(vis)) + G_RX
//! ```
//!
//! and [`extract_path_gain`] undoes exactly that arithmetic.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beams::{BeamGridConfig, SsbId, TxConfig};
use crate::layout::{FactoryLayout, Point2, RouteSpec};
use crate::propagation::{effective_gain_correction, FastFading, PathGainModel, ShadowingField};
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkBudget {
    /// Total carrier power, dBm.
    pub p_c_dbm: f64,
    pub carrier_bandwidth_hz: f64,
    pub scs_hz: f64,
    pub n_rb: u32,
    /// RX antenna gain, dBi. The biconical scanner antenna is taken as
    /// isotropic.
    pub g_rx_dbi: f64,
    pub carrier_hz: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            p_c_dbm: 21.2,
            carrier_bandwidth_hz: 100e6,
            scs_hz: 120e3,
            n_rb: 66,
            g_rx_dbi: 0.0,
            carrier_hz: crate::DEFAULT_CARRIER_HZ,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !self.p_c_dbm.is_finite() {
            return Err(Error::invalid("link.p_c_dbm", "must be finite"));
        }
        if self.numerology().is_none() {
            return Err(Error::invalid(
                "link.scs_hz",
                format!("{} Hz is not 15 kHz x 2^n", self.scs_hz),
            ));
        }
        if self.n_rb == 0 {
            return Err(Error::invalid("link.n_rb", "must be >= 1"));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::invalid("link.carrier_hz", "must be > 0"));
        }
        if !self.g_rx_dbi.is_finite() {
            return Err(Error::invalid("link.g_rx_dbi", "must be finite"));
        }
        Ok(())
    }

    /// Subcarriers in the carrier, 12 per PRB.
    pub fn n_re(&self) -> u32 {
        12 * self.n_rb
    }

    /// Numerology index `n` with `scs = 15 kHz * 2^n`.
    pub fn numerology(&self) -> Option<u32> {
        let ratio = self.scs_hz / 15e3;
        if !(ratio >= 1.0) {
            return None;
        }
        let n = ratio.log2().round();
        ((15e3 * 2f64.powf(n) - self.scs_hz).abs() < 1e-6).then_some(n as u32)
    }

    /// Bandwidth of the 127-subcarrier SSS over which scanners average RSRP.
    pub fn sss_bandwidth_hz(&self) -> f64 {
        127.0 * self.scs_hz
    }

    pub fn tx_power_per_re(&self) -> f64 {
        power_per_re(self.p_c_dbm, self.n_re())
    }
}

/// Carrier power spread evenly over `n_re` resource elements, dBm.
pub fn power_per_re(p_c_dbm: f64, n_re: u32) -> f64 {
    p_c_dbm - 10.0 * (n_re as f64).log10()
}

pub fn tx_power_per_re(budget: &LinkBudget) -> f64 {
    budget.tx_power_per_re()
}

/// FR2 maximum transmission bandwidth configuration in PRBs for the given
/// channel bandwidth and subcarrier spacing.
pub fn fr2_max_prb(bandwidth_hz: f64, scs_hz: f64) -> Option<u32> {
    let bw = (bandwidth_hz / 1e6).round() as u32;
    let scs = (scs_hz / 1e3).round() as u32;
    match (scs, bw) {
        (60, 50) => Some(66),
        (60, 100) => Some(132),
        (60, 200) => Some(264),
        (120, 50) => Some(32),
        (120, 100) => Some(66),
        (120, 200) => Some(132),
        (120, 400) => Some(264),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsbTiming {
    pub burst_periodicity: f64,
    pub burst_duration: f64,
    pub symbol_duration: f64,
}

impl Default for SsbTiming {
    fn default() -> Self {
        Self {
            burst_periodicity: 0.020,
            burst_duration: 0.005,
            symbol_duration: 8.91e-6,
        }
    }
}

impl SsbTiming {
    pub fn validate(&self) -> Result<()> {
        if !(self.burst_periodicity > 0.0 && self.burst_duration > 0.0 && self.symbol_duration > 0.0) {
            return Err(Error::invalid("timing", "all durations must be > 0"));
        }
        if !(self.burst_duration < self.burst_periodicity) {
            return Err(Error::invalid(
                "timing.burst_duration",
                "must be shorter than the burst periodicity",
            ));
        }
        Ok(())
    }

    /// Number of OFDM symbols that fit in one burst window.
    pub fn symbols_per_burst(&self) -> usize {
        (self.burst_duration / self.symbol_duration).floor() as usize
    }
}

/// Doppler shift in Hz for a receiver moving at `speed` m/s.
pub fn doppler_shift(speed: f64, freq_hz: f64) -> Result<f64> {
    if !(speed >= 0.0) {
        return Err(Error::invalid("speed", "must be >= 0"));
    }
    Ok(speed * freq_hz / SPEED_OF_LIGHT)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSample {
    pub time: f64,
    pub position: Point2,
    pub entries: Vec<(SsbId, f64)>,
}

impl MeasurementSample {
    /// Strongest entry; ties go to the lowest `(row, col)`.
    pub fn strongest(&self) -> Option<(SsbId, f64)> {
        strongest_entry(&self.entries)
    }
}

pub(crate) fn strongest_entry(entries: &[(SsbId, f64)]) -> Option<(SsbId, f64)> {
    entries.iter().copied().fold(None, |best, (id, r)| match best {
        None => Some((id, r)),
        Some((bid, br)) if r > br || (r == br && id < bid) => Some((id, r)),
        keep => keep,
    })
}

/// Contiguous run of samples produced by one route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSpan {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub seed: Option<u64>,
    pub los_model: String,
    pub nlos_model: String,
    pub routes: Vec<RouteSpan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTrace {
    pub config: TxConfig,
    pub samples: Vec<MeasurementSample>,
    pub metadata: TraceMetadata,
}

pub const TRACE_HEADER: &str = "time_s,x_m,y_m,config,row,col,rsrp_dbm";

/// Fixed-point formatting that never prints a negative zero.
pub(crate) fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

impl MeasurementTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples of the named route, or `None` if no such route.
    pub fn route(&self, name: &str) -> Option<&[MeasurementSample]> {
        self.metadata
            .routes
            .iter()
            .find(|r| r.name == name)
            .map(|r| &self.samples[r.start..r.end])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for s in &self.samples {
            let t = fixed(s.time, 3);
            let x = fixed(s.position.x, 3);
            let y = fixed(s.position.y, 3);
            for (id, rsrp) in &s.entries {
                writeln!(
                    w,
                    "{t},{x},{y},{},{},{},{}",
                    id.config,
                    id.row,
                    id.col,
                    fixed(*rsrp, 2)
                )?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Reads the trace schema. Consecutive lines with the same timestamp
    /// form one burst. Bursts with no detected beam are not representable.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty file".into(),
        })??;
        if header.trim() != TRACE_HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header '{TRACE_HEADER}'"),
            });
        }
        let mut config: Option<TxConfig> = None;
        let mut samples: Vec<MeasurementSample> = Vec::new();
        let mut last_key: Option<String> = None;
        for (k, line) in lines.enumerate() {
            let lineno = k + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 7 {
                return Err(perr(format!("expected 7 columns, got {}", cols.len())));
            }
            let num = |i: usize, name: &str| -> Result<f64> {
                cols[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| perr(format!("bad {name} '{}'", cols[i])))
            };
            let time = num(0, "time_s")?;
            let x = num(1, "x_m")?;
            let y = num(2, "y_m")?;
            let rsrp = num(6, "rsrp_dbm")?;
            let cfg: TxConfig = cols[3].parse().map_err(|e: Error| perr(e.to_string()))?;
            if let Some(c) = config {
                if c != cfg {
                    return Err(perr("trace mixes configurations".into()));
                }
            }
            config = Some(cfg);
            let row: u8 = cols[4]
                .parse()
                .map_err(|_| perr(format!("bad row '{}'", cols[4])))?;
            let col: u8 = cols[5]
                .parse()
                .map_err(|_| perr(format!("bad col '{}'", cols[5])))?;
            let id = SsbId::new(cfg, row, col).map_err(|e| perr(e.to_string()))?;
            let key = format!("{},{},{}", cols[0], cols[1], cols[2]);
            if last_key.as_deref() != Some(key.as_str()) {
                if let Some(prev) = samples.last() {
                    if !(time > prev.time) {
                        return Err(perr(format!(
                            "timestamps must increase strictly ({} after {})",
                            time, prev.time
                        )));
                    }
                }
                samples.push(MeasurementSample {
                    time,
                    position: Point2::new(x, y),
                    entries: Vec::new(),
                });
                last_key = Some(key);
            }
            let s = samples.last_mut().expect("pushed above");
            if s.entries.iter().any(|(e, _)| *e == id) {
                return Err(perr(format!("duplicate entry for {id} in one burst")));
            }
            s.entries.push((id, rsrp));
        }
        let config = config.ok_or_else(|| Error::Empty("trace has no samples".into()))?;
        let n = samples.len();
        Ok(Self {
            config,
            samples,
            metadata: TraceMetadata {
                routes: vec![RouteSpan {
                    name: "imported".into(),
                    start: 0,
                    end: n,
                }],
                ..Default::default()
            },
        })
    }
}

/// Everything needed to turn a location into per-beam RSRP.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    pub layout: FactoryLayout,
    pub beams: BeamGridConfig,
    pub los: PathGainModel,
    pub nlos: PathGainModel,
    /// Unit-variance shadowing realization; scaled by the sigma of the
    /// model selected at each location.
    pub field: ShadowingField,
    pub budget: LinkBudget,
    pub fading: FastFading,
    pub noise_floor_dbm: f64,
}

pub const DEFAULT_NOISE_FLOOR_DBM: f64 = -120.0;

impl Synthesizer {
    pub fn new(
        layout: FactoryLayout,
        beams: BeamGridConfig,
        los: PathGainModel,
        nlos: PathGainModel,
        field: ShadowingField,
        budget: LinkBudget,
    ) -> Self {
        Self {
            layout,
            beams,
            los,
            nlos,
            field,
            budget,
            fading: FastFading::off(),
            noise_floor_dbm: DEFAULT_NOISE_FLOOR_DBM,
        }
    }

    pub fn with_fading(mut self, fading: FastFading) -> Self {
        self.fading = fading;
        self
    }

    pub fn with_noise_floor(mut self, floor_dbm: f64) -> Self {
        self.noise_floor_dbm = floor_dbm;
        self
    }

    /// Path gain realized at `p`: model mean, shadowing, blocking loss and
    /// fading. This is what [`extract_path_gain`] recovers.
    pub fn realized_path_gain(&self, p: Point2) -> Result<f64> {
        let vis = self.layout.classify_visibility(p)?;
        let ang = self.layout.angles_to_tx(p)?;
        let model = match vis {
            crate::layout::Visibility::Los => &self.los,
            crate::layout::Visibility::Nlos => &self.nlos,
        };
        Ok(
            model.mean(ang.distance_3d)? + model.sigma * self.field.unit_value(p)?
                - self.layout.excess_loss_db(p)
                + self.fading.value(p),
        )
    }

    /// Per-beam RSRP at `p`, omitting entries below the noise floor.
    pub fn rsrp_at(&self, p: Point2) -> Result<Vec<(SsbId, f64)>> {
        Ok(self
            .rsrp_all(p)?
            .into_iter()
            .filter(|(_, r)| *r >= self.noise_floor_dbm)
            .collect())
    }

    /// Per-beam RSRP at `p` without the noise-floor cut.
    pub fn rsrp_all(&self, p: Point2) -> Result<Vec<(SsbId, f64)>> {
        let vis = self.layout.classify_visibility(p)?;
        let ang = self.layout.angles_to_tx(p)?;
        let pg = self.realized_path_gain(p)?;
        let base = pg + self.budget.tx_power_per_re() - effective_gain_correction(vis) + self.budget.g_rx_dbi;
        Ok(self
            .beams
            .beams
            .iter()
            .map(|b| (b.id, base + self.beams.gain(b, ang.azimuth_deg, ang.downtilt_deg)))
            .collect())
    }
}

pub fn synthesize_rsrp(synth: &Synthesizer, p: Point2) -> Result<Vec<(SsbId, f64)>> {
    synth.rsrp_at(p)
}

/// Inverts the budget arithmetic of [`Synthesizer::rsrp_at`] for one entry.
pub fn extract_path_gain(
    entry: (SsbId, f64),
    position: Point2,
    budget: &LinkBudget,
    beams: &BeamGridConfig,
    layout: &FactoryLayout,
) -> Result<f64> {
    let (id, rsrp) = entry;
    let beam = beams.beam(id).ok_or_else(|| Error::UnknownBeam(id.to_string()))?;
    let vis = layout.classify_visibility(position)?;
    let ang = layout.angles_to_tx(position)?;
    let g_tx = beams.gain(beam, ang.azimuth_deg, ang.downtilt_deg) - effective_gain_correction(vis);
    Ok(rsrp - budget.tx_power_per_re() - g_tx - budget.g_rx_dbi)
}

/// Runs routes back to back at the burst periodicity and synthesizes one
/// burst per position. Burst `k` is stamped `k * burst_periodicity`.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub synth: Synthesizer,
    pub timing: SsbTiming,
    pub los_name: String,
    pub nlos_name: String,
}

impl Campaign {
    pub fn new(synth: Synthesizer, timing: SsbTiming) -> Self {
        Self {
            synth,
            timing,
            los_name: "custom".into(),
            nlos_name: "custom".into(),
        }
    }

    pub fn with_model_names(mut self, los: impl Into<String>, nlos: impl Into<String>) -> Self {
        self.los_name = los.into();
        self.nlos_name = nlos.into();
        self
    }

    fn positions(&self, routes: &[RouteSpec]) -> Result<(Vec<Point2>, Vec<RouteSpan>)> {
        if routes.is_empty() {
            return Err(Error::Empty("campaign needs at least one route".into()));
        }
        self.timing.validate()?;
        let mut positions = Vec::new();
        let mut spans = Vec::with_capacity(routes.len());
        for (ri, route) in routes.iter().enumerate() {
            route
                .validate()
                .map_err(|e| Error::invalid(format!("routes[{ri}]"), e.to_string()))?;
            let start = positions.len();
            let name = if route.name.is_empty() {
                format!("route{ri}")
            } else {
                route.name.clone()
            };
            for (k, s) in route
                .sample_every(self.timing.burst_periodicity)?
                .iter()
                .enumerate()
            {
                if !self.synth.layout.contains(s.position) {
                    return Err(Error::RouteOutOfLayout {
                        route: name,
                        sample: k,
                        x: s.position.x,
                        y: s.position.y,
                    });
                }
                positions.push(s.position);
            }
            spans.push(RouteSpan {
                name,
                start,
                end: positions.len(),
            });
        }
        Ok((positions, spans))
    }

    /// Synthesizes the campaign on the global rayon pool.
    pub fn run(&self, routes: &[RouteSpec], seed: u64) -> Result<MeasurementTrace> {
        let (positions, spans) = self.positions(routes)?;
        let entries: Vec<Vec<(SsbId, f64)>> = positions
            .par_iter()
            .map(|&p| self.synth.rsrp_at(p))
            .collect::<Result<_>>()?;
        Ok(self.assemble(positions, entries, spans, seed))
    }

    /// Same as [`Campaign::run`] on a dedicated pool of `threads` workers.
    pub fn run_with_threads(
        &self,
        routes: &[RouteSpec],
        seed: u64,
        threads: usize,
    ) -> Result<MeasurementTrace> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Scenario(e.to_string()))?;
        pool.install(|| self.run(routes, seed))
    }

    fn assemble(
        &self,
        positions: Vec<Point2>,
        entries: Vec<Vec<(SsbId, f64)>>,
        routes: Vec<RouteSpan>,
        seed: u64,
    ) -> MeasurementTrace {
        let period = self.timing.burst_periodicity;
        let samples = positions
            .into_iter()
            .zip(entries)
            .enumerate()
            .map(|(k, (position, entries))| MeasurementSample {
                time: k as f64 * period,
                position,
                entries,
            })
            .collect();
        MeasurementTrace {
            config: self.synth.beams.config,
            samples,
            metadata: TraceMetadata {
                seed: Some(seed),
                los_model: self.los_name.clone(),
                nlos_model: self.nlos_name.clone(),
                routes,
            },
        }
    }
}

pub fn run_campaign(campaign: &Campaign, routes: &[RouteSpec], seed: u64) -> Result<MeasurementTrace> {
    campaign.run(routes, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beams::make_config;
    use crate::layout::{Clutter, Hall, Point3, Rect, Transmitter, Visibility, VisibilityRegion};
    use crate::propagation::ModelPreset;

    #[test]
    fn per_re_power() {
        let b = LinkBudget::default();
        assert_eq!(b.n_re(), 792);
        assert!((b.tx_power_per_re() - -7.787).abs() < 1e-3);
        assert_eq!(power_per_re(b.p_c_dbm, 1), b.p_c_dbm);
        assert_eq!(fr2_max_prb(100e6, 120e3), Some(66));
        assert_eq!(b.numerology(), Some(3));
        assert!((b.sss_bandwidth_hz() - 15.24e6).abs() < 1.0);
    }

    #[test]
    fn bad_numerology_rejected() {
        let b = LinkBudget {
            scs_hz: 100e3,
            ..Default::default()
        };
        assert!(b.validate().is_err());
    }

    #[test]
    fn doppler_examples() {
        assert!((doppler_shift(2.0, 26e9).unwrap() - 173.45).abs() < 0.05);
        assert_eq!(doppler_shift(0.0, 26e9).unwrap(), 0.0);
        assert!((doppler_shift(1.5, 26e9).unwrap() - 130.09).abs() < 0.05);
        assert!(doppler_shift(-1.0, 26e9).is_err());
    }

    #[test]
    fn timing_invariants() {
        let t = SsbTiming::default();
        t.validate().unwrap();
        assert!(SsbTiming {
            burst_duration: 0.03,
            ..t
        }
        .validate()
        .is_err());
    }

    fn line_layout() -> FactoryLayout {
        let r = Rect::new(Point2::new(0.0, -10.0), Point2::new(60.0, 10.0));
        FactoryLayout::new(
            vec![Hall {
                name: "hall".into(),
                rect: r,
                clutter: Clutter::Sparse,
            }],
            Transmitter {
                position: Point3::new(0.0, 0.0, 3.0),
                heading_deg: 0.0,
            },
            1.5,
            vec![VisibilityRegion {
                tag: Visibility::Los,
                polygon: r.to_polygon(),
            }],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn budget_sum_example() {
        // PG -81.7, P/RE -7.79, G 27, LoS correction 1 -> -63.49
        let sum = -81.7 + LinkBudget::default().tx_power_per_re() + 27.0 - 1.0 + 0.0;
        assert!((sum - -63.49).abs() < 0.01);
        let back = sum - LinkBudget::default().tx_power_per_re() - (27.0 - 1.0) - 0.0;
        assert!((back - -81.7).abs() < 1e-9);
    }

    #[test]
    fn floor_cut_example() {
        // pattern floor beam at PG -100 dB lands just under -120 dBm
        let v = -100.0 + LinkBudget::default().tx_power_per_re() + (27.0 - 30.0) - 1.0;
        assert!(v < DEFAULT_NOISE_FLOOR_DBM + 10.0);
        let layout = line_layout();
        let beams = make_config(TxConfig::B);
        let nlos = ModelPreset::MeasFitNlos.model();
        let los = PathGainModel::new(-30.0, 4.5, 0.0).unwrap();
        let synth = Synthesizer::new(
            layout.clone(),
            beams,
            los,
            nlos,
            ShadowingField::zero(layout.bounds()),
            LinkBudget::default(),
        );
        let p = Point2::new(55.0, 0.0);
        let all = synth.rsrp_all(p).unwrap();
        let kept = synth.rsrp_at(p).unwrap();
        assert!(kept.len() < all.len());
        assert!(kept.iter().all(|(_, r)| *r >= DEFAULT_NOISE_FLOOR_DBM));
    }

    #[test]
    fn gains_zero_gives_path_gain() {
        let layout = line_layout();
        let mut beams = make_config(TxConfig::B).restricted_to(&["B-3-4".parse().unwrap()]);
        beams.beams[0].peak_gain = 1e-300;
        let budget = LinkBudget {
            p_c_dbm: 10.0 * 792f64.log10(),
            ..Default::default()
        };
        let los = ModelPreset::MeasFitLos.model();
        let synth = Synthesizer::new(
            layout.clone(),
            beams,
            PathGainModel { sigma: 0.0, ..los },
            los,
            ShadowingField::zero(layout.bounds()),
            budget,
        );
        let p = Point2::new(20.0, 0.0);
        let ang = layout.angles_to_tx(p).unwrap();
        let r = synth.rsrp_all(p).unwrap()[0].1;
        let g = synth
            .beams
            .gain(&synth.beams.beams[0], ang.azimuth_deg, ang.downtilt_deg);
        let expect = los.mean(ang.distance_3d).unwrap() + g - 1.0;
        assert!((r - expect).abs() < 1e-9);
    }

    #[test]
    fn extraction_honours_rx_gain() {
        let layout = line_layout();
        let beams = make_config(TxConfig::B);
        let budget = LinkBudget {
            g_rx_dbi: 2.0,
            ..Default::default()
        };
        let m = ModelPreset::MeasFitLos.model();
        let synth = Synthesizer::new(
            layout.clone(),
            beams.clone(),
            m,
            m,
            ShadowingField::generate(layout.bounds(), 0.5, 10.0, 1.0, 4).unwrap(),
            budget,
        );
        let p = Point2::new(12.0, 3.0);
        let truth = synth.realized_path_gain(p).unwrap();
        for e in synth.rsrp_at(p).unwrap() {
            let pg = extract_path_gain(e, p, &budget, &beams, &layout).unwrap();
            assert!((pg - truth).abs() < 1e-9);
            let ignoring = extract_path_gain(e, p, &LinkBudget::default(), &beams, &layout).unwrap();
            assert!((ignoring - truth - 2.0).abs() < 1e-9);
        }
        let other = make_config(TxConfig::A);
        let bad = ("A-1-1".parse().unwrap(), -70.0);
        assert!(matches!(
            extract_path_gain(bad, p, &budget, &beams, &layout),
            Err(Error::UnknownBeam(_))
        ));
        assert!(other.beam(bad.0).is_some());
    }

    fn campaign(sigma: f64) -> Campaign {
        let layout = line_layout();
        let m = PathGainModel {
            sigma,
            ..ModelPreset::MeasFitLos.model()
        };
        let field = ShadowingField::generate(layout.bounds(), 0.5, 10.0, 1.0, 9).unwrap();
        Campaign::new(
            Synthesizer::new(
                layout,
                make_config(TxConfig::B),
                m,
                m,
                field,
                LinkBudget::default(),
            ),
            SsbTiming::default(),
        )
    }

    #[test]
    fn campaign_counts_and_times() {
        let c = campaign(4.6);
        let r = RouteSpec::new("r", vec![Point2::new(5.0, 0.0), Point2::new(8.0, 0.0)], 1.5).unwrap();
        let t = c.run(&[r.clone(), r], 1).unwrap();
        assert_eq!(t.len(), 202);
        for (k, s) in t.samples.iter().enumerate() {
            assert_eq!(s.time, k as f64 * 0.020);
        }
        assert_eq!(t.metadata.routes.len(), 2);
        assert_eq!(t.route("r").unwrap().len(), 101);
    }

    #[test]
    fn campaign_rejects_route_leaving_layout() {
        let c = campaign(0.0);
        let r = RouteSpec::new("bad", vec![Point2::new(58.0, 0.0), Point2::new(62.0, 0.0)], 1.5).unwrap();
        match c.run(&[r], 1) {
            Err(Error::RouteOutOfLayout { route, sample, .. }) => {
                assert_eq!(route, "bad");
                assert_eq!(sample, 67);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(c.run(&[], 1), Err(Error::Empty(_))));
    }

    #[test]
    fn path_gain_decreases_along_a_ray_without_shadowing() {
        let c = campaign(0.0);
        let mut last = f64::INFINITY;
        for k in 0..50 {
            let p = Point2::new(2.0 + k as f64, 0.0);
            if !c.synth.layout.contains(p) {
                break;
            }
            let pg = c.synth.realized_path_gain(p).unwrap();
            assert!(pg < last);
            last = pg;
        }
    }

    #[test]
    fn csv_round_trip() {
        let c = campaign(4.6);
        let r = RouteSpec::new("r", vec![Point2::new(5.0, -2.0), Point2::new(9.0, 1.0)], 1.5).unwrap();
        let t = c.run(&[r], 3).unwrap();
        let text = t.to_csv_string();
        assert!(text.starts_with("time_s,x_m,y_m,config,row,col,rsrp_dbm\n"));
        let back = MeasurementTrace::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), t.len());
        assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let bad = format!("{TRACE_HEADER}\n0.000,1.000,2.000,B,1,1,-70.00\n0.020,1.000,2.000,B,4,1,-70.00\n");
        match MeasurementTrace::read_csv(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(MeasurementTrace::read_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn negative_zero_is_not_printed() {
        assert_eq!(fixed(-0.0001, 3), "0.000");
        assert_eq!(fixed(-1.5, 2), "-1.50");
    }
}
