//! SSB beam grids for the two transmitter configurations and the per-beam
//! radiation pattern.
//!
//! Boresights are spread uniformly over each row's azimuth span with a
//! half-step offset at the edges. Published beam diagrams are graphical only,
//! so per-beam angles are an approximation; counts, spans and row downtilts
//! are exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TxConfig {
    A,
    B,
}

impl TxConfig {
    /// Beams per row, top row first.
    pub fn row_counts(self) -> &'static [usize] {
        match self {
            TxConfig::A => &[16, 15, 1],
            TxConfig::B => &[10, 10, 7],
        }
    }

    /// Row downtilts in degrees, positive below the horizon.
    pub fn row_downtilts(self) -> &'static [f64] {
        match self {
            TxConfig::A => &[0.0, 7.0, 15.0],
            TxConfig::B => &[-7.0, 0.0, 8.0],
        }
    }

    /// Horizontal scanning range `(min, max)` in degrees.
    pub fn azimuth_range(self) -> (f64, f64) {
        match self {
            TxConfig::A => (-30.0, 90.0),
            TxConfig::B => (-75.0, 75.0),
        }
    }

    pub fn beam_count(self) -> usize {
        self.row_counts().iter().sum()
    }
}

impl fmt::Display for TxConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TxConfig::A => "A",
            TxConfig::B => "B",
        })
    }
}

impl FromStr for TxConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(TxConfig::A),
            "B" | "b" => Ok(TxConfig::B),
            other => Err(Error::invalid(
                "config",
                format!("expected A or B, got '{other}'"),
            )),
        }
    }
}

/// SSB identity: configuration, row (top to bottom) and column (left to
/// right), both 1-based. Rendered as `B-3-4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SsbId {
    pub config: TxConfig,
    pub row: u8,
    pub col: u8,
}

impl SsbId {
    pub fn new(config: TxConfig, row: u8, col: u8) -> Result<Self> {
        let id = Self { config, row, col };
        if id.is_valid() {
            Ok(id)
        } else {
            Err(Error::UnknownBeam(id.to_string()))
        }
    }

    pub fn is_valid(&self) -> bool {
        let rows = self.config.row_counts();
        self.row >= 1
            && (self.row as usize) <= rows.len()
            && self.col >= 1
            && (self.col as usize) <= rows[self.row as usize - 1]
    }

    /// Position of this beam in the configuration's row-major beam list.
    pub fn index(&self) -> usize {
        let rows = self.config.row_counts();
        rows[..self.row as usize - 1].iter().sum::<usize>() + self.col as usize - 1
    }
}

impl fmt::Display for SsbId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.config, self.row, self.col)
    }
}

impl FromStr for SsbId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split('-');
        let (Some(c), Some(r), Some(k), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(Error::UnknownBeam(s.to_string()));
        };
        let config: TxConfig = c.parse()?;
        let row: u8 = r.parse().map_err(|_| Error::UnknownBeam(s.to_string()))?;
        let col: u8 = k.parse().map_err(|_| Error::UnknownBeam(s.to_string()))?;
        SsbId::new(config, row, col)
    }
}

pub const DEFAULT_HPBW_AZ_DEG: f64 = 10.0;
pub const DEFAULT_HPBW_EL_DEG: f64 = 8.0;
/// Peak gain used when none is configured; the elliptical-aperture
/// approximation at the default beamwidths gives 27.1 dBi.
pub const DEFAULT_PEAK_GAIN_DBI: f64 = 27.0;
pub const DEFAULT_PATTERN_FLOOR_DB: f64 = 30.0;

pub const HPBW_AZ_RANGE: (f64, f64) = (8.0, 12.0);
pub const HPBW_EL_RANGE: (f64, f64) = (6.0, 10.0);

/// Directivity of an elliptical aperture with the given half-power
/// beamwidths, dBi.
pub fn aperture_directivity_dbi(hpbw_az: f64, hpbw_el: f64) -> f64 {
    10.0 * (41_253.0 / (hpbw_az * hpbw_el)).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub id: SsbId,
    pub boresight_az: f64,
    pub boresight_downtilt: f64,
    pub hpbw_az: f64,
    pub hpbw_el: f64,
    pub peak_gain: f64,
}

impl Beam {
    /// Gaussian-in-dB pattern floored at `peak_gain - floor_db`.
    pub fn gain(&self, az: f64, downtilt: f64, floor_db: f64) -> f64 {
        let daz = crate::layout::wrap_deg(az - self.boresight_az) / self.hpbw_az;
        let del = (downtilt - self.boresight_downtilt) / self.hpbw_el;
        let atten = (12.0 * (daz * daz + del * del)).min(floor_db);
        self.peak_gain - atten
    }

    fn validate(&self) -> Result<()> {
        let field = format!("beams.{}", self.id);
        if !(HPBW_AZ_RANGE.0..=HPBW_AZ_RANGE.1).contains(&self.hpbw_az) {
            return Err(Error::invalid(
                field,
                format!("hpbw_az {} outside [8, 12]", self.hpbw_az),
            ));
        }
        if !(HPBW_EL_RANGE.0..=HPBW_EL_RANGE.1).contains(&self.hpbw_el) {
            return Err(Error::invalid(
                field,
                format!("hpbw_el {} outside [6, 10]", self.hpbw_el),
            ));
        }
        if !(self.peak_gain > 0.0) {
            return Err(Error::invalid(field, "peak_gain must be > 0"));
        }
        Ok(())
    }
}

/// Per-row pattern overrides, applied on top of the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RowPattern {
    pub hpbw_az: Option<f64>,
    pub hpbw_el: Option<f64>,
    pub peak_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamGridConfig {
    pub config: TxConfig,
    pub beams: Vec<Beam>,
    pub rows: Vec<usize>,
    pub az_min: f64,
    pub az_max: f64,
    pub downtilts: Vec<f64>,
    pub floor_db: f64,
}

impl BeamGridConfig {
    pub fn new(which: TxConfig) -> Self {
        Self::with_patterns(which, &[]).expect("default patterns are valid")
    }

    /// Builds the grid with optional per-row overrides (index = row - 1).
    pub fn with_patterns(which: TxConfig, rows: &[RowPattern]) -> Result<Self> {
        let counts = which.row_counts();
        let tilts = which.row_downtilts();
        let (az_min, az_max) = which.azimuth_range();
        let span = az_max - az_min;
        let mut beams = Vec::with_capacity(which.beam_count());
        for (r, (&count, &tilt)) in counts.iter().zip(tilts).enumerate() {
            let ov = rows.get(r).copied().unwrap_or_default();
            for k in 0..count {
                let beam = Beam {
                    id: SsbId {
                        config: which,
                        row: r as u8 + 1,
                        col: k as u8 + 1,
                    },
                    boresight_az: az_min + span * (k as f64 + 0.5) / count as f64,
                    boresight_downtilt: tilt,
                    hpbw_az: ov.hpbw_az.unwrap_or(DEFAULT_HPBW_AZ_DEG),
                    hpbw_el: ov.hpbw_el.unwrap_or(DEFAULT_HPBW_EL_DEG),
                    peak_gain: ov.peak_gain.unwrap_or(DEFAULT_PEAK_GAIN_DBI),
                };
                beam.validate()?;
                beams.push(beam);
            }
        }
        Ok(Self {
            config: which,
            beams,
            rows: counts.to_vec(),
            az_min,
            az_max,
            downtilts: tilts.to_vec(),
            floor_db: DEFAULT_PATTERN_FLOOR_DB,
        })
    }

    /// Keeps only the listed beams (used to build reduced test scenes).
    pub fn restricted_to(&self, ids: &[SsbId]) -> Self {
        let mut out = self.clone();
        out.beams.retain(|b| ids.contains(&b.id));
        out
    }

    pub fn az_span(&self) -> f64 {
        self.az_max - self.az_min
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn beam(&self, id: SsbId) -> Option<&Beam> {
        self.beams.iter().find(|b| b.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = SsbId> + '_ {
        self.beams.iter().map(|b| b.id)
    }

    pub fn gain(&self, beam: &Beam, az: f64, downtilt: f64) -> f64 {
        beam.gain(az, downtilt, self.floor_db)
    }

    /// Beam with the highest pattern gain toward `(az, downtilt)`. Gains
    /// within 1e-9 dB tie and go to the lowest `(row, col)`.
    pub fn strongest_free_space(&self, az: f64, downtilt: f64) -> Option<SsbId> {
        let mut best: Option<(SsbId, f64)> = None;
        for b in &self.beams {
            let g = self.gain(b, az, downtilt);
            best = match best {
                None => Some((b.id, g)),
                Some((id, bg)) if g > bg + 1e-9 || ((g - bg).abs() <= 1e-9 && b.id < id) => Some((b.id, g)),
                keep => keep,
            };
        }
        best.map(|(id, _)| id)
    }
}

pub fn make_config(which: TxConfig) -> BeamGridConfig {
    BeamGridConfig::new(which)
}
