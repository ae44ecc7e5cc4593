//! TOML scenario files: layout, beam configuration, propagation models,
//! link budget, shadowing, routes and seed.
//!
//! ```toml
//! config = "B"
//! seed = 7
//!
//! [layout]
//! tx = { x = 0.0, y = 5.0, z = 3.0 }
//!
//! [[layout.halls]]
//! name = "sparse"
//! min = [0.0, 0.0]
//! max = [40.0, 15.0]
//! clutter = "sparse"
//! visibility = "los"
//!
//! [propagation]
//! los = "MeasFit-LoS"
//! nlos = { pg_1m = -39.6, n = 4.4, sigma = 5.8 }
//!
//! [[routes]]
//! waypoints = [[1.0, 2.5], [39.0, 2.5]]
//! speed = 1.5
//! ```
//!
//! Errors name the offending field path and, where it can be located, the
//! source line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beams::{BeamGridConfig, RowPattern, TxConfig};
use crate::layout::{
    BlockingRegion, Clutter, FactoryLayout, GridSpec, Hall, Point2, Point3, Polygon, Rect, RouteSpec,
    Transmitter, Visibility, VisibilityRegion, DEFAULT_RX_HEIGHT_M,
};
use crate::link::{Campaign, LinkBudget, MeasurementTrace, SsbTiming, Synthesizer, DEFAULT_NOISE_FLOOR_DBM};
use crate::propagation::{FastFading, ModelPreset, PathGainModel, ShadowingField};
use crate::{Error, Result};

/// The bundled two-hall factory scenario.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HallInput {
    pub name: String,
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub clutter: Clutter,
    /// Makes the whole hall one visibility region.
    #[serde(default)]
    pub visibility: Option<Visibility>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionInput {
    pub tag: Visibility,
    pub polygon: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockingInput {
    pub polygon: Vec<[f64; 2]>,
    #[serde(default = "default_excess")]
    pub excess_loss_db: f64,
}

fn default_excess() -> f64 {
    BlockingRegion::DEFAULT_EXCESS_LOSS_DB
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxInput {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(default)]
    pub heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutInput {
    pub tx: TxInput,
    #[serde(default = "default_rx_height")]
    pub rx_height: f64,
    pub halls: Vec<HallInput>,
    /// Explicit visibility polygons; replace the per-hall tags when given.
    #[serde(default)]
    pub visibility: Vec<RegionInput>,
    #[serde(default)]
    pub blocking: Vec<BlockingInput>,
}

fn default_rx_height() -> f64 {
    DEFAULT_RX_HEIGHT_M
}

/// A preset name or an explicit `(pg_1m, n, sigma)` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Preset(String),
    Custom { pg_1m: f64, n: f64, sigma: f64 },
}

impl ModelSpec {
    pub fn resolve(&self) -> Result<(PathGainModel, String)> {
        match self {
            ModelSpec::Preset(name) => {
                let p: ModelPreset = name.parse()?;
                Ok((p.model(), p.name().to_string()))
            }
            ModelSpec::Custom { pg_1m, n, sigma } => {
                Ok((PathGainModel::new(*pg_1m, *n, *sigma)?, "custom".into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationInput {
    pub los: ModelSpec,
    pub nlos: ModelSpec,
}

impl Default for PropagationInput {
    fn default() -> Self {
        Self {
            los: ModelSpec::Preset(ModelPreset::MeasFitLos.name().into()),
            nlos: ModelSpec::Preset(ModelPreset::MeasFitNlos.name().into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowingInput {
    pub enabled: bool,
    pub decorrelation_m: f64,
    pub step_m: f64,
}

impl Default for ShadowingInput {
    fn default() -> Self {
        Self {
            enabled: true,
            decorrelation_m: ShadowingField::DEFAULT_DECORRELATION_M,
            step_m: ShadowingField::DEFAULT_STEP_M,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FadingInput {
    pub std_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridInput {
    pub dx: f64,
    pub dy: f64,
}

impl Default for GridInput {
    fn default() -> Self {
        Self { dx: 1.0, dy: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamsInput {
    /// Per-row pattern overrides, first entry is row 1.
    pub rows: Vec<RowPattern>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteInput {
    #[serde(default)]
    pub name: String,
    pub waypoints: Vec<[f64; 2]>,
    pub speed: f64,
    #[serde(default)]
    pub sample_period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub config: TxConfig,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the command line and `BEAMFACTORY_OUT` override it.
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub layout: LayoutInput,
    #[serde(default)]
    pub beams: BeamsInput,
    #[serde(default)]
    pub propagation: PropagationInput,
    #[serde(default)]
    pub shadowing: ShadowingInput,
    #[serde(default)]
    pub fading: FadingInput,
    #[serde(default)]
    pub link: LinkBudget,
    #[serde(default)]
    pub timing: SsbTiming,
    #[serde(default)]
    pub grid: GridInput,
    #[serde(default = "default_floor")]
    pub noise_floor_dbm: f64,
    pub routes: Vec<RouteInput>,
}

fn default_floor() -> f64 {
    DEFAULT_NOISE_FLOOR_DBM
}

fn point(p: [f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

fn polygon(v: &[[f64; 2]]) -> Polygon {
    Polygon::new(v.iter().copied().map(point).collect())
}

/// Line (1-based) of the `k`-th `[[header]]` table in `text`.
fn table_line(text: &str, header: &str, k: usize) -> Option<usize> {
    let tag = format!("[[{header}]]");
    text.lines()
        .enumerate()
        .filter(|(_, l)| l.trim() == tag)
        .nth(k)
        .map(|(n, _)| n + 1)
}

fn scenario_error(path: &str, reason: impl std::fmt::Display, line: Option<usize>) -> Error {
    match line {
        Some(l) => Error::Scenario(format!("line {l}: {path}: {reason}")),
        None => Error::Scenario(format!("{path}: {reason}")),
    }
}

impl ScenarioConfig {
    /// The bundled default scenario.
    pub fn bundled() -> Self {
        Self::from_toml(DEFAULT_SCENARIO).expect("bundled scenario is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1));
            let msg = e.message().trim().to_string();
            match line {
                Some(l) => Error::Scenario(format!("line {l}: {msg}")),
                None => Error::Scenario(msg),
            }
        })?;
        cfg.validate_with_source(Some(text))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_source(None)
    }

    fn validate_with_source(&self, text: Option<&str>) -> Result<()> {
        let line = |header: &str, k: usize| text.and_then(|t| table_line(t, header, k));
        for (k, r) in self.routes.iter().enumerate() {
            let path = format!("routes[{k}]");
            if !(r.speed > 0.0 && r.speed <= RouteSpec::MAX_SPEED_MPS) {
                return Err(scenario_error(
                    &format!("{path}.speed"),
                    format!("{} outside (0, {}] m/s", r.speed, RouteSpec::MAX_SPEED_MPS),
                    line("routes", k),
                ));
            }
            if r.waypoints.len() < 2 {
                return Err(scenario_error(
                    &format!("{path}.waypoints"),
                    "at least 2 waypoints required",
                    line("routes", k),
                ));
            }
            if let Some(p) = r.sample_period {
                if !(p > 0.0) {
                    return Err(scenario_error(
                        &format!("{path}.sample_period"),
                        "must be > 0",
                        line("routes", k),
                    ));
                }
            }
        }
        if self.routes.is_empty() {
            return Err(scenario_error("routes", "at least one route required", None));
        }
        for (k, h) in self.layout.halls.iter().enumerate() {
            if !(h.max[0] > h.min[0] && h.max[1] > h.min[1]) {
                return Err(scenario_error(
                    &format!("layout.halls[{k}]"),
                    "max must exceed min on both axes",
                    line("layout.halls", k),
                ));
            }
            if self.layout.visibility.is_empty() && h.visibility.is_none() {
                return Err(scenario_error(
                    &format!("layout.halls[{k}].visibility"),
                    "missing (or give [[layout.visibility]] polygons)",
                    line("layout.halls", k),
                ));
            }
        }
        for (name, spec) in [
            ("propagation.los", &self.propagation.los),
            ("propagation.nlos", &self.propagation.nlos),
        ] {
            spec.resolve().map_err(|e| scenario_error(name, e, None))?;
        }
        self.link
            .validate()
            .map_err(|e| scenario_error("link", e, None))?;
        self.timing
            .validate()
            .map_err(|e| scenario_error("timing", e, None))?;
        if !(self.grid.dx > 0.0 && self.grid.dy > 0.0) {
            return Err(scenario_error("grid", "dx and dy must be > 0", None));
        }
        if !(self.fading.std_db >= 0.0) {
            return Err(scenario_error("fading.std_db", "must be >= 0", None));
        }
        let s = self.shadowing;
        if !(s.step_m > 0.0) {
            return Err(scenario_error("shadowing.step_m", "must be > 0", None));
        }
        if !(s.decorrelation_m >= 0.0) {
            return Err(scenario_error("shadowing.decorrelation_m", "must be >= 0", None));
        }
        BeamGridConfig::with_patterns(self.config, &self.beams.rows)
            .map_err(|e| scenario_error("beams.rows", e, None))?;
        self.layout().map_err(|e| match e {
            Error::Invalid { field, reason } => scenario_error(&field, reason, None),
            other => other,
        })?;
        Ok(())
    }

    /// Same scenario with another transmitter configuration.
    pub fn with_config(&self, config: TxConfig) -> Self {
        let mut out = self.clone();
        out.config = config;
        out
    }

    pub fn layout(&self) -> Result<FactoryLayout> {
        let l = &self.layout;
        let halls: Vec<Hall> = l
            .halls
            .iter()
            .map(|h| Hall {
                name: h.name.clone(),
                rect: Rect::new(point(h.min), point(h.max)),
                clutter: h.clutter,
            })
            .collect();
        let regions: Vec<VisibilityRegion> = if l.visibility.is_empty() {
            l.halls
                .iter()
                .zip(&halls)
                .filter_map(|(input, hall)| {
                    input.visibility.map(|tag| VisibilityRegion {
                        tag,
                        polygon: hall.rect.to_polygon(),
                    })
                })
                .collect()
        } else {
            l.visibility
                .iter()
                .map(|r| VisibilityRegion {
                    tag: r.tag,
                    polygon: polygon(&r.polygon),
                })
                .collect()
        };
        let blocking = l
            .blocking
            .iter()
            .map(|b| BlockingRegion {
                polygon: polygon(&b.polygon),
                excess_loss_db: b.excess_loss_db,
            })
            .collect();
        FactoryLayout::new(
            halls,
            Transmitter {
                position: Point3::new(l.tx.x, l.tx.y, l.tx.z),
                heading_deg: l.tx.heading_deg,
            },
            l.rx_height,
            regions,
            blocking,
        )
    }

    pub fn beam_grid(&self) -> Result<BeamGridConfig> {
        BeamGridConfig::with_patterns(self.config, &self.beams.rows)
    }

    pub fn routes(&self) -> Result<Vec<RouteSpec>> {
        self.routes
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let name = if r.name.is_empty() {
                    format!("route{k}")
                } else {
                    r.name.clone()
                };
                let route = RouteSpec::new(name, r.waypoints.iter().copied().map(point).collect(), r.speed)
                    .map_err(|e| scenario_error(&format!("routes[{k}]"), e, None))?;
                match r.sample_period {
                    Some(p) => route.with_sample_period(p),
                    None => Ok(route),
                }
            })
            .collect()
    }

    /// Analysis grid covering the layout bounds.
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::covering(self.layout()?.bounds(), self.grid.dx, self.grid.dy)
    }

    pub fn synthesizer(&self, seed: u64) -> Result<Synthesizer> {
        let layout = self.layout()?;
        let (los, _) = self.propagation.los.resolve()?;
        let (nlos, _) = self.propagation.nlos.resolve()?;
        let extent = layout.bounds();
        let s = self.shadowing;
        let field = if s.enabled {
            ShadowingField::generate(extent, s.step_m, s.decorrelation_m, 1.0, seed)?
        } else {
            ShadowingField::zero(extent)
        };
        let fading = if self.fading.std_db > 0.0 {
            FastFading::new(self.fading.std_db, self.link.carrier_hz, seed.wrapping_add(1))?
        } else {
            FastFading::off()
        };
        Ok(
            Synthesizer::new(layout, self.beam_grid()?, los, nlos, field, self.link)
                .with_fading(fading)
                .with_noise_floor(self.noise_floor_dbm),
        )
    }

    pub fn campaign(&self, seed: u64) -> Result<Campaign> {
        let (_, los_name) = self.propagation.los.resolve()?;
        let (_, nlos_name) = self.propagation.nlos.resolve()?;
        Ok(Campaign::new(self.synthesizer(seed)?, self.timing).with_model_names(los_name, nlos_name))
    }

    /// Runs the whole campaign with `seed` (the scenario seed if `None`).
    pub fn run(&self, seed: Option<u64>) -> Result<MeasurementTrace> {
        let seed = seed.unwrap_or(self.seed);
        self.campaign(seed)?.run(&self.routes()?, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_parses() {
        let s = ScenarioConfig::bundled();
        assert_eq!(s.config, TxConfig::B);
        assert_eq!(s.routes.len(), 7);
        let l = s.layout().unwrap();
        assert_eq!(l.halls().len(), 2);
        assert_eq!(
            l.classify_visibility(Point2::new(20.0, -10.0)).unwrap(),
            Visibility::Nlos
        );
        let g = s.grid().unwrap();
        assert_eq!((g.nx, g.ny), (40, 40));
    }

    #[test]
    fn round_trips_through_toml() {
        let s = ScenarioConfig::bundled();
        assert_eq!(ScenarioConfig::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn negative_speed_names_field_and_line() {
        let text = DEFAULT_SCENARIO.replacen("speed = 1.5", "speed = -1.0", 2);
        let err = ScenarioConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("routes[0].speed"), "{err}");
        let expected = table_line(&text, "routes", 0).unwrap();
        assert!(err.contains(&format!("line {expected}")), "{err}");
    }

    #[test]
    fn unknown_key_has_line() {
        let text = format!("{DEFAULT_SCENARIO}\nbogus = 1\n");
        let err = ScenarioConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn unknown_preset_rejected() {
        let text = DEFAULT_SCENARIO.replace("\"MeasFit-NLoS\"", "\"Nope\"");
        let err = ScenarioConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("propagation.nlos"), "{err}");
    }

    #[test]
    fn custom_model_triple() {
        let text = DEFAULT_SCENARIO.replace("\"MeasFit-NLoS\"", "{ pg_1m = -40.0, n = 4.0, sigma = 6.0 }");
        let s = ScenarioConfig::from_toml(&text).unwrap();
        let (m, name) = s.propagation.nlos.resolve().unwrap();
        assert_eq!(
            (m.pg_1m, m.n, m.sigma, name.as_str()),
            (-40.0, 4.0, 6.0, "custom")
        );
    }
}
