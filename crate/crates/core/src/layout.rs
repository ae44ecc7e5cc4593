//! Factory geometry: halls, transmitter pose, LoS/NLoS regions, analysis
//! grids and AMR routes.
//!
//! Coordinates are meters with x pointing east and y pointing north.
//! Azimuths are measured from the transmitter panel normal, positive toward
//! north (counter-clockwise seen from above when the panel faces east).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const EDGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn lerp(&self, other: &Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn horizontal(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clutter {
    Sparse,
    Dense,
}

/// Propagation condition between the transmitter and a receiver location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Visibility {
    #[serde(rename = "los", alias = "LoS")]
    Los,
    #[serde(rename = "nlos", alias = "NLoS")]
    Nlos,
}

impl std::fmt::Display for Visibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Visibility::Los => f.write_str("LoS"),
            Visibility::Nlos => f.write_str("NLoS"),
        }
    }
}

/// Axis-aligned rectangle, boundary inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x - EDGE_TOL
            && p.x <= self.max.x + EDGE_TOL
            && p.y >= self.min.y - EDGE_TOL
            && p.y <= self.max.y + EDGE_TOL
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hall {
    pub name: String,
    pub rect: Rect,
    pub clutter: Clutter,
}

/// Simple polygon given by its vertices in order (either orientation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    pub vertices: Vec<Point2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Self {
        Self { vertices }
    }

    fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Point-in-polygon test; points on an edge count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        if self.vertices.len() < 3 {
            return false;
        }
        for (a, b) in self.edges() {
            if on_segment(p, a, b) {
                return true;
            }
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn area(&self) -> f64 {
        self.edges()
            .map(|(a, b)| a.x * b.y - b.x * a.y)
            .sum::<f64>()
            .abs()
            / 2.0
    }
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    let len = a.distance(&b);
    if len == 0.0 {
        return p.distance(&a) <= EDGE_TOL;
    }
    let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross / len).abs() > EDGE_TOL {
        return false;
    }
    let dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    dot >= -EDGE_TOL * len && dot <= len * len + EDGE_TOL * len
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRegion {
    pub tag: Visibility,
    pub polygon: Polygon,
}

/// Region behind a full obstruction (e.g. a pallet rack taller than the
/// transmitter). Points inside are NLoS and suffer an extra loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingRegion {
    pub polygon: Polygon,
    #[serde(default = "default_excess_loss")]
    pub excess_loss_db: f64,
}

fn default_excess_loss() -> f64 {
    BlockingRegion::DEFAULT_EXCESS_LOSS_DB
}

impl BlockingRegion {
    pub const DEFAULT_EXCESS_LOSS_DB: f64 = 15.0;
}

/// Transmitter pose: position (z is the mounting height) and the heading of
/// the panel normal, degrees counter-clockwise from east.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmitter {
    pub position: Point3,
    #[serde(default)]
    pub heading_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxAngles {
    pub azimuth_deg: f64,
    pub downtilt_deg: f64,
    pub distance_3d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactoryLayout {
    halls: Vec<Hall>,
    tx: Transmitter,
    rx_height: f64,
    visibility_regions: Vec<VisibilityRegion>,
    blocking_regions: Vec<BlockingRegion>,
}

pub const DEFAULT_TX_HEIGHT_M: f64 = 3.0;
pub const DEFAULT_RX_HEIGHT_M: f64 = 1.5;

impl FactoryLayout {
    /// Builds a layout and checks its invariants. Visibility coverage is
    /// verified on a 0.5 m probe lattice offset from integer coordinates.
    pub fn new(
        halls: Vec<Hall>,
        tx: Transmitter,
        rx_height: f64,
        visibility_regions: Vec<VisibilityRegion>,
        blocking_regions: Vec<BlockingRegion>,
    ) -> Result<Self> {
        if halls.is_empty() {
            return Err(Error::invalid("layout.halls", "at least one hall required"));
        }
        for (i, h) in halls.iter().enumerate() {
            if !(h.rect.width() > 0.0 && h.rect.height() > 0.0) {
                return Err(Error::invalid(
                    format!("layout.halls[{i}]"),
                    format!("hall '{}' is degenerate", h.name),
                ));
            }
        }
        if !(rx_height > 0.0) {
            return Err(Error::invalid("layout.rx_height", "must be > 0"));
        }
        let tx_foot = tx.position.horizontal();
        if !halls.iter().any(|h| h.rect.contains(tx_foot)) {
            return Err(Error::invalid(
                "layout.tx",
                "transmitter must lie inside or on the boundary of a hall",
            ));
        }
        for (i, r) in visibility_regions.iter().enumerate() {
            if r.polygon.vertices.len() < 3 {
                return Err(Error::invalid(
                    format!("layout.visibility[{i}]"),
                    "polygon needs at least 3 vertices",
                ));
            }
        }
        for (i, b) in blocking_regions.iter().enumerate() {
            if b.polygon.vertices.len() < 3 {
                return Err(Error::invalid(
                    format!("layout.blocking[{i}]"),
                    "polygon needs at least 3 vertices",
                ));
            }
            if !(b.excess_loss_db >= 0.0) {
                return Err(Error::invalid(
                    format!("layout.blocking[{i}].excess_loss_db"),
                    "must be >= 0",
                ));
            }
        }
        let layout = Self {
            halls,
            tx,
            rx_height,
            visibility_regions,
            blocking_regions,
        };
        layout.check_visibility_cover()?;
        Ok(layout)
    }

    fn check_visibility_cover(&self) -> Result<()> {
        const STEP: f64 = 0.5;
        for (hi, hall) in self.halls.iter().enumerate() {
            let r = hall.rect;
            let mut y = r.min.y + STEP * 0.5 + 0.013;
            while y < r.max.y {
                let mut x = r.min.x + STEP * 0.5 + 0.011;
                while x < r.max.x {
                    let p = Point2::new(x, y);
                    let hits = self
                        .visibility_regions
                        .iter()
                        .filter(|v| v.polygon.contains(p))
                        .count();
                    if hits != 1 {
                        return Err(Error::invalid(
                            format!("layout.halls[{hi}]"),
                            format!(
                                "point ({x:.2}, {y:.2}) of hall '{}' is covered by {hits} visibility regions, expected 1",
                                hall.name
                            ),
                        ));
                    }
                    x += STEP;
                }
                y += STEP;
            }
        }
        Ok(())
    }

    pub fn halls(&self) -> &[Hall] {
        &self.halls
    }

    pub fn tx(&self) -> &Transmitter {
        &self.tx
    }

    pub fn rx_height(&self) -> f64 {
        self.rx_height
    }

    pub fn visibility_regions(&self) -> &[VisibilityRegion] {
        &self.visibility_regions
    }

    pub fn blocking_regions(&self) -> &[BlockingRegion] {
        &self.blocking_regions
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.halls.iter().any(|h| h.rect.contains(p))
    }

    pub fn hall_at(&self, p: Point2) -> Option<&Hall> {
        self.halls.iter().find(|h| h.rect.contains(p))
    }

    /// Bounding box of the hall union.
    pub fn bounds(&self) -> Rect {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for h in &self.halls {
            min.x = min.x.min(h.rect.min.x);
            min.y = min.y.min(h.rect.min.y);
            max.x = max.x.max(h.rect.max.x);
            max.y = max.y.max(h.rect.max.y);
        }
        Rect::new(min, max)
    }

    pub fn classify_visibility(&self, p: Point2) -> Result<Visibility> {
        if !self.contains(p) {
            return Err(Error::OutOfLayout { x: p.x, y: p.y });
        }
        if self.blocking_regions.iter().any(|b| b.polygon.contains(p)) {
            return Ok(Visibility::Nlos);
        }
        self.visibility_regions
            .iter()
            .find(|v| v.polygon.contains(p))
            .map(|v| v.tag)
            // Only reachable on a boundary sliver the probe lattice missed.
            .ok_or(Error::OutOfLayout { x: p.x, y: p.y })
    }

    /// Extra loss from blocking regions at `p` (the largest one if several
    /// overlap), in dB.
    pub fn excess_loss_db(&self, p: Point2) -> f64 {
        self.blocking_regions
            .iter()
            .filter(|b| b.polygon.contains(p))
            .map(|b| b.excess_loss_db)
            .fold(0.0, f64::max)
    }

    pub fn angles_to_tx(&self, p: Point2) -> Result<TxAngles> {
        if !self.contains(p) {
            return Err(Error::OutOfLayout { x: p.x, y: p.y });
        }
        let tx = self.tx.position;
        let dx = p.x - tx.x;
        let dy = p.y - tx.y;
        let dz = tx.z - self.rx_height;
        let horizontal = dx.hypot(dy);
        let distance_3d = horizontal.hypot(dz);
        if distance_3d == 0.0 {
            return Err(Error::UndefinedAngle);
        }
        let azimuth_deg = if horizontal == 0.0 {
            0.0
        } else {
            wrap_deg(dy.atan2(dx).to_degrees() - self.tx.heading_deg)
        };
        let downtilt_deg = dz.atan2(horizontal).to_degrees();
        Ok(TxAngles {
            azimuth_deg,
            downtilt_deg,
            distance_3d,
        })
    }

    /// 3D transmitter-receiver range without the containment check.
    pub fn range_3d(&self, p: Point2) -> f64 {
        let tx = self.tx.position;
        (p.x - tx.x).hypot(p.y - tx.y).hypot(tx.z - self.rx_height)
    }
}

/// Wraps an angle to (-180, 180].
pub fn wrap_deg(a: f64) -> f64 {
    let mut w = a % 360.0;
    if w > 180.0 {
        w -= 360.0;
    } else if w <= -180.0 {
        w += 360.0;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point2,
    pub cell_dx: f64,
    pub cell_dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: Point2, cell_dx: f64, cell_dy: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(cell_dx > 0.0 && cell_dy > 0.0) {
            return Err(Error::invalid("grid", "cell sizes must be > 0"));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("grid", "cell counts must be >= 1"));
        }
        Ok(Self {
            origin,
            cell_dx,
            cell_dy,
            nx,
            ny,
        })
    }

    /// Smallest grid anchored at `rect.min` that covers `rect`.
    pub fn covering(rect: Rect, cell_dx: f64, cell_dy: f64) -> Result<Self> {
        let nx = ((rect.width() / cell_dx) - 1e-9).ceil().max(1.0) as usize;
        let ny = ((rect.height() / cell_dy) - 1e-9).ceil().max(1.0) as usize;
        Self::new(rect.min, cell_dx, cell_dy, nx, ny)
    }

    pub fn max_corner(&self) -> Point2 {
        Point2::new(
            self.origin.x + self.cell_dx * self.nx as f64,
            self.origin.y + self.cell_dy * self.ny as f64,
        )
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Floor-division binning. Points on an interior edge go to the higher
    /// cell; the global maximum edge belongs to the last cell.
    pub fn index(&self, p: Point2) -> Result<(usize, usize)> {
        let max = self.max_corner();
        if !(p.x >= self.origin.x && p.x <= max.x && p.y >= self.origin.y && p.y <= max.y) {
            return Err(Error::OutOfGrid { x: p.x, y: p.y });
        }
        let i = (((p.x - self.origin.x) / self.cell_dx).floor() as usize).min(self.nx - 1);
        let j = (((p.y - self.origin.y) / self.cell_dy).floor() as usize).min(self.ny - 1);
        Ok((i, j))
    }

    /// Row-major flat index (`j * nx + i`).
    pub fn flat(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.origin.x + (i as f64 + 0.5) * self.cell_dx,
            self.origin.y + (j as f64 + 0.5) * self.cell_dy,
        )
    }
}

/// Constant-speed polyline route followed by the AMR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSpec {
    #[serde(default)]
    pub name: String,
    pub waypoints: Vec<Point2>,
    pub speed: f64,
    #[serde(default = "default_sample_period")]
    pub sample_period: f64,
}

fn default_sample_period() -> f64 {
    RouteSpec::DEFAULT_SAMPLE_PERIOD_S
}

/// One sampled route position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteSample {
    pub time: f64,
    pub position: Point2,
    /// Distance traveled along the route, meters.
    pub traveled: f64,
}

impl RouteSpec {
    pub const MAX_SPEED_MPS: f64 = 2.0;
    pub const DEFAULT_SAMPLE_PERIOD_S: f64 = 0.020;

    pub fn new(name: impl Into<String>, waypoints: Vec<Point2>, speed: f64) -> Result<Self> {
        let route = Self {
            name: name.into(),
            waypoints,
            speed,
            sample_period: Self::DEFAULT_SAMPLE_PERIOD_S,
        };
        route.validate()?;
        Ok(route)
    }

    pub fn with_sample_period(mut self, period: f64) -> Result<Self> {
        self.sample_period = period;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(Error::invalid("waypoints", "at least 2 waypoints required"));
        }
        if !(self.speed > 0.0 && self.speed <= Self::MAX_SPEED_MPS) {
            return Err(Error::invalid(
                "speed",
                format!("must be in (0, 2] m/s, got {}", self.speed),
            ));
        }
        if !(self.sample_period > 0.0) {
            return Err(Error::invalid(
                "sample_period",
                format!("must be > 0, got {}", self.sample_period),
            ));
        }
        if self.length() == 0.0 {
            return Err(Error::invalid("waypoints", "route has zero length"));
        }
        Ok(())
    }

    /// Waypoints with zero-length segments removed.
    fn collapsed(&self) -> Vec<Point2> {
        let mut out: Vec<Point2> = Vec::with_capacity(self.waypoints.len());
        for &w in &self.waypoints {
            if out.last().is_none_or(|l| l.distance(&w) > 1e-12) {
                out.push(w);
            }
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    pub fn duration(&self) -> f64 {
        self.length() / self.speed
    }

    /// Samples the route every `sample_period` from t = 0. The final
    /// waypoint is always the last sample; it falls off the period grid
    /// only when the duration is not a multiple of the period.
    pub fn sample(&self) -> Result<Vec<RouteSample>> {
        self.validate()?;
        self.sample_every(self.sample_period)
    }

    pub(crate) fn sample_every(&self, period: f64) -> Result<Vec<RouteSample>> {
        let pts = self.collapsed();
        let mut cumulative = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in pts.windows(2) {
            acc += w[0].distance(&w[1]);
            cumulative.push(acc);
        }
        let total = acc;
        let duration = total / self.speed;
        let steps = (duration / period + 1e-9).floor() as usize;

        let locate = |s: f64| -> Point2 {
            let s = s.clamp(0.0, total);
            let seg = match cumulative.binary_search_by(|c| c.total_cmp(&s)) {
                Ok(k) => k.min(pts.len() - 2),
                Err(k) => k.saturating_sub(1).min(pts.len() - 2),
            };
            let len = cumulative[seg + 1] - cumulative[seg];
            let t = if len > 0.0 {
                (s - cumulative[seg]) / len
            } else {
                0.0
            };
            pts[seg].lerp(&pts[seg + 1], t)
        };

        let mut out = Vec::with_capacity(steps + 2);
        for k in 0..=steps {
            let time = k as f64 * period;
            let traveled = (self.speed * time).min(total);
            out.push(RouteSample {
                time,
                position: locate(traveled),
                traveled,
            });
        }
        let last_time = steps as f64 * period;
        if duration - last_time > 1e-9 * duration.max(1.0) {
            out.push(RouteSample {
                time: duration,
                position: *pts.last().expect("validated route"),
                traveled: total,
            });
        } else if let Some(last) = out.last_mut() {
            last.position = *pts.last().expect("validated route");
            last.traveled = total;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect {
        Rect::new(Point2::new(x0, y0), Point2::new(x1, y1))
    }

    fn two_hall_layout() -> FactoryLayout {
        let sparse = rect(0.0, 0.0, 40.0, 15.0);
        let dense = rect(10.0, -25.0, 40.0, 0.0);
        FactoryLayout::new(
            vec![
                Hall {
                    name: "sparse".into(),
                    rect: sparse,
                    clutter: Clutter::Sparse,
                },
                Hall {
                    name: "dense".into(),
                    rect: dense,
                    clutter: Clutter::Dense,
                },
            ],
            Transmitter {
                position: Point3::new(0.0, 5.0, 3.0),
                heading_deg: 0.0,
            },
            1.5,
            vec![
                VisibilityRegion {
                    tag: Visibility::Los,
                    polygon: sparse.to_polygon(),
                },
                VisibilityRegion {
                    tag: Visibility::Nlos,
                    polygon: dense.to_polygon(),
                },
            ],
            vec![BlockingRegion {
                polygon: rect(10.0, -25.0, 40.0, -22.0).to_polygon(),
                excess_loss_db: 15.0,
            }],
        )
        .unwrap()
    }

    fn origin_layout() -> FactoryLayout {
        let r = rect(-10.0, -10.0, 10.0, 10.0);
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
    fn visibility_follows_hall_regions() {
        let l = two_hall_layout();
        assert_eq!(
            l.classify_visibility(Point2::new(20.0, 7.0)).unwrap(),
            Visibility::Los
        );
        assert_eq!(
            l.classify_visibility(Point2::new(20.0, -7.0)).unwrap(),
            Visibility::Nlos
        );
        assert_eq!(
            l.classify_visibility(Point2::new(0.0, 5.0)).unwrap(),
            Visibility::Los
        );
    }

    #[test]
    fn blocking_region_forces_nlos_and_loss() {
        let l = two_hall_layout();
        let p = Point2::new(30.0, -24.0);
        assert_eq!(l.classify_visibility(p).unwrap(), Visibility::Nlos);
        assert_eq!(l.excess_loss_db(p), 15.0);
        assert_eq!(l.excess_loss_db(Point2::new(30.0, -10.0)), 0.0);
    }

    #[test]
    fn outside_layout_is_an_error() {
        let l = two_hall_layout();
        assert!(matches!(
            l.classify_visibility(Point2::new(5.0, -5.0)),
            Err(Error::OutOfLayout { .. })
        ));
    }

    #[test]
    fn uncovered_hall_is_rejected() {
        let r = rect(0.0, 0.0, 10.0, 10.0);
        let half = rect(0.0, 0.0, 5.0, 10.0);
        let err = FactoryLayout::new(
            vec![Hall {
                name: "h".into(),
                rect: r,
                clutter: Clutter::Sparse,
            }],
            Transmitter {
                position: Point3::new(0.0, 5.0, 3.0),
                heading_deg: 0.0,
            },
            1.5,
            vec![VisibilityRegion {
                tag: Visibility::Los,
                polygon: half.to_polygon(),
            }],
            vec![],
        );
        assert!(err.is_err());
    }

    #[test]
    fn angles_examples() {
        let l = origin_layout();
        let a = l.angles_to_tx(Point2::new(3.0, 4.0)).unwrap();
        assert!((a.distance_3d - 5.220).abs() < 5e-4);
        let b = l.angles_to_tx(Point2::new(5.0, 0.0)).unwrap();
        assert!((b.downtilt_deg - 16.70).abs() < 5e-3);
        assert_eq!(b.azimuth_deg, 0.0);
        let north = l.angles_to_tx(Point2::new(0.0, 5.0)).unwrap();
        assert!((north.azimuth_deg - 90.0).abs() < 1e-12);
    }

    #[test]
    fn angle_undefined_without_height_offset() {
        let r = rect(-1.0, -1.0, 1.0, 1.0);
        let l = FactoryLayout::new(
            vec![Hall {
                name: "h".into(),
                rect: r,
                clutter: Clutter::Sparse,
            }],
            Transmitter {
                position: Point3::new(0.0, 0.0, 1.5),
                heading_deg: 0.0,
            },
            1.5,
            vec![VisibilityRegion {
                tag: Visibility::Los,
                polygon: r.to_polygon(),
            }],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            l.angles_to_tx(Point2::new(0.0, 0.0)),
            Err(Error::UndefinedAngle)
        ));
    }

    #[test]
    fn grid_index_examples() {
        let g = GridSpec::new(Point2::new(0.0, 0.0), 1.0, 1.0, 5, 5).unwrap();
        assert_eq!(g.index(Point2::new(0.4, 2.7)).unwrap(), (0, 2));
        assert_eq!(g.index(Point2::new(1.0, 0.0)).unwrap(), (1, 0));
        assert_eq!(g.index(Point2::new(5.0, 5.0)).unwrap(), (4, 4));
        assert!(matches!(
            g.index(Point2::new(-0.1, 0.0)),
            Err(Error::OutOfGrid { .. })
        ));
    }

    #[test]
    fn route_three_meters() {
        let r = RouteSpec::new("r", vec![Point2::new(0.0, 0.0), Point2::new(3.0, 0.0)], 1.5).unwrap();
        let s = r.sample().unwrap();
        assert_eq!(s.len(), 101);
        assert!((s.last().unwrap().time - 2.0).abs() < 1e-12);
        assert!((s[1].position.x - 0.030).abs() < 1e-12);
        assert_eq!(s.last().unwrap().position, Point2::new(3.0, 0.0));
    }

    #[test]
    fn route_endpoints_only() {
        let r = RouteSpec::new("r", vec![Point2::new(0.0, 0.0), Point2::new(1.2, 0.0)], 1.2)
            .unwrap()
            .with_sample_period(1.0)
            .unwrap();
        let s = r.sample().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].position, Point2::new(0.0, 0.0));
        assert_eq!(s[1].position, Point2::new(1.2, 0.0));
    }

    #[test]
    fn duplicate_waypoint_collapsed() {
        let a = RouteSpec::new(
            "a",
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.5, 0.0),
                Point2::new(3.0, 0.0),
            ],
            1.5,
        )
        .unwrap();
        let b = RouteSpec::new(
            "b",
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.5, 0.0),
                Point2::new(1.5, 0.0),
                Point2::new(3.0, 0.0),
            ],
            1.5,
        )
        .unwrap();
        let sa = a.sample().unwrap();
        let sb = b.sample().unwrap();
        assert_eq!(sa.len(), sb.len());
        for (x, y) in sa.iter().zip(&sb) {
            assert!(x.position.distance(&y.position) < 1e-12);
        }
    }

    #[test]
    fn route_rejects_bad_speed() {
        let w = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        assert!(RouteSpec::new("r", w.clone(), 0.0).is_err());
        assert!(RouteSpec::new("r", w.clone(), -1.0).is_err());
        assert!(RouteSpec::new("r", w, 2.5).is_err());
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_deg(180.0), 180.0);
        assert_eq!(wrap_deg(-180.0), 180.0);
        assert_eq!(wrap_deg(270.0), -90.0);
    }
}
