#![allow(dead_code)]

use beamfactory::beams::{make_config, BeamGridConfig, TxConfig};
use beamfactory::layout::{
    Clutter, FactoryLayout, Hall, Point2, Point3, Rect, Transmitter, Visibility, VisibilityRegion,
};
use beamfactory::link::{LinkBudget, MeasurementSample, MeasurementTrace, Synthesizer, TraceMetadata};
use beamfactory::propagation::{PathGainModel, ShadowingField};

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect {
    Rect::new(Point2::new(x0, y0), Point2::new(x1, y1))
}

/// One hall with a single visibility class and the transmitter at `tx`.
pub fn single_hall(r: Rect, vis: Visibility, tx: Point3, rx_height: f64) -> FactoryLayout {
    FactoryLayout::new(
        vec![Hall {
            name: "hall".into(),
            rect: r,
            clutter: Clutter::Sparse,
        }],
        Transmitter {
            position: tx,
            heading_deg: 0.0,
        },
        rx_height,
        vec![VisibilityRegion {
            tag: vis,
            polygon: r.to_polygon(),
        }],
        vec![],
    )
    .unwrap()
}

/// Open LoS hall north of a cluttered NLoS hall, transmitter on the west wall.
pub fn two_halls() -> FactoryLayout {
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
        vec![],
    )
    .unwrap()
}

pub fn synth(
    layout: FactoryLayout,
    beams: BeamGridConfig,
    los: PathGainModel,
    nlos: PathGainModel,
    field: ShadowingField,
) -> Synthesizer {
    Synthesizer::new(layout, beams, los, nlos, field, LinkBudget::default())
}

pub fn zero_field_synth(
    layout: FactoryLayout,
    config: TxConfig,
    los: PathGainModel,
    nlos: PathGainModel,
) -> Synthesizer {
    let field = ShadowingField::zero(layout.bounds());
    synth(layout, make_config(config), los, nlos, field)
}

/// Trace of config B bursts given as `(x, y, [(beam, rsrp)])`.
pub fn trace_b(bursts: &[(f64, f64, Vec<(&str, f64)>)]) -> MeasurementTrace {
    MeasurementTrace {
        config: TxConfig::B,
        samples: bursts
            .iter()
            .enumerate()
            .map(|(k, (x, y, e))| MeasurementSample {
                time: k as f64 * 0.02,
                position: Point2::new(*x, *y),
                entries: e.iter().map(|(s, r)| (s.parse().unwrap(), *r)).collect(),
            })
            .collect(),
        metadata: TraceMetadata::default(),
    }
}
