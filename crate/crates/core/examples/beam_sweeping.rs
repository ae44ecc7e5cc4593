//! Follows one route of the bundled campaign and reports where the
//! dominant beam changes after smoothing over 40 wavelengths.

use beamfactory::analysis::route_smoothing;
use beamfactory::scenario::ScenarioConfig;

fn main() -> beamfactory::Result<()> {
    let scenario = ScenarioConfig::bundled();
    let trace = scenario.run(None)?;
    let layout = scenario.layout()?;
    let route = "sparse-middle";
    let samples = trace.route(route).expect("bundled route");
    let smoothed = route_smoothing(samples, &layout, 40.0, scenario.link.carrier_hz)?;
    println!(
        "{route}: {} bursts, window {:.3} m",
        samples.len(),
        smoothed.window_m
    );

    let mut last = None;
    for (p, dom) in smoothed.points.iter().zip(smoothed.dominant()) {
        if dom != last {
            let rsrp = dom
                .and_then(|d| p.beams.iter().find(|b| b.0 == d))
                .map_or(f64::NAN, |b| b.1);
            let name = dom.map_or("-".to_string(), |d| d.to_string());
            println!(
                "  {:6.2} m  azimuth {:+6.1}  -> {name:<7} {rsrp:7.2} dBm",
                p.traveled, p.azimuth_deg
            );
            last = dom;
        }
    }
    Ok(())
}
