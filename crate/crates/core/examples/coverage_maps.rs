//! Simulates the bundled factory, averages RSRP on a 1 m grid and reports
//! coverage probability against range.

use beamfactory::analysis::{coverage_probability, local_average, AveragingDomain};
use beamfactory::scenario::ScenarioConfig;

fn main() -> beamfactory::Result<()> {
    let scenario = ScenarioConfig::bundled();
    let trace = scenario.run(None)?;
    let layout = scenario.layout()?;
    let grid = scenario.grid()?;
    let avg = local_average(&trace, &grid, AveragingDomain::Db)?;
    println!(
        "{} bursts over {} of {} cells",
        trace.len(),
        avg.populated(),
        grid.n_cells()
    );

    // coarse text map, north up, one character per 2 x 2 m block
    let shade = |v: f64| match v {
        v if v >= -70.0 => '#',
        v if v >= -80.0 => '+',
        v if v >= -90.0 => '.',
        _ => '-',
    };
    for j in (0..grid.ny).rev().step_by(2) {
        let row: String = (0..grid.nx)
            .step_by(2)
            .map(|i| {
                let block = [
                    (i, j),
                    (i + 1, j),
                    (i, j.saturating_sub(1)),
                    (i + 1, j.saturating_sub(1)),
                ];
                block
                    .iter()
                    .filter(|&&(a, _)| a < grid.nx)
                    .find_map(|&(a, b)| avg.get(a, b))
                    .map_or(' ', |c| shade(c.mean))
            })
            .collect();
        println!("  |{row}|");
    }
    println!("  # >= -70 dBm, + >= -80, . >= -90, - below");

    let bins: Vec<(f64, f64)> = (0..9)
        .map(|k| (1.0 + 5.0 * k as f64, 6.0 + 5.0 * k as f64))
        .collect();
    for threshold in [-100.0, -85.0] {
        println!("P(RSRP < {threshold} dBm):");
        for b in coverage_probability(&trace, threshold, &bins, &layout)? {
            if let Some(p) = b.probability {
                println!(
                    "  {:4.0}-{:<4.0} m  {:5.3}  ({} bursts)",
                    b.d_lo, b.d_hi, p, b.samples
                );
            }
        }
    }
    Ok(())
}
