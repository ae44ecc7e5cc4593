//! Gap between the strongest and the i-th strongest beam for both
//! transmitter configurations on the same campaign.

use beamfactory::analysis::{delta_stats, DELTA_REFERENCE};
use beamfactory::beams::TxConfig;
use beamfactory::scenario::ScenarioConfig;

fn main() -> beamfactory::Result<()> {
    let scenario = ScenarioConfig::bundled();
    let probs = [0.25, 0.5, 0.75];
    for config in [TxConfig::A, TxConfig::B] {
        let trace = scenario.with_config(config).run(Some(3))?;
        let stats = delta_stats(&trace, 4)?;
        println!("configuration {config} ({} bursts)", trace.len());
        println!("  P     delta2  delta3  delta4   | measured campaign");
        for (p, row) in stats.percentile_table(&probs) {
            let cells: Vec<String> = row
                .iter()
                .map(|v| v.map_or("     -".into(), |v| format!("{v:6.2}")))
                .collect();
            let reference = DELTA_REFERENCE
                .iter()
                .find(|r| r.config == config && r.probability == p)
                .map(|r| format!("{:.1} {:.1} {:.1}", r.deltas[0], r.deltas[1], r.deltas[2]))
                .unwrap_or_default();
            println!("  {:3.0}%  {}   | {reference}", 100.0 * p, cells.join("  "));
        }
    }
    Ok(())
}
