//! Chooses which SSB beams to keep on the bundled campaign with the
//! genetic algorithm, the density-based heuristic and exhaustive search.

use std::time::Instant;

use beamfactory::scenario::ScenarioConfig;
use beamfactory::switchoff::{
    build_problem, feasible_count, solve_dbscan, solve_exhaustive, solve_ga, DbscanParams, GaParams,
    DEGRADATION_REFERENCE, EXHAUSTIVE_LIMIT,
};

fn main() -> beamfactory::Result<()> {
    let scenario = ScenarioConfig::bundled();
    let trace = scenario.run(None)?;
    let grid = scenario.grid()?;
    let base = build_problem(&trace, &grid, 1)?;
    println!(
        "{} beams, {} cells, {} bursts",
        base.n_beams(),
        base.n_cells(),
        base.n_bursts()
    );

    for xi in [1, 2, 3, 5, 10] {
        let mut p = base.clone();
        p.xi = xi;
        let t = Instant::now();
        let ga = solve_ga(&p, &GaParams::default(), 1)?;
        let ga_s = t.elapsed().as_secs_f64();
        let db = solve_dbscan(&p, &DbscanParams::default())?;
        print!(
            "xi {xi:2}: ga {:6.3} dB ({ga_s:.2} s)  dbscan {:6.3} dB",
            ga.objective, db.objective
        );
        if feasible_count(p.n_beams(), xi) <= EXHAUSTIVE_LIMIT {
            let ex = solve_exhaustive(&p)?;
            print!("  exhaustive {:6.3} dB", ex.objective);
        }
        if let Some((_, r)) = DEGRADATION_REFERENCE.iter().find(|r| r.0 == xi) {
            print!("  (measured campaign {r:.1} dB)");
        }
        println!();
        let kept: Vec<String> = ga.mask.enabled().map(|k| p.beams[k].to_string()).collect();
        println!("        kept: {}", kept.join(" "));
    }
    Ok(())
}
