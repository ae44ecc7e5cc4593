//! Layout of the two transmitter configurations and the beam that serves
//! a few directions in free space.

use beamfactory::beams::{make_config, TxConfig};

fn main() {
    for which in [TxConfig::A, TxConfig::B] {
        let grid = make_config(which);
        let (lo, hi) = which.azimuth_range();
        println!(
            "configuration {which}: {} beams, azimuth [{lo}, {hi}]",
            grid.len()
        );
        for (row, (&count, &tilt)) in grid.rows.iter().zip(&grid.downtilts).enumerate() {
            let az: Vec<String> = grid
                .beams
                .iter()
                .filter(|b| b.id.row as usize == row + 1)
                .map(|b| format!("{:.1}", b.boresight_az))
                .collect();
            println!(
                "  row {} ({count:2} beams, downtilt {tilt:+.0}): {}",
                row + 1,
                az.join(" ")
            );
        }
        for (az, tilt) in [(0.0, 0.0), (45.0, 5.0), (-70.0, 10.0), (100.0, 0.0)] {
            let id = grid.strongest_free_space(az, tilt).expect("non-empty grid");
            let gain = grid.gain(grid.beam(id).unwrap(), az, tilt);
            println!("  toward az {az:+6.1}, tilt {tilt:+4.1}: {id} at {gain:.1} dBi");
        }
        println!();
    }
}
