//! Fits slope-intercept models to synthetic drive-test samples drawn from
//! each preset and scores the presets against one sample set.

use beamfactory::propagation::{draw_samples, fit_slope_intercept, friis_pg1m, model_rmse, ModelPreset};

fn main() -> beamfactory::Result<()> {
    println!("Friis PG at 1 m, 26 GHz: {:.2} dB", friis_pg1m(26.0e9));
    println!();
    println!(
        "{:<14} {:>8} {:>6} {:>6} | {:>8} {:>6} {:>6}",
        "preset", "PG_1m", "n", "sigma", "fit PG", "fit n", "fit s"
    );
    for (k, preset) in ModelPreset::ALL.into_iter().enumerate() {
        let m = preset.model();
        let samples = draw_samples(&m, preset.distance_range(), 10_000, k as u64);
        let f = fit_slope_intercept(&samples)?;
        println!(
            "{:<14} {:>8.1} {:>6.2} {:>6.1} | {:>8.2} {:>6.3} {:>6.2}",
            preset.name(),
            m.pg_1m,
            m.n,
            m.sigma,
            f.pg_1m,
            f.n,
            f.sigma
        );
    }

    let truth = ModelPreset::MeasFitNlos;
    let samples = draw_samples(&truth.model(), truth.distance_range(), 2_000, 99);
    println!();
    println!("RMSE of each preset against {} samples:", truth.name());
    for preset in ModelPreset::ALL {
        println!(
            "  {:<14} {:6.2} dB",
            preset.name(),
            model_rmse(&preset.model(), &samples)?
        );
    }
    Ok(())
}
