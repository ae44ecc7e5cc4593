//! Per-resource-element power, SSB timing and Doppler at 26 GHz.

use beamfactory::link::{doppler_shift, fr2_max_prb, LinkBudget, SsbTiming};
use beamfactory::wavelength;

fn main() -> beamfactory::Result<()> {
    let budget = LinkBudget::default();
    let timing = SsbTiming::default();
    let lambda = wavelength(budget.carrier_hz);

    println!(
        "carrier          {:.2} GHz, lambda {:.3} mm",
        budget.carrier_hz / 1e9,
        lambda * 1e3
    );
    println!("numerology       n = {}", budget.numerology().unwrap_or(0));
    println!(
        "max PRBs         {} at {} MHz / {} kHz",
        fr2_max_prb(budget.carrier_bandwidth_hz, budget.scs_hz).unwrap_or(0),
        budget.carrier_bandwidth_hz / 1e6,
        budget.scs_hz / 1e3
    );
    println!("resource elems   {}", budget.n_re());
    println!(
        "P/RE             {:.2} dBm from {:.1} dBm",
        budget.tx_power_per_re(),
        budget.p_c_dbm
    );
    println!("SSS bandwidth    {:.2} MHz", budget.sss_bandwidth_hz() / 1e6);
    println!(
        "SSB burst        {} symbols every {:.0} ms",
        timing.symbols_per_burst(),
        timing.burst_periodicity * 1e3
    );
    for v in [0.5, 1.0, 1.5, 2.0] {
        let fd = doppler_shift(v, budget.carrier_hz)?;
        println!(
            "doppler @ {v:.1} m/s  {fd:7.1} Hz ({:.3}% of SCS)",
            100.0 * fd / budget.scs_hz
        );
    }
    println!("1 m cell         {:.1} wavelengths", 1.0 / lambda);
    Ok(())
}
