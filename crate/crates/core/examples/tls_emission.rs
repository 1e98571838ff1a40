//! Photon emission from a two-level system hit by a short and a long pulse.
//!
//! cargo run --release --example tls_emission

use std::f64::consts::PI;

use fewphoton::emission::{emission_asymptotic, emission_series};
use fewphoton::system::make_tls;

fn main() -> fewphoton::Result<()> {
    let t_pulse = 0.2;
    println!("short pulse, T_P = {t_pulse}: probabilities after the system has decayed");
    println!("{:>8} {:>10} {:>10} {:>10}", "area/pi", "P0g", "P1g", "P2g");
    for k in 0..=16 {
        let area = k as f64 * PI / 4.0;
        let spec = make_tls(0.0, area / (2.0 * t_pulse), t_pulse, &[1.0])?;
        let p = emission_asymptotic(&spec, 0, 2)?;
        println!("{:>8.2} {:>10.6} {:>10.6} {:>10.6}", area / PI, p.get(0, 0), p.get(1, 0), p.get(2, 0));
    }

    println!("\nlong pulse, Omega_0 = 5, T_P = 2");
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}", "tau", "P0g", "P1g", "P0e", "P1e", "deficit");
    let spec = make_tls(0.0, 5.0, 2.0, &[1.0])?;
    let taus: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    for p in emission_series(&spec, 0, &taus, 3)? {
        println!(
            "{:>6.2} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.2e}",
            p.tau,
            p.get(0, 0),
            p.get(1, 0),
            p.get(0, 1),
            p.get(1, 1),
            p.closure_deficit()
        );
    }
    Ok(())
}
