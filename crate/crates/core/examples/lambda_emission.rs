//! A driven lambda system emits at most one photon: once it decays to `g2`
//! the drive no longer reaches it.
//!
//! cargo run --release --example lambda_emission

use fewphoton::emission::{emission_asymptotic, emission_series};
use fewphoton::system::make_lambda;

fn main() -> fewphoton::Result<()> {
    let spec = make_lambda(0.0, 0.0, 5.0, 2.0, 0.0, 1.0)?;
    let (g1, g2, e) = (0, 1, 2);
    let taus: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    println!("{:>6} {:>10} {:>10} {:>10} {:>12}", "tau", "P0g1", "P0e", "P1g2", "P2 (any)");
    for p in emission_series(&spec, g1, &taus, 2)? {
        let two: f64 = (0..3).map(|s| p.get(2, s)).sum();
        println!("{:>6.2} {:>10.6} {:>10.6} {:>10.6} {:>12.2e}", p.tau, p.get(0, g1), p.get(0, e), p.get(1, g2), two);
    }
    let inf = emission_asymptotic(&spec, g1, 2)?;
    println!("\ntau -> infinity: P0g1 + P1g2 = {:.12}", inf.get(0, g1) + inf.get(1, g2));
    Ok(())
}
