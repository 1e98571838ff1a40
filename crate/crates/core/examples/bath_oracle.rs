//! Brute-force check: discretize the waveguide into time bins, evolve the
//! joint state exactly and compare with the Green's-function engine.
//!
//! cargo run --release --example bath_oracle

use fewphoton::bath::{oracle_emission_probabilities, oracle_green, richardson, LatticeBath};
use fewphoton::emission::emission_series;
use fewphoton::evolution::DirectEvolver;
use fewphoton::green::{green, GreenQuery, Insertion, Window};
use fewphoton::system::make_tls;
use num_complex::Complex64;

fn main() -> fewphoton::Result<()> {
    let spec = make_tls(0.2, 3.0, 1.6, &[1.0])?;
    let q = GreenQuery {
        annihilations: vec![Insertion::new(1.2, 0)],
        creations: vec![Insertion::new(0.4, 0)],
        bra: 1,
        ket: 0,
        window: Window::Finite { lower: 0.0, upper: 1.6 },
    };
    let engine = green(&DirectEvolver(&spec), &q)?.amplitude;
    println!("engine:  {engine:.8}");
    for h in [0.08, 0.04, 0.02] {
        let lat = LatticeBath::covering(&spec, h, 0.0, 1.6, 1, 0)?;
        println!("dx = {h}: {:.8}", oracle_green(&lat, &q)?);
    }
    let extrapolated = richardson(0.08, |h| oracle_green(&LatticeBath::covering(&spec, h, 0.0, 1.6, 1, 0)?, &q))?;
    println!("Richardson: {extrapolated:.8}");

    let tau = 1.6;
    let p = emission_series(&spec, 0, &[tau], 2)?.remove(0);
    let p_or = richardson(0.04, |h| {
        let lat = LatticeBath::covering(&spec, h, 0.0, tau, 1, 2)?;
        let m = oracle_emission_probabilities(&lat, 0, tau)?;
        Ok(Complex64::new(m.get(&(1, 0)).copied().unwrap_or(0.0), 0.0))
    })?;
    println!("\nP1g({tau}): engine {:.6}, lattice {:.6}", p.get(1, 0), p_or.re);
    Ok(())
}
